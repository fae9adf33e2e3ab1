#pragma once

#include <string>
#include <vector>

#include "fedvs/real_matrix.hpp"
#include "fedvs/rng.hpp"

namespace fedvs {

/// Per-client vertical feature blocks plus server-held labels. Features
/// are normalized to [-1, 1] per feature using train-split statistics;
/// the split and partition are deterministic in the seed.
struct PartitionedDataset {
    std::vector<RealMatrix> train_features; // [client] rows x d_n
    std::vector<RealMatrix> test_features;  // [client] rows x d_n
    std::vector<double> train_labels;
    std::vector<double> test_labels;
    int num_classes = 0; // 0 for regression
    std::vector<std::size_t> partition_sizes;

    std::size_t train_rows() const { return train_labels.size(); }
    std::size_t test_rows() const { return test_labels.size(); }
};

/// Contiguous blocks, sizes d/N rounded with the remainder spread
/// left-to-right (24 features over 11 clients -> 3,3,2,2,...).
std::vector<std::size_t> partition_features(std::size_t d, int n_clients);

struct CsvSpec {
    std::string path;
    std::string label_column;
    int n_clients = 1;
    double train_fraction = 0.7;
    bool classification = true;
    std::uint64_t seed = 1;
};

/// Load a headered numeric CSV, split train/test by seed, min-max
/// normalize per feature on the train split, partition vertically.
PartitionedDataset ingest_csv(const CsvSpec& spec);

struct SyntheticSpec {
    int samples = 1024;
    int features = 20;
    int classes = 2;
    double margin = 0.3;
    bool balanced = true;
    int n_clients = 1;
    double train_fraction = 0.7;
};

/// Linearly separable multiclass data in [-1,1]^d: labels are the argmax
/// of fixed random linear scores, with a rejection margin between the top
/// two scores. Reproducible in the seed.
PartitionedDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace fedvs
