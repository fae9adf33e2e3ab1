#pragma once

#include <ostream>
#include <string>

#include "fedvs/config.hpp"
#include "fedvs/dataset.hpp"
#include "fedvs/protocol.hpp"

namespace fedvs {

/// Build the dataset named by the config (synthetic or CSV).
PartitionedDataset load_dataset(const ExperimentConfig& cfg);

/// Construct clients, server, and simulator from a config and dataset,
/// run the static overflow check, and execute the data-preparation phase.
/// Everything downstream is a pure function of (config, seed).
Deployment setup_deployment(const ExperimentConfig& cfg, const PartitionedDataset& data);

/// Train once, streaming JSONL metrics (header, rounds, summary).
TrainSummary run_single(const ExperimentConfig& cfg, std::ostream& metrics_out);

/// CLI entry: run one experiment (or a seed sweep in worker threads,
/// writing <out>.seed<k> per seed). Returns a process exit code and
/// prints a structured error line to stderr on failure.
int run_experiment(const ExperimentConfig& cfg, const std::string& out_path, int sweep_seeds = 1);

/// Stable name for an error type, used in structured error output.
std::string error_kind(const std::exception& e);

} // namespace fedvs
