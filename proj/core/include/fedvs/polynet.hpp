#pragma once

#include <vector>

#include "fedvs/field.hpp"
#include "fedvs/real_matrix.hpp"
#include "fedvs/rng.hpp"

namespace fedvs {

/// Polynomial-network weights W^1..W^D, each input_width x embed_width.
/// Bias vectors are absorbed: the input carries a constant-1 column, so
/// input_width is the raw feature count plus one.
struct PolyNetModel {
    std::vector<RealMatrix> layers;

    int degree() const { return static_cast<int>(layers.size()); }
    std::size_t input_width() const { return layers.empty() ? 0 : layers.front().rows(); }
    std::size_t embed_width() const { return layers.empty() ? 0 : layers.front().cols(); }

    /// Uniform init in [-1/sqrt(width*D), +1/sqrt(width*D)] per layer.
    static PolyNetModel init_random(std::size_t input_width, std::size_t embed_width, int degree,
                                    Rng& rng);
};

/// Entrywise powers X^1..X^D of the bias-augmented input. The constant-1
/// column is appended BEFORE exponentiation, so it stays 1 at every power
/// and the absorbed bias is present in each layer.
struct PreprocessedData {
    std::vector<RealMatrix> powers;

    int degree() const { return static_cast<int>(powers.size()); }
    std::size_t rows() const { return powers.empty() ? 0 : powers.front().rows(); }
    std::size_t width() const { return powers.empty() ? 0 : powers.front().cols(); }
};

PreprocessedData preprocess_powers(const RealMatrix& x, int degree);

/// H = sum_i X^i W^i.
RealMatrix pn_forward(const PreprocessedData& data, const PolyNetModel& model);
RealMatrix pn_forward_rows(const PreprocessedData& data, const PolyNetModel& model,
                           std::span<const std::size_t> rows);

/// Per-layer gradients (X^i)^T * grad_H.
std::vector<RealMatrix> pn_backward(const PreprocessedData& data, const RealMatrix& grad_h);
std::vector<RealMatrix> pn_backward_rows(const PreprocessedData& data, const RealMatrix& grad_h,
                                         std::span<const std::size_t> rows);

/// One holder's coded data: shares[source][power], each (M/K) x width_n.
struct DataShareSet {
    std::vector<std::vector<FieldMatrix>> by_source;
};

/// One holder's coded models for the round: shares[source][layer].
struct ModelShareSet {
    std::vector<std::vector<FieldMatrix>> by_source;
};

using CodedEmbedding = FieldMatrix;

/// The holder's upload: sum over all sources and layers of
/// X_share^i[batch rows] * W_share^i, evaluated in F_p. Equals the
/// composite product polynomial at this holder's alpha.
CodedEmbedding homomorphic_eval(const Field& f, const DataShareSet& data_shares,
                                const ModelShareSet& model_shares,
                                std::span<const std::size_t> batch_rows);

} // namespace fedvs
