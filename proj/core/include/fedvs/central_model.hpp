#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedvs/real_matrix.hpp"
#include "fedvs/rng.hpp"

namespace fedvs {

enum class LossKind { CrossEntropy, Mse };

/// Server-side head: hidden Linear+ReLU layers followed by a linear
/// output. Cross-entropy over softmax for classification, mean squared
/// error otherwise. Rows with valid[r] == 0 are excluded from the loss
/// and receive zero input gradient.
struct CentralModel {
    struct Layer {
        RealMatrix w; // in x out
        std::vector<double> b;
    };

    std::vector<Layer> layers; // hidden..., output
    LossKind loss_kind = LossKind::CrossEntropy;

    std::size_t input_width() const { return layers.front().w.rows(); }
    std::size_t output_width() const { return layers.back().w.cols(); }

    static CentralModel init_random(std::size_t input_width, const std::vector<std::size_t>& hidden,
                                    std::size_t output_width, LossKind kind, Rng& rng);

    RealMatrix forward(const RealMatrix& h) const;

    struct Grads {
        double loss = 0.0;
        RealMatrix grad_input;
        std::vector<RealMatrix> grad_w;
        std::vector<std::vector<double>> grad_b;
    };

    /// Loss and all gradients; does not mutate the model.
    Grads backward(const RealMatrix& h, std::span<const double> labels,
                   std::span<const std::uint8_t> valid) const;

    double loss_only(const RealMatrix& h, std::span<const double> labels,
                     std::span<const std::uint8_t> valid) const;

    void apply(const Grads& g, double eta);
};

} // namespace fedvs
