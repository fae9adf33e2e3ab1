#include "fedvs/central_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedvs/errors.hpp"

namespace fedvs {

namespace {

RealMatrix relu(const RealMatrix& x) {
    RealMatrix out(x.rows(), x.cols());
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = xv[i] > 0.0 ? xv[i] : 0.0;
    return out;
}

} // namespace

CentralModel CentralModel::init_random(std::size_t input_width,
                                       const std::vector<std::size_t>& hidden,
                                       std::size_t output_width, LossKind kind, Rng& rng) {
    CentralModel m;
    m.loss_kind = kind;
    std::size_t in = input_width;
    auto make_layer = [&](std::size_t out) {
        Layer l;
        l.w = RealMatrix(in, out);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (double& e : l.w.data()) e = rng.uniform(-bound, bound);
        l.b.assign(out, 0.0);
        m.layers.push_back(std::move(l));
        in = out;
    };
    for (std::size_t w : hidden) make_layer(w);
    make_layer(output_width);
    return m;
}

RealMatrix CentralModel::forward(const RealMatrix& h) const {
    RealMatrix a = h;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        RealMatrix z = rm_mul(a, layers[li].w);
        for (std::size_t r = 0; r < z.rows(); ++r) {
            for (std::size_t c = 0; c < z.cols(); ++c) z.at(r, c) += layers[li].b[c];
        }
        a = li + 1 < layers.size() ? relu(z) : std::move(z);
    }
    return a;
}

CentralModel::Grads CentralModel::backward(const RealMatrix& h, std::span<const double> labels,
                                           std::span<const std::uint8_t> valid) const {
    if (labels.size() != h.rows() || valid.size() != h.rows()) {
        throw LabelMismatch("central model: label/mask count " + std::to_string(labels.size()) +
                            " differs from embedding rows " + std::to_string(h.rows()));
    }
    if (h.cols() != input_width()) {
        throw ShapeMismatch("central model: embedding width differs from input width");
    }

    // Forward, keeping activations for the backward pass.
    std::vector<RealMatrix> acts; // acts[0] = input, acts[i] = output of layer i-1
    acts.push_back(h);
    std::vector<RealMatrix> preacts;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        RealMatrix z = rm_mul(acts.back(), layers[li].w);
        for (std::size_t r = 0; r < z.rows(); ++r) {
            for (std::size_t c = 0; c < z.cols(); ++c) z.at(r, c) += layers[li].b[c];
        }
        preacts.push_back(z);
        acts.push_back(li + 1 < layers.size() ? relu(z) : z);
    }
    const RealMatrix& out = acts.back();

    std::size_t n_valid = 0;
    for (std::uint8_t v : valid) n_valid += v ? 1 : 0;
    if (n_valid == 0) throw LabelMismatch("central model: no valid rows in batch");
    const double inv_n = 1.0 / static_cast<double>(n_valid);

    Grads g;
    RealMatrix dout(out.rows(), out.cols());
    if (loss_kind == LossKind::CrossEntropy) {
        for (std::size_t r = 0; r < out.rows(); ++r) {
            if (!valid[r]) continue;
            auto label = static_cast<std::size_t>(labels[r]);
            if (label >= out.cols()) {
                throw LabelMismatch("central model: class label out of range");
            }
            double mx = out.at(r, 0);
            for (std::size_t c = 1; c < out.cols(); ++c) mx = std::max(mx, out.at(r, c));
            double lse = 0.0;
            for (std::size_t c = 0; c < out.cols(); ++c) lse += std::exp(out.at(r, c) - mx);
            lse = mx + std::log(lse);
            g.loss += (lse - out.at(r, label)) * inv_n;
            for (std::size_t c = 0; c < out.cols(); ++c) {
                double p = std::exp(out.at(r, c) - lse);
                dout.at(r, c) = (p - (c == label ? 1.0 : 0.0)) * inv_n;
            }
        }
    } else {
        for (std::size_t r = 0; r < out.rows(); ++r) {
            if (!valid[r]) continue;
            for (std::size_t c = 0; c < out.cols(); ++c) {
                double diff = out.at(r, c) - labels[r];
                g.loss += diff * diff * inv_n;
                dout.at(r, c) = 2.0 * diff * inv_n;
            }
        }
    }

    // Backward through the stack.
    RealMatrix delta = std::move(dout);
    g.grad_w.resize(layers.size());
    g.grad_b.resize(layers.size());
    for (std::size_t li = layers.size(); li-- > 0;) {
        if (li + 1 < layers.size()) {
            // Through the ReLU that followed layer li.
            const RealMatrix& z = preacts[li];
            for (std::size_t r = 0; r < delta.rows(); ++r) {
                for (std::size_t c = 0; c < delta.cols(); ++c) {
                    if (z.at(r, c) <= 0.0) delta.at(r, c) = 0.0;
                }
            }
        }
        g.grad_w[li] = rm_transpose_mul(acts[li], delta);
        g.grad_b[li].assign(delta.cols(), 0.0);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            for (std::size_t c = 0; c < delta.cols(); ++c) g.grad_b[li][c] += delta.at(r, c);
        }
        if (li > 0) {
            RealMatrix prev(delta.rows(), layers[li].w.rows());
            for (std::size_t r = 0; r < delta.rows(); ++r) {
                for (std::size_t k = 0; k < layers[li].w.rows(); ++k) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < delta.cols(); ++c) {
                        s += delta.at(r, c) * layers[li].w.at(k, c);
                    }
                    prev.at(r, k) = s;
                }
            }
            delta = std::move(prev);
        } else {
            g.grad_input = RealMatrix(delta.rows(), layers[0].w.rows());
            for (std::size_t r = 0; r < delta.rows(); ++r) {
                for (std::size_t k = 0; k < layers[0].w.rows(); ++k) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < delta.cols(); ++c) {
                        s += delta.at(r, c) * layers[0].w.at(k, c);
                    }
                    g.grad_input.at(r, k) = s;
                }
            }
        }
    }
    return g;
}

double CentralModel::loss_only(const RealMatrix& h, std::span<const double> labels,
                               std::span<const std::uint8_t> valid) const {
    if (labels.size() != h.rows() || valid.size() != h.rows()) {
        throw LabelMismatch("central model: label/mask count differs from embedding rows");
    }
    RealMatrix out = forward(h);
    std::size_t n_valid = 0;
    for (std::uint8_t v : valid) n_valid += v ? 1 : 0;
    if (n_valid == 0) throw LabelMismatch("central model: no valid rows in batch");
    const double inv_n = 1.0 / static_cast<double>(n_valid);
    double loss = 0.0;
    if (loss_kind == LossKind::CrossEntropy) {
        for (std::size_t r = 0; r < out.rows(); ++r) {
            if (!valid[r]) continue;
            auto label = static_cast<std::size_t>(labels[r]);
            double mx = out.at(r, 0);
            for (std::size_t c = 1; c < out.cols(); ++c) mx = std::max(mx, out.at(r, c));
            double lse = 0.0;
            for (std::size_t c = 0; c < out.cols(); ++c) lse += std::exp(out.at(r, c) - mx);
            lse = mx + std::log(lse);
            loss += (lse - out.at(r, label)) * inv_n;
        }
    } else {
        for (std::size_t r = 0; r < out.rows(); ++r) {
            if (!valid[r]) continue;
            for (std::size_t c = 0; c < out.cols(); ++c) {
                double diff = out.at(r, c) - labels[r];
                loss += diff * diff * inv_n;
            }
        }
    }
    return loss;
}

void CentralModel::apply(const Grads& g, double eta) {
    for (std::size_t li = 0; li < layers.size(); ++li) {
        rm_axpy(layers[li].w, -eta, g.grad_w[li]);
        for (std::size_t c = 0; c < layers[li].b.size(); ++c) {
            layers[li].b[c] -= eta * g.grad_b[li][c];
        }
    }
}

} // namespace fedvs
