#include "fedvs/polynet.hpp"

#include <cmath>
#include <string>

namespace fedvs {

PolyNetModel PolyNetModel::init_random(std::size_t input_width, std::size_t embed_width,
                                       int degree, Rng& rng) {
    if (degree < 1) throw ValidationError("polynet: degree must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_width) * degree);
    PolyNetModel m;
    m.layers.reserve(static_cast<std::size_t>(degree));
    for (int i = 0; i < degree; ++i) {
        RealMatrix w(input_width, embed_width);
        for (double& e : w.data()) e = rng.uniform(-bound, bound);
        m.layers.push_back(std::move(w));
    }
    return m;
}

PreprocessedData preprocess_powers(const RealMatrix& x, int degree) {
    if (degree < 1) throw ValidationError("preprocess_powers: degree must be >= 1");
    RealMatrix aug(x.rows(), x.cols() + 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            double v = x.at(r, c);
            if (!std::isfinite(v)) throw NonFiniteInput("preprocess_powers: non-finite entry");
            aug.at(r, c) = v;
        }
        aug.at(r, x.cols()) = 1.0;
    }
    PreprocessedData out;
    out.powers.reserve(static_cast<std::size_t>(degree));
    out.powers.push_back(aug);
    for (int i = 1; i < degree; ++i) {
        RealMatrix next(aug.rows(), aug.cols());
        const RealMatrix& prev = out.powers.back();
        auto pv = prev.data();
        auto av = aug.data();
        auto nv = next.data();
        for (std::size_t j = 0; j < nv.size(); ++j) nv[j] = pv[j] * av[j];
        out.powers.push_back(std::move(next));
    }
    return out;
}

RealMatrix pn_forward(const PreprocessedData& data, const PolyNetModel& model) {
    if (data.degree() != model.degree() || data.width() != model.input_width()) {
        throw ShapeMismatch("pn_forward: data/model shapes incompatible");
    }
    RealMatrix h(data.rows(), model.embed_width());
    for (int i = 0; i < model.degree(); ++i) {
        rm_axpy(h, 1.0, rm_mul(data.powers[static_cast<std::size_t>(i)],
                               model.layers[static_cast<std::size_t>(i)]));
    }
    return h;
}

RealMatrix pn_forward_rows(const PreprocessedData& data, const PolyNetModel& model,
                           std::span<const std::size_t> rows) {
    if (data.degree() != model.degree() || data.width() != model.input_width()) {
        throw ShapeMismatch("pn_forward_rows: data/model shapes incompatible");
    }
    RealMatrix h(rows.size(), model.embed_width());
    for (int i = 0; i < model.degree(); ++i) {
        rm_axpy(h, 1.0, rm_mul(rm_rows(data.powers[static_cast<std::size_t>(i)], rows),
                               model.layers[static_cast<std::size_t>(i)]));
    }
    return h;
}

std::vector<RealMatrix> pn_backward(const PreprocessedData& data, const RealMatrix& grad_h) {
    if (grad_h.rows() != data.rows()) {
        throw ShapeMismatch("pn_backward: gradient row count differs from data");
    }
    std::vector<RealMatrix> grads;
    grads.reserve(data.powers.size());
    for (const RealMatrix& p : data.powers) grads.push_back(rm_transpose_mul(p, grad_h));
    return grads;
}

std::vector<RealMatrix> pn_backward_rows(const PreprocessedData& data, const RealMatrix& grad_h,
                                         std::span<const std::size_t> rows) {
    if (grad_h.rows() != rows.size()) {
        throw ShapeMismatch("pn_backward_rows: gradient row count differs from batch");
    }
    std::vector<RealMatrix> grads;
    grads.reserve(data.powers.size());
    for (const RealMatrix& p : data.powers) {
        grads.push_back(rm_transpose_mul(rm_rows(p, rows), grad_h));
    }
    return grads;
}

CodedEmbedding homomorphic_eval(const Field& f, const DataShareSet& data_shares,
                                const ModelShareSet& model_shares,
                                std::span<const std::size_t> batch_rows) {
    const std::size_t n_sources = data_shares.by_source.size();
    if (n_sources == 0 || model_shares.by_source.size() != n_sources) {
        throw MissingShare("homomorphic_eval: data/model share sources differ");
    }
    CodedEmbedding h;
    bool first = true;
    for (std::size_t n = 0; n < n_sources; ++n) {
        const auto& xs = data_shares.by_source[n];
        const auto& ws = model_shares.by_source[n];
        if (xs.empty() || xs.size() != ws.size()) {
            throw MissingShare("homomorphic_eval: missing share from source " + std::to_string(n));
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            FieldMatrix prod = fm_mul(f, fm_rows(xs[i], batch_rows), ws[i]);
            if (first) {
                h = std::move(prod);
                first = false;
            } else {
                if (!h.same_shape(prod)) {
                    throw ShapeMismatch("homomorphic_eval: embedding widths differ across sources");
                }
                h = fm_add(f, h, prod);
            }
        }
    }
    return h;
}

} // namespace fedvs
