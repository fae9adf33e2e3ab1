#include "fedvs/quant.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace fedvs {

std::int64_t round_nearest(double x) {
    if (!std::isfinite(x)) throw NonFiniteInput("round_nearest: non-finite input");
    double fl = std::floor(x);
    double frac = x - fl;
    auto base = static_cast<std::int64_t>(fl);
    return frac < 0.5 ? base : base + 1;
}

std::int64_t round_stochastic(double x, Rng& rng) {
    if (!std::isfinite(x)) throw NonFiniteInput("round_stochastic: non-finite input");
    double fl = std::floor(x);
    double frac = x - fl;
    auto base = static_cast<std::int64_t>(fl);
    return rng.unit() < frac ? base + 1 : base;
}

Fp shift_to_field(std::int64_t z, const Field& f) {
    u64 mag = z >= 0 ? static_cast<u64>(z) : static_cast<u64>(-(z + 1)) + 1;
    if (mag >= (f.modulus() - 1) / 2) {
        throw OverflowRange("shift_to_field: |" + std::to_string(z) + "| >= (p-1)/2");
    }
    return z >= 0 ? Fp{mag} : Fp{f.modulus() - mag};
}

std::int64_t shift_from_field(Fp a, const Field& f) {
    return f.to_centered(a);
}

FieldMatrix quantize_data(const RealMatrix& x, const QuantConfig& cfg) {
    const double scale = std::ldexp(1.0, cfg.l_x);
    FieldMatrix out(x.rows(), x.cols());
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        ov[i] = shift_to_field(round_nearest(scale * xv[i]), cfg.field);
    }
    return out;
}

std::vector<FieldMatrix> quantize_model(const std::vector<RealMatrix>& layers,
                                        const QuantConfig& cfg, Rng& rng) {
    const double scale = std::ldexp(1.0, cfg.l_w);
    std::vector<FieldMatrix> out;
    out.reserve(layers.size());
    for (const RealMatrix& w : layers) {
        FieldMatrix q(w.rows(), w.cols());
        auto wv = w.data();
        auto qv = q.data();
        for (std::size_t i = 0; i < wv.size(); ++i) {
            qv[i] = shift_to_field(round_stochastic(scale * wv[i], rng), cfg.field);
        }
        out.push_back(std::move(q));
    }
    return out;
}

RealMatrix dequantize_embedding(const FieldMatrix& h_bar, const QuantConfig& cfg) {
    const double factor = std::ldexp(1.0, -(cfg.l_x + cfg.l_w)) / cfg.n_clients;
    RealMatrix out(h_bar.rows(), h_bar.cols());
    auto hv = h_bar.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < hv.size(); ++i) {
        std::int64_t z = cfg.field.to_centered(hv[i]);
#ifndef NDEBUG
        if (cfg.max_decoded_magnitude) {
            assert(std::abs(z) <= *cfg.max_decoded_magnitude &&
                   "decoded embedding magnitude exceeds the declared overflow bound");
        }
#endif
        ov[i] = factor * static_cast<double>(z);
    }
    return out;
}

std::int64_t check_overflow_bound(const QuantConfig& cfg,
                                  const std::vector<std::pair<std::size_t, int>>& client_dims,
                                  double x_max, double w_max) {
    const double sx = std::ldexp(1.0, cfg.l_x);
    const double sw = std::ldexp(1.0, cfg.l_w);
    double bound = 0.0;
    for (const auto& [width, degree] : client_dims) {
        for (int i = 1; i <= degree; ++i) {
            // +1 absorbs the worst-case rounding of either operand.
            bound += static_cast<double>(width) * (sx * std::pow(x_max, i) + 1.0) * (sw * w_max + 1.0);
        }
    }
    const double limit = static_cast<double>((cfg.field.modulus() - 1) / 2);
    if (!(bound < limit)) {
        throw OverflowBoundViolation(
            "quantization overflow: worst-case embedding sum " + std::to_string(bound) +
            " exceeds (p-1)/2 = " + std::to_string(limit) +
            "; lower l_x/l_w or the declared ranges");
    }
    return static_cast<std::int64_t>(bound);
}

} // namespace fedvs
