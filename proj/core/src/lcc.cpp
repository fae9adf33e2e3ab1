#include "fedvs/lcc.hpp"

#include <string>

namespace fedvs {

LccConfig::LccConfig(const Field& f, int K_, int T_, int N_)
    : LccConfig(f, K_, T_, N_,
                EvalPoints::make_default(f, static_cast<std::size_t>(K_ + T_),
                                         static_cast<std::size_t>(N_))) {}

LccConfig::LccConfig(const Field& f, int K_, int T_, int N_, EvalPoints pts)
    : K(K_), T(T_), N(N_), points(std::move(pts)) {
    if (K < 1) throw ValidationError("lcc: K must be >= 1");
    if (T < 0) throw ValidationError("lcc: T must be >= 0");
    if (N < recovery_threshold()) {
        throw ValidationError("lcc: recovery threshold " + std::to_string(recovery_threshold()) +
                              " > N = " + std::to_string(N) + "; no responder set can decode");
    }
    if (points.betas.size() != static_cast<std::size_t>(K + T) ||
        points.alphas.size() != static_cast<std::size_t>(N)) {
        throw ValidationError("lcc: eval point counts must be K+T betas and N alphas");
    }
    points.validate(f);
}

std::vector<FieldMatrix> lcc_eval(const Field& f, std::span<const Fp> betas,
                                  const std::vector<FieldMatrix>& values,
                                  std::span<const Fp> targets) {
    if (values.size() != betas.size() || values.empty()) {
        throw ShapeMismatch("lcc_eval: one value per beta required");
    }
    for (const FieldMatrix& v : values) {
        if (!v.same_shape(values.front())) throw ShapeMismatch("lcc_eval: value shapes differ");
    }
    std::vector<FieldMatrix> out;
    out.reserve(targets.size());
    for (const Fp& x : targets) {
        std::vector<Fp> coeffs = lagrange_coeffs(f, betas, x);
        FieldMatrix share(values.front().rows(), values.front().cols());
        for (std::size_t k = 0; k < values.size(); ++k) {
            fm_scaled_add(f, share, coeffs[k], values[k]);
        }
        out.push_back(std::move(share));
    }
    return out;
}

std::vector<FieldMatrix> encode_with_masks(const Field& f, const LccConfig& cfg,
                                           const std::vector<FieldMatrix>& segments,
                                           const std::vector<FieldMatrix>& masks) {
    if (segments.size() != static_cast<std::size_t>(cfg.K)) {
        throw ShapeMismatch("encode: expected K segments");
    }
    if (masks.size() != static_cast<std::size_t>(cfg.T)) {
        throw ShapeMismatch("encode: expected T masks");
    }
    std::vector<FieldMatrix> values = segments;
    values.insert(values.end(), masks.begin(), masks.end());
    return lcc_eval(f, cfg.points.betas, values, cfg.points.alphas);
}

std::vector<FieldMatrix> encode_data(const Field& f, const LccConfig& cfg,
                                     const std::vector<FieldMatrix>& segments, Rng& rng) {
    if (segments.empty()) throw ShapeMismatch("encode_data: no segments");
    std::vector<FieldMatrix> masks;
    masks.reserve(cfg.T);
    for (int t = 0; t < cfg.T; ++t) {
        masks.push_back(fm_uniform(f, segments.front().rows(), segments.front().cols(), rng));
    }
    return encode_with_masks(f, cfg, segments, masks);
}

std::vector<FieldMatrix> encode_model(const Field& f, const LccConfig& cfg,
                                      const FieldMatrix& secret, Rng& rng) {
    std::vector<FieldMatrix> segments(static_cast<std::size_t>(cfg.K), secret);
    std::vector<FieldMatrix> masks;
    masks.reserve(cfg.T);
    for (int t = 0; t < cfg.T; ++t) {
        masks.push_back(fm_uniform(f, secret.rows(), secret.cols(), rng));
    }
    return encode_with_masks(f, cfg, segments, masks);
}

std::vector<FieldMatrix> decode_sum(const Field& f, const LccConfig& cfg,
                                    std::span<const Fp> responder_alphas,
                                    const std::vector<FieldMatrix>& responses) {
    const auto threshold = static_cast<std::size_t>(cfg.recovery_threshold());
    if (responder_alphas.size() != responses.size()) {
        throw ShapeMismatch("decode_sum: one response per responder required");
    }
    if (responses.size() < threshold) {
        throw InsufficientResponders("decode_sum: " + std::to_string(responses.size()) +
                                     " responders < threshold " + std::to_string(threshold));
    }
    std::span<const Fp> xs = responder_alphas.first(threshold);
    std::vector<FieldMatrix> ys(responses.begin(),
                                responses.begin() + static_cast<std::ptrdiff_t>(threshold));
    std::vector<FieldMatrix> segments;
    segments.reserve(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        segments.push_back(interpolate_eval(f, xs, ys, cfg.points.betas[static_cast<std::size_t>(k)]));
    }
    return segments;
}

} // namespace fedvs
