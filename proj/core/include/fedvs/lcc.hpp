#pragma once

#include <vector>

#include "fedvs/field.hpp"
#include "fedvs/rng.hpp"

namespace fedvs {

/// Lagrange coded computing parameters. N evaluation points and K+T
/// interpolation nodes; decoding the degree-2(K+T-1) product polynomial
/// needs 2(K+T-1)+1 responses, so N below that can never decode and is
/// rejected at construction.
struct LccConfig {
    int K;
    int T;
    int N;
    EvalPoints points;

    LccConfig(const Field& f, int K_, int T_, int N_);
    LccConfig(const Field& f, int K_, int T_, int N_, EvalPoints pts);

    int recovery_threshold() const { return 2 * (K + T - 1) + 1; }
    int straggler_tolerance() const { return N - recovery_threshold(); }
};

/// Evaluate the Lagrange polynomial through (betas[k], values[k]) at each
/// target point, entrywise over matrices. The deterministic core of both
/// encoders; exposed so tests can evaluate at arbitrary points.
std::vector<FieldMatrix> lcc_eval(const Field& f, std::span<const Fp> betas,
                                  const std::vector<FieldMatrix>& values,
                                  std::span<const Fp> targets);

/// Shares of K data segments with explicit masks (deterministic).
std::vector<FieldMatrix> encode_with_masks(const Field& f, const LccConfig& cfg,
                                           const std::vector<FieldMatrix>& segments,
                                           const std::vector<FieldMatrix>& masks);

/// Shares of K data segments; samples the T uniform masks from rng.
/// share[n] is the polynomial of Eq-style data encoding evaluated at
/// alpha_n, so interpolating any K+T shares back to beta_k recovers
/// segment k exactly.
std::vector<FieldMatrix> encode_data(const Field& f, const LccConfig& cfg,
                                     const std::vector<FieldMatrix>& segments, Rng& rng);

/// Model sharing: the secret is replicated at ALL K data nodes (the
/// interpolant through K copies), plus T uniform masks.
std::vector<FieldMatrix> encode_model(const Field& f, const LccConfig& cfg,
                                      const FieldMatrix& secret, Rng& rng);

/// Decode the K segment sums of the composite polynomial from responder
/// evaluations. Uses exactly the first recovery_threshold() responders in
/// the given (arrival) order; extras are ignored. Responses must be
/// evaluations of a polynomial of degree <= 2(K+T-1).
std::vector<FieldMatrix> decode_sum(const Field& f, const LccConfig& cfg,
                                    std::span<const Fp> responder_alphas,
                                    const std::vector<FieldMatrix>& responses);

} // namespace fedvs
