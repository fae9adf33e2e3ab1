#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedvs/field.hpp"
#include "fedvs/real_matrix.hpp"
#include "fedvs/rng.hpp"

namespace fedvs {

/// Fixed-point bridge parameters between the real domain and F_p.
struct QuantConfig {
    int l_x = 16;   // data scaling exponent (bits)
    int l_w = 16;   // model scaling exponent (bits)
    Field field;
    int n_clients = 1; // the 1/N averaging factor applied on dequantization

    /// Debug-only bound on decoded plaintext magnitudes; set from the
    /// static overflow check at protocol setup.
    std::optional<std::int64_t> max_decoded_magnitude;
};

/// Half-up rounding: floor(x) when the fraction is below 0.5, floor(x)+1
/// otherwise (so -1.2 -> -1).
std::int64_t round_nearest(double x);

/// Unbiased stochastic rounding: floor(x) with probability 1-(x-floor(x)),
/// floor(x)+1 otherwise.
std::int64_t round_stochastic(double x, Rng& rng);

/// Sign-shift encoding of a signed integer into F_p: z for z >= 0,
/// p+z for z < 0. Requires |z| < (p-1)/2 so the sign survives decoding.
Fp shift_to_field(std::int64_t z, const Field& f);

/// Signed decode of the sign-shift encoding: values in [0, (p-1)/2) are
/// non-negative, the rest map to v - p.
std::int64_t shift_from_field(Fp a, const Field& f);

/// Entrywise shift_to_field(round_nearest(2^l_x * x)).
FieldMatrix quantize_data(const RealMatrix& x, const QuantConfig& cfg);

/// Entrywise shift_to_field(round_stochastic(2^l_w * w)), per layer.
std::vector<FieldMatrix> quantize_model(const std::vector<RealMatrix>& layers,
                                        const QuantConfig& cfg, Rng& rng);

/// Entrywise (1/N) * 2^-(l_x+l_w) * signed decode.
RealMatrix dequantize_embedding(const FieldMatrix& h_bar, const QuantConfig& cfg);

/// Static worst-case bound on the decoded embedding-sum magnitude:
/// sum over clients and layers of width * (2^l_x * x_max^i + 1) *
/// (2^l_w * w_max + 1), which must stay below (p-1)/2. Throws
/// OverflowBoundViolation otherwise and returns the bound when it holds.
/// `client_dims` carries (augmented input width, degree) per client.
std::int64_t check_overflow_bound(const QuantConfig& cfg,
                                  const std::vector<std::pair<std::size_t, int>>& client_dims,
                                  double x_max, double w_max);

} // namespace fedvs
