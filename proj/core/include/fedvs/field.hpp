#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedvs/errors.hpp"
#include "fedvs/rng.hpp"

namespace fedvs {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Canonical prime-field element: the invariant v < p is maintained by
/// every Field operation.
struct Fp {
    u64 v = 0;
    bool operator==(const Fp&) const = default;
};

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime_u64(u64 n);

/// Arithmetic context for F_p. The modulus is checked for primality at
/// construction and must stay below 2^63 so that products fit in 128-bit
/// intermediates. p = 2^61 - 1 (the default) takes a branch-free
/// Mersenne reduction; any other prime reduces with a 128-bit modulo.
class Field {
public:
    static constexpr u64 kMersenne61 = (1ULL << 61) - 1;

    explicit Field(u64 p);
    Field() : Field(kMersenne61) {}

    u64 modulus() const { return p_; }

    Fp zero() const { return Fp{0}; }
    Fp one() const { return Fp{1 % p_}; }

    Fp from_uint(u64 x) const;
    Fp from_int(std::int64_t x) const;

    /// Signed representative in (-p/2, p/2]: values below (p-1)/2 map to
    /// themselves, the rest to v - p.
    std::int64_t to_centered(Fp a) const {
        return a.v < half_ ? static_cast<std::int64_t>(a.v)
                           : static_cast<std::int64_t>(a.v) - static_cast<std::int64_t>(p_);
    }

    Fp add(Fp a, Fp b) const {
        u64 t = p_ - b.v;
        return Fp{a.v >= t ? a.v - t : a.v + b.v};
    }
    Fp sub(Fp a, Fp b) const {
        return Fp{a.v >= b.v ? a.v - b.v : a.v + (p_ - b.v)};
    }
    Fp neg(Fp a) const { return Fp{a.v == 0 ? 0 : p_ - a.v}; }
    Fp mul(Fp a, Fp b) const {
        return Fp{reduce(static_cast<u128>(a.v) * b.v)};
    }

    Fp pow(Fp base, u64 e) const;

    /// Multiplicative inverse via Fermat; throws ZeroInverse on 0.
    Fp inv(Fp a) const;

    /// Uniform element, exact by rejection sampling.
    Fp uniform(Rng& rng) const;

private:
    u64 reduce(u128 x) const;

    u64 p_;
    u64 half_; // (p-1)/2
    bool mersenne61_;
};

/// Row-major matrix of canonical field elements.
class FieldMatrix {
public:
    FieldMatrix() = default;
    FieldMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Fp& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Fp& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<Fp> data() { return data_; }
    std::span<const Fp> data() const { return data_; }

    bool same_shape(const FieldMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }
    bool operator==(const FieldMatrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Fp> data_;
};

FieldMatrix fm_add(const Field& f, const FieldMatrix& a, const FieldMatrix& b);
FieldMatrix fm_mul(const Field& f, const FieldMatrix& a, const FieldMatrix& b);
/// acc += c * m, entrywise.
void fm_scaled_add(const Field& f, FieldMatrix& acc, Fp c, const FieldMatrix& m);
/// Copy of the listed rows, in order.
FieldMatrix fm_rows(const FieldMatrix& m, std::span<const std::size_t> rows);
FieldMatrix fm_uniform(const Field& f, std::size_t rows, std::size_t cols, Rng& rng);

/// Interpolation nodes (betas) and share-evaluation points (alphas):
/// pairwise distinct within and across the two lists.
struct EvalPoints {
    std::vector<Fp> betas;
    std::vector<Fp> alphas;

    /// beta_k = k for k in [1, n_betas]; alpha_j = n_betas + j.
    static EvalPoints make_default(const Field& f, std::size_t n_betas, std::size_t n_alphas);

    void validate(const Field& f) const;
};

/// Coefficients c_k = prod_{l != k} (x - p_l) / (p_k - p_l); the weighted
/// sum of sample values gives the unique interpolant evaluated at x.
std::vector<Fp> lagrange_coeffs(const Field& f, std::span<const Fp> points, Fp x);

/// Entrywise polynomial interpolation through (sample_xs, sample_ys),
/// evaluated at target_x. Coefficients are computed once and shared
/// across all entries.
FieldMatrix interpolate_eval(const Field& f, std::span<const Fp> sample_xs,
                             const std::vector<FieldMatrix>& sample_ys, Fp target_x);

} // namespace fedvs
