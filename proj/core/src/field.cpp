#include "fedvs/field.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace fedvs {

namespace {

u64 mulmod_u64(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod_u64(u64 base, u64 e, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        e >>= 1;
    }
    return r;
}

} // namespace

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n == q) return true;
        if (n % q == 0) return false;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // This witness set decides primality for every n < 2^64.
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

Field::Field(u64 p) : p_(p), half_((p - 1) / 2), mersenne61_(p == kMersenne61) {
    if (p >= (1ULL << 63)) {
        throw ValidationError("field modulus must be < 2^63, got " + std::to_string(p));
    }
    if (!is_prime_u64(p)) {
        throw ValidationError("field modulus must be prime, got " + std::to_string(p));
    }
}

u64 Field::reduce(u128 x) const {
    if (mersenne61_) {
        u64 lo = static_cast<u64>(x) & kMersenne61;
        u64 hi = static_cast<u64>(x >> 61);
        u64 r = lo + (hi & kMersenne61) + static_cast<u64>(x >> 122);
        r = (r & kMersenne61) + (r >> 61);
        if (r >= kMersenne61) r -= kMersenne61;
        return r;
    }
    return static_cast<u64>(x % p_);
}

Fp Field::from_uint(u64 x) const { return Fp{reduce(x)}; }

Fp Field::from_int(std::int64_t x) const {
    if (x >= 0) return from_uint(static_cast<u64>(x));
    u64 mag = reduce(static_cast<u128>(-(x + 1)) + 1);
    return Fp{mag == 0 ? 0 : p_ - mag};
}

Fp Field::pow(Fp base, u64 e) const {
    Fp r = one();
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

Fp Field::inv(Fp a) const {
    if (a.v == 0) throw ZeroInverse("inverse of zero in F_p");
    return pow(a, p_ - 2);
}

Fp Field::uniform(Rng& rng) const {
    return Fp{rng.below(p_)};
}

FieldMatrix fm_add(const Field& f, const FieldMatrix& a, const FieldMatrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("fm_add: shape mismatch");
    FieldMatrix out(a.rows(), a.cols());
    auto av = a.data(), bv = b.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < av.size(); ++i) ov[i] = f.add(av[i], bv[i]);
    return out;
}

FieldMatrix fm_mul(const Field& f, const FieldMatrix& a, const FieldMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("fm_mul: inner dimensions differ");
    FieldMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            Fp aik = a.at(i, k);
            if (aik.v == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out.at(i, j) = f.add(out.at(i, j), f.mul(aik, b.at(k, j)));
            }
        }
    }
    return out;
}

void fm_scaled_add(const Field& f, FieldMatrix& acc, Fp c, const FieldMatrix& m) {
    if (!acc.same_shape(m)) throw ShapeMismatch("fm_scaled_add: shape mismatch");
    auto av = acc.data();
    auto mv = m.data();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] = f.add(av[i], f.mul(c, mv[i]));
}

FieldMatrix fm_rows(const FieldMatrix& m, std::span<const std::size_t> rows) {
    FieldMatrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= m.rows()) throw ShapeMismatch("fm_rows: row index out of range");
        for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) = m.at(rows[i], j);
    }
    return out;
}

FieldMatrix fm_uniform(const Field& f, std::size_t rows, std::size_t cols, Rng& rng) {
    FieldMatrix out(rows, cols);
    for (Fp& e : out.data()) e = f.uniform(rng);
    return out;
}

EvalPoints EvalPoints::make_default(const Field& f, std::size_t n_betas, std::size_t n_alphas) {
    EvalPoints pts;
    pts.betas.reserve(n_betas);
    pts.alphas.reserve(n_alphas);
    for (std::size_t k = 1; k <= n_betas; ++k) pts.betas.push_back(f.from_uint(k));
    for (std::size_t j = 1; j <= n_alphas; ++j) pts.alphas.push_back(f.from_uint(n_betas + j));
    pts.validate(f);
    return pts;
}

void EvalPoints::validate(const Field& f) const {
    if (betas.size() + alphas.size() > f.modulus()) {
        throw ValidationError("eval points: K+T+N exceeds field size");
    }
    std::unordered_set<u64> seen;
    for (const Fp& b : betas) {
        if (b.v >= f.modulus() || !seen.insert(b.v).second) {
            throw DuplicatePoints("eval points: betas not pairwise distinct");
        }
    }
    for (const Fp& a : alphas) {
        if (a.v >= f.modulus() || !seen.insert(a.v).second) {
            throw DuplicatePoints("eval points: alphas collide with betas or each other");
        }
    }
}

std::vector<Fp> lagrange_coeffs(const Field& f, std::span<const Fp> points, Fp x) {
    const std::size_t n = points.size();
    if (n == 0) throw ValidationError("lagrange_coeffs: empty point set");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (points[i] == points[j]) throw DuplicatePoints("lagrange_coeffs: duplicate points");
        }
    }

    // prefix[k] = prod_{l<k}(x - p_l), suffix[k] = prod_{l>k}(x - p_l)
    std::vector<Fp> prefix(n + 1), suffix(n + 1);
    prefix[0] = f.one();
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = f.mul(prefix[k], f.sub(x, points[k]));
    suffix[n] = f.one();
    for (std::size_t k = n; k-- > 0;) suffix[k] = f.mul(suffix[k + 1], f.sub(x, points[k]));

    std::vector<Fp> coeffs(n);
    for (std::size_t k = 0; k < n; ++k) {
        Fp denom = f.one();
        for (std::size_t l = 0; l < n; ++l) {
            if (l != k) denom = f.mul(denom, f.sub(points[k], points[l]));
        }
        coeffs[k] = f.mul(f.mul(prefix[k], suffix[k + 1]), f.inv(denom));
    }
    return coeffs;
}

FieldMatrix interpolate_eval(const Field& f, std::span<const Fp> sample_xs,
                             const std::vector<FieldMatrix>& sample_ys, Fp target_x) {
    if (sample_xs.size() != sample_ys.size() || sample_ys.empty()) {
        throw ShapeMismatch("interpolate_eval: sample count mismatch");
    }
    for (const FieldMatrix& y : sample_ys) {
        if (!y.same_shape(sample_ys.front())) {
            throw ShapeMismatch("interpolate_eval: sample matrices differ in shape");
        }
    }
    std::vector<Fp> coeffs = lagrange_coeffs(f, sample_xs, target_x);
    FieldMatrix out(sample_ys.front().rows(), sample_ys.front().cols());
    for (std::size_t k = 0; k < sample_ys.size(); ++k) {
        fm_scaled_add(f, out, coeffs[k], sample_ys[k]);
    }
    return out;
}

} // namespace fedvs
