#include <doctest.h>

#include "fedvs/field.hpp"

using namespace fedvs;

namespace {

// Direct Horner evaluation, the oracle for interpolate_eval.
Fp eval_poly(const Field& f, const std::vector<Fp>& coeffs, Fp x) {
    Fp acc = f.zero();
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = f.add(f.mul(acc, x), *it);
    }
    return acc;
}

} // namespace

TEST_CASE("primality check accepts primes and rejects composites") {
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64(17));
    CHECK(is_prime_u64(251));
    CHECK(is_prime_u64(Field::kMersenne61));
    CHECK_FALSE(is_prime_u64(1));
    CHECK_FALSE(is_prime_u64(15));
    CHECK_FALSE(is_prime_u64((1ULL << 61) - 3));
    CHECK_THROWS_AS(Field(15), ValidationError);
    CHECK_THROWS_AS(Field(1ULL << 63), ValidationError);
}

TEST_CASE("scalar arithmetic in F_17") {
    Field f(17);
    CHECK(f.add(Fp{9}, Fp{12}).v == 4);
    CHECK(f.mul(Fp{5}, Fp{0}).v == 0);
    CHECK(f.neg(Fp{1}).v == 16);
    CHECK(f.sub(Fp{3}, Fp{5}).v == 15);
    CHECK(f.from_int(-1).v == 16);
    CHECK(f.from_int(-17).v == 0);
    CHECK(f.from_uint(40).v == 6);
}

TEST_CASE("inverses in F_17: brute-force scan agreement") {
    Field f(17);
    // 2*9 = 18 = 1 mod 17; 16^2 = 256 = 1 mod 17.
    CHECK(f.inv(Fp{2}).v == 9);
    CHECK(f.inv(Fp{1}).v == 1);
    CHECK(f.inv(Fp{16}).v == 16);
    for (u64 a = 1; a < 17; ++a) {
        u64 found = 0;
        for (u64 b = 1; b < 17; ++b) {
            if (a * b % 17 == 1) found = b;
        }
        CHECK(f.inv(Fp{a}).v == found);
    }
    CHECK_THROWS_AS(f.inv(Fp{0}), ZeroInverse);
}

TEST_CASE("mersenne reduction agrees with generic reduction") {
    Field m61(Field::kMersenne61);
    Rng rng(42);
    const u128 p = Field::kMersenne61;
    for (int i = 0; i < 2000; ++i) {
        u64 a = rng.next_u64() % Field::kMersenne61;
        u64 b = rng.next_u64() % Field::kMersenne61;
        u64 expect = static_cast<u64>(static_cast<u128>(a) * b % p);
        CHECK(m61.mul(Fp{a}, Fp{b}).v == expect);
    }
    // Worst-case operands.
    u64 top = Field::kMersenne61 - 1;
    CHECK(m61.mul(Fp{top}, Fp{top}).v == static_cast<u64>(static_cast<u128>(top) * top % p));
}

TEST_CASE("closure: arithmetic always lands in [0, p)") {
    for (u64 p : {17ULL, 251ULL}) {
        Field f(p);
        for (u64 a = 0; a < p; a += 3) {
            for (u64 b = 0; b < p; b += 5) {
                CHECK(f.add(Fp{a}, Fp{b}).v < p);
                CHECK(f.sub(Fp{a}, Fp{b}).v < p);
                CHECK(f.mul(Fp{a}, Fp{b}).v < p);
                CHECK(f.neg(Fp{a}).v < p);
            }
        }
    }
}

TEST_CASE("lagrange coefficients: constant, hand-derived, one-hot") {
    Field f(17);
    std::vector<Fp> single{Fp{5}};
    auto c0 = lagrange_coeffs(f, single, Fp{11});
    REQUIRE(c0.size() == 1);
    CHECK(c0[0].v == 1);

    // points {1,2} at x=3: (3-2)/(1-2) = -1 = 16, (3-1)/(2-1) = 2.
    std::vector<Fp> pts{Fp{1}, Fp{2}};
    auto c = lagrange_coeffs(f, pts, Fp{3});
    CHECK(c[0].v == 16);
    CHECK(c[1].v == 2);

    // At a sample point the coefficient vector is one-hot.
    std::vector<Fp> pts3{Fp{2}, Fp{5}, Fp{9}};
    for (std::size_t k = 0; k < pts3.size(); ++k) {
        auto oh = lagrange_coeffs(f, pts3, pts3[k]);
        for (std::size_t j = 0; j < oh.size(); ++j) {
            CHECK(oh[j].v == (j == k ? 1 : 0));
        }
    }

    // Constant-1 polynomial interpolates to 1 anywhere: coefficients sum to 1.
    for (u64 x = 0; x < 17; ++x) {
        auto cs = lagrange_coeffs(f, pts3, Fp{x});
        Fp sum = f.zero();
        for (Fp ci : cs) sum = f.add(sum, ci);
        CHECK(sum.v == 1);
    }

    std::vector<Fp> dup{Fp{3}, Fp{3}};
    CHECK_THROWS_AS(lagrange_coeffs(f, dup, Fp{0}), DuplicatePoints);
}

TEST_CASE("interpolate_eval: constants, a hand line, and shape errors") {
    Field f(17);
    FieldMatrix constant(2, 2);
    constant.at(0, 0) = Fp{3};
    constant.at(1, 1) = Fp{7};
    std::vector<Fp> xs{Fp{1}, Fp{4}, Fp{6}};
    std::vector<FieldMatrix> ys{constant, constant, constant};
    CHECK(interpolate_eval(f, xs, ys, Fp{13}) == constant);

    // y(x) = 2x + 3 sampled at {1, 2} evaluates to 13 at x = 5.
    FieldMatrix y1(1, 1), y2(1, 1);
    y1.at(0, 0) = Fp{5};
    y2.at(0, 0) = Fp{7};
    std::vector<Fp> line_xs{Fp{1}, Fp{2}};
    std::vector<FieldMatrix> line_ys{y1, y2};
    CHECK(interpolate_eval(f, line_xs, line_ys, Fp{5}).at(0, 0).v == 13);

    FieldMatrix wrong(2, 1);
    std::vector<FieldMatrix> bad{y1, wrong};
    CHECK_THROWS_AS(interpolate_eval(f, line_xs, bad, Fp{0}), ShapeMismatch);
}

TEST_CASE("interpolation round-trip reproduces direct evaluation") {
    // Random degree-4 polynomial over F_p, 5 samples, checked at a 6th point
    // and (for small p) at every field point.
    Rng rng(7);
    SUBCASE("exhaustive over F_17") {
        Field f(17);
        std::vector<Fp> coeffs(5);
        for (Fp& c : coeffs) c = f.uniform(rng);
        std::vector<Fp> xs{Fp{1}, Fp{3}, Fp{5}, Fp{8}, Fp{12}};
        std::vector<FieldMatrix> ys;
        for (Fp x : xs) {
            FieldMatrix y(1, 1);
            y.at(0, 0) = eval_poly(f, coeffs, x);
            ys.push_back(y);
        }
        for (u64 x = 0; x < 17; ++x) {
            CHECK(interpolate_eval(f, xs, ys, Fp{x}).at(0, 0) == eval_poly(f, coeffs, Fp{x}));
        }
    }
    SUBCASE("randomized over the 61-bit field") {
        Field f;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Fp> coeffs(5);
            for (Fp& c : coeffs) c = f.uniform(rng);
            std::vector<Fp> xs;
            for (u64 k = 1; k <= 5; ++k) xs.push_back(Fp{k});
            std::vector<FieldMatrix> ys;
            for (Fp x : xs) {
                FieldMatrix y(1, 1);
                y.at(0, 0) = eval_poly(f, coeffs, x);
                ys.push_back(y);
            }
            Fp probe = f.uniform(rng);
            CHECK(interpolate_eval(f, xs, ys, probe).at(0, 0) == eval_poly(f, coeffs, probe));
        }
    }
}

TEST_CASE("default eval points are distinct and disjoint") {
    Field f(17);
    EvalPoints pts = EvalPoints::make_default(f, 3, 5);
    REQUIRE(pts.betas.size() == 3);
    REQUIRE(pts.alphas.size() == 5);
    CHECK(pts.betas[0].v == 1);
    CHECK(pts.alphas[0].v == 4);
    CHECK_NOTHROW(pts.validate(f));

    EvalPoints clash = pts;
    clash.alphas[2] = pts.betas[1];
    CHECK_THROWS_AS(clash.validate(f), DuplicatePoints);

    // K + T + N must fit in the field.
    CHECK_THROWS_AS(EvalPoints::make_default(f, 10, 8), ValidationError);
}

TEST_CASE("field matrix helpers") {
    Field f(17);
    FieldMatrix a(2, 3), b(3, 2);
    u64 v = 1;
    for (Fp& e : a.data()) e = Fp{v++ % 17};
    for (Fp& e : b.data()) e = Fp{v++ % 17};
    FieldMatrix prod = fm_mul(f, a, b);
    REQUIRE(prod.rows() == 2);
    REQUIRE(prod.cols() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            u64 expect = 0;
            for (std::size_t k = 0; k < 3; ++k) expect += a.at(i, k).v * b.at(k, j).v;
            CHECK(prod.at(i, j).v == expect % 17);
        }
    }
    CHECK_THROWS_AS(fm_mul(f, a, a), ShapeMismatch);

    std::vector<std::size_t> rows{1};
    FieldMatrix sliced = fm_rows(a, rows);
    CHECK(sliced.rows() == 1);
    CHECK(sliced.at(0, 2) == a.at(1, 2));
}
