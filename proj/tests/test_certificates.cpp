// certificates: h coefficients, auxiliary requirements, the quadratic-form
// identity, kernel polynomials, and the independent verifier.

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "data.hpp"
#include "momcurve/certificate.hpp"

using namespace momcurve;
using testdata::example_d3;

namespace {

// random vectors whose zero pattern makes every auxiliary requirement vanish:
// r_k = 0 whenever the lifted pair (k mod d, n + floor(k/d)) lies in F
Vec<Rat> requirement_vector(std::mt19937& rng, int n, int d) {
    std::uniform_int_distribution<int> coin(-4, 4);
    auto f = aux_index_set(n, d);
    Vec<Rat> r(n * d + 1);
    for (int k = 0; k <= n * d; ++k) {
        bool lifted_in_f =
            std::find(f.begin(), f.end(), IndexPair{k % d, n + k / d}) != f.end();
        r[(std::size_t)k] = lifted_in_f ? rat(0) : rat(coin(rng), 1 + (int)(rng() % 3));
    }
    return r;
}

}  // namespace

TEST_CASE("h coefficients") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> coin(-5, 5);
    int n = 3, d = 3;
    Vec<Rat> r(10), s(10);
    for (auto& e : r) e = rat(coin(rng));
    for (auto& e : s) e = rat(coin(rng));

    // n=d=3: h_{1,1} = 2(r0 r4 + s0 s4 + r1 r3 + s1 s3) + r2^2 + s2^2
    Rat expect = 2 * (r[0] * r[4] + s[0] * s[4] + r[1] * r[3] + s[1] * s[3]) + r[2] * r[2] +
                 s[2] * s[2];
    CHECK(h_coeff(r, s, 1, 1, n, d) == expect);

    // d=3: h_{2,2n-1} = 2(r_{3n} r_{3n-1} + s_{3n} s_{3n-1})
    CHECK(h_coeff(r, s, 2, 5, n, d) == 2 * (r[9] * r[8] + s[9] * s[8]));

    Vec<Rat> z(10, rat(0));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; i + 3 * j <= 18; ++j) CHECK(is_zero(h_coeff(z, z, i, j, n, d)));
}

TEST_CASE("auxiliary requirements") {
    int n = 4, d = 4;
    std::mt19937 rng(123);
    std::uniform_int_distribution<int> coin(-5, 5);
    Vec<Rat> r(17), s(17, rat(0));
    for (auto& e : r) e = rat(coin(rng));
    r[16] = r[15] = r[14] = rat(0);  // r_{4n} = r_{4n-1} = r_{4n-2} = 0
    CHECK(aux_requirements_met(r, s, n, d));

    Vec<Rat> r3(10, rat(0));
    std::generate(r3.begin(), r3.end(), [&] { return rat(coin(rng)); });
    r3[9] = rat(0);  // d=3: r_{3n} = 0
    CHECK(aux_requirements_met(r3, Vec<Rat>(10, rat(0)), 3, 3));

    Vec<Rat> bad(17, rat(0));
    bad[16] = bad[15] = rat(1);  // e_{4n} + e_{4n-1}
    CHECK_FALSE(aux_requirements_met(bad, s, n, d));
    CHECK(h_coeff(bad, s, 3, 7, n, d) == rat(2));
}

TEST_CASE("quadratic-form identity") {
    auto seq = example_d3(rat(1430), rat(4862));
    AuxAssignment<Rat> aux{{{2, 5}, rat(31)}};
    Vec<Rat> e0(10, rat(0)), z(10, rat(0));
    e0[0] = rat(1);
    auto q = quadform_identity_check(seq, aux, e0, z);
    CHECK(q.lhs == rat(1));
    CHECK(q.rhs == rat(1));
    CHECK(q.equal);

    // case iii: the kernel vector of C_9 padded by a zero gives lhs = rhs = 0
    auto seq3 = example_d3(rat(1429), rat(4847));
    auto c = build_core(seq3, AuxAssignment<Rat>{{{2, 5}, rat(0)}});
    auto c9 = c.entries().leading(9);
    auto ker = kernel(c9);
    REQUIRE(ker.size() == 1);
    Vec<Rat> rhat(10, rat(0));
    for (int k = 0; k < 9; ++k) rhat[(std::size_t)k] = ker[0][(std::size_t)k];
    auto q3 = quadform_identity_check(seq3, AuxAssignment<Rat>{{{2, 5}, rat(55)}}, rhat, z);
    CHECK(is_zero(q3.lhs));
    CHECK(is_zero(q3.rhs));
    CHECK(q3.equal);

    Vec<Rat> bad(10, rat(1));
    CHECK_THROWS_AS(quadform_identity_check(seq, aux, bad, z), RequirementsNotMet);
}

TEST_CASE("property: quadratic-form identity and square decomposition, random trials") {
    std::mt19937 rng(20260824);
    for (auto [n, d] : std::vector<std::pair<int, int>>{{3, 3}, {4, 4}, {5, 5}}) {
        // random pure sequence from a random atomic measure
        std::vector<std::pair<Rat, Rat>> atoms;
        std::uniform_int_distribution<int> coin(-6, 6);
        while ((int)atoms.size() < n * d + 1) {
            Rat x = rat(coin(rng), 1 + (int)(rng() % 3));
            bool dup = false;
            for (auto& a : atoms) dup = dup || a.first == x;
            if (!dup) atoms.push_back({x, rat(1, n * d + 1)});
        }
        auto seq = testdata::atomic_on_curve(atoms, n, d);
        // normalize beta_00 = 1
        Rat mass = seq.beta(0, 0);
        for (auto& v : seq.beta_) v /= mass;

        AuxAssignment<Rat> aux;
        for (const auto& p : aux_index_set(n, d)) aux[p] = rat(coin(rng));
        int trials = d == 3 ? 40 : 30;
        for (int t = 0; t < trials; ++t) {
            Vec<Rat> r = requirement_vector(rng, n, d), s = requirement_vector(rng, n, d);
            REQUIRE(aux_requirements_met(r, s, n, d));
            auto q = quadform_identity_check(seq, aux, r, s);
            CHECK(q.equal);

            auto [p, defect] = build_kernel_poly(seq, r, s);
            CHECK(is_zero(riesz(seq, p)));
            // p(x, x^d) = R^2 + S^2 - defect, coefficientwise
            Poly<Rat> curve = detail::restrict_to_curve(p, d);
            Poly<Rat> rr = detail::poly_of(r), ss = detail::poly_of(s);
            CHECK(curve == rr * rr + ss * ss - Poly<Rat>{defect});
            CHECK(defect == q.lhs);
        }
    }
}

TEST_CASE("property: vanishing-product lemma for the section-5 vector shape") {
    // zeros at the positions lifted from F minus its top element (d-1, 2n-d+2),
    // plus position nd: every auxiliary requirement vanishes term-by-term
    std::mt19937 rng(5150);
    std::uniform_int_distribution<int> coin(1, 9);
    for (int d = 4; d <= 6; ++d)
        for (int n = d; n <= 8; ++n) {
            auto f = aux_index_set(n, d);
            IndexPair top{d - 1, 2 * n - d + 2};
            Vec<Rat> r(n * d + 1);
            for (int k = 0; k <= n * d; ++k) {
                IndexPair lifted{k % d, n + k / d};
                bool zero = (k == n * d) ||
                            (lifted != top &&
                             std::find(f.begin(), f.end(), lifted) != f.end());
                r[(std::size_t)k] = zero ? rat(0) : rat(coin(rng));
            }
            for (const auto& [i, j] : f) {
                int p = i + d * j;
                for (int k = std::max(0, p - n * d); k <= n * d && k <= p; ++k)
                    CHECK(is_zero(Rat(r[(std::size_t)k] * r[(std::size_t)(p - k)])));
            }
        }
}

TEST_CASE("kernel polynomial construction") {
    auto seq = example_d3(rat(1430), rat(4862));
    Vec<Rat> z(10, rat(0));
    auto [p0, d0] = build_kernel_poly(seq, z, z);
    CHECK(p0.terms.empty());
    CHECK(is_zero(d0));
}

TEST_CASE("verify SmallZeroSet on the d=3 boundary case") {
    // case iii: s = 1429 = phi, t = 4847; C_9 singular
    auto seq = example_d3(rat(1429), rat(4847));
    auto c9 = build_core(seq, AuxAssignment<Rat>{{{2, 5}, rat(0)}}).entries().leading(9);
    CHECK(is_zero(determinant(c9)));
    auto ker = kernel(c9);
    REQUIRE(ker.size() == 1);
    Vec<Rat> rhat(10, rat(0)), z(10, rat(0));
    for (int k = 0; k < 9; ++k) rhat[(std::size_t)k] = ker[0][(std::size_t)k];

    CurveCertificate<Rat> cert;
    cert.kind = CertKind::SmallZeroSet;
    cert.r_hat = rhat;
    cert.s_hat = z;
    cert.zero_bound = 8;  // deg R <= 8 < 9 = rank M_3
    CHECK(rank(build_moment_matrix(seq).entries) == 9);
    auto v = verify_certificate(seq, cert);
    INFO(v.reason);
    CHECK(v.ok);

    // forged bound: claiming >= rank many zeros must fail
    auto forged = cert;
    forged.zero_bound = 9;
    CHECK_FALSE(verify_certificate(seq, forged).ok);
    // forged too-small bound must also fail (actual zeros exceed it)
    auto tiny = cert;
    tiny.zero_bound = 0;
    CHECK_FALSE(verify_certificate(seq, tiny).ok);
}

TEST_CASE("verify StrictlyPositive on the d=3 deficient case") {
    // case ii: s = 1422 < phi = 1429; r_hat = (C_1^{-1} h; -1; 0), eps = 7
    auto seq = example_d3(rat(1422), rat(4798));
    auto c = build_core(seq, AuxAssignment<Rat>{{{2, 5}, rat(0)}});
    Mat<Rat> c1 = c.entries().leading(8);
    Vec<Rat> h(8);
    for (int k = 0; k < 8; ++k) h[(std::size_t)k] = c.h[(std::size_t)(8 + k)];
    Vec<Rat> x = solve_linear(c1, h);
    Vec<Rat> rhat(10, rat(0)), z(10, rat(0));
    for (int k = 0; k < 8; ++k) rhat[(std::size_t)k] = x[(std::size_t)k];
    rhat[8] = rat(-1);

    auto [p, defect] = build_kernel_poly(seq, rhat, z);
    CHECK(defect == rat(-7));  // beta_{1,5} - phi = 1422 - 1429

    CurveCertificate<Rat> cert;
    cert.kind = CertKind::StrictlyPositive;
    cert.r_hat = rhat;
    cert.s_hat = z;
    cert.epsilon = rat(7);
    auto v = verify_certificate(seq, cert);
    INFO(v.reason);
    CHECK(v.ok);

    auto tampered = cert;
    tampered.epsilon = rat(-7);
    CHECK_FALSE(verify_certificate(seq, tampered).ok);
    tampered.epsilon = rat(5);
    CHECK_FALSE(verify_certificate(seq, tampered).ok);
}

TEST_CASE("verify NonPsdSubmatrix") {
    // case ii again: the leading nd x nd block C_9 is indefinite (det = -7)
    auto seq = example_d3(rat(1422), rat(4798));
    CurveCertificate<Rat> cert;
    cert.kind = CertKind::NonPsdSubmatrix;
    for (int k = 1; k <= 9; ++k) cert.submatrix_indices.push_back(k);
    auto v = verify_certificate(seq, cert);
    INFO(v.reason);
    CHECK(v.ok);

    // a PSD submatrix does not verify
    auto bad = cert;
    bad.submatrix_indices = {1, 2, 3};
    CHECK_FALSE(verify_certificate(seq, bad).ok);
    // indices touching an auxiliary slot are rejected
    auto auxy = cert;
    auxy.submatrix_indices = {9, 10};  // entry (10,10) is h_18 fine, (9,10) is h_17 = aux
    CHECK_FALSE(verify_certificate(seq, auxy).ok);
}
