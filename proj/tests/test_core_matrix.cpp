// core_matrix: auxiliary index set F, core matrix C[A], compression C_hat,
// the permutation identifying C_hat with M_hat_n, and pure-sequence generators.

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "data.hpp"
#include "momcurve/core.hpp"

using namespace momcurve;
using testdata::atomic_on_curve;
using testdata::catalan_d4;
using testdata::catalan_d4_gammas;
using testdata::example_d3;

namespace {

AuxAssignment<Rat> zero_aux(int n, int d) {
    AuxAssignment<Rat> a;
    for (const auto& p : aux_index_set(n, d)) a[p] = rat(0);
    return a;
}

}  // namespace

TEST_CASE("auxiliary index set") {
    CHECK(aux_index_set(3, 3) == std::vector<IndexPair>{{2, 5}});
    CHECK(aux_index_set(5, 3) == std::vector<IndexPair>{{2, 9}});
    CHECK(aux_index_set(4, 4) == std::vector<IndexPair>{{3, 6}, {2, 7}, {3, 7}});
    CHECK(aux_index_set(4, 2).empty());
    CHECK(aux_index_set(4, 1).empty());
    for (int d = 1; d <= 6; ++d)
        for (int n = d; n <= 8; ++n)
            CHECK((int)aux_index_set(n, d).size() == (d - 1) * (d - 2) / 2);
}

TEST_CASE("core matrix construction") {
    // d=1, n=2, Dirac at (1,1): C is the 3x3 all-ones matrix and equals M_hat
    auto d1 = atomic_on_curve({{rat(1), rat(1)}}, 2, 1);
    auto c1 = build_core(d1, zero_aux(2, 1));
    REQUIRE(c1.dim() == 3);
    for (int k = 1; k <= 3; ++k)
        for (int l = 1; l <= 3; ++l) CHECK(c1.entry(k, l) == rat(1));
    CHECK(c1.entries() == central_compression(build_moment_matrix(d1), 1));

    // d=3 running example: s, A, t in the last antidiagonals
    auto seq = example_d3(rat(1430), rat(4862));
    AuxAssignment<Rat> aux{{{2, 5}, rat(77)}};
    auto c = build_core(seq, aux);
    REQUIRE(c.dim() == 10);
    CHECK(c.entry(8, 10) == rat(1430));   // h_16 = s
    CHECK(c.entry(9, 10) == rat(77));     // h_17 = A
    CHECK(c.entry(10, 10) == rat(4862));  // h_18 = t
    CHECK(c.aux_slot[17] == 1);
    CHECK(c.aux_slot[16] == 0);

    // n=d=4: the three auxiliary slots sit at h-indices 27, 30, 31
    AuxAssignment<Rat> aux4{{{3, 6}, rat(5)}, {{2, 7}, rat(6)}, {{3, 7}, rat(7)}};
    auto c4 = build_core(catalan_d4(), aux4);
    REQUIRE(c4.dim() == 17);
    CHECK(c4.entry(12, 17) == rat(5));  // k+l-2 = 27 -> A_{3,6}
    CHECK(c4.entry(13, 16) == rat(5));
    CHECK(c4.entry(14, 15) == rat(5));
    CHECK(c4.entry(15, 17) == rat(6));  // h_30 -> A_{2,7}
    CHECK(c4.entry(16, 17) == rat(7));  // h_31 -> A_{3,7}
    CHECK(c4.entry(17, 17) == rat(353576708));  // h_32 = beta_{0,8}

    CHECK_THROWS_AS(build_core(seq, AuxAssignment<Rat>{}), WrongAuxKeys);
    CHECK_THROWS_AS(build_core(seq, AuxAssignment<Rat>{{{1, 5}, rat(0)}}), WrongAuxKeys);

    // Hankel property: entries depend only on k+l (full scan)
    auto m = c4.entries();
    for (int a = 0; a < m.rows(); ++a)
        for (int b = 0; b < m.cols(); ++b)
            if (a + 1 < m.rows()) CHECK((b == 0 || m(a + 1, b - 1) == m(a, b)));
}

TEST_CASE("compression of the core matrix") {
    // n=d=4: rows/columns 12, 15, 16 (1-based) are removed
    auto keep44 = core_retained_indices(4, 4);
    std::vector<int> expect44;
    for (int k = 1; k <= 17; ++k)
        if (k != 12 && k != 15 && k != 16) expect44.push_back(k);
    CHECK(keep44 == expect44);

    // d=3, n=3: row/column nd = 9 removed
    std::vector<int> expect33{1, 2, 3, 4, 5, 6, 7, 8, 10};
    CHECK(core_retained_indices(3, 3) == expect33);

    // d=2: nothing removed
    CHECK((int)core_retained_indices(4, 2).size() == 9);

    auto seq = example_d3(rat(1430), rat(4862));
    auto chat = compress_core(build_core(seq, zero_aux(3, 3)));
    CHECK(chat.rows() == compressed_dim(3, 3));
    // no auxiliary slot survives: changing A leaves C_hat unchanged
    AuxAssignment<Rat> other{{{2, 5}, rat(999)}};
    CHECK(compress_core(build_core(seq, other)) == chat);
}

TEST_CASE("core permutation") {
    CHECK(core_permutation(4, 4) ==
          std::vector<int>{1, 2, 4, 7, 3, 5, 8, 11, 6, 9, 12, 10, 13, 14});
    auto id = core_permutation(4, 1);
    for (int k = 0; k < (int)id.size(); ++k) CHECK(id[k] == k + 1);
    auto p34 = core_permutation(4, 3);
    CHECK((int)p34.size() == compressed_dim(4, 3));
    CHECK(p34[0] == 1);
}

TEST_CASE("orthogonal equivalence of C_hat and M_hat") {
    // d=2 pure sequence: C_hat equals M_hat directly (identity permutation)
    std::vector<Rat> h(13);
    for (int k = 0; k <= 12; ++k) h[k] = rat(1, k + 1);
    auto p2 = generate_pure_from_hankel(h, 3, 2);
    auto c2 = build_core(p2, zero_aux(3, 2));
    CHECK(verify_equivalence(p2, c2));
    CHECK(compress_core(c2) == central_compression(build_moment_matrix(p2), 2));

    auto c4 = build_core(catalan_d4(), zero_aux(4, 4));
    CHECK(verify_equivalence(catalan_d4(), c4));

    // one perturbed core entry breaks the equivalence
    auto bad = c4;
    bad.h[4] += 1;
    CHECK_FALSE(verify_equivalence(catalan_d4(), bad));
}

TEST_CASE("generate_pure_from_hankel") {
    // Catalan-interleaved data reproduces the d=4 example exactly
    auto g = catalan_d4_gammas();
    auto seq = generate_pure_from_hankel(g, 4, 4);
    CHECK(seq.beta_ == catalan_d4().beta_);
    CHECK(is_pure(seq) == Purity::Pure);

    // Lebesgue moments on [0,1]
    std::vector<Rat> leb(19);
    for (int k = 0; k <= 18; ++k) leb[k] = rat(1, k + 1);
    CHECK(is_pure(generate_pure_from_hankel(leb, 3, 3)) == Purity::Pure);

    // singular compression rejected
    std::vector<Rat> ones(9, rat(1));
    CHECK_THROWS_AS(generate_pure_from_hankel(ones, 2, 2), CompressionNotPD);
}

TEST_CASE("property: random pure sequences are orthogonally equivalent to their core") {
    std::mt19937 rng(20260823);
    std::uniform_int_distribution<int> atom_num(-6, 6);
    std::uniform_int_distribution<int> atom_den(1, 4);
    for (auto [n, d] : std::vector<std::pair<int, int>>{{3, 3}, {4, 3}, {4, 4}, {5, 4}}) {
        for (int trial = 0; trial < 13; ++trial) {
            // random atomic measure with nd+1 distinct rational atoms: its
            // full Hankel matrix is PD, hence the compression is PD
            std::vector<std::pair<Rat, Rat>> atoms;
            while ((int)atoms.size() < n * d + 1) {
                Rat x = rat(atom_num(rng), atom_den(rng));
                bool dup = false;
                for (auto& a : atoms) dup = dup || a.first == x;
                if (!dup) atoms.push_back({x, rat(1 + atom_den(rng), 7)});
            }
            std::vector<Rat> h(2 * n * d + 1, rat(0));
            for (auto& [x, w] : atoms) {
                Rat p = w;
                for (int k = 0; k <= 2 * n * d; ++k) {
                    h[k] += p;
                    p *= x;
                }
            }
            for (int k = 2 * n * d; k >= 0; --k) h[k] /= h[0];  // normalize beta_00 = 1
            auto seq = generate_pure_from_hankel(h, n, d);
            REQUIRE(is_pure(seq) == Purity::Pure);
            AuxAssignment<Rat> aux;
            for (const auto& p : aux_index_set(n, d)) aux[p] = rat(0);
            auto c = build_core(seq, aux);
            CHECK(verify_equivalence(seq, c));
            CHECK(psd_status(compress_core(c)).is_pd());
        }
    }
}

TEST_CASE("property: membership lemma for split auxiliary indices") {
    // for every (i, 2n-k) in F and every split a+b = i + d(2n-k) with
    // 0 <= a,b <= nd, at least one lifted pair lies in F
    for (int d = 3; d <= 6; ++d)
        for (int n = d; n <= 8; ++n) {
            auto f = aux_index_set(n, d);
            auto in_f = [&](int i, int j) {
                return std::find(f.begin(), f.end(), IndexPair{i, j}) != f.end();
            };
            for (const auto& [i, j] : f) {
                int p = i + d * j;
                for (int a = std::max(0, p - n * d); a <= n * d && a <= p; ++a) {
                    int b = p - a;
                    bool ok = in_f(a % d, n + a / d) || in_f(b % d, n + b / d);
                    CHECK(ok);
                }
            }
        }
}

TEST_CASE("property: kernel basis of the Riesz functional for pure sequences") {
    // f_ij = x^i y^j - beta_ij (0 <= i < d, (i,j) != (0,0), i+j <= 2n) and
    // g_kl = (y - x^d) x^k y^l (k+l <= 2n-d) all annihilate L, and their
    // count is dim P_{2n} - 1
    for (auto [n, d] : std::vector<std::pair<int, int>>{{3, 3}, {4, 4}}) {
        auto seq = d == 3 ? example_d3(rat(1430), rat(4862)) : catalan_d4();
        int count = 0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; i + j <= 2 * n; ++j) {
                if (i == 0 && j == 0) continue;
                BiPoly<Rat> f;
                f.add({i, j}, rat(1));
                f.add({0, 0}, -seq.beta(i, j));
                CHECK(is_zero(riesz(seq, f)));
                ++count;
            }
        for (int k = 0; k <= 2 * n - d; ++k)
            for (int l = 0; k + l <= 2 * n - d; ++l) {
                BiPoly<Rat> g;
                g.add({k, l + 1}, rat(1));
                g.add({k + d, l}, rat(-1));
                CHECK(is_zero(riesz(seq, g)));
                ++count;
            }
        CHECK(count == poly_space_dim(2 * n) - 1);
    }
}

TEST_CASE("d=3 boundary generator") {
    auto base = example_d3(rat(1430), rat(4862));
    REQUIRE(compute_phi_d3(base) == rat(1429));
    auto bdry = generate_d3_boundary(base);
    CHECK(bdry.beta(1, 5) == rat(1429));
    CHECK(is_pure(bdry) == Purity::Pure);
    CHECK(psd_status(build_moment_matrix(bdry).entries).is_psd());

    // phi is independent of beta_{1,2n-1} and beta_{0,2n}: idempotence
    CHECK(compute_phi_d3(bdry) == rat(1429));
    auto twice = generate_d3_boundary(bdry);
    CHECK(twice.beta(1, 5) == rat(1429));

    // tiny t-margin: the PSD repair on beta_{0,2n} kicks in exactly when the
    // substituted matrix is indefinite
    auto tight = example_d3(rat(1430), rat(4862));
    auto probe = tight;
    probe.beta(1, 5) = rat(1429);
    bool needed = psd_status(build_moment_matrix(probe).entries).kind == PsdKind::Indefinite;
    auto out = generate_d3_boundary(tight);
    CHECK((needed ? out.beta(0, 6) > rat(4862) : out.beta(0, 6) == rat(4862)));

    CHECK_THROWS_AS(generate_d3_boundary(example_d3(rat(1430), rat(4860))), NotPure);
}
