// solvers: the d=3 trichotomy, the d >= 4 finiteness test, the complete d=4
// decision with endpoint branches and interior feasibility, and the
// best-effort d >= 5 search.

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "data.hpp"
#include "momcurve/solver.hpp"

using namespace momcurve;
using testdata::catalan_d4;
using testdata::catalan_d4_gammas;
using testdata::example_d3;
using testdata::from_hankel_list;

namespace {

// every genuine moment of seq reproduced by the measure: exactly when all
// atom locations are exact rationals, else within 1e-9 relative
bool moments_match(const MomentSequence<Rat>& seq, const AtomicMeasure& mu) {
    bool all_exact = true;
    for (const auto& at : mu.atoms) all_exact = all_exact && at.exact;
    const Rat tol(1, 1000000000);
    for (int i = 0; i < seq.d; ++i)
        for (int j = 0; i + j <= 2 * seq.n; ++j) {
            if (i + seq.d * j > 2 * seq.n * seq.d) continue;
            Rat m = mu.moment(i + seq.d * j), b = seq.beta(i, j);
            if (all_exact ? !(m == b) : Rat(abs(m - b)) > Rat(tol * std::max(Rat(1), Rat(abs(b)))))
                return false;
        }
    return true;
}

// distinct rational atoms with positive weights of total mass 1
std::vector<std::pair<Rat, Rat>> random_atoms(std::mt19937& rng, int count) {
    std::uniform_int_distribution<int> num(-9, 9);
    std::vector<std::pair<Rat, Rat>> atoms;
    Rat mass(0);
    while ((int)atoms.size() < count) {
        Rat x = rat(num(rng), 1 + (int)(rng() % 3));
        bool dup = false;
        for (auto& a : atoms) dup = dup || a.first == x;
        if (dup) continue;
        Rat w = rat(1 + (int)(rng() % 5), 1 + (int)(rng() % 2));
        atoms.push_back({x, w});
        mass += w;
    }
    for (auto& a : atoms) a.second /= mass;
    return atoms;
}

}  // namespace

TEST_CASE("d=3 trichotomy on the running example") {
    // case i: s = 1430 > phi = 1429
    auto seq = example_d3(rat(1430), rat(4862));
    auto rep = solve(seq);
    CHECK(rep.verdict == Verdict::Exists);
    REQUIRE(rep.phi.has_value());
    CHECK(*rep.phi == rat(1429));
    CHECK(rep.a_lo == "-1");
    CHECK(rep.a_hi == "1");
    CHECK(rep.aux.count({2, 5}) == 1);
    REQUIRE(rep.measure.has_value());
    CHECK(moments_match(seq, *rep.measure));
    // C[A] is PD exactly for A in (-1, 1): dets vanish at the endpoints
    for (Rat a : {rat(-1), rat(1)}) {
        auto c = build_core(seq, AuxAssignment<Rat>{{{2, 5}, a}});
        CHECK(is_zero(determinant(c.entries())));
    }
    CHECK(sgn(determinant(build_core(seq, AuxAssignment<Rat>{{{2, 5}, rat(0)}}).entries())) > 0);
    CHECK(psd_status(build_core(seq, AuxAssignment<Rat>{{{2, 5}, rat(1, 2)}}).entries()).is_pd());
    CHECK(psd_status(build_core(seq, AuxAssignment<Rat>{{{2, 5}, rat(2)}}).entries()).kind ==
          PsdKind::Indefinite);

    // case ii: s = 1422 < phi, det C_9 = -7
    auto seq2 = example_d3(rat(1422), rat(4798));
    auto c9 = build_core(seq2, AuxAssignment<Rat>{{{2, 5}, rat(0)}}).entries().leading(9);
    CHECK(determinant(c9) == rat(-7));
    auto rep2 = solve(seq2);
    CHECK(rep2.verdict == Verdict::NotExists);
    REQUIRE(rep2.certificate.has_value());
    CHECK(rep2.certificate->kind == CertKind::StrictlyPositive);
    CHECK(rep2.certificate->epsilon == rat(7));
    auto v2 = verify_certificate(seq2, *rep2.certificate);
    INFO(v2.reason);
    CHECK(v2.ok);

    // case iii: s = 1429 = phi, det C_9 = 0
    auto seq3 = example_d3(rat(1429), rat(4847));
    auto c9b = build_core(seq3, AuxAssignment<Rat>{{{2, 5}, rat(0)}}).entries().leading(9);
    CHECK(is_zero(determinant(c9b)));
    auto rep3 = solve(seq3);
    CHECK(rep3.verdict == Verdict::NotExists);
    REQUIRE(rep3.certificate.has_value());
    CHECK(rep3.certificate->kind == CertKind::SmallZeroSet);
    CHECK(rep3.certificate->zero_bound == 8);
    CHECK(rank(build_moment_matrix(seq3).entries) == 9);
    auto v3 = verify_certificate(seq3, *rep3.certificate);
    INFO(v3.reason);
    CHECK(v3.ok);
}

TEST_CASE("pureness boundary of the d=3 example") {
    // at s = 1430 the transition is at t = s^2 - 2844 s + 2026881 = 4861
    Rat s(1430);
    Rat tstar = s * s - 2844 * s + 2026881;
    CHECK(tstar == rat(4861));
    CHECK(is_pure(example_d3(s, tstar + 1)) == Purity::Pure);
    CHECK(is_pure(example_d3(s, tstar)) != Purity::Pure);
    CHECK(is_pure(example_d3(s, tstar - 1)) != Purity::Pure);
}

TEST_CASE("phi is independent of the two free tail moments") {
    Rat phi0 = compute_phi_d3(example_d3(rat(1430), rat(4862)));
    CHECK(phi0 == rat(1429));
    for (auto [s, t] : std::vector<std::pair<int, int>>{
             {1430, 4870}, {1429, 4847}, {1422, 4798}, {2000, 9000}})
        CHECK(compute_phi_d3(example_d3(rat(s), rat(t))) == phi0);

    // random pure d=3 instances: perturb beta_{1,2n-1} and beta_{0,2n}
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto seq = testdata::atomic_on_curve(random_atoms(rng, 10), 3, 3);
        Rat phi = compute_phi_d3(seq);
        auto bumped = seq;
        bumped.beta(1, 5) += rat(1 + (int)(rng() % 9));
        bumped.beta(0, 6) += rat(1 + (int)(rng() % 9));
        CHECK(compute_phi_d3(bumped) == phi);
    }
}

TEST_CASE("property: d=3 determinant criterion and trichotomy on random instances") {
    std::mt19937 rng(20260823);
    int full_runs = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto base = testdata::atomic_on_curve(random_atoms(rng, 10), 3, 3);
        Rat phi = compute_phi_d3(base);
        // sweep beta_{1,5} through the three regimes
        for (int off : {-2, -1, 0, 1, 5}) {
            auto seq = base;
            seq.beta(1, 5) = phi + off;
            auto c9 = build_core(seq, AuxAssignment<Rat>{{{2, 5}, rat(0)}}).entries().leading(9);
            // det C_{3n} > 0 <=> beta_{1,2n-1} > phi
            CHECK((sgn(determinant(c9)) > 0) == (off > 0));
        }
        if (trial % 10 != 0) continue;
        ++full_runs;
        // full solve on each regime for a subset of the instances
        auto above = base;
        above.beta(1, 5) = phi + 1;
        auto ra = solve_d3(above);
        CHECK(ra.verdict == Verdict::Exists);
        REQUIRE(ra.measure.has_value());
        CHECK(moments_match(above, *ra.measure));

        auto at = base;
        at.beta(1, 5) = phi;
        auto rb = solve_d3(at);
        CHECK(rb.verdict == Verdict::NotExists);
        REQUIRE(rb.certificate.has_value());
        CHECK(rb.certificate->kind == CertKind::SmallZeroSet);
        CHECK(verify_certificate(at, *rb.certificate).ok);

        auto below = base;
        below.beta(1, 5) = phi - 1;
        auto rc = solve_d3(below);
        CHECK(rc.verdict == Verdict::NotExists);
        REQUIRE(rc.certificate.has_value());
        CHECK(rc.certificate->kind == CertKind::StrictlyPositive);
        CHECK(rc.certificate->epsilon == rat(1));
        CHECK(verify_certificate(below, *rc.certificate).ok);
    }
    CHECK(full_runs == 5);
}

TEST_CASE("finiteness test on the Catalan d=4 data") {
    auto fin = finiteness_test(catalan_d4());
    CHECK(fin.cmp > 0);  // lambda > phi: pass-through
    CHECK_FALSE(fin.report.has_value());
    CHECK(fin.lambda == rat(58786));  // xi = 22, lambda = beta_{2,5} = Catalan(11)
    CHECK(fin.phi == Rat("8523969/145"));
}

TEST_CASE("engineered lambda < phi instances are refuted with verified certificates") {
    // d = 4: lower beta_{2,5} of the Catalan data until lambda drops below phi
    bool found4 = false;
    for (int k = 1; k <= 8 && !found4; ++k) {
        auto g = catalan_d4_gammas();
        g[22] -= k;
        auto seq = from_hankel_list(g, 4, 4);
        auto fin = finiteness_test(seq);
        if (fin.cmp >= 0) continue;
        found4 = true;
        REQUIRE(fin.report.has_value());
        CHECK(fin.report->verdict == Verdict::NotExists);
        REQUIRE(fin.report->certificate.has_value());
        CHECK(fin.report->certificate->kind == CertKind::StrictlyPositive);
        CHECK(fin.report->certificate->epsilon == Rat(fin.phi - fin.lambda));
        auto v = verify_certificate(seq, *fin.report->certificate);
        INFO(v.reason);
        CHECK(v.ok);
    }
    CHECK(found4);

    // d = 5: same construction on an atomic n = d = 5 sequence, slot beta_{3,5}
    std::mt19937 rng(11);
    auto base = testdata::atomic_on_curve(random_atoms(rng, 26), 5, 5);
    bool found5 = false;
    for (int k = 1; k <= 30 && !found5; ++k) {
        auto seq = base;
        seq.beta(3, 5) = Rat(base.beta(3, 5) * rat(32 - k, 32));  // xi = 28 -> lambda = beta_{3,5}
        FinitenessResult<Rat> fin;
        try {
            fin = finiteness_test(seq);
        } catch (const SingularMatrix&) {
            continue;
        }
        if (fin.cmp >= 0) continue;
        found5 = true;
        REQUIRE(fin.report.has_value());
        CHECK(fin.report->verdict == Verdict::NotExists);
        REQUIRE(fin.report->certificate.has_value());
        CHECK(fin.report->certificate->kind == CertKind::StrictlyPositive);
        auto v = verify_certificate(seq, *fin.report->certificate);
        INFO(v.reason);
        CHECK(v.ok);
    }
    CHECK(found5);
}

TEST_CASE("d=4 Catalan family: diagnostics and existence") {
    auto seq = catalan_d4();
    auto dd = d4_interior(seq);

    // delta(A) = (-9694844 + 9694114 A^2 + A^4) / (A^2 - 1) as an identity
    Poly<Rat> dnum{rat(-9694844), rat(0), rat(9694114), rat(0), rat(1)};
    Poly<Rat> dden{rat(-1), rat(0), rat(1)};
    for (Rat a : {rat(0), rat(1, 2), rat(1, 3), rat(2), rat(7, 5)})
        CHECK(Rat(dd.num.eval(a) * dden.eval(a)) == Rat(dnum.eval(a) * dd.g1.eval(a)));
    // rho(A) = 9694830 - 12 A^2 + sqrt((A^2-1)(145 A^2 - 318219264))
    CHECK(dd.c == Poly<Rat>{rat(9694830), rat(0), rat(-12)});
    CHECK(dd.g1 * dd.g2 == Poly<Rat>{rat(318219264), rat(0), rat(-318219409), rat(0), rat(145)});
    // endpoints (A_36)_pm = +-1
    CHECK(dd.center == rat(0));
    CHECK(dd.rad == rat(1));
    // at A_36 = 0, C_16 > 0 iff A_27 > 9694844 = delta(0)
    CHECK(Rat(dd.num.eval(rat(0))) == Rat(rat(9694844) * dd.g1.eval(rat(0))));

    // det C identity: det C = f (318219068 - 28 f - f^2) - A_37^2, f = A_27 - 9694844
    for (Rat f : {rat(1), rat(100), rat(10000)})
        for (Rat a37 : {rat(0), rat(1000)}) {
            AuxAssignment<Rat> aux{
                {{3, 6}, rat(0)}, {{2, 7}, f + 9694844}, {{3, 7}, a37}};
            Rat det = determinant(build_core(seq, aux).entries());
            CHECK(det == Rat(f * (318219068 - 28 * f - f * f) - a37 * a37));
        }
    // feasible f window (0, 96 sqrt(34529) - 14): 17824 in, 17825 out
    {
        Quad bound = Quad(rat(96)) * Quad::sqrt(rat(34529)) - Quad(rat(14));
        CHECK(sign(bound - Quad(rat(17824))) > 0);
        CHECK(sign(bound - Quad(rat(17825))) < 0);
        auto feasible_f = [&](const Rat& f) {
            Rat lhs = f * (318219068 - 28 * f - f * f);
            return sgn(lhs) > 0;  // some A_37 (namely 0 < A_37^2 < lhs) makes det > 0
        };
        CHECK(feasible_f(rat(17824)));
        CHECK_FALSE(feasible_f(rat(17825)));
    }

    auto rep = solve(seq);
    CHECK(rep.verdict == Verdict::Exists);
    CHECK(rep.a_lo == "-1");
    CHECK(rep.a_hi == "1");
    CHECK_FALSE(rep.aux_approximate);
    REQUIRE(rep.measure.has_value());
    CHECK(moments_match(seq, *rep.measure));
    // the witness assignment really completes C to a PSD recursively generated matrix
    auto c = build_core(seq, rep.aux);
    CHECK(psd_status(c.entries()).is_psd());
    CHECK(recursively_generated(c.entries()));
}

TEST_CASE("d=4 Catalan family: tangency points near +-0.943353") {
    auto dd = d4_interior(catalan_d4());
    auto cells = d4_cells(dd);
    REQUIRE_FALSE(cells.open_cells.empty());
    int lo_cell = cells.open_cells.front(), hi_cell = cells.open_cells.back();
    REQUIRE(lo_cell > 0);
    REQUIRE(hi_cell < (int)cells.samples.size() - 1);
    auto& blo = cells.roots[(std::size_t)(lo_cell - 1)];
    auto& bhi = cells.roots[(std::size_t)hi_cell];
    blo.refine(rat(1, 1000000));
    bhi.refine(rat(1, 1000000));
    Rat target(943353, 1000000);
    CHECK(abs(Rat(blo.mid() + target)) < rat(1, 10000));
    CHECK(abs(Rat(bhi.mid() - target)) < rat(1, 10000));
}

TEST_CASE("d=4 non-existence: v2 and the step-2 obstruction") {
    // variant v2: beta_25 = 0 zeroes a diagonal entry of C
    auto g = catalan_d4_gammas();
    g[22] = rat(0);
    g[24] = rat(3454708516);
    g[26] = rat(3448894372);
    g[28] = rat(0);
    g[32] = Rat("2640503382173370698906776695725");
    auto v2 = from_hankel_list(g, 4, 4);
    CHECK(is_pure(v2) == Purity::Pure);
    auto rep = solve(v2);
    CHECK(rep.verdict == Verdict::NotExists);
    REQUIRE(rep.certificate.has_value());
    auto ver = verify_certificate(v2, *rep.certificate);
    INFO(ver.reason);
    CHECK(ver.ok);

    // a beta_25 this large cannot coexist with positive semidefiniteness: the
    // principal 2x2 minor on rows {x^2 y^2, y^3} of M_4 is already indefinite
    auto gbad = catalan_d4_gammas();
    gbad[28] = rat(0);
    gbad[22] = Rat("2640503382173370698906776695725");
    CHECK(is_pure(from_hankel_list(gbad, 4, 4)) == Purity::NotPsd);

    // step-2 obstruction: the Schur threshold for beta_07 in C_3 is exactly
    // 2674439 (one below the Catalan value), so 2674438 keeps the sequence
    // pure while C_2 stays positive definite and C_3 turns indefinite
    auto g3 = catalan_d4_gammas();
    g3[28] = rat(2674438);
    auto seq3 = from_hankel_list(g3, 4, 4);
    CHECK(is_pure(seq3) == Purity::Pure);
    auto rep3 = solve(seq3);
    CHECK(rep3.verdict == Verdict::NotExists);
    REQUIRE(rep3.certificate.has_value());
    CHECK(rep3.certificate->kind == CertKind::NonPsdSubmatrix);
    std::vector<int> want;
    for (int k = 1; k <= 13; ++k) want.push_back(k);
    want.push_back(15);
    CHECK(rep3.certificate->submatrix_indices == want);
    auto ver3 = verify_certificate(seq3, *rep3.certificate);
    INFO(ver3.reason);
    CHECK(ver3.ok);
}

TEST_CASE("d=4 non-existence: beta_17 = 150 rejects both endpoints and the interior") {
    auto g = catalan_d4_gammas();
    g[29] = rat(150);  // beta_{1,7}
    auto seq = from_hankel_list(g, 4, 4);
    CHECK(is_pure(seq) == Purity::Pure);
    auto rep = solve(seq);
    CHECK(rep.verdict == Verdict::NotExists);
    REQUIRE(rep.certificate.has_value());
    CHECK(rep.certificate->kind == CertKind::NoPsdCompletion);
    auto ver = verify_certificate(seq, *rep.certificate);
    INFO(ver.reason);
    CHECK(ver.ok);

    // the two endpoint branches, with the exact completion values and relations
    REQUIRE(rep.endpoints.size() == 2);
    const auto& em = rep.endpoints[0];
    const auto& ep = rep.endpoints[1];
    CHECK(em.exact);
    CHECK(ep.exact);
    CHECK(em.a == rat(-1));
    CHECK(ep.a == rat(1));
    CHECK(em.a27 == rat(9694668));
    CHECK(ep.a27 == rat(9694968));
    CHECK(em.a37 == rat(2074));
    CHECK(ep.a37 == rat(2126));
    CHECK_FALSE(em.accepted);
    CHECK_FALSE(ep.accepted);
    std::vector<int> phim{1, -7, -28, 56, 126, -126, -210, 120, 165, -55, -66, 12, 13, -1};
    REQUIRE(em.relation.size() == phim.size());
    REQUIRE(ep.relation.size() == phim.size());
    for (std::size_t k = 0; k < phim.size(); ++k) {
        CHECK(em.relation[k] == rat(phim[k]));
        int flip = (k % 2 == 1) ? -phim[k] : phim[k];
        CHECK(ep.relation[k] == rat(flip));
    }
}

TEST_CASE("property: d=4 PSD completions form a convex set") {
    auto seq = catalan_d4();
    auto dd = d4_interior(seq);
    const Rat tol(1, 1000000000);
    std::vector<AuxAssignment<Rat>> feas;
    for (Rat a : {rat(0), rat(1, 2), rat(-1, 2), rat(3, 4)}) {
        REQUIRE(d4_feasible_sample(dd, a));
        SolverReport<Rat> rep;
        REQUIRE(d4_interior_witness(dd, a, rep, tol));
        CHECK(psd_status(build_core(seq, rep.aux).entries()).is_psd());
        feas.push_back(rep.aux);
    }
    for (std::size_t i = 0; i < feas.size(); ++i)
        for (std::size_t j = i + 1; j < feas.size(); ++j) {
            AuxAssignment<Rat> mid;
            for (const auto& [k, v] : feas[i]) mid[k] = (v + feas[j].at(k)) / 2;
            CHECK(psd_status(build_core(seq, mid).entries()).is_psd());
        }
}

namespace {

// 20 distinct positive atoms: the compressed Vandermonde at positive nodes is
// totally positive, so rank M_5 is exactly 20 and the data is flat and pure.
std::vector<std::pair<Rat, Rat>> twenty_atoms() {
    std::vector<std::pair<Rat, Rat>> atoms;
    Rat mass(0);
    for (int k = 1; k <= 20; ++k) {
        atoms.push_back({rat(k, 2), rat(1, k)});
        mass += rat(1, k);
    }
    for (auto& a : atoms) a.second /= mass;
    return atoms;
}

}  // namespace

TEST_CASE("d>=5: flat 20-atom data is completed via the quadratic recurrence route") {
    auto atoms = twenty_atoms();
    auto seq = testdata::atomic_on_curve(atoms, 5, 5);
    REQUIRE(is_pure(seq) == Purity::Pure);  // rank M_5 = 20 with 20 atoms
    auto rep = solve(seq);
    CHECK(rep.verdict == Verdict::Exists);
    REQUIRE(rep.measure.has_value());
    CHECK(moments_match(seq, *rep.measure));
    CHECK(rep.aux.size() == 6);  // (d-1)(d-2)/2 auxiliary slots
    // the flat completion is unique: atoms are recovered exactly
    REQUIRE(rep.measure->atoms.size() == atoms.size());
    for (const auto& [x, w] : atoms) {
        bool hit = false;
        for (const auto& at : rep.measure->atoms)
            hit = hit || (at.exact && at.x == x && at.weight == w);
        CHECK(hit);
    }
}

TEST_CASE("d>=5 over a quadratic extension never claims non-existence") {
    auto rseq = testdata::atomic_on_curve(twenty_atoms(), 5, 5);
    MomentSequence<Quad> seq(5, 5);
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; i + j <= 10; ++j) seq.beta(i, j) = Quad(rseq.beta(i, j));
    REQUIRE(is_pure(seq) == Purity::Pure);
    auto rep = solve(seq);
    CHECK(rep.verdict != Verdict::NotExists);
}

TEST_CASE("low curve degrees always admit measures") {
    std::mt19937 rng(31337);
    {
        auto seq = testdata::atomic_on_curve(random_atoms(rng, 5), 3, 1);
        REQUIRE(is_pure(seq) == Purity::Pure);
        auto rep = solve(seq);
        CHECK(rep.verdict == Verdict::Exists);
        REQUIRE(rep.measure.has_value());
        CHECK(moments_match(seq, *rep.measure));
    }
    {
        auto seq = testdata::atomic_on_curve(random_atoms(rng, 8), 3, 2);
        REQUIRE(is_pure(seq) == Purity::Pure);
        auto rep = solve(seq);
        CHECK(rep.verdict == Verdict::Exists);
        REQUIRE(rep.measure.has_value());
        CHECK(moments_match(seq, *rep.measure));
    }
}

TEST_CASE("non-pure inputs are rejected with the sub-reason") {
    // a single atom on y = x^2 has rank 1 < d(2n-d+3)/2
    auto seq = testdata::atomic_on_curve({{rat(2), rat(1)}}, 3, 2);
    CHECK_THROWS_AS(solve(seq), NotPure);
    try {
        solve(seq);
    } catch (const NotPure& e) {
        CHECK(std::string(e.what()).find("pure") != std::string::npos);
    }
}
