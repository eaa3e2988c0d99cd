#pragma once

// Built-in example sequences and document generators for the command-line
// tool: the d=3 running family, the Catalan d=4 family and its published
// variants, plus Hankel-driven and seeded-random pure-sequence generators.

#include <random>
#include <string>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "moment.hpp"
#include "rational.hpp"

namespace momcurve::examples {

inline Rat catalan_number(int k) {
    // C_k = binom(2k, k) / (k+1)
    Int b;
    mpz_bin_uiui(b.get_mpz_t(), 2 * (unsigned long)k, (unsigned long)k);
    Rat c(b, Int(k + 1));
    c.canonicalize();
    return c;
}

/// beta_ij := h_{i+dj} verbatim (no positivity screening).
inline MomentSequence<Rat> from_hankel_values(const std::vector<Rat>& h, int n, int d) {
    if ((int)h.size() != 2 * n * d + 1)
        throw PreconditionViolated("need exactly 2nd+1 Hankel values");
    MomentSequence<Rat> seq(n, d);
    for (int i = 0; i <= 2 * n; ++i)
        for (int j = 0; i + j <= 2 * n; ++j) seq.beta(i, j) = h[(std::size_t)(i + d * j)];
    return seq;
}

/// The d=3, n=3 family: interleaved Catalan values with free s = beta_{1,5}
/// and t = beta_{0,6}.
inline MomentSequence<Rat> d3_family(const Rat& s, const Rat& t) {
    std::vector<Rat> h(19, rat(0));
    for (int k = 0; 2 * k <= 14; ++k) h[(std::size_t)(2 * k)] = catalan_number(k);
    h[16] = s;
    h[18] = t;
    return from_hankel_values(h, 3, 3);
}

/// gamma values of the d=4, n=4 Catalan example (top moment 353576708).
inline std::vector<Rat> catalan_d4_values() {
    std::vector<Rat> g(33, rat(0));
    for (int k = 0; 2 * k <= 30; ++k) g[(std::size_t)(2 * k)] = catalan_number(k);
    g[32] = rat(353576708);
    return g;
}

inline std::vector<std::string> example_names() {
    return {"y=x3-i", "y=x3-ii", "y=x3-iii", "catalan-d4", "y=x4-v2", "d4-iii", "d4-iv"};
}

inline MomentSequence<Rat> example_by_name(const std::string& name) {
    if (name == "y=x3-i") return d3_family(rat(1430), rat(4862));
    if (name == "y=x3-ii") return d3_family(rat(1422), rat(4798));
    if (name == "y=x3-iii") return d3_family(rat(1429), rat(4847));
    if (name == "catalan-d4") return from_hankel_values(catalan_d4_values(), 4, 4);
    if (name == "y=x4-v2") {
        auto g = catalan_d4_values();
        g[22] = rat(0);  // beta_25
        g[24] = rat(3454708516);
        g[26] = rat(3448894372);
        g[28] = rat(0);  // beta_07
        g[32] = Rat("2640503382173370698906776695725");
        return from_hankel_values(g, 4, 4);
    }
    if (name == "d4-iii") {
        // published as-is; note the huge beta_25 makes M_4 indefinite, so
        // `check` reports NotPsd for this document
        auto g = catalan_d4_values();
        g[28] = rat(0);
        g[22] = Rat("2640503382173370698906776695725");
        return from_hankel_values(g, 4, 4);
    }
    if (name == "d4-iv") {
        auto g = catalan_d4_values();
        g[29] = rat(150);  // beta_17
        return from_hankel_values(g, 4, 4);
    }
    throw UnknownExample("unknown example: " + name);
}

/// Semicircle-law moments: gamma_p = Catalan(p/2) for even p, 0 for odd p.
/// The Hankel compression is positive definite for every n, d.
inline MomentSequence<Rat> gen_catalan(int n, int d) {
    std::vector<Rat> h((std::size_t)(2 * n * d + 1), rat(0));
    for (int k = 0; 2 * k <= 2 * n * d; ++k) h[(std::size_t)(2 * k)] = catalan_number(k);
    return generate_pure_from_hankel(h, n, d);
}

/// Seeded random pure sequence: distinct positive rational atoms on the
/// curve, one more than the compressed dimension, with total mass 1.
inline MomentSequence<Rat> gen_random(unsigned seed, int n, int d) {
    std::mt19937 rng(seed);
    const int count = compressed_dim(n, d) + 1;
    std::vector<std::pair<Rat, Rat>> atoms;
    Rat mass(0);
    while ((int)atoms.size() < count) {
        Rat x = rat(1 + (int)(rng() % 40), 8);
        bool dup = false;
        for (auto& a : atoms) dup = dup || a.first == x;
        if (dup) continue;
        Rat w = rat(1 + (int)(rng() % 9), 1 + (int)(rng() % 4));
        atoms.push_back({x, w});
        mass += w;
    }
    MomentSequence<Rat> seq(n, d);
    for (int i = 0; i <= 2 * n; ++i)
        for (int j = 0; i + j <= 2 * n; ++j) {
            Rat acc(0);
            for (const auto& [x, w] : atoms) {
                Rat p(1);
                for (int e = 0; e < i + d * j; ++e) p *= x;
                acc += w * p / mass;
            }
            seq.beta(i, j) = acc;
        }
    return seq;
}

}  // namespace momcurve::examples
