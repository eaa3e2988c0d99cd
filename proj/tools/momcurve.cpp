// momcurve: decide the (y - x^d)-pure truncated moment problem from the
// command line. Subcommands: check, solve, scan, example, gen, extract.
//
// Exit codes: 0 success / measure exists; 2 input not pure or fails a data
// precondition; 3 no representing measure (or assignment not completable);
// 4 inconclusive / finite-or-empty core variety; 64 usage or parse error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "momcurve/examples.hpp"
#include "momcurve/io.hpp"
#include "momcurve/solver.hpp"

using namespace momcurve;

namespace {

constexpr int kOk = 0, kNotPure = 2, kNotExists = 3, kInconclusive = 4, kUsage = 64;

struct Output {
    std::string path;  // empty: stdout
    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream f(path);
        if (!f) throw ParseError("cannot open output file: " + path);
        f << text;
    }
};

MomentSequence<Rat> load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open input file: " + path);
    return read_input(f);
}

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::Exists:
        case Verdict::ExistsUnique: return kOk;
        case Verdict::NotExists: return kNotExists;
        default: return kInconclusive;
    }
}

int cmd_check(const std::string& path, bool json, const Output& out) {
    auto seq = load(path);
    Purity pu = is_pure(seq);
    auto mm = build_moment_matrix(seq);
    auto st = psd_status(mm.entries);
    int rk = rank(mm.entries);
    std::ostringstream os;
    if (json) {
        Json doc;
        doc["pure"] = pu == Purity::Pure;
        doc["purity"] = to_string(pu);
        doc["psd"] = st.is_psd();
        doc["rank"] = rk;
        doc["compressedDim"] = compressed_dim(seq.n, seq.d);
        os << doc.dump(2) << "\n";
    } else {
        os << "purity: " << to_string(pu) << "\n"
           << "M_n PSD: " << (st.is_psd() ? "yes" : "no") << "\n"
           << "rank M_n: " << rk << " (pure rank " << compressed_dim(seq.n, seq.d) << ")\n";
    }
    out.write(os.str());
    return pu == Purity::Pure ? kOk : kNotPure;
}

int cmd_solve(const std::string& path, bool json, int precision, const Output& out) {
    auto seq = load(path);
    SolverReport<Rat> rep;
    try {
        rep = solve(seq);
    } catch (const NotPure& e) {
        out.write(std::string(e.what()) + "\n");
        return kNotPure;
    }
    std::ostringstream os;
    if (json) {
        os << report_json(rep, precision).dump(2) << "\n";
    } else {
        os << "verdict: " << to_string(rep.verdict) << "\n";
        if (rep.phi) os << "phi = " << to_string(*rep.phi) << "\n";
        if (rep.lambda) os << "lambda = " << to_string(*rep.lambda) << "\n";
        if (!rep.a_lo.empty()) os << "A in [" << rep.a_lo << ", " << rep.a_hi << "]\n";
        if (!rep.feasible_description.empty()) os << rep.feasible_description << "\n";
        for (const auto& [ij, v] : rep.aux) os << aux_key(ij) << " = " << to_string(v) << "\n";
        if (rep.measure) {
            os << "atoms (x, weight):\n";
            for (const auto& at : rep.measure->atoms)
                os << "  " << to_decimal(at.x, precision) << "  "
                   << to_decimal(at.weight, precision) << (at.exact ? "" : "  (approx)") << "\n";
        }
        if (rep.certificate) os << "certificate: " << to_string(rep.certificate->kind) << "\n";
    }
    out.write(os.str());
    return verdict_exit(rep.verdict);
}

int cmd_scan(const std::string& path, const std::string& range, int precision,
             const Output& out) {
    auto seq = load(path);
    if (seq.d != 4) throw ParseError("scan needs d = 4");
    if (is_pure(seq) != Purity::Pure) {
        out.write("input is not pure\n");
        return kNotPure;
    }
    auto lo_pos = range.find(':');
    auto hi_pos = range.find(':', lo_pos == std::string::npos ? range.size() : lo_pos + 1);
    if (lo_pos == std::string::npos || hi_pos == std::string::npos)
        throw ParseError("--range wants lo:hi:step");
    Rat lo = parse_rat(range.substr(0, lo_pos));
    Rat hi = parse_rat(range.substr(lo_pos + 1, hi_pos - lo_pos - 1));
    Rat step = parse_rat(range.substr(hi_pos + 1));
    if (sign(step) <= 0) throw ParseError("range step must be positive");

    auto dd = d4_interior(seq);
    const int m = 4 * seq.n - 2;
    if (!psd_status(detail::hankel_slice(dd.h, m)).is_pd())
        throw PreconditionViolated("scan needs C_2 positive definite");
    if (psd_status(detail::d4_c3(dd.h, seq.n)).kind == PsdKind::Indefinite)
        throw PreconditionViolated("scan needs C_3 positive semidefinite");

    std::ostringstream os;
    os << "A,delta,rho,feasible\n";
    int skipped = 0;
    for (Rat a = lo; a <= hi; a += step) {
        if (!d4_in_interval(dd, a)) {
            ++skipped;
            continue;
        }
        auto s = d4_scan_at(dd, a);
        os << to_decimal(a, precision) << "," << to_decimal(s.delta, precision) << ","
           << (s.rho_real ? to_decimal(detail::approx_rat(s.rho, precision + 2), precision)
                          : std::string("nan"))
           << "," << (s.feasible ? "true" : "false") << "\n";
    }
    os << "# skipped " << skipped << " grid point(s) outside (A_-, A_+)\n";
    out.write(os.str());
    return kOk;
}

int cmd_example(const std::string& name, const Output& out) {
    auto seq = examples::example_by_name(name);
    out.write(document_for(seq).dump(2) + "\n");
    return kOk;
}

int cmd_gen(const std::string& hankel_path, bool catalan, std::optional<unsigned> seed, int n,
            int d, const Output& out) {
    if ((int)!hankel_path.empty() + (int)catalan + (int)seed.has_value() != 1)
        throw ParseError("gen wants exactly one of --hankel, --catalan, --random");
    MomentSequence<Rat> seq;
    if (catalan) {
        seq = examples::gen_catalan(n, d);
    } else if (seed) {
        seq = examples::gen_random(*seed, n, d);
    } else {
        std::ifstream f(hankel_path);
        if (!f) throw ParseError("cannot open Hankel file: " + hankel_path);
        Json doc = Json::parse(f, nullptr, false);
        if (doc.is_discarded() || !doc.is_array()) throw ParseError("Hankel file: JSON array");
        std::vector<Rat> h;
        for (const auto& v : doc) h.push_back(parse_rat(v.get<std::string>()));
        seq = generate_pure_from_hankel(h, n, d);
    }
    out.write(document_for(seq).dump(2) + "\n");
    return kOk;
}

int cmd_extract(const std::string& path, const std::vector<std::string>& aux_args, int precision,
                const Output& out) {
    auto seq = load(path);
    AuxAssignment<Rat> aux;
    for (const auto& kv : aux_args) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError("--aux wants key=value");
        aux[parse_aux_key(kv.substr(0, eq))] = parse_rat(kv.substr(eq + 1));
    }
    CoreMatrix<Rat> c;
    try {
        c = build_core(seq, aux);
    } catch (const WrongAuxKeys&) {
        std::string keys;
        for (const auto& ij : aux_index_set(seq.n, seq.d)) keys += " " + aux_key(ij);
        throw ParseError("--aux must assign exactly:" + keys);
    }
    auto cm = c.entries();
    if (!psd_status(cm).is_psd() || !recursively_generated(cm))
        throw NotCompletable("assignment does not give a PSD recursively generated core");
    auto mu = witness_from_gamma(c.h, seq.d);
    if (!mu) throw NotCompletable("measure extraction failed for this assignment");
    Rat worst(0);
    for (std::size_t p = 0; p < c.h.size(); ++p) {
        Rat res = abs(mu->moment((int)p) - c.h[p]);
        Rat rel = res / std::max(Rat(1), Rat(abs(c.h[p])));
        if (rel > worst) worst = rel;
    }
    Json doc;
    doc["atoms"] = measure_json(*mu, precision);
    doc["maxRelativeResidual"] = to_decimal(worst, 15);
    out.write(doc.dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact decision procedure for moment sequences on y = x^d"};
    app.require_subcommand(1);

    std::string path, out_path, range = "-1:1:1/10", name, hankel_path;
    bool json = false, catalan = false;
    int precision = 12, n = 0, d = 0;
    std::optional<unsigned> seed;
    std::vector<std::string> aux_args;

    auto* check = app.add_subcommand("check", "validate pureness of an input document");
    check->add_option("path", path)->required();
    check->add_flag("--json", json);
    check->add_option("--out", out_path);

    auto* solve_cmd = app.add_subcommand("solve", "decide existence of a representing measure");
    solve_cmd->add_option("path", path)->required();
    solve_cmd->add_flag("--json", json);
    solve_cmd->add_option("--precision", precision);
    solve_cmd->add_option("--out", out_path);

    auto* scan = app.add_subcommand("scan", "tabulate delta/rho over a grid (d = 4)");
    scan->add_option("path", path)->required();
    scan->add_option("--range", range, "lo:hi:step (rational literals)");
    scan->add_option("--precision", precision);
    scan->add_option("--out", out_path);

    auto* example = app.add_subcommand("example", "print a built-in example document");
    example->add_option("name", name)->required();
    example->add_option("--out", out_path);

    auto* gen = app.add_subcommand("gen", "generate a pure sequence document");
    gen->add_option("--hankel", hankel_path, "JSON array of 2nd+1 rational values");
    gen->add_flag("--catalan", catalan);
    gen->add_option("--random", seed, "seed for a random atomic instance");
    gen->add_option("-n", n)->required();
    gen->add_option("-d", d)->required();
    gen->add_option("--out", out_path);

    auto* extract = app.add_subcommand("extract", "extract a measure for a given completion");
    extract->add_option("path", path)->required();
    extract->add_option("--aux", aux_args, "auxiliary assignment, e.g. A2,5=0");
    extract->add_option("--precision", precision);
    extract->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    Output out{out_path};
    try {
        if (*check) return cmd_check(path, json, out);
        if (*solve_cmd) return cmd_solve(path, json, precision, out);
        if (*scan) return cmd_scan(path, range, precision, out);
        if (*example) return cmd_example(name, out);
        if (*gen) return cmd_gen(hankel_path, catalan, seed, n, d, out);
        if (*extract) return cmd_extract(path, aux_args, precision, out);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UnknownExample& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NotCompletable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotExists;
    } catch (const CompressionNotPD& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotPure;
    } catch (const PreconditionViolated& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNotPure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInconclusive;
    }
    return kUsage;
}
