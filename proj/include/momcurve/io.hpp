#pragma once

// JSON input documents and report serialization for the command-line tool.
// Rationals travel as strings ("p/q" or integer literals) so no value ever
// passes through floating point; decimals appear only in presentation fields.

#include <json.hpp>

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "moment.hpp"
#include "rational.hpp"
#include "solver.hpp"

namespace momcurve {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Input documents: {"n": int, "d": int, "moments": [{"i","j","v"}...]}.
// ---------------------------------------------------------------------------

inline MomentSequence<Rat> parse_input(const Json& doc) {
    if (!doc.is_object()) throw ParseError("input document must be a JSON object");
    if (!doc.contains("n") || !doc.contains("d") || !doc.contains("moments"))
        throw ParseError("input document needs keys n, d, moments");
    if (!doc["n"].is_number_integer() || !doc["d"].is_number_integer())
        throw ParseError("n and d must be integers");
    int n = doc["n"].get<int>(), d = doc["d"].get<int>();
    if (n <= 0 || d <= 0) throw ParseError("n and d must be positive");
    if (!doc["moments"].is_array()) throw ParseError("moments must be an array");

    MomentSequence<Rat> seq(n, d);
    std::vector<char> seen(seq.beta_.size(), 0);
    for (const auto& m : doc["moments"]) {
        if (!m.is_object() || !m.contains("i") || !m.contains("j") || !m.contains("v"))
            throw ParseError("each moment needs keys i, j, v");
        if (!m["i"].is_number_integer() || !m["j"].is_number_integer() || !m["v"].is_string())
            throw ParseError("moment indices must be integers and v a rational string");
        int i = m["i"].get<int>(), j = m["j"].get<int>();
        if (i < 0 || j < 0 || i + j > 2 * n) throw ParseError("moment index out of range");
        std::size_t pos = (std::size_t)dlex_position(i, j) - 1;
        if (seen[pos]) throw ParseError("duplicate moment index");
        seen[pos] = 1;
        try {
            seq.beta(i, j) = parse_rat(m["v"].get<std::string>());
        } catch (const Error&) {
            throw ParseError("unparsable rational literal: " + m["v"].get<std::string>());
        }
    }
    for (char s : seen)
        if (!s) throw ParseError("moments must cover every index with i+j <= 2n");
    if (!seq.normalized()) throw ParseError("beta_00 must equal 1");
    return seq;
}

inline MomentSequence<Rat> parse_input_text(const std::string& text) {
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("invalid JSON");
    return parse_input(doc);
}

inline MomentSequence<Rat> read_input(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_input_text(text);
}

/// Canonical document for a sequence: moments in degree-lex order.
inline Json document_for(const MomentSequence<Rat>& seq) {
    Json doc;
    doc["n"] = seq.n;
    doc["d"] = seq.d;
    doc["moments"] = Json::array();
    for (const auto& m : monomials_up_to(2 * seq.n))
        doc["moments"].push_back(
            Json{{"i", m.i}, {"j", m.j}, {"v", to_string(seq.beta(m.i, m.j))}});
    return doc;
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

inline std::string aux_key(const IndexPair& ij) {
    return "A" + std::to_string(ij.first) + "," + std::to_string(ij.second);
}

/// Accepts "Ai,j" and the compact "Aij" form for single-digit indices.
inline IndexPair parse_aux_key(const std::string& key) {
    if (key.size() < 3 || (key[0] != 'A' && key[0] != 'a'))
        throw ParseError("auxiliary key must look like A3,6 or A36");
    std::string body = key.substr(1);
    auto comma = body.find(',');
    try {
        if (comma != std::string::npos)
            return {std::stoi(body.substr(0, comma)), std::stoi(body.substr(comma + 1))};
        if (body.size() == 2) return {body[0] - '0', body[1] - '0'};
    } catch (const std::exception&) {
    }
    throw ParseError("unparsable auxiliary key: " + key);
}

inline Json measure_json(const AtomicMeasure& mu, int precision) {
    Json atoms = Json::array();
    for (const auto& at : mu.atoms)
        atoms.push_back(Json{{"x", to_string(at.x)},
                             {"xDecimal", to_decimal(at.x, precision)},
                             {"weight", to_string(at.weight)},
                             {"exact", at.exact}});
    return atoms;
}

inline Json certificate_json(const CurveCertificate<Rat>& cert) {
    Json c;
    c["kind"] = to_string(cert.kind);
    if (cert.kind == CertKind::StrictlyPositive || cert.kind == CertKind::SmallZeroSet) {
        Json r = Json::array(), s = Json::array();
        for (const auto& v : cert.r_hat) r.push_back(to_string(v));
        for (const auto& v : cert.s_hat) s.push_back(to_string(v));
        c["rHat"] = std::move(r);
        c["sHat"] = std::move(s);
    }
    if (cert.kind == CertKind::StrictlyPositive) c["epsilon"] = to_string(cert.epsilon);
    if (cert.kind == CertKind::SmallZeroSet) c["zeroBound"] = cert.zero_bound;
    if (cert.kind == CertKind::NonPsdSubmatrix) c["submatrixIndices"] = cert.submatrix_indices;
    return c;
}

inline Json report_json(const SolverReport<Rat>& rep, int precision) {
    Json out;
    out["verdict"] = to_string(rep.verdict);
    out["phi"] = rep.phi ? Json(to_string(*rep.phi)) : Json(nullptr);
    out["lambda"] = rep.lambda ? Json(to_string(*rep.lambda)) : Json(nullptr);
    out["aBounds"] =
        rep.a_lo.empty() ? Json(nullptr) : Json(Json::array({rep.a_lo, rep.a_hi}));
    if (!rep.aux.empty() || rep.measure.has_value()) {
        Json w;
        Json aux = Json::object();
        for (const auto& [ij, v] : rep.aux) aux[aux_key(ij)] = to_string(v);
        w["aux"] = std::move(aux);
        w["auxApproximate"] = rep.aux_approximate;
        w["atoms"] = rep.measure ? measure_json(*rep.measure, precision) : Json::array();
        out["witness"] = std::move(w);
    } else {
        out["witness"] = nullptr;
    }
    out["certificate"] = rep.certificate ? certificate_json(*rep.certificate) : Json(nullptr);
    if (!rep.endpoints.empty()) {
        Json eps = Json::array();
        for (const auto& ep : rep.endpoints) {
            Json e;
            e["exact"] = ep.exact;
            e["a"] = ep.a_str;
            e["a27"] = ep.a27_str;
            e["a37"] = ep.a37_str;
            e["relation"] = ep.relation_str;
            e["propagates"] = ep.propagates;
            e["psd"] = ep.psd;
            e["recursivelyGenerated"] = ep.rec_gen;
            e["accepted"] = ep.accepted;
            eps.push_back(std::move(e));
        }
        out["endpoints"] = std::move(eps);
    }
    if (!rep.feasible_description.empty()) out["feasibleDescription"] = rep.feasible_description;
    return out;
}

}  // namespace momcurve
