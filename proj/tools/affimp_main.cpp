// affimp command-line front end.
//
// Exit codes: 0 command completed (verdict in the payload), 2 input or
// parse error, 3 internal invariant violation (a bug), 4 a resource guard
// refused the request.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affimp/json_io.hpp"
#include "affimp/unity.hpp"
#include "affimp/ximp.hpp"

namespace {

using namespace affimp;

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunConfig {
    std::string instance_path;
    std::string poly_path;
    int degree = 1;
    std::uint64_t cap = 1000000;
    bool witness = false;
    std::string format = "json";
};

Limits limits_of(const RunConfig& cfg) {
    Limits lim;
    lim.enumeration_cap = cfg.cap;
    lim.term_guard = 1000000;
    return lim;
}

RawInstance load_instance(const RunConfig& cfg) {
    return instance_from_json(parse_json(read_input(cfg.instance_path), "instance"));
}

// Polynomials are accepted as JSON ({vars, terms}) or, as a convenience, in
// the text form "1/4*x1*x2 - x2 + 3" (variables default to the instance's).
MultivariatePolynomial load_poly(const std::string& path, const McspInstance& inst) {
    std::string text = read_input(path);
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i < text.size() && text[i] == '{') return polynomial_from_json(parse_json(text, "polynomial"));
    std::vector<std::string> names;
    for (const auto& pv : inst.poly_vars) names.push_back(pv.name);
    return polynomial_from_text(text, names);
}

// Checks the polynomial's variables against the instance and lifts it onto
// the full polynomial-variable list.
MultivariatePolynomial align_poly(const MultivariatePolynomial& f, const McspInstance& inst) {
    for (const auto& n : *f.vars())
        if (!inst.find_poly_var(n))
            throw parse_error("polynomial: variable '" + n + "' is not a polynomial variable of the instance");
    return f.on_vars(poly_var_list(inst));
}

void emit(const Json& payload, const RunConfig& cfg) {
    if (cfg.format == "json") {
        std::cout << payload.dump(2) << "\n";
        return;
    }
    // text: one "key: value" line per top-level field
    for (const auto& [k, v] : payload.items())
        std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
}

Pipeline require_pipeline(PipelineResult&& pr, const RawInstance& raw) {
    if (pr.ok()) return std::move(*pr.pipeline);
    const auto& na = *pr.not_affine;
    Json payload;
    payload["error"] = "constraint relation is not affine-invariant";
    payload["constraint"] = na.raw_constraint;
    payload["witness"] = violation_to_json(raw, raw.constraints[na.raw_constraint], na.violation);
    std::cout << payload.dump(2) << "\n";
    throw parse_error("constraint " + std::to_string(na.raw_constraint) + " is not affine-invariant");
}

int cmd_decide(const RunConfig& cfg, bool with_certificate) {
    RawInstance raw = load_instance(cfg);
    Limits lim = limits_of(cfg);
    Pipeline pipe = require_pipeline(build_pipeline(raw, lim), raw);
    MultivariatePolynomial f = align_poly(load_poly(cfg.poly_path, pipe.inst), pipe.inst);
    DecideOutcome dec = decide_imp(f, pipe, lim, cfg.witness);
    Json payload;
    payload["verdict"] = dec.member ? "member" : "non_member";
    if (dec.instance_unsat) {
        payload["instance"] = "unsat";
    } else {
        payload["remainder"] = polynomial_to_json(dec.remainder);
    }
    if (dec.witness) payload["witness"] = Json(*dec.witness);
    else if (dec.witness_search_skipped) payload["witness"] = "skipped: cap exceeded";
    if (with_certificate && dec.member) {
        MembershipCertificate cert = certify(f, pipe, lim);
        payload["certificate"] = certificate_to_json(cert, pipe);
    }
    emit(payload, cfg);
    return 0;
}

int cmd_solve(const RunConfig& cfg) {
    RawInstance raw = load_instance(cfg);
    auto norm = normalize_instance(raw);
    if (!norm.ok()) require_pipeline({std::nullopt, norm.not_affine}, raw);
    const McspInstance& inst = *norm.instance;
    auto res = solve(inst);
    Json payload;
    if (res.ok()) {
        payload["status"] = "sat";
        payload["assignment"] = assignment_to_json(inst, *res.assignment);
    } else {
        payload["status"] = "unsat";
        payload["witness"] = unsat_to_json(inst, *res.unsat);
    }
    emit(payload, cfg);
    return 0;
}

int cmd_enumerate(const RunConfig& cfg) {
    RawInstance raw = load_instance(cfg);
    auto norm = normalize_instance(raw);
    if (!norm.ok()) require_pipeline({std::nullopt, norm.not_affine}, raw);
    const McspInstance& inst = *norm.instance;
    auto sols = enumerate_solutions(inst, cfg.cap);
    Json arr = Json::array();
    for (const auto& a : sols) arr.push_back(assignment_to_json(inst, a));
    Json payload;
    payload["count"] = sols.size();
    payload["solutions"] = std::move(arr);
    emit(payload, cfg);
    return 0;
}

int cmd_check_affine(const RunConfig& cfg) {
    RawInstance raw = load_instance(cfg);
    Json arr = Json::array();
    bool all_ok = true;
    for (std::size_t ci = 0; ci < raw.constraints.size(); ++ci) {
        RawInstance one;
        one.vars = raw.vars;
        one.constraints = {raw.constraints[ci]};
        Json entry;
        entry["constraint"] = ci;
        auto norm = normalize_instance(one);
        if (norm.ok()) {
            entry["affine"] = true;
        } else {
            entry["affine"] = false;
            entry["witness"] = violation_to_json(raw, raw.constraints[ci], norm.not_affine->violation);
            all_ok = false;
        }
        arr.push_back(std::move(entry));
    }
    Json payload;
    payload["all_affine"] = all_ok;
    payload["constraints"] = std::move(arr);
    emit(payload, cfg);
    return 0;
}

int cmd_transform(const RunConfig& cfg) {
    RawInstance raw = load_instance(cfg);
    Limits lim = limits_of(cfg);
    Pipeline pipe = require_pipeline(build_pipeline(raw, lim), raw);
    Json payload;
    if (pipe.unsat) {
        payload["instance"] = "unsat";
        payload["witness"] = unsat_to_json(pipe.inst, *pipe.unsat_info);
        emit(payload, cfg);
        return 0;
    }
    Json ech = Json::array();
    for (const auto& s : pipe.record.systems) ech.push_back(echelon_to_json(s));
    payload["echelon"] = std::move(ech);
    Json basis = Json::array();
    for (const auto& g : pipe.record.basis.polys) basis.push_back(polynomial_to_json(g));
    payload["unity_basis"] = Json{{"vars", *pipe.record.basis.vars}, {"polys", std::move(basis)}};
    Json phis = Json::object();
    Json phi_invs = Json::object();
    for (const auto& [p, poly] : pipe.record.phi) phis[std::to_string(p)] = polynomial_to_json(poly);
    for (const auto& [p, poly] : pipe.record.phi_inv) phi_invs[std::to_string(p)] = polynomial_to_json(poly);
    payload["phi"] = std::move(phis);
    payload["phi_inverse"] = std::move(phi_invs);
    Json reps = Json::object();
    for (const auto& [name, poly] : pipe.record.replacements) reps[name] = polynomial_to_json(poly);
    payload["replacements"] = std::move(reps);
    if (!cfg.poly_path.empty()) {
        MultivariatePolynomial f = align_poly(load_poly(cfg.poly_path, pipe.inst), pipe.inst);
        payload["transformed"] = polynomial_to_json(transform_poly(f, pipe.record, lim));
    }
    emit(payload, cfg);
    return 0;
}

int cmd_gb(const RunConfig& cfg) {
    RawInstance raw = load_instance(cfg);
    Limits lim = limits_of(cfg);
    Pipeline pipe = require_pipeline(build_pipeline(raw, lim), raw);
    TruncatedBasis tb = truncated_gb(pipe, cfg.degree, lim);
    Json arr = Json::array();
    const MonomialOrder grlex{OrderKind::Grlex};
    for (const auto& b : tb.polys) arr.push_back(polynomial_to_json(b, grlex));
    Json payload;
    payload["degree"] = tb.degree_bound;
    payload["vars"] = *tb.vars;
    payload["basis"] = std::move(arr);
    emit(payload, cfg);
    return 0;
}

int cmd_ximp(const RunConfig& cfg, const std::optional<std::size_t>& pin) {
    RawInstance raw = load_instance(cfg);
    Limits lim = limits_of(cfg);
    Pipeline pipe = require_pipeline(build_pipeline(raw, lim), raw);
    Json pj = parse_json(read_input(cfg.poly_path), "ximp polynomials");
    if (!pj.is_object() || !pj.contains("polys")) throw parse_error("ximp: expected {\"polys\": [...]}");
    XimpQuery q;
    for (const auto& g : pj.at("polys"))
        q.polys.push_back(align_poly(polynomial_from_json(g), pipe.inst));
    q.pin = pin;
    auto c = ximp_search(q, pipe, lim);
    Json payload;
    if (c) {
        Json arr = Json::array();
        for (const auto& ci : *c) {
            CyclotomicNumber n = ci.normalized();
            if (n.is_rational()) arr.push_back(n.rational_part().to_string());
            else arr.push_back(cyclotomic_to_json(n));
        }
        payload["c"] = std::move(arr);
    } else {
        payload["c"] = nullptr;
    }
    emit(payload, cfg);
    return 0;
}

// Brute-force reference: enumerate all solutions, evaluate f at each.
int cmd_oracle(const RunConfig& cfg) {
    RawInstance raw = load_instance(cfg);
    auto norm = normalize_instance(raw);
    if (!norm.ok()) require_pipeline({std::nullopt, norm.not_affine}, raw);
    const McspInstance& inst = *norm.instance;
    MultivariatePolynomial f = align_poly(load_poly(cfg.poly_path, inst), inst);
    bool member = true;
    std::optional<Json> witness;
    for (const auto& a : enumerate_solutions(inst, cfg.cap)) {
        auto vals = poly_values(inst, a);
        std::vector<CyclotomicNumber> point;
        for (const auto& vn : *f.vars()) point.emplace_back(Rational(static_cast<long>(vals.at(vn))));
        if (!f.evaluate(point).is_zero()) {
            member = false;
            witness = Json(vals);
            break;
        }
    }
    Json payload;
    payload["verdict"] = member ? "member" : "non_member";
    if (witness) payload["witness"] = *witness;
    emit(payload, cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ideal membership for CSPs over finite Abelian groups, via exact cyclotomic Groebner reduction"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::optional<std::size_t> pin;
    long pin_raw = -1;

    auto add_common = [&](CLI::App* sub, bool with_poly, bool poly_optional = false) {
        sub->add_option("instance", cfg.instance_path, "instance file (JSON, '-' for stdin)")->required();
        if (with_poly) {
            auto* o = sub->add_option("poly", cfg.poly_path, "polynomial file (JSON or text, '-' for stdin)");
            if (!poly_optional) o->required();
        }
        sub->add_option("--cap", cfg.cap, "enumeration / witness-search bound");
        sub->add_option("--format", cfg.format, "output format: json | text")
            ->check(CLI::IsMember({"json", "text"}));
    };

    auto* decide = app.add_subcommand("decide", "decide ideal membership of a polynomial");
    add_common(decide, true);
    decide->add_flag("--witness", cfg.witness, "search for a solution where the polynomial is nonzero");

    auto* certifyc = app.add_subcommand("certify", "decide and emit a membership certificate");
    add_common(certifyc, true);
    certifyc->add_flag("--witness", cfg.witness, "search for a non-membership witness");

    auto* solvec = app.add_subcommand("solve", "find one solution of the instance");
    add_common(solvec, false);

    auto* enumc = app.add_subcommand("enumerate", "list all solutions (guarded by --cap)");
    add_common(enumc, false);

    auto* affc = app.add_subcommand("check-affine", "test every constraint for affine invariance");
    add_common(affc, false);

    auto* transc = app.add_subcommand("transform", "dump the unity basis, phi, and the transformed polynomial");
    add_common(transc, true, true);

    auto* gbc = app.add_subcommand("gb", "construct a d-truncated Groebner basis");
    add_common(gbc, false);
    gbc->add_option("--degree", cfg.degree, "degree bound d")->required();

    auto* ximpc = app.add_subcommand("ximp", "find coefficients placing a combination in the ideal");
    add_common(ximpc, true);
    ximpc->add_option("--pin", pin_raw, "index of the coefficient pinned to 1");

    auto* oraclec = app.add_subcommand("oracle", "brute-force membership check (guarded by --cap)");
    add_common(oraclec, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (pin_raw >= 0) pin = static_cast<std::size_t>(pin_raw);
        if (decide->parsed()) return cmd_decide(cfg, false);
        if (certifyc->parsed()) return cmd_decide(cfg, true);
        if (solvec->parsed()) return cmd_solve(cfg);
        if (enumc->parsed()) return cmd_enumerate(cfg);
        if (affc->parsed()) return cmd_check_affine(cfg);
        if (transc->parsed()) return cmd_transform(cfg);
        if (gbc->parsed()) return cmd_gb(cfg);
        if (ximpc->parsed()) return cmd_ximp(cfg, pin);
        if (oraclec->parsed()) return cmd_oracle(cfg);
        return 2;
    } catch (const guard_refusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 4;
    } catch (const invariant_violation& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const parse_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_parameter& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_state& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
