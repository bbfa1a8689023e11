#pragma once

// File formats. One canonical JSON schema for instances and polynomials
// (docs/schema.json), plus a small text parser for hand-written polynomials.
// All serializers emit fields in a fixed order so identical inputs produce
// byte-identical output.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "affimp/cyclotomic.hpp"
#include "affimp/echelon.hpp"
#include "affimp/errors.hpp"
#include "affimp/instance.hpp"
#include "affimp/polynomial.hpp"
#include "affimp/unity.hpp"

namespace affimp {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(what + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic numbers:
//   {"terms":[{"exps":[e1,...,es],"num":"...","den":"..."}], "sorts":[[p,m],...]}

inline Json cyclotomic_to_json(const CyclotomicNumber& x) {
    CyclotomicNumber n = x.normalized();
    Json terms = Json::array();
    for (const auto& [exps, q] : n.terms()) {
        Json t;
        t["exps"] = exps;
        t["num"] = q.num_string();
        t["den"] = q.den_string();
        terms.push_back(std::move(t));
    }
    Json sorts = Json::array();
    for (const auto& s : n.sorts()) sorts.push_back(Json::array({s.p, s.m}));
    Json out;
    out["terms"] = std::move(terms);
    out["sorts"] = std::move(sorts);
    return out;
}

inline CyclotomicNumber cyclotomic_from_json(const Json& j) {
    if (j.is_number_integer()) return CyclotomicNumber(Rational(j.get<long>()));
    if (j.is_string()) return CyclotomicNumber(Rational::from_string(j.get<std::string>()));
    if (!j.is_object() || !j.contains("terms") || !j.contains("sorts"))
        throw parse_error("cyclotomic: expected integer, rational string, or {terms, sorts} object");
    std::vector<Modulus> sorts;
    for (const auto& s : j.at("sorts")) sorts.emplace_back(s.at(0).get<std::int64_t>(), s.at(1).get<int>());
    CyclotomicNumber acc = CyclotomicNumber::zero();
    for (const auto& t : j.at("terms")) {
        std::string num = t.at("num").is_string() ? t.at("num").get<std::string>() : t.at("num").dump();
        std::string den = t.contains("den") ? (t.at("den").is_string() ? t.at("den").get<std::string>() : t.at("den").dump())
                                            : "1";
        Rational q = Rational::from_string(num + "/" + den);
        CyclotomicNumber term(q);
        const auto& exps = t.at("exps");
        if (exps.size() != sorts.size()) throw parse_error("cyclotomic: exps arity does not match sorts");
        for (std::size_t i = 0; i < sorts.size(); ++i) {
            int e = exps[i].get<int>();
            std::int64_t phi = sorts[i].pm - sorts[i].pm / sorts[i].p;
            if (e < 0 || e >= phi) throw parse_error("cyclotomic: exponent outside [0, phi(p^m))");
            term *= omega_power(sorts[i], e);
        }
        acc += term;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Polynomials: {"vars":[...], "terms":[{"coef":..., "exps":[...]}]}
// coef shorthand: integer or "num/den" string for rational coefficients.

inline Json polynomial_to_json(const MultivariatePolynomial& p, const MonomialOrder& order = {OrderKind::Lex}) {
    Json out;
    out["vars"] = *p.vars();
    std::vector<const ExpVec*> keys;
    for (const auto& [e, c] : p.terms()) keys.push_back(&e);
    std::sort(keys.begin(), keys.end(), [&](const ExpVec* a, const ExpVec* b) { return compare(order, *a, *b) > 0; });
    Json terms = Json::array();
    for (const auto* e : keys) {
        const CyclotomicNumber& c = p.terms().at(*e);
        Json t;
        CyclotomicNumber n = c.normalized();
        if (n.is_rational()) t["coef"] = n.rational_part().to_string();
        else t["coef"] = cyclotomic_to_json(n);
        t["exps"] = *e;
        terms.push_back(std::move(t));
    }
    out["terms"] = std::move(terms);
    return out;
}

inline MultivariatePolynomial polynomial_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("vars") || !j.contains("terms"))
        throw parse_error("polynomial: expected {vars, terms}");
    std::vector<std::string> names;
    for (const auto& v : j.at("vars")) names.push_back(v.get<std::string>());
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw parse_error("polynomial: duplicate variable name");
    VarListPtr vars = make_vars(names);
    MultivariatePolynomial p(vars);
    for (const auto& t : j.at("terms")) {
        ExpVec e;
        for (const auto& x : t.at("exps")) {
            int v = x.get<int>();
            if (v < 0) throw parse_error("polynomial: negative exponent");
            e.push_back(v);
        }
        if (e.size() != names.size()) throw parse_error("polynomial: exps arity does not match vars");
        p.add_term(std::move(e), cyclotomic_from_json(t.at("coef")));
    }
    return p;
}

// Text form: terms joined by + or -, each "coef", "mono", or "coef * mono",
// mono = var(^e)(*var(^e))*. Example: "1/4*x1*x2 - x2 + 3".
inline MultivariatePolynomial polynomial_from_text(const std::string& text,
                                                   const std::vector<std::string>& var_names) {
    VarListPtr vars = make_vars(var_names);
    MultivariatePolynomial p(vars);
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
    auto var_index = [&](const std::string& n) {
        for (std::size_t k = 0; k < var_names.size(); ++k)
            if (var_names[k] == n) return k;
        throw parse_error("polynomial text: unknown variable '" + n + "' at offset " + std::to_string(i));
    };
    skip_ws();
    bool first = true;
    while (i < text.size()) {
        int sign = 1;
        skip_ws();
        if (!first || text[i] == '+' || text[i] == '-') {
            if (i >= text.size() || (text[i] != '+' && text[i] != '-'))
                throw parse_error("polynomial text: expected + or - at offset " + std::to_string(i));
            sign = text[i] == '-' ? -1 : 1;
            ++i;
            skip_ws();
        }
        first = false;
        Rational coef(sign);
        ExpVec e(var_names.size(), 0);
        bool saw_factor = false;
        while (true) {
            skip_ws();
            if (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])))) {
                std::size_t start = i;
                while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '/')) ++i;
                coef *= Rational::from_string(text.substr(start, i - start));
                saw_factor = true;
            } else if (i < text.size() && (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
                std::size_t start = i;
                while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
                                           text[i] == '.' || text[i] == '\''))
                    ++i;
                std::size_t vi = var_index(text.substr(start, i - start));
                int exp = 1;
                skip_ws();
                if (i < text.size() && text[i] == '^') {
                    ++i;
                    skip_ws();
                    std::size_t s2 = i;
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                    if (s2 == i) throw parse_error("polynomial text: missing exponent at offset " + std::to_string(i));
                    exp = std::stoi(text.substr(s2, i - s2));
                }
                e[vi] += exp;
                saw_factor = true;
            } else {
                throw parse_error("polynomial text: expected a factor at offset " + std::to_string(i));
            }
            skip_ws();
            if (i < text.size() && text[i] == '*') { ++i; continue; }
            break;
        }
        if (!saw_factor) throw parse_error("polynomial text: empty term");
        p.add_term(std::move(e), CyclotomicNumber(coef));
        skip_ws();
    }
    return p;
}

// ---------------------------------------------------------------------------
// Instances.

inline AbelianGroup group_from_json(const Json& j, const std::string& what) {
    if (j.is_object() && j.contains("modulus"))
        return cyclic_group(j.at("modulus").get<std::int64_t>());
    const Json* arr = nullptr;
    if (j.is_array()) arr = &j;
    else if (j.is_object() && j.contains("group")) arr = &j.at("group");
    if (!arr) throw parse_error(what + ": expected {\"modulus\": n} or {\"group\": [[p,l],...]}");
    std::vector<CyclicFactor> fs;
    for (const auto& f : *arr) {
        if (!f.is_array() || f.size() != 2) throw parse_error(what + ": each factor must be [p, l]");
        fs.emplace_back(f.at(0).get<std::int64_t>(), f.at(1).get<int>());
    }
    return product_group(std::move(fs));
}

namespace detail {

// One element of `g` from JSON: an integer for cyclic/numeric groups, an
// array of per-factor residues otherwise. Returns factor coordinates.
inline std::vector<std::int64_t> element_from_json(const Json& j, const AbelianGroup& g, const std::string& what) {
    if (j.is_number_integer()) {
        if (g.numeric) return crt_map(g).coords_of(j.get<std::int64_t>());
        if (g.factors.size() == 1) {
            std::int64_t v = j.get<std::int64_t>() % g.factors[0].n;
            return {v < 0 ? v + g.factors[0].n : v};
        }
        throw parse_error(what + ": scalar value for a multi-factor group element");
    }
    if (!j.is_array() || j.size() != g.factors.size())
        throw parse_error(what + ": element must list one residue per factor");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < g.factors.size(); ++i) {
        std::int64_t v = j.at(i).get<std::int64_t>() % g.factors[i].n;
        out.push_back(v < 0 ? v + g.factors[i].n : v);
    }
    return out;
}

inline Json element_to_json(const std::vector<std::int64_t>& coords, const AbelianGroup& g) {
    if (g.numeric) return crt_map(g).value_of(coords);
    if (g.factors.size() == 1) return coords[0];
    return Json(coords);
}

}  // namespace detail

inline RawInstance instance_from_json(const Json& j) {
    if (!j.is_object()) throw parse_error("instance: expected a JSON object");
    std::map<std::string, AbelianGroup> sorts;
    std::optional<AbelianGroup> default_sort;
    if (j.contains("modulus") || j.contains("group")) default_sort = group_from_json(j, "instance group");
    if (j.contains("sorts")) {
        for (const auto& [name, spec] : j.at("sorts").items())
            sorts.emplace(name, group_from_json(spec, "sort '" + name + "'"));
    }
    RawInstance raw;
    if (!j.contains("variables")) throw parse_error("instance: missing \"variables\"");
    std::set<std::string> names;
    for (const auto& v : j.at("variables")) {
        RawVariable rv;
        if (v.is_string()) {
            rv.name = v.get<std::string>();
            if (!default_sort) throw parse_error("instance: variable '" + rv.name + "' needs a sort");
            rv.group = *default_sort;
        } else {
            rv.name = v.at("name").get<std::string>();
            if (v.contains("sort")) {
                const auto& s = v.at("sort");
                if (s.is_string()) {
                    auto it = sorts.find(s.get<std::string>());
                    if (it == sorts.end()) throw parse_error("instance: unknown sort '" + s.get<std::string>() + "'");
                    rv.group = it->second;
                } else {
                    rv.group = group_from_json(s, "variable '" + rv.name + "' sort");
                }
            } else if (default_sort) {
                rv.group = *default_sort;
            } else {
                throw parse_error("instance: variable '" + rv.name + "' needs a sort");
            }
        }
        if (!names.insert(rv.name).second) throw parse_error("instance: duplicate variable '" + rv.name + "'");
        raw.vars.push_back(std::move(rv));
    }
    auto var_index = [&](const std::string& n) {
        for (std::size_t i = 0; i < raw.vars.size(); ++i)
            if (raw.vars[i].name == n) return i;
        throw parse_error("instance: unknown variable '" + n + "' in a constraint scope");
    };
    if (j.contains("constraints")) {
        for (const auto& cj : j.at("constraints")) {
            RawConstraint rc;
            if (!cj.contains("scope") || !cj.contains("relation"))
                throw parse_error("constraint: expected {scope, relation}");
            for (const auto& s : cj.at("scope")) rc.scope.push_back(var_index(s.get<std::string>()));
            if (rc.scope.empty()) throw parse_error("constraint: empty scope");
            const Json& rel = cj.at("relation");
            auto read_tuple = [&](const Json& t, const std::string& what) {
                if (!t.is_array() || t.size() != rc.scope.size())
                    throw parse_error(what + ": expected one entry per scope variable");
                Tuple flat;
                for (std::size_t i = 0; i < rc.scope.size(); ++i) {
                    auto coords = detail::element_from_json(t.at(i), raw.vars[rc.scope[i]].group, what);
                    flat.insert(flat.end(), coords.begin(), coords.end());
                }
                return flat;
            };
            if (rel.contains("tuples")) {
                rc.rel.kind = RelationSpec::Kind::Tuples;
                for (const auto& t : rel.at("tuples")) rc.rel.tuples.push_back(read_tuple(t, "relation tuple"));
                if (rc.rel.tuples.empty()) throw parse_error("relation: empty tuple list");
            } else if (rel.contains("linear")) {
                rc.rel.kind = RelationSpec::Kind::Linear;
                const Json& lin = rel.at("linear");
                for (const auto& c : lin.at("coeffs")) rc.rel.lin_coeffs.push_back(c.get<std::int64_t>());
                rc.rel.lin_const = lin.contains("const") ? lin.at("const").get<std::int64_t>() : 0;
                if (rc.rel.lin_coeffs.size() != rc.scope.size())
                    throw parse_error("linear relation: coefficient count does not match the scope");
            } else if (rel.contains("coset")) {
                rc.rel.kind = RelationSpec::Kind::Coset;
                const Json& co = rel.at("coset");
                rc.rel.coset_base = read_tuple(co.at("base"), "coset base");
                if (co.contains("gens"))
                    for (const auto& g : co.at("gens")) rc.rel.coset_gens.push_back(read_tuple(g, "coset generator"));
            } else {
                throw parse_error("relation: expected tuples, linear, or coset");
            }
            raw.constraints.push_back(std::move(rc));
        }
    }
    return raw;
}

// ---------------------------------------------------------------------------
// Output serializers.

inline Json echelon_to_json(const EchelonSystem& s) {
    Json out;
    out["sort"] = Json::array({s.sort.p, s.sort.m});
    out["x"] = s.xnames;
    out["y"] = s.ynames;
    out["alpha"] = s.alpha;
    out["c"] = s.c;
    out["y_orders"] = s.y_order;
    return out;
}

// Values of every raw variable in its declared coordinates.
inline Json assignment_to_json(const McspInstance& inst, const Assignment& a) {
    Json out = Json::object();
    for (std::size_t vi = 0; vi < inst.raw.vars.size(); ++vi) {
        std::vector<std::int64_t> coords;
        for (auto nv : inst.raw_to_norm[vi]) {
            const auto& v = inst.vars[nv];
            coords.push_back(a[nv] / v.embed_scale());
        }
        out[inst.raw.vars[vi].name] = detail::element_to_json(coords, inst.raw.vars[vi].group);
    }
    return out;
}

inline Json unsat_to_json(const McspInstance& inst, const InstanceUnsat& u) {
    Json out;
    out["prime"] = u.prime;
    out["contradiction"] = u.contradiction;
    if (u.pre) {
        out["constraint"] = u.pre->raw_constraint;
        out["combination"] = u.pre->combination;
        out["system"] = Json{{"rows", Json::array({u.pre->sys_row})},
                             {"rhs", Json::array({u.pre->sys_rhs})},
                             {"mod", u.pre->mod.pm}};
    } else {
        Json rows = Json::array();
        for (std::size_t i = 0; i < u.combination.size(); ++i) {
            if (u.combination[i] == 0) continue;
            Json r;
            r["coefficient"] = u.combination[i];
            const auto& lbl = u.labels[i];
            if (lbl.norm_constraint >= 0) {
                const auto& nc = inst.constraints[static_cast<std::size_t>(lbl.norm_constraint)];
                if (nc.label.kind == ConstraintLabel::Kind::User) {
                    r["constraint"] = nc.label.raw_constraint;
                } else {
                    r["membership_of"] = inst.vars[nc.label.norm_var].name;
                }
                r["row"] = lbl.anni_row;
            } else {
                r["pin"] = inst.vars[static_cast<std::size_t>(lbl.pin_var)].name;
                r["value"] = lbl.pin_value;
            }
            rows.push_back(std::move(r));
        }
        out["rows"] = std::move(rows);
        out["system"] = Json{{"rows", u.system.rows}, {"rhs", u.rhs}, {"mod", u.system.mod.pm}};
    }
    return out;
}

inline Json violation_to_json(const RawInstance& raw, const RawConstraint& rc, const AffineViolation& v) {
    auto tuple_json = [&](const Tuple& flat) {
        Json arr = Json::array();
        std::size_t off = 0;
        for (auto vi : rc.scope) {
            const auto& g = raw.vars[vi].group;
            std::vector<std::int64_t> coords(flat.begin() + static_cast<std::ptrdiff_t>(off),
                                             flat.begin() + static_cast<std::ptrdiff_t>(off + g.factors.size()));
            off += g.factors.size();
            arr.push_back(detail::element_to_json(coords, g));
        }
        return arr;
    };
    Json out;
    out["triple"] = Json::array({tuple_json(v.a), tuple_json(v.b), tuple_json(v.c)});
    out["image"] = tuple_json(v.image);
    return out;
}

inline Json certificate_to_json(const MembershipCertificate& cert, const Pipeline& pipe) {
    Json out;
    if (cert.kind == MembershipCertificate::Kind::UnsatWitness) {
        out["kind"] = "unsat_witness";
        out["witness"] = unsat_to_json(pipe.inst, *cert.unsat);
        return out;
    }
    out["kind"] = "cofactors";
    out["transformed"] = polynomial_to_json(cert.transformed);
    Json basis = Json::array();
    for (const auto& g : pipe.record.basis.polys) basis.push_back(polynomial_to_json(g));
    out["basis"] = std::move(basis);
    Json cof = Json::array();
    for (const auto& h : cert.cofactors) cof.push_back(polynomial_to_json(h));
    out["cofactors"] = std::move(cof);
    return out;
}

}  // namespace affimp
