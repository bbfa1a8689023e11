#pragma once

// Multi-sorted CSP instances over prime-power cyclic sorts.
//
// A raw instance speaks the user's language: variables over arbitrary finite
// Abelian groups, relations as tuple lists, linear congruences, or coset
// descriptions. Normalization rewrites it into the canonical shape the rest
// of the pipeline consumes: one variable per prime-power factor, every
// factor embedded into the per-prime maximal sort Z_{p^m}, every constraint
// a single-prime coset relation, and membership in the embedded image
// recorded as the congruence p^l x = 0.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affimp/coset.hpp"
#include "affimp/errors.hpp"
#include "affimp/group.hpp"
#include "affimp/modint.hpp"
#include "affimp/zpm.hpp"

namespace affimp {

struct RawVariable {
    std::string name;
    AbelianGroup group;
};

struct RelationSpec {
    enum class Kind { Tuples, Linear, Coset };
    Kind kind = Kind::Tuples;
    // Tuples / Coset: entries are flattened factor coordinates over the
    // scope (numeric values already CRT-split), not yet embedded.
    std::vector<Tuple> tuples;
    Tuple coset_base;
    std::vector<Tuple> coset_gens;
    // Linear: sum coeffs[i] * scope[i] = constant over a shared cyclic group.
    std::vector<std::int64_t> lin_coeffs;
    std::int64_t lin_const = 0;
};

struct RawConstraint {
    std::vector<std::size_t> scope;  // raw variable indices
    RelationSpec rel;
};

struct RawInstance {
    std::vector<RawVariable> vars;
    std::vector<RawConstraint> constraints;
};

struct NormVariable {
    std::string name;
    Modulus sort;            // (p, m) with m the per-prime maximum
    int ell;                 // original factor exponent, ell <= m
    std::size_t raw_var;
    std::size_t factor_idx;

    std::int64_t embed_scale() const { return pow_i64(sort.p, sort.m - ell); }
};

struct ConstraintLabel {
    enum class Kind { User, Membership };
    Kind kind = Kind::User;
    std::size_t raw_constraint = 0;  // for User
    std::size_t norm_var = 0;        // for Membership
};

struct NormConstraint {
    std::vector<std::size_t> scope;  // norm variable indices, one per relation coordinate
    CosetRelation rel;               // single-prime, all coordinates of sort (p, m)
    ConstraintLabel label;
    // Congruence view, precomputed: anni * x = rhs over the distinct scope
    // variables in `columns` order.
    std::vector<std::size_t> columns;
    ZpmMatrix anni;
    Row rhs;
};

// How a polynomial variable maps onto normalized variables.
struct PolyVar {
    enum class Kind {
        Component,   // one prime-power factor; value = norm_value / p^{m-l}
        NumericCrt,  // a Z_n variable; value = CRT recombination of its factors
    };
    std::string name;
    Kind kind = Kind::Component;
    std::size_t raw_var = 0;
    std::vector<std::size_t> norm_vars;  // factor order; size 1 for Component
};

struct PreUnsat {
    std::size_t raw_constraint;
    std::int64_t prime;
    Row combination;  // over the constraint's own congruence rows
    std::int64_t contradiction;
    // the congruence the witness combination applies to
    Modulus mod;
    Row sys_row;
    std::int64_t sys_rhs = 0;
};

struct NotAffineInvariant {
    std::size_t raw_constraint;
    AffineViolation violation;  // in raw (unembedded) flattened coordinates
};

struct McspInstance {
    RawInstance raw;
    std::vector<NormVariable> vars;
    std::vector<NormConstraint> constraints;
    std::vector<PolyVar> poly_vars;
    std::vector<std::vector<std::size_t>> raw_to_norm;           // raw var -> norm vars
    std::map<std::int64_t, std::vector<std::size_t>> prime_vars; // prime -> norm vars
    std::optional<PreUnsat> infeasible;

    std::size_t var_index(const std::string& name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return i;
        throw invalid_parameter("instance: unknown variable '" + name + "'");
    }
    const PolyVar* find_poly_var(const std::string& name) const {
        for (const auto& pv : poly_vars)
            if (pv.name == name) return &pv;
        return nullptr;
    }
};

using Assignment = std::vector<std::int64_t>;  // one value per norm variable

struct NormalizeResult {
    std::optional<McspInstance> instance;
    std::optional<NotAffineInvariant> not_affine;
    bool ok() const { return instance.has_value(); }
};

namespace detail {

inline std::vector<Modulus> raw_flat_signature(const RawInstance& raw, const std::vector<std::size_t>& scope) {
    std::vector<Modulus> sig;
    for (auto v : scope)
        for (const auto& f : raw.vars[v].group.factors) sig.emplace_back(f.p, f.l);
    return sig;
}

inline void build_congruence_view(NormConstraint& nc, const std::vector<NormVariable>& vars) {
    // Distinct scope variables in first-occurrence order become the columns;
    // repeated occurrences fold into the same column.
    nc.columns.clear();
    std::vector<std::size_t> coord_col(nc.scope.size());
    for (std::size_t i = 0; i < nc.scope.size(); ++i) {
        auto it = std::find(nc.columns.begin(), nc.columns.end(), nc.scope[i]);
        if (it == nc.columns.end()) {
            coord_col[i] = nc.columns.size();
            nc.columns.push_back(nc.scope[i]);
        } else {
            coord_col[i] = static_cast<std::size_t>(it - nc.columns.begin());
        }
    }
    const Modulus mod = vars[nc.scope[0]].sort;
    SubgroupDescription sub{mod, nc.scope.size(), nc.rel.generators};
    ZpmMatrix h = annihilator(sub);
    nc.anni = ZpmMatrix(mod, nc.columns.size());
    nc.rhs.clear();
    for (const auto& hrow : h.rows) {
        Row folded(nc.columns.size(), 0);
        std::int64_t b = 0;
        for (std::size_t i = 0; i < nc.scope.size(); ++i) {
            folded[coord_col[i]] = mod.reduce(folded[coord_col[i]] + hrow[i]);
            b = mod.reduce(b + hrow[i] * nc.rel.base[i]);
        }
        nc.anni.rows.push_back(std::move(folded));
        nc.rhs.push_back(b);
    }
}

inline std::string unique_name(std::set<std::string>& taken, std::string base) {
    while (taken.count(base)) base += "'";
    taken.insert(base);
    return base;
}

}  // namespace detail

inline NormalizeResult normalize_instance(RawInstance raw) {
    McspInstance inst;
    inst.raw = raw;

    std::map<std::int64_t, int> max_m;
    for (const auto& v : raw.vars)
        for (const auto& f : v.group.factors)
            max_m[f.p] = std::max(max_m[f.p], f.l);

    std::set<std::string> taken;
    inst.raw_to_norm.resize(raw.vars.size());
    for (std::size_t vi = 0; vi < raw.vars.size(); ++vi) {
        const auto& rv = raw.vars[vi];
        for (std::size_t fi = 0; fi < rv.group.factors.size(); ++fi) {
            const auto& f = rv.group.factors[fi];
            NormVariable nv;
            nv.name = detail::unique_name(taken, rv.group.factors.size() == 1
                                                      ? rv.name
                                                      : rv.name + "." + std::to_string(fi));
            nv.sort = Modulus(f.p, max_m[f.p]);
            nv.ell = f.l;
            nv.raw_var = vi;
            nv.factor_idx = fi;
            inst.raw_to_norm[vi].push_back(inst.vars.size());
            inst.prime_vars[f.p].push_back(inst.vars.size());
            inst.vars.push_back(std::move(nv));
        }
    }

    // Polynomial variables: numeric groups keep one CRT-recombined variable,
    // declared products expose one variable per component.
    for (std::size_t vi = 0; vi < raw.vars.size(); ++vi) {
        const auto& rv = raw.vars[vi];
        PolyVar pv;
        pv.raw_var = vi;
        pv.norm_vars = inst.raw_to_norm[vi];
        if (rv.group.numeric && rv.group.factors.size() > 1) {
            pv.kind = PolyVar::Kind::NumericCrt;
            pv.name = rv.name;
            inst.poly_vars.push_back(std::move(pv));
        } else if (rv.group.factors.size() == 1) {
            pv.kind = PolyVar::Kind::Component;
            pv.name = inst.vars[pv.norm_vars[0]].name;
            inst.poly_vars.push_back(std::move(pv));
        } else {
            for (std::size_t fi = 0; fi < rv.group.factors.size(); ++fi) {
                PolyVar comp;
                comp.kind = PolyVar::Kind::Component;
                comp.raw_var = vi;
                comp.norm_vars = {inst.raw_to_norm[vi][fi]};
                comp.name = inst.vars[comp.norm_vars[0]].name;
                inst.poly_vars.push_back(std::move(comp));
            }
        }
    }

    // User constraints.
    for (std::size_t ci = 0; ci < raw.constraints.size(); ++ci) {
        const auto& rc = raw.constraints[ci];
        // Flat coordinate -> (norm var, factor modulus, embed scale).
        std::vector<std::size_t> coord_var;
        std::vector<Modulus> emb_sig;
        std::vector<std::int64_t> emb_scale;
        std::vector<Modulus> raw_sig = detail::raw_flat_signature(raw, rc.scope);
        for (auto v : rc.scope) {
            const auto& rv = raw.vars[v];
            for (std::size_t fi = 0; fi < rv.group.factors.size(); ++fi) {
                std::size_t nv = inst.raw_to_norm[v][fi];
                coord_var.push_back(nv);
                emb_sig.push_back(inst.vars[nv].sort);
                emb_scale.push_back(inst.vars[nv].embed_scale());
            }
        }
        auto embed_tuple = [&](const Tuple& t) {
            Tuple e(t.size());
            for (std::size_t i = 0; i < t.size(); ++i)
                e[i] = emb_sig[i].reduce(raw_sig[i].reduce(t[i]) * emb_scale[i]);
            return e;
        };
        auto unembed_tuple = [&](const Tuple& t) {
            Tuple e(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) e[i] = t[i] / emb_scale[i];
            return e;
        };

        CosetRelation whole;
        if (rc.rel.kind == RelationSpec::Kind::Tuples) {
            if (rc.rel.tuples.empty()) throw invalid_parameter("constraint " + std::to_string(ci) + ": empty relation");
            std::vector<Tuple> emb;
            emb.reserve(rc.rel.tuples.size());
            for (const auto& t : rc.rel.tuples) emb.push_back(embed_tuple(t));
            auto res = coset_from_tuples(emb_sig, emb);
            if (!res.ok()) {
                AffineViolation v = *res.violation;
                v.a = unembed_tuple(v.a);
                v.b = unembed_tuple(v.b);
                v.c = unembed_tuple(v.c);
                v.image = unembed_tuple(v.image);
                return {std::nullopt, NotAffineInvariant{ci, std::move(v)}};
            }
            whole = std::move(*res.relation);
        } else if (rc.rel.kind == RelationSpec::Kind::Coset) {
            std::vector<Tuple> gens;
            gens.reserve(rc.rel.coset_gens.size());
            for (const auto& g : rc.rel.coset_gens) gens.push_back(embed_tuple(g));
            whole = coset_from_parts(emb_sig, embed_tuple(rc.rel.coset_base), std::move(gens));
        } else {  // Linear
            if (rc.rel.lin_coeffs.size() != rc.scope.size())
                throw invalid_parameter("constraint " + std::to_string(ci) + ": coefficient/scope length mismatch");
            std::int64_t n = raw.vars[rc.scope[0]].group.order();
            for (auto v : rc.scope) {
                const auto& g = raw.vars[v].group;
                if (!(g.numeric || g.factors.size() == 1) || g.order() != n)
                    throw invalid_parameter("constraint " + std::to_string(ci) +
                                            ": linear relations need cyclic variables of one shared modulus");
            }
            for (const auto& f : decompose_modulus(n)) {
                Modulus sort(f.p, max_m[f.p]);
                std::int64_t emb = pow_i64(f.p, sort.m - f.l);
                std::vector<std::size_t> block_scope;
                Row coeffs;
                for (std::size_t si = 0; si < rc.scope.size(); ++si) {
                    const auto& g = raw.vars[rc.scope[si]].group;
                    std::size_t fi = 0;
                    while (g.factors[fi].p != f.p) ++fi;
                    std::size_t nv = inst.raw_to_norm[rc.scope[si]][fi];
                    // Extract the p-part of a CRT-composed value: v = (n/p^l) x (mod p^l).
                    std::int64_t u = g.numeric && g.factors.size() > 1 ? (n / f.n) % f.n : 1;
                    std::size_t col = 0;
                    auto it = std::find(block_scope.begin(), block_scope.end(), nv);
                    if (it == block_scope.end()) {
                        col = block_scope.size();
                        block_scope.push_back(nv);
                        coeffs.push_back(0);
                    } else {
                        col = static_cast<std::size_t>(it - block_scope.begin());
                    }
                    coeffs[col] = sort.reduce(coeffs[col] + rc.rel.lin_coeffs[si] * u);
                }
                std::int64_t c0 = ((rc.rel.lin_const % f.n) + f.n) % f.n;
                std::int64_t rhs = sort.reduce(c0 * emb);
                ZpmMatrix h(sort, block_scope.size());
                h.rows.push_back(coeffs);
                auto sol = solve_congruences(h, Row{rhs});
                if (!sol.ok()) {
                    inst.infeasible = PreUnsat{ci,  f.p, sol.witness->combination, sol.witness->contradiction,
                                               sort, coeffs, rhs};
                    continue;
                }
                CosetRelation rel;
                rel.sig.assign(block_scope.size(), sort);
                rel.base = *sol.solution;
                rel.generators = kernel_generators(h).generators;
                NormConstraint nc;
                nc.scope = block_scope;
                nc.rel = std::move(rel);
                nc.label = {ConstraintLabel::Kind::User, ci, 0};
                detail::build_congruence_view(nc, inst.vars);
                inst.constraints.push_back(std::move(nc));
            }
            continue;
        }

        for (auto& block : decompose_relation_by_sort(whole)) {
            NormConstraint nc;
            for (auto coord : block.coords) nc.scope.push_back(coord_var[coord]);
            nc.rel = std::move(block.relation);
            nc.label = {ConstraintLabel::Kind::User, ci, 0};
            detail::build_congruence_view(nc, inst.vars);
            inst.constraints.push_back(std::move(nc));
        }
    }

    // Membership congruences p^l x = 0 for every properly embedded variable.
    for (std::size_t nv = 0; nv < inst.vars.size(); ++nv) {
        const auto& v = inst.vars[nv];
        if (v.ell == v.sort.m) continue;
        NormConstraint nc;
        nc.scope = {nv};
        nc.rel.sig = {v.sort};
        nc.rel.base = {0};
        nc.rel.generators = {{v.embed_scale()}};
        nc.label = {ConstraintLabel::Kind::Membership, 0, nv};
        detail::build_congruence_view(nc, inst.vars);
        inst.constraints.push_back(std::move(nc));
    }

    return {std::move(inst), std::nullopt};
}

struct StackRowLabel {
    int norm_constraint = -1;  // -1 for pin rows
    std::size_t anni_row = 0;
    int pin_var = -1;
    std::int64_t pin_value = 0;
};

struct InstanceUnsat {
    std::int64_t prime = 0;
    Row combination;
    std::vector<StackRowLabel> labels;
    std::int64_t contradiction = 0;
    std::optional<PreUnsat> pre;  // set when infeasibility was found at normalize time
    // the stacked congruence system the combination applies to
    ZpmMatrix system;
    Row rhs;
};

struct SolveOutcome {
    std::optional<Assignment> assignment;
    std::optional<InstanceUnsat> unsat;
    bool ok() const { return assignment.has_value(); }
};

// Audit: the witness combination, applied to the recorded congruence rows,
// must derive 0 = c with c nonzero.
inline bool verify_unsat_witness(const InstanceUnsat& u) {
    if (u.pre) {
        const auto& p = *u.pre;
        if (p.combination.size() != 1) return false;
        if (p.mod.reduce(p.contradiction) == 0) return false;
        for (auto v : p.sys_row)
            if (p.mod.reduce(p.combination[0] * v) != 0) return false;
        return p.mod.reduce(p.combination[0] * p.sys_rhs) == p.mod.reduce(p.contradiction);
    }
    const Modulus mod = u.system.mod;
    if (u.combination.size() != u.system.rows.size()) return false;
    if (mod.reduce(u.contradiction) == 0) return false;
    for (std::size_t c = 0; c < u.system.cols; ++c) {
        std::int64_t acc = 0;
        for (std::size_t i = 0; i < u.system.rows.size(); ++i)
            acc = mod.reduce(acc + u.combination[i] * u.system.rows[i][c]);
        if (acc != 0) return false;
    }
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < u.rhs.size(); ++i)
        acc = mod.reduce(acc + u.combination[i] * u.rhs[i]);
    return acc == mod.reduce(u.contradiction);
}

using Pin = std::pair<std::size_t, std::int64_t>;  // (norm var, value)

inline SolveOutcome solve_with_pins(const McspInstance& inst, const std::vector<Pin>& pins) {
    if (inst.infeasible) {
        InstanceUnsat u;
        u.prime = inst.infeasible->prime;
        u.pre = inst.infeasible;
        u.contradiction = inst.infeasible->contradiction;
        return {std::nullopt, std::move(u)};
    }
    for (const auto& [var, val] : pins) {
        if (var >= inst.vars.size()) throw invalid_parameter("pin: unknown variable");
        if (val < 0 || val >= inst.vars[var].sort.pm)
            throw invalid_parameter("pin: value " + std::to_string(val) + " outside sort " +
                                    inst.vars[var].sort.to_string());
    }
    Assignment a(inst.vars.size(), 0);
    for (const auto& [prime, block_vars] : inst.prime_vars) {
        Modulus mod = inst.vars[block_vars[0]].sort;
        std::map<std::size_t, std::size_t> col_of;
        for (std::size_t k = 0; k < block_vars.size(); ++k) col_of[block_vars[k]] = k;
        ZpmMatrix sys(mod, block_vars.size());
        Row rhs;
        std::vector<StackRowLabel> labels;
        for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
            const auto& nc = inst.constraints[ci];
            if (inst.vars[nc.scope[0]].sort.p != prime) continue;
            for (std::size_t r = 0; r < nc.anni.rows.size(); ++r) {
                Row row(block_vars.size(), 0);
                for (std::size_t c = 0; c < nc.columns.size(); ++c) row[col_of.at(nc.columns[c])] = nc.anni.rows[r][c];
                sys.rows.push_back(std::move(row));
                rhs.push_back(nc.rhs[r]);
                labels.push_back({static_cast<int>(ci), r, -1, 0});
            }
        }
        for (const auto& [var, val] : pins) {
            if (inst.vars[var].sort.p != prime) continue;
            Row row(block_vars.size(), 0);
            row[col_of.at(var)] = 1;
            sys.rows.push_back(std::move(row));
            rhs.push_back(mod.reduce(val));
            labels.push_back({-1, 0, static_cast<int>(var), val});
        }
        auto res = solve_congruences(sys, rhs);
        if (!res.ok()) {
            InstanceUnsat u;
            u.prime = prime;
            u.combination = res.witness->combination;
            u.labels = std::move(labels);
            u.contradiction = res.witness->contradiction;
            u.system = std::move(sys);
            u.rhs = std::move(rhs);
            return {std::nullopt, std::move(u)};
        }
        for (std::size_t k = 0; k < block_vars.size(); ++k) a[block_vars[k]] = (*res.solution)[k];
    }
    return {std::move(a), std::nullopt};
}

inline SolveOutcome solve(const McspInstance& inst) { return solve_with_pins(inst, {}); }

inline SolveOutcome solve_pinned(const McspInstance& inst, std::size_t var, std::int64_t value) {
    return solve_with_pins(inst, {{var, value}});
}

// Sol_var(P) = the projection of the solution set onto one variable.
inline std::vector<std::int64_t> value_set_with_pins(const McspInstance& inst, std::size_t var,
                                                     const std::vector<Pin>& pins) {
    std::vector<std::int64_t> out;
    std::vector<Pin> p = pins;
    p.emplace_back(var, 0);
    for (std::int64_t a = 0; a < inst.vars[var].sort.pm; ++a) {
        p.back().second = a;
        if (solve_with_pins(inst, p).ok()) out.push_back(a);
    }
    return out;
}

inline std::vector<std::int64_t> value_set(const McspInstance& inst, std::size_t var) {
    return value_set_with_pins(inst, var, {});
}

// Exhaustive solution listing in lexicographic order of the variable values
// (declaration order). Refuses when the full grid exceeds `cap`.
inline std::vector<Assignment> enumerate_solutions(const McspInstance& inst, std::uint64_t cap = 1000000) {
    if (inst.infeasible) return {};
    std::uint64_t grid = 1;
    for (const auto& v : inst.vars) {
        grid *= static_cast<std::uint64_t>(v.sort.pm);
        if (grid > cap)
            throw guard_refusal("enumerate_solutions: search space exceeds cap " + std::to_string(cap));
    }
    // Constraints become checkable once their last scope variable is set.
    std::vector<std::vector<std::size_t>> ready(inst.vars.size() + 1);
    for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
        std::size_t last = 0;
        for (auto v : inst.constraints[ci].columns) last = std::max(last, v);
        ready[last + 1].push_back(ci);
    }
    std::vector<Assignment> out;
    Assignment cur(inst.vars.size(), 0);
    // Iterative backtracking over declaration order.
    std::size_t n = inst.vars.size();
    std::vector<std::int64_t> val(n, -1);
    std::size_t d = 0;
    while (true) {
        if (d == n) {
            out.push_back(cur);
            if (n == 0) break;
            --d;
            continue;
        }
        ++val[d];
        if (val[d] >= inst.vars[d].sort.pm) {
            val[d] = -1;
            if (d == 0) break;
            --d;
            continue;
        }
        cur[d] = val[d];
        bool ok = true;
        for (auto ci : ready[d + 1]) {
            const auto& nc = inst.constraints[ci];
            for (std::size_t r = 0; ok && r < nc.anni.rows.size(); ++r) {
                std::int64_t acc = 0;
                const Modulus& mod = inst.vars[nc.columns[0]].sort;
                for (std::size_t c = 0; c < nc.columns.size(); ++c)
                    acc = mod.reduce(acc + nc.anni.rows[r][c] * cur[nc.columns[c]]);
                ok = acc == nc.rhs[r];
            }
            if (!ok) break;
        }
        if (ok) ++d;
    }
    return out;
}

// Values of the polynomial variables under a normalized assignment.
inline std::map<std::string, std::int64_t> poly_values(const McspInstance& inst, const Assignment& a) {
    std::map<std::string, std::int64_t> out;
    for (const auto& pv : inst.poly_vars) {
        if (pv.kind == PolyVar::Kind::Component) {
            const auto& nv = inst.vars[pv.norm_vars[0]];
            std::int64_t scale = nv.embed_scale();
            if (a[pv.norm_vars[0]] % scale != 0)
                throw invariant_violation("assignment violates the membership congruence of " + nv.name);
            out[pv.name] = a[pv.norm_vars[0]] / scale;
        } else {
            const auto& g = inst.raw.vars[pv.raw_var].group;
            std::vector<std::int64_t> coords;
            for (auto nvi : pv.norm_vars) {
                const auto& nv = inst.vars[nvi];
                std::int64_t scale = nv.embed_scale();
                if (a[nvi] % scale != 0)
                    throw invariant_violation("assignment violates the membership congruence of " + nv.name);
                coords.push_back(a[nvi] / scale);
            }
            out[pv.name] = crt_map(g).value_of(coords);
        }
    }
    return out;
}

}  // namespace affimp
