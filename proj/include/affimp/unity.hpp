#pragma once

// The roots-of-unity transform. Each per-prime echelon system
//   x_j = alpha_{1,j} y_1 + ... + alpha_{r,j} y_r + c_j   (mod p^m)
// becomes, over the p^m-th roots of unity with w primitive,
//   x_j - w^{c_j} * y_1^{alpha_{1,j}} ... y_r^{alpha_{r,j}},
// together with the domain polynomials y_i^{p^m} - 1. Under the lex order
// with every x ahead of every y, all leading monomials are pairwise
// relatively prime, so the union over the primes is a Groebner basis of the
// transformed instance's vanishing ideal, and ideal membership is a single
// division: remainder zero iff member.
//
// The integer world and the unity world are exchanged by the interpolation
// polynomials phi (a -> w^a) and phi^{-1} (w^a -> a).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affimp/cyclotomic.hpp"
#include "affimp/echelon.hpp"
#include "affimp/errors.hpp"
#include "affimp/instance.hpp"
#include "affimp/polynomial.hpp"

namespace affimp {

struct Limits {
    std::uint64_t enumeration_cap = 1000000;  // oracle / witness-search grid bound
    std::uint64_t term_guard = 1000000;       // substitution expansion bound
};

struct UnityBasis {
    VarListPtr vars;                      // all x names (prime-ascending), then all y names
    std::vector<Modulus> var_sort;
    std::vector<bool> is_y;
    std::vector<std::int64_t> caps;       // p^m per variable
    std::vector<MultivariatePolynomial> polys;  // x-polynomials, then y-domain polynomials
    MonomialOrder order{OrderKind::Lex};

    std::size_t var_index(const std::string& name) const {
        auto it = std::find(vars->begin(), vars->end(), name);
        if (it == vars->end()) throw invalid_parameter("unity basis: unknown variable '" + name + "'");
        return static_cast<std::size_t>(it - vars->begin());
    }
};

inline UnityBasis build_unity_basis(const std::vector<EchelonSystem>& systems) {
    std::set<std::int64_t> primes;
    for (const auto& s : systems)
        if (!primes.insert(s.sort.p).second)
            throw invalid_parameter("build_unity_basis: duplicate prime across systems");
    std::vector<const EchelonSystem*> ordered;
    for (const auto& s : systems) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const EchelonSystem* a, const EchelonSystem* b) { return a->sort.p < b->sort.p; });

    UnityBasis out;
    std::vector<std::string> names;
    for (const auto* s : ordered)
        for (const auto& n : s->xnames) { names.push_back(n); out.var_sort.push_back(s->sort); out.is_y.push_back(false); }
    for (const auto* s : ordered)
        for (const auto& n : s->ynames) { names.push_back(n); out.var_sort.push_back(s->sort); out.is_y.push_back(true); }
    out.vars = make_vars(std::move(names));
    for (const auto& m : out.var_sort) out.caps.push_back(m.pm);

    for (const auto* s : ordered) {
        for (std::size_t j = 0; j < s->xnames.size(); ++j) {
            MultivariatePolynomial g(out.vars);
            ExpVec ex(out.vars->size(), 0);
            ex[out.var_index(s->xnames[j])] = 1;
            g.add_term(ex, CyclotomicNumber::one());
            ExpVec ey(out.vars->size(), 0);
            for (std::size_t i = 0; i < s->ynames.size(); ++i)
                ey[out.var_index(s->ynames[i])] = static_cast<int>(s->alpha[i][j]);
            g.add_term(ey, -omega_power(s->sort, s->c[j]));
            out.polys.push_back(std::move(g));
        }
    }
    for (const auto* s : ordered) {
        for (const auto& yn : s->ynames) {
            MultivariatePolynomial g(out.vars);
            ExpVec ey(out.vars->size(), 0);
            ey[out.var_index(yn)] = static_cast<int>(s->sort.pm);
            g.add_term(ey, CyclotomicNumber::one());
            g.add_term(ExpVec(out.vars->size(), 0), CyclotomicNumber(-1));
            out.polys.push_back(std::move(g));
        }
    }
    return out;
}

// phi interpolates (a, w^a) for a in [0, p^m); phi^{-1} interpolates the
// reverse direction. Univariate over the single variable "t".
inline MultivariatePolynomial phi_polynomial(const Modulus& sort) {
    std::vector<std::pair<CyclotomicNumber, CyclotomicNumber>> pts;
    for (std::int64_t a = 0; a < sort.pm; ++a)
        pts.emplace_back(CyclotomicNumber(Rational(static_cast<long>(a))), omega_power(sort, a));
    return interpolate(pts, make_vars({"t"}));
}

inline MultivariatePolynomial phi_inverse_polynomial(const Modulus& sort) {
    std::vector<std::pair<CyclotomicNumber, CyclotomicNumber>> pts;
    for (std::int64_t a = 0; a < sort.pm; ++a)
        pts.emplace_back(omega_power(sort, a), CyclotomicNumber(Rational(static_cast<long>(a))));
    return interpolate(pts, make_vars({"t"}));
}

struct TransformRecord {
    std::vector<EchelonSystem> systems;  // ascending prime
    UnityBasis basis;
    std::map<std::int64_t, MultivariatePolynomial> phi;       // per prime
    std::map<std::int64_t, MultivariatePolynomial> phi_inv;   // per prime
    std::map<std::string, MultivariatePolynomial> replacements;  // per polynomial variable
};

namespace detail {

// phi^{-1}(X_v) / p^{m-l}: the integer value of one embedded component.
inline MultivariatePolynomial component_replacement(const UnityBasis& basis,
                                                    const MultivariatePolynomial& phi_inv,
                                                    const std::string& unity_var, std::int64_t embed_scale) {
    std::size_t idx = basis.var_index(unity_var);
    Rational inv_scale = Rational(1, static_cast<long>(embed_scale));
    MultivariatePolynomial out(basis.vars);
    for (const auto& [e, c] : phi_inv.terms()) {
        ExpVec e2(basis.vars->size(), 0);
        e2[idx] = e[0];
        out.add_term(std::move(e2), c.scaled(inv_scale));
    }
    return out;
}

}  // namespace detail

inline TransformRecord make_transform_record(const McspInstance& inst, std::vector<EchelonSystem> systems,
                                             const Limits& limits = {}) {
    std::sort(systems.begin(), systems.end(),
              [](const EchelonSystem& a, const EchelonSystem& b) { return a.sort.p < b.sort.p; });
    TransformRecord rec;
    rec.basis = build_unity_basis(systems);
    rec.systems = std::move(systems);
    for (const auto& s : rec.systems) {
        rec.phi.emplace(s.sort.p, phi_polynomial(s.sort));
        rec.phi_inv.emplace(s.sort.p, phi_inverse_polynomial(s.sort));
    }
    for (const auto& pv : inst.poly_vars) {
        if (pv.kind == PolyVar::Kind::Component) {
            const auto& nv = inst.vars[pv.norm_vars[0]];
            rec.replacements.emplace(pv.name,
                                     detail::component_replacement(rec.basis, rec.phi_inv.at(nv.sort.p),
                                                                   nv.name, nv.embed_scale()));
        } else {
            // CRT-composed variable: interpolate pi over the factor grid,
            // then substitute each factor's component replacement.
            const auto& g = inst.raw.vars[pv.raw_var].group;
            CrtMap crt = crt_map(g);
            std::vector<std::string> znames;
            for (std::size_t i = 0; i < g.factors.size(); ++i) znames.push_back("z" + std::to_string(i));
            VarListPtr zvars = make_vars(znames);
            // Tensor Lagrange over the integer grid prod [0, n_i).
            MultivariatePolynomial h(zvars);
            std::vector<std::int64_t> coords(g.factors.size(), 0);
            bool done = false;
            while (!done) {
                Rational val(static_cast<long>(crt.value_of(coords)));
                MultivariatePolynomial term = MultivariatePolynomial::constant(zvars, CyclotomicNumber(val));
                for (std::size_t i = 0; i < g.factors.size(); ++i) {
                    for (std::int64_t b = 0; b < g.factors[i].n; ++b) {
                        if (b == coords[i]) continue;
                        Rational dinv = Rational(static_cast<long>(coords[i] - b)).inverse();
                        MultivariatePolynomial lin(zvars);
                        ExpVec e(zvars->size(), 0);
                        e[i] = 1;
                        lin.add_term(e, CyclotomicNumber(dinv));
                        lin.add_term(ExpVec(zvars->size(), 0), CyclotomicNumber(Rational(static_cast<long>(-b)) * dinv));
                        term = term * lin;
                    }
                }
                h = h + term;
                done = true;
                for (std::size_t i = coords.size(); i-- > 0;) {
                    if (++coords[i] < g.factors[i].n) { done = false; break; }
                    coords[i] = 0;
                }
            }
            Substitution sub;
            sub.target = rec.basis.vars;
            sub.caps = rec.basis.caps;
            for (std::size_t i = 0; i < g.factors.size(); ++i) {
                const auto& nv = inst.vars[pv.norm_vars[i]];
                sub.replace.emplace(znames[i],
                                    detail::component_replacement(rec.basis, rec.phi_inv.at(nv.sort.p),
                                                                  nv.name, nv.embed_scale()));
            }
            rec.replacements.emplace(pv.name, substitute_reduce(h, sub, limits.term_guard));
        }
    }
    return rec;
}

// p' = p(phi^{-1}(...)), per-variable degree below p^m by construction.
inline MultivariatePolynomial transform_poly(const MultivariatePolynomial& p, const TransformRecord& rec,
                                             const Limits& limits = {}) {
    Substitution sub;
    sub.target = rec.basis.vars;
    sub.caps = rec.basis.caps;
    sub.replace = rec.replacements;
    return substitute_reduce(p, sub, limits.term_guard);
}

struct MembershipCertificate {
    enum class Kind { Cofactors, UnsatWitness };
    Kind kind = Kind::Cofactors;
    MultivariatePolynomial transformed;                // p'
    std::vector<MultivariatePolynomial> cofactors;     // aligned with the basis polynomials
    std::optional<InstanceUnsat> unsat;
};

inline bool verify_certificate(const MembershipCertificate& cert, const UnityBasis& basis) {
    if (cert.kind == MembershipCertificate::Kind::UnsatWitness) return cert.unsat.has_value();
    if (cert.cofactors.size() != basis.polys.size()) return false;
    MultivariatePolynomial acc(basis.vars);
    for (std::size_t i = 0; i < basis.polys.size(); ++i) acc = acc + cert.cofactors[i] * basis.polys[i];
    return acc == cert.transformed;
}

struct Pipeline {
    McspInstance inst;
    bool unsat = false;
    std::optional<InstanceUnsat> unsat_info;
    TransformRecord record;  // valid when !unsat
};

struct PipelineResult {
    std::optional<Pipeline> pipeline;
    std::optional<NotAffineInvariant> not_affine;
    bool ok() const { return pipeline.has_value(); }
};

inline PipelineResult build_pipeline(RawInstance raw, const Limits& limits = {}) {
    auto norm = normalize_instance(std::move(raw));
    if (!norm.ok()) return {std::nullopt, std::move(norm.not_affine)};
    Pipeline p;
    p.inst = std::move(*norm.instance);
    std::vector<EchelonSystem> systems;
    for (auto& r : parametrize_all(p.inst)) {
        if (!r.ok()) {
            p.unsat = true;
            p.unsat_info = std::move(r.unsat);
            return {std::move(p), std::nullopt};
        }
        systems.push_back(std::move(*r.system));
    }
    p.record = make_transform_record(p.inst, std::move(systems), limits);
    return {std::move(p), std::nullopt};
}

struct DecideOutcome {
    bool member = false;
    bool instance_unsat = false;
    MultivariatePolynomial transformed;
    MultivariatePolynomial remainder;
    std::optional<std::map<std::string, std::int64_t>> witness;  // polynomial-variable point with f != 0
    bool witness_search_skipped = false;
};

namespace detail {

// Walk the product of the graded parameter ranges prod [0, p^{o_i}) over all
// systems; these cover every solution exactly once.
template <typename Fn>
inline bool for_each_solution(const McspInstance& inst, const TransformRecord& rec, std::uint64_t cap, Fn&& fn) {
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (system, parameter)
    std::uint64_t total = 1;
    for (std::size_t s = 0; s < rec.systems.size(); ++s) {
        for (std::size_t i = 0; i < rec.systems[s].y_order.size(); ++i) {
            slots.emplace_back(s, i);
            total *= static_cast<std::uint64_t>(rec.systems[s].y_order[i]);
            if (total > cap) return false;
        }
    }
    std::vector<std::int64_t> y(slots.size(), 0);
    while (true) {
        Assignment a(inst.vars.size(), 0);
        for (std::size_t s = 0; s < rec.systems.size(); ++s) {
            const auto& sys = rec.systems[s];
            std::vector<std::int64_t> ys(sys.rank(), 0);
            for (std::size_t k = 0; k < slots.size(); ++k)
                if (slots[k].first == s) ys[slots[k].second] = y[k];
            Assignment xs = sys.apply(ys);
            for (std::size_t j = 0; j < sys.xvars.size(); ++j) a[sys.xvars[j]] = xs[j];
        }
        if (fn(a)) return true;
        bool advanced = false;
        for (std::size_t k = slots.size(); k-- > 0;) {
            if (++y[k] < rec.systems[slots[k].first].y_order[slots[k].second]) { advanced = true; break; }
            y[k] = 0;
        }
        if (!advanced) return true;
    }
}

}  // namespace detail

inline DecideOutcome decide_imp(const MultivariatePolynomial& f, const Pipeline& pipe,
                                const Limits& limits = {}, bool witness_search = false) {
    DecideOutcome out;
    if (pipe.unsat) {
        out.member = true;
        out.instance_unsat = true;
        return out;
    }
    out.transformed = transform_poly(f, pipe.record, limits);
    out.remainder = divide(out.transformed, pipe.record.basis.polys, pipe.record.basis.order).remainder;
    out.member = out.remainder.is_zero();
    if (!out.member && witness_search) {
        // A witness exists whenever the remainder is nonzero (the ideal is
        // the full vanishing ideal); the search is grid-bounded anyway.
        std::map<std::string, std::int64_t> witness;
        bool found = false;
        bool finished = detail::for_each_solution(pipe.inst, pipe.record, limits.enumeration_cap,
            [&](const Assignment& a) {
                auto vals = poly_values(pipe.inst, a);
                std::vector<CyclotomicNumber> point;
                for (const auto& vn : *f.vars())
                    point.emplace_back(Rational(static_cast<long>(vals.at(vn))));
                if (!f.evaluate(point).is_zero()) {
                    witness = vals;
                    found = true;
                    return true;
                }
                return false;
            });
        if (!finished) {
            out.witness_search_skipped = true;
        } else if (found) {
            out.witness = std::move(witness);
        }
    }
    return out;
}

inline MembershipCertificate certify(const MultivariatePolynomial& f, const Pipeline& pipe,
                                     const Limits& limits = {}) {
    MembershipCertificate cert;
    if (pipe.unsat) {
        cert.kind = MembershipCertificate::Kind::UnsatWitness;
        cert.unsat = pipe.unsat_info;
        return cert;
    }
    cert.transformed = transform_poly(f, pipe.record, limits);
    DivisionResult div = divide(cert.transformed, pipe.record.basis.polys, pipe.record.basis.order);
    if (!div.remainder.is_zero())
        throw invalid_state("certify: polynomial is not a member of the ideal");
    cert.cofactors = std::move(div.quotients);
    if (!verify_certificate(cert, pipe.record.basis))
        throw invariant_violation("certify: cofactor recombination does not reproduce the transformed polynomial");
    return cert;
}

// Generators of the ideal of an explicit tuple relation over integer
// domains: the indicator-product polynomial plus one domain polynomial per
// scope variable. Audit/export only; the decision path never uses these.
inline std::vector<MultivariatePolynomial> relation_generators(const std::vector<Tuple>& relation,
                                                               const std::vector<std::int64_t>& domain_sizes,
                                                               VarListPtr vars) {
    if (domain_sizes.size() != vars->size())
        throw invalid_parameter("relation_generators: domain list does not match variables");
    if (relation.empty())
        return {MultivariatePolynomial::constant(vars, CyclotomicNumber::one())};
    // Indicator delta_v(x): 1 at v, 0 elsewhere on the domain (Lagrange basis).
    auto indicator = [&](std::size_t var, std::int64_t v) {
        MultivariatePolynomial acc = MultivariatePolynomial::constant(vars, CyclotomicNumber::one());
        for (std::int64_t b = 0; b < domain_sizes[var]; ++b) {
            if (b == v) continue;
            Rational dinv = Rational(static_cast<long>(v - b)).inverse();
            MultivariatePolynomial lin(vars);
            ExpVec e(vars->size(), 0);
            e[var] = 1;
            lin.add_term(e, CyclotomicNumber(dinv));
            lin.add_term(ExpVec(vars->size(), 0), CyclotomicNumber(Rational(static_cast<long>(-b)) * dinv));
            acc = acc * lin;
        }
        return acc;
    };
    MultivariatePolynomial prod = MultivariatePolynomial::constant(vars, CyclotomicNumber::one());
    for (const auto& t : relation) {
        if (t.size() != vars->size()) throw invalid_parameter("relation_generators: tuple arity mismatch");
        MultivariatePolynomial ind = MultivariatePolynomial::constant(vars, CyclotomicNumber::one());
        for (std::size_t j = 0; j < t.size(); ++j) ind = ind * indicator(j, t[j]);
        prod = prod * (MultivariatePolynomial::constant(vars, CyclotomicNumber::one()) - ind);
    }
    std::vector<MultivariatePolynomial> out{prod};
    for (std::size_t j = 0; j < vars->size(); ++j) {
        MultivariatePolynomial dom = MultivariatePolynomial::constant(vars, CyclotomicNumber::one());
        for (std::int64_t a = 0; a < domain_sizes[j]; ++a) {
            MultivariatePolynomial lin(vars);
            ExpVec e(vars->size(), 0);
            e[j] = 1;
            lin.add_term(e, CyclotomicNumber::one());
            lin.add_term(ExpVec(vars->size(), 0), CyclotomicNumber(Rational(static_cast<long>(-a))));
            dom = dom * lin;
        }
        out.push_back(std::move(dom));
    }
    return out;
}

}  // namespace affimp
