#pragma once

// Shared test machinery: instance/polynomial builders, the brute-force
// vanishing oracle (enumeration + exact evaluation, independent of the
// Groebner path), and the randomized corpus generator used by both the
// randomized unit tests and the acceptance suite.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "affimp/instance.hpp"
#include "affimp/polynomial.hpp"
#include "affimp/unity.hpp"
#include "affimp/ximp.hpp"

namespace testsupport {

using namespace affimp;

// ---------------------------------------------------------------------------
// Polynomial helpers.

inline MultivariatePolynomial rat_poly(VarListPtr vars,
                                       std::vector<std::pair<ExpVec, Rational>> terms) {
    MultivariatePolynomial p(vars);
    for (auto& [e, c] : terms) p.add_term(std::move(e), CyclotomicNumber(c));
    return p;
}

// ---------------------------------------------------------------------------
// Exact evaluation oracle.

// Solutions of a normalized instance, as integer points over the polynomial
// variables (aligned with poly_var_list order).
inline std::vector<std::vector<std::int64_t>> solution_points(const McspInstance& inst,
                                                              std::uint64_t cap = 2000000) {
    std::vector<std::vector<std::int64_t>> pts;
    for (const auto& a : enumerate_solutions(inst, cap)) {
        auto vals = poly_values(inst, a);
        std::vector<std::int64_t> pt;
        for (const auto& pv : inst.poly_vars) pt.push_back(vals.at(pv.name));
        pts.push_back(std::move(pt));
    }
    return pts;
}

// Fast exact evaluation of rational-coefficient polynomials at integer
// points: coefficients go to a common denominator, accumulation is done in
// __int128. Falls back to nullopt (caller uses the slow exact path) when a
// coefficient does not fit.
struct FastPoly {
    std::vector<std::pair<ExpVec, __int128>> terms;  // scaled numerators
    bool valid = false;
};

inline FastPoly compile_fast(const MultivariatePolynomial& p) {
    FastPoly out;
    mpz_class lcm_den = 1;
    for (const auto& [e, c] : p.terms()) {
        CyclotomicNumber n = c.normalized();
        if (!n.is_rational()) return out;
        mpz_class den = n.rational_part().denominator();
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), lcm_den.get_mpz_t(), den.get_mpz_t());
        lcm_den = lcm_den / g * den;
    }
    for (const auto& [e, c] : p.terms()) {
        mpz_class scaled = c.normalized().rational_part().numerator() *
                           (lcm_den / c.normalized().rational_part().denominator());
        if (!scaled.fits_slong_p()) return out;
        out.terms.emplace_back(e, static_cast<__int128>(scaled.get_si()));
    }
    out.valid = true;
    return out;
}

inline bool fast_is_zero_at(const FastPoly& fp, const std::vector<std::int64_t>& pt) {
    __int128 acc = 0;
    for (const auto& [e, num] : fp.terms) {
        __int128 t = num;
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int k = 0; k < e[i]; ++k) t *= pt[i];
        acc += t;
    }
    return acc == 0;
}

inline bool exact_is_zero_at(const MultivariatePolynomial& p, const std::vector<std::int64_t>& pt) {
    std::vector<CyclotomicNumber> point;
    point.reserve(pt.size());
    for (auto v : pt) point.emplace_back(Rational(static_cast<long>(v)));
    return p.evaluate(point).is_zero();
}

// Brute-force membership: f in I(P) iff f vanishes on every solution.
inline bool oracle_vanishes(const MultivariatePolynomial& f,
                            const std::vector<std::vector<std::int64_t>>& pts) {
    FastPoly fp = compile_fast(f);
    for (const auto& pt : pts) {
        if (fp.valid ? !fast_is_zero_at(fp, pt) : !exact_is_zero_at(f, pt)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Randomized corpus.

struct CorpusItem {
    std::string label;
    RawInstance raw;
    std::vector<MultivariatePolynomial> polys;  // over the normalized poly vars
};

struct GroupSpec {
    std::string label;
    AbelianGroup group;
};

inline std::vector<GroupSpec> corpus_groups() {
    return {
        {"Z2", cyclic_group(2)},
        {"Z3", cyclic_group(3)},
        {"Z4", cyclic_group(4)},
        {"Z8", cyclic_group(8)},
        {"Z9", cyclic_group(9)},
        {"Z6", cyclic_group(6)},
        {"Z2xZ4", product_group({{2, 1}, {2, 2}})},
        {"Z2xZ3xZ4", product_group({{2, 1}, {2, 2}, {3, 1}})},
    };
}

class CorpusGen {
public:
    explicit CorpusGen(std::uint64_t seed) : rng_(seed) {}

    std::int64_t pick(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // One instance over `g` with `nvars` variables and 1..4 constraints.
    RawInstance instance(const AbelianGroup& g, int nvars) {
        RawInstance raw;
        for (int i = 0; i < nvars; ++i) raw.vars.push_back({"v" + std::to_string(i), g});
        int ncons = static_cast<int>(pick(1, 4));
        for (int c = 0; c < ncons; ++c) raw.constraints.push_back(constraint(g, nvars));
        return raw;
    }

    RawConstraint constraint(const AbelianGroup& g, int nvars) {
        RawConstraint rc;
        int arity = static_cast<int>(pick(1, std::min(3, nvars)));
        std::set<std::size_t> chosen;
        while (static_cast<int>(chosen.size()) < arity) chosen.insert(static_cast<std::size_t>(pick(0, nvars - 1)));
        rc.scope.assign(chosen.begin(), chosen.end());
        // occasionally repeat a variable in the scope
        if (arity >= 2 && pick(0, 6) == 0) rc.scope[1] = rc.scope[0];
        bool cyclic = g.numeric || g.factors.size() == 1;
        int kind = static_cast<int>(pick(0, cyclic ? 9 : 6));
        std::size_t flat = g.factors.size() * rc.scope.size();
        auto random_flat = [&] {
            Tuple t;
            for (std::size_t i = 0; i < rc.scope.size(); ++i)
                for (const auto& f : g.factors) t.push_back(pick(0, f.n - 1));
            return t;
        };
        if (kind >= 7) {  // linear congruence (cyclic groups only)
            rc.rel.kind = RelationSpec::Kind::Linear;
            std::int64_t n = g.order();
            for (std::size_t i = 0; i < rc.scope.size(); ++i) rc.rel.lin_coeffs.push_back(pick(0, n - 1));
            rc.rel.lin_const = pick(0, n - 1);
            return rc;
        }
        // Random coset: base plus 1..2 generators.
        Tuple base = random_flat();
        std::vector<Tuple> gens;
        int ngens = static_cast<int>(pick(1, 2));
        for (int i = 0; i < ngens; ++i) gens.push_back(random_flat());
        if (kind >= 4) {  // present as a coset description
            rc.rel.kind = RelationSpec::Kind::Coset;
            rc.rel.coset_base = std::move(base);
            rc.rel.coset_gens = std::move(gens);
            return rc;
        }
        // Present as an explicit tuple list when the expansion is small.
        std::vector<Modulus> sig;
        for (std::size_t i = 0; i < rc.scope.size(); ++i)
            for (const auto& f : g.factors) sig.emplace_back(f.p, f.l);
        CosetRelation rel;
        rel.sig = sig;
        rel.base = base;
        rel.generators = gens;
        auto all = rel.expand(220);
        if (!all) {
            rc.rel.kind = RelationSpec::Kind::Coset;
            rc.rel.coset_base = std::move(base);
            rc.rel.coset_gens = std::move(gens);
            return rc;
        }
        rc.rel.kind = RelationSpec::Kind::Tuples;
        rc.rel.tuples.assign(all->begin(), all->end());
        (void)flat;
        return rc;
    }

    // Random polynomial of degree <= maxdeg over the given variables.
    MultivariatePolynomial poly(VarListPtr vars, int maxdeg, int maxterms = 4) {
        MultivariatePolynomial p(vars);
        int nterms = static_cast<int>(pick(1, maxterms));
        for (int t = 0; t < nterms; ++t) {
            ExpVec e(vars->size(), 0);
            int d = static_cast<int>(pick(0, maxdeg));
            for (int k = 0; k < d; ++k) e[static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(vars->size()) - 1))] += 1;
            long num = static_cast<long>(pick(-9, 9));
            if (num == 0) num = 1;
            long den = static_cast<long>(pick(1, 2));
            p.add_term(std::move(e), CyclotomicNumber(Rational(num, den)));
        }
        return p;
    }

    std::mt19937_64 rng_;
};

// The full acceptance corpus: >= 500 instances spanning the listed sorts,
// each with >= 5 polynomials of degree <= 3.
inline std::vector<CorpusItem> build_corpus(std::uint64_t seed = 20240901) {
    CorpusGen gen(seed);
    struct Bucket {
        std::string label;
        AbelianGroup g;
        int count;
        int min_vars, max_vars;
    };
    auto groups = corpus_groups();
    std::vector<Bucket> buckets = {
        {"Z2", groups[0].group, 80, 2, 5},
        {"Z3", groups[1].group, 70, 2, 4},
        {"Z4", groups[2].group, 80, 2, 4},
        {"Z8", groups[3].group, 60, 2, 3},
        {"Z9", groups[4].group, 60, 2, 3},
        {"Z6", groups[5].group, 60, 2, 4},
        {"Z2xZ4", groups[6].group, 45, 2, 3},
        {"Z2xZ3xZ4", groups[7].group, 45, 2, 3},
    };
    std::vector<CorpusItem> out;
    for (const auto& b : buckets) {
        for (int i = 0; i < b.count; ++i) {
            CorpusItem item;
            item.label = b.label + "#" + std::to_string(i);
            int nvars = static_cast<int>(gen.pick(b.min_vars, b.max_vars));
            item.raw = gen.instance(b.g, nvars);
            auto norm = normalize_instance(item.raw);
            // Tuple relations come from expanded cosets, so they are always
            // affine-invariant and normalization cannot fail.
            VarListPtr vars = poly_var_list(*norm.instance);
            for (int k = 0; k < 5; ++k) item.polys.push_back(gen.poly(vars, 3));
            // Two structured candidates biased toward membership: (v - c) * q
            // when some variable is pinned to c by the constraints.
            const auto& inst = *norm.instance;
            int added = 0;
            for (std::size_t pv = 0; pv < inst.poly_vars.size() && added < 2; ++pv) {
                if (inst.poly_vars[pv].kind != PolyVar::Kind::Component) continue;
                std::size_t nv = inst.poly_vars[pv].norm_vars[0];
                auto vs = value_set(inst, nv);
                if (vs.size() != 1) continue;
                std::int64_t scale = inst.vars[nv].embed_scale();
                MultivariatePolynomial lin(vars);
                ExpVec e(vars->size(), 0);
                e[pv] = 1;
                lin.add_term(e, CyclotomicNumber::one());
                lin.add_term(ExpVec(vars->size(), 0),
                             CyclotomicNumber(Rational(static_cast<long>(-(vs[0] / scale)))));
                item.polys.push_back(lin * gen.poly(vars, 2, 2));
                ++added;
            }
            out.push_back(std::move(item));
        }
    }
    return out;
}

}  // namespace testsupport
