#pragma once

// Coset relations. A relation over a product of prime-power cyclic groups is
// invariant under the affine operation x - y + z exactly when it is a coset
// a0 + B of a subgroup B, and then B is the difference set {a - a0 : a in R}.
// That equivalence is decidable on explicit tuple lists and is the only
// admission check the pipeline needs.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "affimp/errors.hpp"
#include "affimp/modint.hpp"
#include "affimp/zpm.hpp"

namespace affimp {

using Tuple = std::vector<std::int64_t>;

struct CosetRelation {
    std::vector<Modulus> sig;        // per-coordinate prime-power sort
    Tuple base;                      // lexicographically least member when built from tuples
    std::vector<Tuple> generators;   // of the difference subgroup

    std::size_t arity() const { return sig.size(); }

    bool contains(const Tuple& t, std::size_t cap = 1u << 16) const {
        auto all = expand(cap);
        if (!all) throw guard_refusal("coset: expansion exceeds cap");
        return all->count(reduced(t)) > 0;
    }

    Tuple reduced(Tuple t) const {
        if (t.size() != sig.size()) throw invalid_parameter("coset: tuple arity mismatch");
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = sig[i].reduce(t[i]);
        return t;
    }

    std::optional<std::set<Tuple>> expand(std::size_t cap = 1u << 16) const {
        std::set<Tuple> span;
        Tuple b = reduced(base);
        span.insert(b);
        std::vector<Tuple> work{b};
        while (!work.empty()) {
            Tuple cur = work.back();
            work.pop_back();
            for (const auto& g : generators) {
                Tuple nxt(sig.size());
                for (std::size_t i = 0; i < sig.size(); ++i) nxt[i] = sig[i].reduce(cur[i] + g[i]);
                if (span.insert(nxt).second) {
                    if (span.size() > cap) return std::nullopt;
                    work.push_back(std::move(nxt));
                }
            }
        }
        return span;
    }
};

struct AffineViolation {
    // f(a, b, c) = a - b + c lands outside the relation.
    Tuple a, b, c, image;
};

struct CosetFromTuplesResult {
    std::optional<CosetRelation> relation;
    std::optional<AffineViolation> violation;
    bool ok() const { return relation.has_value(); }
};

namespace detail {

// Reduce a generating set per prime block: embed every coordinate of the
// block into the block's maximal modulus, take the Howell form, map back,
// then drop generators the rest already generate.
inline std::vector<Tuple> reduce_generators(const std::vector<Modulus>& sig, const std::vector<Tuple>& gens) {
    if (gens.empty()) return {};
    const std::size_t n = sig.size();
    std::map<std::int64_t, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < n; ++i) blocks[sig[i].p].push_back(i);
    std::vector<Tuple> out;
    for (const auto& [p, idxs] : blocks) {
        int mmax = 0;
        for (auto i : idxs) mmax = std::max(mmax, sig[i].m);
        Modulus big(p, mmax);
        ZpmMatrix mat(big, idxs.size());
        for (const auto& g : gens) {
            Row r(idxs.size());
            bool nonzero = false;
            for (std::size_t k = 0; k < idxs.size(); ++k) {
                std::size_t i = idxs[k];
                std::int64_t scale = pow_i64(p, mmax - sig[i].m);
                r[k] = big.reduce(sig[i].reduce(g[i]) * scale);
                nonzero = nonzero || r[k] != 0;
            }
            if (nonzero) mat.rows.push_back(std::move(r));
        }
        if (mat.rows.empty()) continue;
        ZpmMatrix h = canonical_form(mat);
        SubgroupDescription sd{big, idxs.size(), h.rows};
        sd = minimize_generators(sd);
        for (const auto& r : sd.generators) {
            Tuple g(n, 0);
            for (std::size_t k = 0; k < idxs.size(); ++k) {
                std::size_t i = idxs[k];
                std::int64_t scale = pow_i64(p, mmax - sig[i].m);
                if (r[k] % scale != 0)
                    throw invariant_violation("coset: reduced generator left the embedded block");
                g[i] = r[k] / scale;
            }
            out.push_back(std::move(g));
        }
    }
    return out;
}

}  // namespace detail

// Lemma-style admission: base is the lexicographically least tuple, the
// difference set must be closed under addition, and on failure a violating
// affine triple from R itself is returned.
inline CosetFromTuplesResult coset_from_tuples(const std::vector<Modulus>& sig,
                                               const std::vector<Tuple>& tuples) {
    if (tuples.empty()) throw invalid_parameter("coset_from_tuples: empty relation");
    std::set<Tuple> rel;
    CosetRelation probe;
    probe.sig = sig;
    for (const auto& t : tuples) rel.insert(probe.reduced(t));
    const Tuple base = *rel.begin();
    std::set<Tuple> diffs;
    std::map<Tuple, Tuple> diff_of;  // difference -> witness tuple it came from
    for (const auto& t : rel) {
        Tuple d(sig.size());
        for (std::size_t i = 0; i < sig.size(); ++i) d[i] = sig[i].reduce(t[i] - base[i]);
        diff_of.emplace(d, t);
        diffs.insert(std::move(d));
    }
    for (const auto& d1 : diffs) {
        for (const auto& d2 : diffs) {
            Tuple s(sig.size());
            for (std::size_t i = 0; i < sig.size(); ++i) s[i] = sig[i].reduce(d1[i] + d2[i]);
            if (diffs.count(s)) continue;
            // (t1 - base) + (t2 - base) not a difference, so t1 - base + t2
            // is an affine image outside R.
            const Tuple& t1 = diff_of.at(d1);
            const Tuple& t2 = diff_of.at(d2);
            Tuple img(sig.size());
            for (std::size_t i = 0; i < sig.size(); ++i) img[i] = sig[i].reduce(t1[i] - base[i] + t2[i]);
            return {std::nullopt, AffineViolation{t1, base, t2, img}};
        }
    }
    CosetRelation out;
    out.sig = sig;
    out.base = base;
    std::vector<Tuple> gens;
    for (const auto& d : diffs) {
        bool zero = true;
        for (auto v : d) zero = zero && v == 0;
        if (!zero) gens.push_back(d);
    }
    out.generators = detail::reduce_generators(sig, gens);
    return {std::move(out), std::nullopt};
}

inline CosetRelation coset_from_parts(std::vector<Modulus> sig, Tuple base, std::vector<Tuple> gens) {
    CosetRelation out;
    out.sig = std::move(sig);
    out.base = out.reduced(base);
    std::vector<Tuple> red;
    red.reserve(gens.size());
    for (auto& g : gens) red.push_back(out.reduced(g));
    out.generators = detail::reduce_generators(out.sig, red);
    return out;
}

struct SortBlock {
    std::int64_t prime;
    std::vector<std::size_t> coords;  // positions in the original signature
    CosetRelation relation;
};

// Per-prime decomposition: an affine-invariant relation equals the product
// of its projections onto same-prime coordinate blocks.
inline std::vector<SortBlock> decompose_relation_by_sort(const CosetRelation& r) {
    std::map<std::int64_t, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < r.sig.size(); ++i) blocks[r.sig[i].p].push_back(i);
    std::vector<SortBlock> out;
    for (const auto& [p, idxs] : blocks) {
        SortBlock b;
        b.prime = p;
        b.coords = idxs;
        CosetRelation proj;
        for (auto i : idxs) proj.sig.push_back(r.sig[i]);
        for (auto i : idxs) proj.base.push_back(r.base[i]);
        std::vector<Tuple> gens;
        for (const auto& g : r.generators) {
            Tuple pg;
            pg.reserve(idxs.size());
            for (auto i : idxs) pg.push_back(g[i]);
            gens.push_back(std::move(pg));
        }
        proj.generators = detail::reduce_generators(proj.sig, gens);
        b.relation = std::move(proj);
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace affimp
