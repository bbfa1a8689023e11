#pragma once

// Parametrized reduced row-echelon form of a single-prime instance:
//
//   x_j = alpha_{1,j} y_1 + ... + alpha_{r,j} y_r + c_j   (mod p^m)
//
// built by the generating-set procedure: take a base solution phi_0; in each
// round pick, among unpinned variables, the shifted value with minimal
// p-adic valuation, pull a solution attaining it, record the shift as a
// generator, and pin the chosen variable back to phi_0. The generator found
// in round i has exact order p^{o_i} (o_i = m - valuation), and the map
//   (y_1,...,y_r) in prod [0, p^{o_i})  ->  phi_0 + sum y_i phi'_i
// is a bijection onto the block's solution set, while letting every y range
// over all of Z_{p^m} still covers it exactly.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affimp/errors.hpp"
#include "affimp/instance.hpp"

namespace affimp {

struct EchelonSystem {
    Modulus sort;
    std::vector<std::size_t> xvars;          // norm variable indices, declaration order
    std::vector<std::string> xnames;
    std::vector<std::string> ynames;         // fresh parameter names
    std::vector<std::vector<std::int64_t>> alpha;  // alpha[i][j]: parameter i, variable j
    std::vector<std::int64_t> c;             // c[j]
    std::vector<std::int64_t> y_order;       // p^{o_i}: exact order of generator i

    std::size_t rank() const { return ynames.size(); }

    // x-values for one parameter assignment (y_i arbitrary integers).
    Assignment apply(const std::vector<std::int64_t>& y) const {
        if (y.size() != alpha.size()) throw invalid_parameter("echelon: parameter arity mismatch");
        Assignment out(xvars.size());
        for (std::size_t j = 0; j < xvars.size(); ++j) {
            std::int64_t v = c[j];
            for (std::size_t i = 0; i < alpha.size(); ++i)
                v = sort.reduce(v + sort.reduce(y[i]) * alpha[i][j]);
            out[j] = v;
        }
        return out;
    }
};

struct ParametrizeResult {
    std::optional<EchelonSystem> system;
    std::optional<InstanceUnsat> unsat;
    bool ok() const { return system.has_value(); }
};

namespace detail {

inline ParametrizeResult parametrize_block(const McspInstance& inst, std::int64_t prime,
                                           std::set<std::string>& name_pool) {
    const auto& block = inst.prime_vars.at(prime);
    EchelonSystem sys;
    sys.sort = inst.vars[block[0]].sort;
    sys.xvars = block;
    for (auto v : block) sys.xnames.push_back(inst.vars[v].name);

    auto base = solve_with_pins(inst, {});
    if (!base.ok()) return {std::nullopt, std::move(base.unsat)};
    const Assignment& phi0 = *base.assignment;
    const Modulus mod = sys.sort;

    std::vector<Pin> pins;
    std::set<std::size_t> pinned;
    while (true) {
        // Minimal p-valuation over all shifted value sets; ties go to the
        // lowest variable index, then the smallest shift.
        int best_val = mod.m;
        std::size_t best_pos = 0;
        std::size_t best_var = 0;
        std::int64_t best_shift = 0;
        bool found = false;
        for (std::size_t pos = 0; pos < block.size(); ++pos) {
            std::size_t x = block[pos];
            if (pinned.count(x)) continue;
            for (auto a : value_set_with_pins(inst, x, pins)) {
                std::int64_t shift = mod.reduce(a - phi0[x]);
                if (shift == 0) continue;
                int v = mod.valuation(shift);
                bool better = !found || v < best_val ||
                              (v == best_val && (pos < best_pos || (pos == best_pos && shift < best_shift)));
                if (better) {
                    best_val = v;
                    best_pos = pos;
                    best_var = x;
                    best_shift = shift;
                    found = true;
                }
            }
        }
        if (!found) break;
        std::vector<Pin> with = pins;
        with.emplace_back(best_var, mod.reduce(phi0[best_var] + best_shift));
        auto sol = solve_with_pins(inst, with);
        if (!sol.ok())
            throw invariant_violation("parametrize: a value reported attainable did not extend to a solution");
        std::vector<std::int64_t> gen(block.size());
        for (std::size_t j = 0; j < block.size(); ++j)
            gen[j] = mod.reduce((*sol.assignment)[block[j]] - phi0[block[j]]);
        sys.alpha.push_back(std::move(gen));
        sys.y_order.push_back(pow_i64(mod.p, mod.m - best_val));
        pins.emplace_back(best_var, phi0[best_var]);
        pinned.insert(best_var);
    }
    for (auto v : block) sys.c.push_back(phi0[v]);
    for (std::size_t i = 0; i < sys.alpha.size(); ++i) {
        std::string n = "y" + std::to_string(prime) + "_" + std::to_string(i + 1);
        while (name_pool.count(n)) n = "_" + n;
        name_pool.insert(n);
        sys.ynames.push_back(n);
    }
    return {std::move(sys), std::nullopt};
}

}  // namespace detail

// All prime blocks of a normalized instance, ascending prime order.
inline std::vector<ParametrizeResult> parametrize_all(const McspInstance& inst) {
    std::set<std::string> pool;
    for (const auto& v : inst.vars) pool.insert(v.name);
    std::vector<ParametrizeResult> out;
    for (const auto& [prime, vars] : inst.prime_vars)
        out.push_back(detail::parametrize_block(inst, prime, pool));
    return out;
}

// Single-prime entry point matching the per-block contract.
inline ParametrizeResult parametrize(const McspInstance& inst) {
    if (inst.prime_vars.size() != 1)
        throw invalid_parameter("parametrize: instance spans several primes; decompose first");
    std::set<std::string> pool;
    for (const auto& v : inst.vars) pool.insert(v.name);
    return detail::parametrize_block(inst, inst.prime_vars.begin()->first, pool);
}

}  // namespace affimp
