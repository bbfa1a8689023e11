#pragma once

// chi-IMP: given polynomials g_1..g_l, find coefficients c with
// sum c_i g_i in the instance ideal. Division by the unity basis is linear
// in the dividend, so the condition is sum c_i r_i = 0 on the remainders
// r_i, a linear system over the coefficient field. Rational solutions are
// preferred (solve the rational restriction first); if none exist the
// system is re-solved with full cyclotomic unknowns.
//
// The same search, swept over monomials in ascending grlex order with the
// top coefficient pinned to 1, constructs d-truncated Groebner bases in the
// original variables.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "affimp/errors.hpp"
#include "affimp/polynomial.hpp"
#include "affimp/unity.hpp"

namespace affimp {

struct XimpQuery {
    std::vector<MultivariatePolynomial> polys;   // over the instance's polynomial variables
    std::optional<std::size_t> pin;              // index whose coefficient is fixed to 1
};

namespace detail {

// Coordinate id for the rational restriction: a basis monomial of the
// remainder space together with one cyclotomic basis exponent (sort-tagged
// so signatures align across remainders).
struct CoordKey {
    ExpVec mono;
    std::vector<std::pair<std::pair<std::int64_t, int>, int>> cyc;  // ((p, m), exponent)
    friend bool operator<(const CoordKey& a, const CoordKey& b) {
        if (a.mono != b.mono) return a.mono < b.mono;
        return a.cyc < b.cyc;
    }
};

inline std::map<CoordKey, std::vector<Rational>> rational_rows(const std::vector<MultivariatePolynomial>& rems) {
    std::map<CoordKey, std::vector<Rational>> rows;
    for (std::size_t i = 0; i < rems.size(); ++i) {
        for (const auto& [mono, coef] : rems[i].terms()) {
            CyclotomicNumber n = coef.normalized();
            auto sorts = n.sorts();
            for (const auto& [exps, q] : n.terms()) {
                CoordKey key;
                key.mono = mono;
                for (std::size_t s = 0; s < sorts.size(); ++s)
                    if (exps[s] != 0) key.cyc.emplace_back(std::make_pair(sorts[s].p, sorts[s].m), exps[s]);
                auto it = rows.find(key);
                if (it == rows.end()) it = rows.emplace(key, std::vector<Rational>(rems.size(), Rational(0))).first;
                it->second[i] += q;
            }
        }
    }
    return rows;
}

// Reduced row echelon form; returns pivot column per pivot row.
inline std::vector<std::size_t> rref(std::vector<std::vector<Rational>>& m, std::size_t cols) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
        std::size_t sel = row;
        while (sel < m.size() && m[sel][col].is_zero()) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[sel], m[row]);
        Rational inv = m[row][col].inverse();
        for (std::size_t c = col; c < m[row].size(); ++c) m[row][c] *= inv;
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == row || m[r][col].is_zero()) continue;
            Rational f = m[r][col];
            for (std::size_t c = col; c < m[r].size(); ++c) m[r][c] -= f * m[row][c];
        }
        pivots.push_back(col);
        ++row;
    }
    m.resize(row);  // drop zero rows
    return pivots;
}

// Homogeneous system: basic nullspace solution with the first free variable
// set to 1, or nullopt when the kernel is trivial.
inline std::optional<std::vector<Rational>> homogeneous_basic_solution(std::vector<std::vector<Rational>> m,
                                                                       std::size_t cols) {
    auto pivots = rref(m, cols);
    std::size_t free_col = cols;
    for (std::size_t c = 0; c < cols; ++c) {
        if (std::find(pivots.begin(), pivots.end(), c) == pivots.end()) { free_col = c; break; }
    }
    if (free_col == cols) return std::nullopt;
    std::vector<Rational> x(cols, Rational(0));
    x[free_col] = Rational(1);
    for (std::size_t r = 0; r < m.size(); ++r)
        x[pivots[r]] = -m[r][free_col];
    return x;
}

// A x = b with free variables zero, or nullopt when inconsistent.
inline std::optional<std::vector<Rational>> affine_solution(std::vector<std::vector<Rational>> m,
                                                            std::size_t cols) {
    auto pivots = rref(m, cols + 1);
    for (auto p : pivots)
        if (p == cols) return std::nullopt;  // pivot in the rhs column
    std::vector<Rational> x(cols, Rational(0));
    for (std::size_t r = 0; r < m.size(); ++r) x[pivots[r]] = m[r][cols];
    return x;
}

}  // namespace detail

// Search version; returns coefficients or nullopt ("no nonzero solution"
// unpinned / "infeasible" with a pin).
inline std::optional<std::vector<CyclotomicNumber>> ximp_search(const XimpQuery& q, const Pipeline& pipe,
                                                                const Limits& limits = {}) {
    const std::size_t l = q.polys.size();
    if (l == 0) throw invalid_parameter("ximp: empty polynomial vector");
    if (q.pin && *q.pin >= l) throw invalid_parameter("ximp: pin index out of range");
    if (pipe.unsat) {
        std::vector<CyclotomicNumber> c(l, CyclotomicNumber::zero());
        c[q.pin ? *q.pin : 0] = CyclotomicNumber::one();
        return c;
    }
    std::vector<MultivariatePolynomial> rems;
    rems.reserve(l);
    for (const auto& g : q.polys) {
        MultivariatePolynomial t = transform_poly(g, pipe.record, limits);
        rems.push_back(divide(t, pipe.record.basis.polys, pipe.record.basis.order).remainder);
    }
    auto rows = detail::rational_rows(rems);

    std::optional<std::vector<CyclotomicNumber>> result;
    if (q.pin) {
        std::vector<std::vector<Rational>> m;
        for (const auto& [key, row] : rows) {
            std::vector<Rational> r;
            for (std::size_t i = 0; i < l; ++i)
                if (i != *q.pin) r.push_back(row[i]);
            r.push_back(-row[*q.pin]);
            m.push_back(std::move(r));
        }
        auto x = detail::affine_solution(std::move(m), l - 1);
        if (x) {
            std::vector<CyclotomicNumber> c;
            std::size_t k = 0;
            for (std::size_t i = 0; i < l; ++i)
                c.push_back(i == *q.pin ? CyclotomicNumber::one() : CyclotomicNumber((*x)[k++]));
            result = std::move(c);
        }
    } else {
        std::vector<std::vector<Rational>> m;
        for (const auto& [key, row] : rows) m.push_back(row);
        auto x = detail::homogeneous_basic_solution(std::move(m), l);
        if (x) {
            std::vector<CyclotomicNumber> c;
            for (const auto& xi : *x) c.push_back(CyclotomicNumber(xi));
            result = std::move(c);
        }
    }

    if (!result) {
        // Full cyclotomic unknowns: c_i = sum_b c_{i,b} * basis_b over the
        // union signature, then the same rational machinery.
        std::vector<Modulus> union_sorts;
        {
            std::map<std::int64_t, int> mx;
            for (const auto& r : rems)
                for (const auto& [e, c] : r.terms())
                    for (const auto& s : c.normalized().sorts()) mx[s.p] = std::max(mx[s.p], s.m);
            for (const auto& [p, mm] : mx) union_sorts.emplace_back(p, mm);
        }
        // Basis elements of the union field.
        std::vector<CyclotomicNumber> field_basis;
        {
            CyclotomicNumber one = CyclotomicNumber::one();
            std::vector<CyclotomicNumber> acc{one};
            for (const auto& s : union_sorts) {
                std::vector<CyclotomicNumber> next;
                std::int64_t phi = s.pm - s.pm / s.p;
                for (std::int64_t e = 0; e < phi; ++e)
                    for (const auto& a : acc) next.push_back(a * omega_power(s, e));
                acc = std::move(next);
            }
            field_basis = std::move(acc);
        }
        const std::size_t dim = field_basis.size();
        if (dim > 1) {
            std::vector<MultivariatePolynomial> expanded;
            for (const auto& r : rems)
                for (const auto& b : field_basis) expanded.push_back(r.scaled(b));
            auto xrows = detail::rational_rows(expanded);
            std::size_t cols = l * dim;
            std::optional<std::vector<Rational>> x;
            if (q.pin) {
                std::size_t pin_col = *q.pin * dim;  // coefficient of basis element 1
                std::vector<std::vector<Rational>> m;
                for (const auto& [key, row] : xrows) {
                    std::vector<Rational> r;
                    for (std::size_t i = 0; i < cols; ++i)
                        if (i != pin_col) r.push_back(row[i]);
                    r.push_back(-row[pin_col]);
                    m.push_back(std::move(r));
                }
                x = detail::affine_solution(std::move(m), cols - 1);
                if (x) x->insert(x->begin() + static_cast<std::ptrdiff_t>(pin_col), Rational(1));
            } else {
                std::vector<std::vector<Rational>> m;
                for (const auto& [key, row] : xrows) m.push_back(row);
                x = detail::homogeneous_basic_solution(std::move(m), cols);
            }
            if (x) {
                std::vector<CyclotomicNumber> c(l, CyclotomicNumber::zero());
                for (std::size_t i = 0; i < l; ++i)
                    for (std::size_t b = 0; b < dim; ++b)
                        c[i] += field_basis[b].scaled((*x)[i * dim + b]);
                result = std::move(c);
            }
        }
    }

    if (result) {
        MultivariatePolynomial acc(pipe.record.basis.vars);
        for (std::size_t i = 0; i < l; ++i) acc = acc + rems[i].scaled((*result)[i]);
        if (!acc.is_zero())
            throw invariant_violation("ximp: solver returned coefficients that do not cancel the remainders");
    }
    return result;
}

struct TruncatedBasis {
    int degree_bound = 0;
    VarListPtr vars;                        // the instance's polynomial variables
    MonomialOrder order{OrderKind::Grlex};
    std::vector<MultivariatePolynomial> polys;  // monic, leading monomials pairwise non-divisible
};

inline VarListPtr poly_var_list(const McspInstance& inst) {
    std::vector<std::string> names;
    for (const auto& pv : inst.poly_vars) names.push_back(pv.name);
    return make_vars(std::move(names));
}

// All exponent vectors of total degree <= d, ascending grlex.
inline std::vector<ExpVec> monomials_up_to(std::size_t nvars, int d, const MonomialOrder& order) {
    std::vector<ExpVec> out;
    ExpVec cur(nvars, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i == nvars) { out.push_back(cur); return; }
        for (int e = 0; e <= left; ++e) {
            cur[i] = e;
            rec(i + 1, left - e);
        }
        cur[i] = 0;
    };
    rec(0, d);
    std::sort(out.begin(), out.end(), [&](const ExpVec& a, const ExpVec& b) { return compare(order, a, b) < 0; });
    return out;
}

// Monomial sweep with pinned chi-IMP. Incremental form: the remainder of
// each swept monomial is reduced against the span of the remainders of all
// smaller monomials; landing in the span yields a basis element, otherwise
// the vector joins the span. Monomials divisible by a found leading
// monomial are skipped (their remainders are already in the span).
inline TruncatedBasis truncated_gb(const Pipeline& pipe, int d, const Limits& limits = {}) {
    if (d < 0) throw invalid_parameter("truncated_gb: negative degree bound");
    TruncatedBasis out;
    out.degree_bound = d;
    out.vars = poly_var_list(pipe.inst);
    if (pipe.unsat) {
        out.polys.push_back(MultivariatePolynomial::constant(out.vars, CyclotomicNumber::one()));
        return out;
    }
    const MonomialOrder grlex{OrderKind::Grlex};

    struct SpanVec {
        std::map<detail::CoordKey, Rational> entries;
        std::map<ExpVec, Rational> comb;  // expression over swept monomials
    };
    std::map<detail::CoordKey, SpanVec> span;  // keyed by leading coordinate

    std::vector<ExpVec> lms;
    for (const auto& u : monomials_up_to(out.vars->size(), d, grlex)) {
        bool skip = false;
        for (const auto& lm : lms) skip = skip || divides(lm, u);
        if (skip) continue;
        MultivariatePolynomial mono = MultivariatePolynomial::monomial(out.vars, u, CyclotomicNumber::one());
        MultivariatePolynomial t = transform_poly(mono, pipe.record, limits);
        MultivariatePolynomial rem = divide(t, pipe.record.basis.polys, pipe.record.basis.order).remainder;
        SpanVec v;
        v.comb[u] = Rational(1);
        for (const auto& [key, row] : detail::rational_rows({rem})) {
            if (!row[0].is_zero()) v.entries.emplace(key, row[0]);
        }
        while (!v.entries.empty()) {
            auto lead = v.entries.begin();
            auto hit = span.find(lead->first);
            if (hit == span.end()) break;
            Rational f = lead->second;  // basis vectors are monic in their leading entry
            for (const auto& [k, val] : hit->second.entries) {
                auto it = v.entries.find(k);
                if (it == v.entries.end()) {
                    Rational nv = -(f * val);
                    if (!nv.is_zero()) v.entries.emplace(k, nv);
                } else {
                    it->second -= f * val;
                    if (it->second.is_zero()) v.entries.erase(it);
                }
            }
            for (const auto& [m, val] : hit->second.comb) {
                v.comb[m] -= f * val;
                if (v.comb[m].is_zero()) v.comb.erase(m);
            }
        }
        if (v.entries.empty()) {
            // u's remainder is a combination of smaller remainders: the same
            // combination of monomials is in the ideal and monic at u.
            MultivariatePolynomial b(out.vars);
            for (const auto& [m, val] : v.comb) b.add_term(m, CyclotomicNumber(val));
            out.polys.push_back(std::move(b));
            lms.push_back(u);
        } else {
            Rational inv = v.entries.begin()->second.inverse();
            for (auto& [k, val] : v.entries) val *= inv;
            for (auto& [m, val] : v.comb) val *= inv;
            span.emplace(v.entries.begin()->first, std::move(v));
        }
    }
    return out;
}

}  // namespace affimp
