#pragma once

// Linear algebra over Z_{p^m} in Howell canonical form. The Howell form is
// the analogue of reduced row echelon form that remains a function of the
// row span over Z_{p^m}: pivots are powers of p, entries above a pivot are
// reduced modulo it, and the row set is closed enough that any span element
// supported on a suffix of columns is generated by the rows whose pivots lie
// in that suffix. That closure is what makes kernels and solvability checks
// by row inspection correct here, where plain echelon form would not be.

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "affimp/errors.hpp"
#include "affimp/modint.hpp"

namespace affimp {

using Row = std::vector<std::int64_t>;

struct ZpmMatrix {
    Modulus mod;
    std::size_t cols = 0;
    std::vector<Row> rows;

    ZpmMatrix() = default;
    ZpmMatrix(Modulus m, std::size_t c) : mod(m), cols(c) {}
    ZpmMatrix(Modulus m, std::vector<Row> r, std::size_t c) : mod(m), cols(c), rows(std::move(r)) {
        for (auto& row : rows) {
            if (row.size() != cols) throw invalid_parameter("zpm: ragged matrix");
            for (auto& v : row) v = mod.reduce(v);
        }
    }

    static ZpmMatrix identity(Modulus m, std::size_t n) {
        ZpmMatrix out(m, n);
        for (std::size_t i = 0; i < n; ++i) {
            Row r(n, 0);
            r[i] = 1;
            out.rows.push_back(std::move(r));
        }
        return out;
    }

    friend bool operator==(const ZpmMatrix& a, const ZpmMatrix& b) {
        return a.mod == b.mod && a.cols == b.cols && a.rows == b.rows;
    }
};

struct SubgroupDescription {
    Modulus mod;
    std::size_t arity = 0;
    std::vector<Row> generators;

    // Expands the generated subgroup; refuses (returns nullopt) past `cap`.
    std::optional<std::set<Row>> expand(std::size_t cap = 1u << 16) const {
        std::set<Row> span;
        Row zero(arity, 0);
        span.insert(zero);
        std::deque<Row> work{zero};
        while (!work.empty()) {
            Row cur = std::move(work.front());
            work.pop_front();
            for (const auto& g : generators) {
                Row nxt(arity);
                for (std::size_t i = 0; i < arity; ++i) nxt[i] = mod.reduce(cur[i] + g[i]);
                if (span.insert(nxt).second) {
                    if (span.size() > cap) return std::nullopt;
                    work.push_back(std::move(nxt));
                }
            }
        }
        return span;
    }
};

namespace detail {

struct XGcd {
    std::int64_t g, x, y;  // g = x*a + y*b
};

inline XGcd xgcd(std::int64_t a, std::int64_t b) {
    if (b == 0) return {a, 1, 0};
    XGcd r = xgcd(b, a % b);
    return {r.g, r.y, r.x - (a / b) * r.y};
}

}  // namespace detail

struct HowellForm {
    ZpmMatrix h;                     // canonical rows, sorted by pivot column
    ZpmMatrix transform;             // T with T * input = h (row-wise, mod p^m)
    std::vector<std::size_t> pivot_col;
    std::vector<int> pivot_val;      // pivot is p^{pivot_val}
};

// The worklist algorithm: insert each row, eliminating against existing
// pivots; when a row brings a smaller p-valuation to an occupied column the
// two are combined by an xgcd step whose 2x2 transform is unimodular. Every
// pivot of valuation v also enqueues its shadow p^{m-v} * row, which is what
// upgrades echelon form to Howell form.
inline HowellForm howell_form(const ZpmMatrix& a) {
    const Modulus mod = a.mod;
    const std::size_t n = a.cols;
    const std::size_t nin = a.rows.size();
    struct Slot { Row r, t; int val; };
    std::vector<std::optional<Slot>> slot(n);

    auto scale_row = [&](Row& r, std::int64_t k) {
        for (auto& v : r) v = mod.reduce(v * mod.reduce(k));
    };
    auto axpy = [&](Row& r, std::int64_t k, const Row& s) {  // r += k*s
        std::int64_t kk = mod.reduce(k);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = mod.reduce(r[i] + kk * s[i]);
    };

    std::deque<std::pair<Row, Row>> work;
    for (std::size_t i = 0; i < nin; ++i) {
        Row t(nin, 0);
        t[i] = 1;
        Row r = a.rows[i];
        for (auto& v : r) v = mod.reduce(v);
        work.emplace_back(std::move(r), std::move(t));
    }

    while (!work.empty()) {
        auto [r, t] = std::move(work.front());
        work.pop_front();
        for (std::size_t j = 0; j < n; ++j) {
            if (r[j] == 0) continue;
            int v = mod.valuation(r[j]);
            if (!slot[j]) {
                std::int64_t unit = r[j] / pow_i64(mod.p, v);
                std::int64_t ui = mod.unit_inverse(unit);
                scale_row(r, ui);
                scale_row(t, ui);
                if (v > 0) {
                    std::int64_t sh = pow_i64(mod.p, mod.m - v);
                    Row rs = r, ts = t;
                    scale_row(rs, sh);
                    scale_row(ts, sh);
                    work.emplace_back(std::move(rs), std::move(ts));
                }
                slot[j] = Slot{std::move(r), std::move(t), v};
                r.clear();
                break;
            }
            Slot& s = *slot[j];
            if (v >= s.val) {
                std::int64_t q = r[j] / pow_i64(mod.p, s.val);
                axpy(r, mod.pm - mod.reduce(q), s.r);
                axpy(t, mod.pm - mod.reduce(q), s.t);
            } else {
                auto eg = detail::xgcd(s.r[j], r[j]);
                Row np = s.r, nt = s.t;
                scale_row(np, eg.x);
                scale_row(nt, eg.x);
                axpy(np, eg.y, r);
                axpy(nt, eg.y, t);
                Row other = r, to = t;
                scale_row(other, s.r[j] / eg.g);
                scale_row(to, s.r[j] / eg.g);
                axpy(other, mod.pm - mod.reduce(r[j] / eg.g), s.r);
                axpy(to, mod.pm - mod.reduce(r[j] / eg.g), s.t);
                int nv = mod.valuation(np[j]);
                std::int64_t unit = np[j] / pow_i64(mod.p, nv);
                std::int64_t ui = mod.unit_inverse(unit);
                scale_row(np, ui);
                scale_row(nt, ui);
                if (nv > 0) {
                    std::int64_t sh = pow_i64(mod.p, mod.m - nv);
                    Row rs = np, ts = nt;
                    scale_row(rs, sh);
                    scale_row(ts, sh);
                    work.emplace_back(std::move(rs), std::move(ts));
                }
                slot[j] = Slot{std::move(np), std::move(nt), nv};
                r = std::move(other);
                t = std::move(to);
            }
        }
    }

    HowellForm out;
    out.h = ZpmMatrix(mod, n);
    out.transform = ZpmMatrix(mod, nin);
    for (std::size_t j = 0; j < n; ++j) {
        if (!slot[j]) continue;
        out.h.rows.push_back(slot[j]->r);
        out.transform.rows.push_back(slot[j]->t);
        out.pivot_col.push_back(j);
        out.pivot_val.push_back(slot[j]->val);
    }
    // Reduce entries above each pivot modulo the pivot.
    for (std::size_t k = 0; k < out.h.rows.size(); ++k) {
        std::int64_t piv = pow_i64(mod.p, out.pivot_val[k]);
        std::size_t j = out.pivot_col[k];
        for (std::size_t i = 0; i < k; ++i) {
            std::int64_t q = out.h.rows[i][j] / piv;
            if (q == 0) continue;
            axpy(out.h.rows[i], mod.pm - mod.reduce(q), out.h.rows[k]);
            axpy(out.transform.rows[i], mod.pm - mod.reduce(q), out.transform.rows[k]);
        }
    }
    return out;
}

// Howell canonical form: same row span, canonical representative.
inline ZpmMatrix canonical_form(const ZpmMatrix& m) { return howell_form(m).h; }

struct UnsatWitness {
    Row combination;           // coefficients over the input rows
    std::int64_t contradiction = 0;  // the derived nonzero constant c in 0 = c
};

struct SolveResult {
    std::optional<Row> solution;
    std::optional<UnsatWitness> witness;
    bool ok() const { return solution.has_value(); }
};

// One solution of H x = b (mod p^m), or an UNSAT witness: a combination of
// the input congruences that evaluates to 0 = c with c != 0.
inline SolveResult solve_congruences(const ZpmMatrix& h, const Row& b) {
    if (b.size() != h.rows.size())
        throw invalid_parameter("solve_congruences: rhs length " + std::to_string(b.size()) +
                                " does not match row count " + std::to_string(h.rows.size()));
    const Modulus mod = h.mod;
    ZpmMatrix aug(mod, h.cols + 1);
    for (std::size_t i = 0; i < h.rows.size(); ++i) {
        Row r = h.rows[i];
        r.push_back(mod.reduce(b[i]));
        aug.rows.push_back(std::move(r));
    }
    HowellForm hf = howell_form(aug);
    for (std::size_t k = 0; k < hf.h.rows.size(); ++k) {
        if (hf.pivot_col[k] == h.cols) {
            UnsatWitness w;
            w.combination = hf.transform.rows[k];
            w.contradiction = hf.h.rows[k][h.cols];
            return {std::nullopt, std::move(w)};
        }
    }
    Row x(h.cols, 0);
    for (std::size_t kk = hf.h.rows.size(); kk-- > 0;) {
        std::size_t j = hf.pivot_col[kk];
        std::int64_t piv = pow_i64(mod.p, hf.pivot_val[kk]);
        std::int64_t rhs = hf.h.rows[kk][h.cols];
        for (std::size_t c = j + 1; c < h.cols; ++c)
            rhs = mod.reduce(rhs - hf.h.rows[kk][c] * x[c]);
        if (rhs % piv != 0)
            throw invariant_violation("solve_congruences: inconsistent pivot row escaped the Howell check");
        x[j] = (rhs / piv) % (mod.pm / piv);
    }
    return {std::move(x), std::nullopt};
}

// Generators of { x : H x = 0 (mod p^m) }, extracted from the Howell form of
// [H^T | I]: rows whose H^T block vanished carry kernel members in the
// identity block, and the Howell closure property makes them generate the
// whole kernel.
inline SubgroupDescription kernel_generators(const ZpmMatrix& h) {
    const Modulus mod = h.mod;
    const std::size_t n = h.cols;
    const std::size_t r = h.rows.size();
    ZpmMatrix m(mod, r + n);
    for (std::size_t i = 0; i < n; ++i) {
        Row row(r + n, 0);
        for (std::size_t k = 0; k < r; ++k) row[k] = mod.reduce(h.rows[k][i]);
        row[r + i] = 1;
        m.rows.push_back(std::move(row));
    }
    HowellForm hf = howell_form(m);
    SubgroupDescription out;
    out.mod = mod;
    out.arity = n;
    for (std::size_t k = 0; k < hf.h.rows.size(); ++k) {
        if (hf.pivot_col[k] < r) continue;
        Row g(hf.h.rows[k].begin() + static_cast<std::ptrdiff_t>(r), hf.h.rows[k].end());
        out.generators.push_back(std::move(g));
    }
    return out;
}

// Drops generators already generated by the others. Exact but desk-scale:
// gives up (returns the input untouched) if the subgroup is larger than cap.
inline SubgroupDescription minimize_generators(SubgroupDescription s, std::size_t cap = 4096) {
    auto full = s.expand(cap);
    if (!full) return s;
    for (std::size_t i = s.generators.size(); i-- > 0;) {
        SubgroupDescription trial = s;
        trial.generators.erase(trial.generators.begin() + static_cast<std::ptrdiff_t>(i));
        auto span = trial.expand(cap);
        if (span && span->size() == full->size())
            s.generators.erase(s.generators.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return s;
}

// Matrix H with ker H exactly the subgroup generated by S (annihilator
// duality in Z_{p^m}^n, where the double annihilator recovers the subgroup).
inline ZpmMatrix annihilator(const SubgroupDescription& s) {
    ZpmMatrix g(s.mod, s.arity);
    for (const auto& gen : s.generators) {
        if (gen.size() != s.arity) throw invalid_parameter("annihilator: generator arity mismatch");
        Row r = gen;
        for (auto& v : r) v = s.mod.reduce(v);
        g.rows.push_back(std::move(r));
    }
    if (g.rows.empty()) return ZpmMatrix::identity(s.mod, s.arity);
    SubgroupDescription dual = kernel_generators(g);
    ZpmMatrix h(s.mod, s.arity);
    h.rows = dual.generators;
    return h;
}

}  // namespace affimp
