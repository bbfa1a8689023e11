#pragma once

// Sparse multivariate polynomials over the cyclotomic field, with lex and
// grlex orders, multivariate division with quotient tracking, S-polynomials,
// a Buchberger checker, Lagrange interpolation, and substitution with
// per-variable exponent reduction.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "affimp/cyclotomic.hpp"
#include "affimp/errors.hpp"

namespace affimp {

using ExpVec = std::vector<int>;

enum class OrderKind { Lex, Grlex };

struct MonomialOrder {
    OrderKind kind = OrderKind::Lex;
};

// -1 / 0 / +1 as alpha < beta / = / > beta. Variable priority is position:
// earlier entries in the variable list dominate.
inline int compare(const MonomialOrder& order, const ExpVec& a, const ExpVec& b) {
    if (a.size() != b.size()) throw invalid_parameter("monomial compare: exponent length mismatch");
    if (order.kind == OrderKind::Grlex) {
        long da = 0, db = 0;
        for (std::size_t i = 0; i < a.size(); ++i) { da += a[i]; db += b[i]; }
        if (da != db) return da < db ? -1 : 1;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

inline bool divides(const ExpVec& a, const ExpVec& b) {  // x^a | x^b
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

using VarListPtr = std::shared_ptr<const std::vector<std::string>>;

inline VarListPtr make_vars(std::vector<std::string> names) {
    return std::make_shared<const std::vector<std::string>>(std::move(names));
}

class MultivariatePolynomial {
public:
    MultivariatePolynomial() : vars_(make_vars({})) {}
    explicit MultivariatePolynomial(VarListPtr vars) : vars_(std::move(vars)) {}

    static MultivariatePolynomial constant(VarListPtr vars, const CyclotomicNumber& c) {
        MultivariatePolynomial p(std::move(vars));
        p.add_term(ExpVec(p.vars_->size(), 0), c);
        return p;
    }
    static MultivariatePolynomial variable(VarListPtr vars, std::size_t idx) {
        MultivariatePolynomial p(vars);
        ExpVec e(vars->size(), 0);
        e.at(idx) = 1;
        p.add_term(e, CyclotomicNumber::one());
        return p;
    }
    static MultivariatePolynomial monomial(VarListPtr vars, ExpVec e, const CyclotomicNumber& c) {
        MultivariatePolynomial p(std::move(vars));
        p.add_term(std::move(e), c);
        return p;
    }

    const VarListPtr& vars() const { return vars_; }
    const std::map<ExpVec, CyclotomicNumber>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    void add_term(ExpVec e, const CyclotomicNumber& c) {
        if (e.size() != vars_->size()) throw invalid_parameter("polynomial: exponent arity mismatch");
        if (c.is_zero()) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(std::move(e), c);
        } else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    int degree() const {  // total degree; -1 for the zero polynomial
        int d = -1;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int x : e) s += x;
            d = std::max(d, s);
        }
        return d;
    }

    int degree_in(std::size_t var) const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
        return d;
    }

    std::pair<ExpVec, CyclotomicNumber> leading_term(const MonomialOrder& order) const {
        if (terms_.empty()) throw invalid_parameter("leading term of the zero polynomial");
        auto best = terms_.begin();
        for (auto it = std::next(terms_.begin()); it != terms_.end(); ++it)
            if (compare(order, it->first, best->first) > 0) best = it;
        return {best->first, best->second};
    }

    MultivariatePolynomial operator-() const {
        MultivariatePolynomial r(vars_);
        for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
        return r;
    }
    friend MultivariatePolynomial operator+(const MultivariatePolynomial& a, const MultivariatePolynomial& b) {
        a.check(b);
        MultivariatePolynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }
    friend MultivariatePolynomial operator-(const MultivariatePolynomial& a, const MultivariatePolynomial& b) {
        a.check(b);
        MultivariatePolynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, -c);
        return r;
    }
    friend MultivariatePolynomial operator*(const MultivariatePolynomial& a, const MultivariatePolynomial& b) {
        a.check(b);
        MultivariatePolynomial r(a.vars_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                ExpVec e(ea.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(std::move(e), ca * cb);
            }
        }
        return r;
    }
    MultivariatePolynomial scaled(const CyclotomicNumber& c) const {
        MultivariatePolynomial r(vars_);
        if (c.is_zero()) return r;
        for (const auto& [e, k] : terms_) r.add_term(e, k * c);
        return r;
    }
    MultivariatePolynomial times_monomial(const ExpVec& e0, const CyclotomicNumber& c) const {
        MultivariatePolynomial r(vars_);
        if (c.is_zero()) return r;
        for (const auto& [e, k] : terms_) {
            ExpVec e2(e.size());
            for (std::size_t i = 0; i < e.size(); ++i) e2[i] = e[i] + e0[i];
            r.add_term(std::move(e2), k * c);
        }
        return r;
    }

    friend bool operator==(const MultivariatePolynomial& a, const MultivariatePolynomial& b) {
        if (*a.vars_ != *b.vars_) return false;
        if (a.terms_.size() != b.terms_.size()) return false;
        auto ia = a.terms_.begin();
        auto ib = b.terms_.begin();
        for (; ia != a.terms_.end(); ++ia, ++ib)
            if (ia->first != ib->first || ia->second != ib->second) return false;
        return true;
    }
    friend bool operator!=(const MultivariatePolynomial& a, const MultivariatePolynomial& b) { return !(a == b); }

    CyclotomicNumber evaluate(const std::vector<CyclotomicNumber>& point) const {
        if (point.size() != vars_->size()) throw invalid_parameter("evaluate: point arity mismatch");
        CyclotomicNumber acc = CyclotomicNumber::zero();
        for (const auto& [e, c] : terms_) {
            CyclotomicNumber t = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (int k = 0; k < e[i]; ++k) t *= point[i];
            acc += t;
        }
        return acc;
    }

    // Rename/extend onto another variable list (every current variable must
    // appear there).
    MultivariatePolynomial on_vars(const VarListPtr& target) const {
        std::vector<std::size_t> pos(vars_->size());
        for (std::size_t i = 0; i < vars_->size(); ++i) {
            auto it = std::find(target->begin(), target->end(), (*vars_)[i]);
            if (it == target->end())
                throw invalid_parameter("polynomial: variable '" + (*vars_)[i] + "' missing from target list");
            pos[i] = static_cast<std::size_t>(it - target->begin());
        }
        MultivariatePolynomial r(target);
        for (const auto& [e, c] : terms_) {
            ExpVec e2(target->size(), 0);
            for (std::size_t i = 0; i < e.size(); ++i) e2[pos[i]] = e[i];
            r.add_term(std::move(e2), c);
        }
        return r;
    }

    std::string to_string(const MonomialOrder& order = {OrderKind::Lex}) const {
        if (terms_.empty()) return "0";
        std::vector<const ExpVec*> keys;
        for (const auto& [e, c] : terms_) keys.push_back(&e);
        std::sort(keys.begin(), keys.end(), [&](const ExpVec* a, const ExpVec* b) {
            return compare(order, *a, *b) > 0;
        });
        std::ostringstream os;
        bool first = true;
        for (const auto* e : keys) {
            if (!first) os << " + ";
            first = false;
            os << terms_.at(*e).to_string();
            for (std::size_t i = 0; i < e->size(); ++i) {
                if ((*e)[i] == 0) continue;
                os << "*" << (*vars_)[i];
                if ((*e)[i] > 1) os << "^" << (*e)[i];
            }
        }
        return os.str();
    }

private:
    void check(const MultivariatePolynomial& o) const {
        if (vars_ != o.vars_ && *vars_ != *o.vars_)
            throw invalid_parameter("polynomial: mixed variable lists");
    }

    VarListPtr vars_;
    std::map<ExpVec, CyclotomicNumber> terms_;
};

struct DivisionResult {
    std::vector<MultivariatePolynomial> quotients;  // aligned with the divisor list
    MultivariatePolynomial remainder;
};

// Multivariate division: repeatedly cancel the leading term against the
// first divisor whose leading monomial divides it; uncancellable leading
// terms move to the remainder. Exact identity f = sum q_g g + r.
inline DivisionResult divide(const MultivariatePolynomial& f,
                             const std::vector<MultivariatePolynomial>& basis,
                             const MonomialOrder& order) {
    struct Lead {
        ExpVec lm;
        CyclotomicNumber lc_inv;
    };
    std::vector<Lead> leads;
    leads.reserve(basis.size());
    for (const auto& g : basis) {
        if (g.is_zero()) throw invalid_parameter("divide: zero divisor in the basis");
        auto [lm, lc] = g.leading_term(order);
        leads.push_back({lm, lc.inverse()});
    }

    auto cmp = [&order](const ExpVec& a, const ExpVec& b) { return compare(order, a, b) > 0; };
    std::map<ExpVec, CyclotomicNumber, decltype(cmp)> work(cmp);
    for (const auto& [e, c] : f.terms()) work.emplace(e, c);

    DivisionResult out;
    out.quotients.assign(basis.size(), MultivariatePolynomial(f.vars()));
    out.remainder = MultivariatePolynomial(f.vars());

    while (!work.empty()) {
        auto lt = work.begin();
        ExpVec mono = lt->first;
        CyclotomicNumber coef = lt->second;
        work.erase(lt);
        bool reduced = false;
        for (std::size_t gi = 0; gi < basis.size(); ++gi) {
            if (!divides(leads[gi].lm, mono)) continue;
            ExpVec q(mono.size());
            for (std::size_t i = 0; i < q.size(); ++i) q[i] = mono[i] - leads[gi].lm[i];
            CyclotomicNumber qc = coef * leads[gi].lc_inv;
            out.quotients[gi].add_term(q, qc);
            // subtract qc * x^q * g, skipping the cancelled leading term
            for (const auto& [e, c] : basis[gi].terms()) {
                if (e == leads[gi].lm) continue;
                ExpVec e2(e.size());
                for (std::size_t i = 0; i < e.size(); ++i) e2[i] = e[i] + q[i];
                auto it = work.find(e2);
                if (it == work.end()) {
                    CyclotomicNumber nc = -(c * qc);
                    if (!nc.is_zero()) work.emplace(std::move(e2), std::move(nc));
                } else {
                    it->second -= c * qc;
                    if (it->second.is_zero()) work.erase(it);
                }
            }
            reduced = true;
            break;
        }
        if (!reduced) out.remainder.add_term(std::move(mono), coef);
    }
    return out;
}

inline MultivariatePolynomial s_polynomial(const MultivariatePolynomial& f, const MultivariatePolynomial& g,
                                           const MonomialOrder& order) {
    if (f.is_zero() || g.is_zero()) throw invalid_parameter("s_polynomial: zero input");
    auto [ef, cf] = f.leading_term(order);
    auto [eg, cg] = g.leading_term(order);
    ExpVec gamma(ef.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma[i] = std::max(ef[i], eg[i]);
    ExpVec qf(gamma.size()), qg(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) { qf[i] = gamma[i] - ef[i]; qg[i] = gamma[i] - eg[i]; }
    return f.times_monomial(qf, cf.inverse()) - g.times_monomial(qg, cg.inverse());
}

struct BuchbergerReport {
    bool pass = true;
    std::optional<std::pair<std::size_t, std::size_t>> witness_pair;
    std::optional<MultivariatePolynomial> witness_remainder;
    std::vector<std::pair<std::size_t, std::size_t>> shortcut_pairs;  // relatively prime leading monomials
};

// Buchberger's criterion, with the relatively-prime-leading-monomials
// shortcut recorded per pair. `use_shortcut = false` forces the full
// S-polynomial reduction everywhere.
inline BuchbergerReport buchberger_check(const std::vector<MultivariatePolynomial>& basis,
                                         const MonomialOrder& order, bool use_shortcut = true) {
    BuchbergerReport rep;
    std::vector<ExpVec> lms;
    lms.reserve(basis.size());
    for (const auto& g : basis) {
        if (g.is_zero()) throw invalid_parameter("buchberger_check: zero basis element");
        lms.push_back(g.leading_term(order).first);
    }
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = i + 1; j < basis.size(); ++j) {
            bool coprime = true;
            for (std::size_t k = 0; k < lms[i].size() && coprime; ++k)
                coprime = lms[i][k] == 0 || lms[j][k] == 0;
            if (coprime && use_shortcut) {
                rep.shortcut_pairs.emplace_back(i, j);
                continue;
            }
            MultivariatePolynomial s = s_polynomial(basis[i], basis[j], order);
            MultivariatePolynomial r = divide(s, basis, order).remainder;
            if (!r.is_zero()) {
                rep.pass = false;
                rep.witness_pair = {i, j};
                rep.witness_remainder = std::move(r);
                return rep;
            }
        }
    }
    return rep;
}

// Lagrange interpolation through distinct (node, value) pairs; univariate in
// the single variable of `vars`.
inline MultivariatePolynomial interpolate(const std::vector<std::pair<CyclotomicNumber, CyclotomicNumber>>& points,
                                          VarListPtr vars, std::size_t var_idx = 0) {
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i].first == points[j].first)
                throw invalid_parameter("interpolate: duplicate node");
    MultivariatePolynomial acc(vars);
    ExpVec x1(vars->size(), 0);
    x1.at(var_idx) = 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
        MultivariatePolynomial li = MultivariatePolynomial::constant(vars, points[i].second);
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            // (x - node_j) / (node_i - node_j)
            CyclotomicNumber denom_inv = (points[i].first - points[j].first).inverse();
            MultivariatePolynomial lin(vars);
            lin.add_term(x1, denom_inv);
            lin.add_term(ExpVec(vars->size(), 0), -(points[j].first * denom_inv));
            li = li * lin;
        }
        acc = acc + li;
    }
    return acc;
}

struct Substitution {
    // Replacement polynomial per source variable name; all replacements
    // share one target variable list.
    std::map<std::string, MultivariatePolynomial> replace;
    // Exponent cap per target variable: x^cap = 1 (from the relation
    // x^{p^m} - 1 = 0), applied during expansion. 0 means no reduction.
    std::vector<std::int64_t> caps;
    VarListPtr target;
};

namespace detail {

inline void reduce_exps(ExpVec& e, const std::vector<std::int64_t>& caps) {
    for (std::size_t i = 0; i < e.size(); ++i)
        if (caps[i] > 0 && e[i] >= caps[i]) e[i] = static_cast<int>(e[i] % caps[i]);
}

inline MultivariatePolynomial mul_reduced(const MultivariatePolynomial& a, const MultivariatePolynomial& b,
                                          const std::vector<std::int64_t>& caps, std::uint64_t term_guard) {
    MultivariatePolynomial r(a.vars());
    for (const auto& [ea, ca] : a.terms()) {
        for (const auto& [eb, cb] : b.terms()) {
            ExpVec e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            reduce_exps(e, caps);
            r.add_term(std::move(e), ca * cb);
            if (r.term_count() > term_guard)
                throw guard_refusal("substitute_reduce: expansion exceeds the term bound " + std::to_string(term_guard));
        }
    }
    return r;
}

}  // namespace detail

// p composed with per-variable replacements, reducing exponents modulo the
// caps as the product expands so per-variable degrees stay below p^m.
// Refuses when the projected or actual term count passes `term_guard`.
inline MultivariatePolynomial substitute_reduce(const MultivariatePolynomial& p, const Substitution& sub,
                                                std::uint64_t term_guard = 1000000) {
    if (sub.caps.size() != sub.target->size())
        throw invalid_parameter("substitute_reduce: cap list does not match the target variables");
    // Projected size check before any expansion.
    std::vector<const MultivariatePolynomial*> by_var(p.vars()->size(), nullptr);
    for (std::size_t i = 0; i < p.vars()->size(); ++i) {
        bool used = false;
        for (const auto& [e, c] : p.terms()) used = used || e[i] > 0;
        if (!used) continue;
        auto it = sub.replace.find((*p.vars())[i]);
        if (it == sub.replace.end())
            throw invalid_parameter("substitute_reduce: no replacement for variable '" + (*p.vars())[i] + "'");
        by_var[i] = &it->second;
    }
    std::uint64_t projected = 0;
    for (const auto& [e, c] : p.terms()) {
        std::uint64_t t = 1;
        for (std::size_t i = 0; i < e.size(); ++i) {
            for (int k = 0; k < e[i]; ++k) {
                t *= std::max<std::uint64_t>(1, by_var[i]->term_count());
                if (t > term_guard)
                    throw guard_refusal("substitute_reduce: projected expansion exceeds the term bound " +
                                        std::to_string(term_guard));
            }
        }
        projected += t;
        if (projected > term_guard)
            throw guard_refusal("substitute_reduce: projected expansion exceeds the term bound " +
                                std::to_string(term_guard));
    }

    MultivariatePolynomial acc(sub.target);
    for (const auto& [e, c] : p.terms()) {
        MultivariatePolynomial term = MultivariatePolynomial::constant(sub.target, c);
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int k = 0; k < e[i]; ++k)
                term = detail::mul_reduced(term, *by_var[i], sub.caps, term_guard);
        acc = acc + term;
        if (acc.term_count() > term_guard)
            throw guard_refusal("substitute_reduce: expansion exceeds the term bound " + std::to_string(term_guard));
    }
    return acc;
}

}  // namespace affimp
