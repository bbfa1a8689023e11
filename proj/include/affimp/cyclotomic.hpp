#pragma once

// Exact arithmetic in the compositum Q(w_1, ..., w_s) where w_i is a
// primitive p_i^{m_i}-th root of unity and the p_i are distinct primes.
// Elements live in the tensor basis
//     { t_1^{e_1} ... t_s^{e_s} : 0 <= e_i < phi(p_i^{m_i}) }
// of Q[t_1,...,t_s] / (Phi_{p_1^{m_1}}(t_1), ..., Phi_{p_s^{m_s}}(t_s)).
// Because the primes are distinct the quotient is a field, and eager
// reduction below phi per variable makes the representation canonical:
// equality is a coefficient-table comparison.
//
// Key fact used throughout: w^a = w^b iff a = b (mod p^m).

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "affimp/errors.hpp"
#include "affimp/modint.hpp"
#include "affimp/rational.hpp"

namespace affimp {

// Phi_{p^m}(t) = sum_{j=0}^{p-1} t^{j p^{m-1}}, coefficients ascending.
inline std::vector<std::int64_t> cyclotomic_modulus(std::int64_t p, int m) {
    if (!is_prime_i64(p)) throw invalid_parameter("cyclotomic_modulus: p is not prime");
    if (m < 1) throw invalid_parameter("cyclotomic_modulus: m must be >= 1");
    std::int64_t q = pow_i64(p, m - 1);
    std::vector<std::int64_t> coeffs(static_cast<std::size_t>((p - 1) * q) + 1, 0);
    for (std::int64_t j = 0; j < p; ++j) coeffs[static_cast<std::size_t>(j * q)] = 1;
    return coeffs;
}

namespace detail {

// Shared, immutable data for one signature: strides for the dense layout and
// the power-reduction table t^e mod Phi for every exponent we can meet.
struct SigInfo {
    std::vector<Modulus> sorts;           // distinct primes, ascending
    std::vector<int> phi;                 // phi(p_i^{m_i})
    std::vector<int> stride;
    int dim = 1;
    // red[i][e] = coefficients of t_i^e reduced below phi_i (length phi_i).
    std::vector<std::vector<std::vector<std::int64_t>>> red;

    explicit SigInfo(std::vector<Modulus> s) : sorts(std::move(s)) {
        phi.reserve(sorts.size());
        for (std::size_t i = 0; i + 1 < sorts.size(); ++i)
            if (sorts[i].p >= sorts[i + 1].p)
                throw invalid_parameter("cyclotomic signature: primes must be distinct and ascending");
        for (const auto& ms : sorts) phi.push_back(static_cast<int>(ms.pm - ms.pm / ms.p));
        stride.assign(sorts.size(), 1);
        for (int i = static_cast<int>(sorts.size()) - 1; i >= 0; --i) {
            stride[static_cast<std::size_t>(i)] = dim;
            dim *= phi[static_cast<std::size_t>(i)];
        }
        red.resize(sorts.size());
        for (std::size_t i = 0; i < sorts.size(); ++i) {
            const auto& ms = sorts[i];
            int f = phi[i];
            std::int64_t q = ms.pm / ms.p;  // p^{m-1}
            int maxe = std::max<int>(2 * f - 1, static_cast<int>(ms.pm));
            auto& tab = red[i];
            tab.resize(static_cast<std::size_t>(maxe) + 1);
            for (int e = 0; e <= maxe; ++e) {
                auto& row = tab[static_cast<std::size_t>(e)];
                row.assign(static_cast<std::size_t>(f), 0);
                if (e < f) {
                    row[static_cast<std::size_t>(e)] = 1;
                } else {
                    // t^e = -sum_{j=0}^{p-2} t^{e - phi + j p^{m-1}}, all
                    // indices strictly below e, so forward DP suffices.
                    for (std::int64_t j = 0; j + 1 < ms.p; ++j) {
                        const auto& prev = tab[static_cast<std::size_t>(e - f + j * q)];
                        for (int k = 0; k < f; ++k) row[static_cast<std::size_t>(k)] -= prev[static_cast<std::size_t>(k)];
                    }
                }
            }
        }
    }
};

inline std::shared_ptr<const SigInfo> sig_info(const std::vector<Modulus>& sorts) {
    static std::mutex mu;
    static std::map<std::vector<std::pair<std::int64_t, int>>, std::shared_ptr<const SigInfo>> cache;
    std::vector<std::pair<std::int64_t, int>> key;
    key.reserve(sorts.size());
    for (const auto& s : sorts) key.emplace_back(s.p, s.m);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto info = std::make_shared<SigInfo>(sorts);
    cache.emplace(std::move(key), info);
    return info;
}

}  // namespace detail

class CyclotomicNumber {
public:
    CyclotomicNumber() : CyclotomicNumber(Rational(0)) {}
    CyclotomicNumber(const Rational& r)  // NOLINT: rationals embed implicitly
        : sig_(detail::sig_info({})), coef_(1, r) {}
    CyclotomicNumber(long n) : CyclotomicNumber(Rational(n)) {}  // NOLINT

    static CyclotomicNumber zero() { return CyclotomicNumber(Rational(0)); }
    static CyclotomicNumber one() { return CyclotomicNumber(Rational(1)); }

    // w_{p^m}^a, with a taken mod p^m.
    static CyclotomicNumber omega_power(const Modulus& sort, std::int64_t a) {
        auto sig = detail::sig_info({sort});
        std::int64_t e = sort.reduce(a);
        CyclotomicNumber x;
        x.sig_ = sig;
        x.coef_.assign(static_cast<std::size_t>(sig->dim), Rational(0));
        const auto& row = sig->red[0][static_cast<std::size_t>(e)];
        for (int k = 0; k < sig->phi[0]; ++k)
            if (row[static_cast<std::size_t>(k)] != 0)
                x.coef_[static_cast<std::size_t>(k)] = Rational(static_cast<long>(row[static_cast<std::size_t>(k)]));
        return x;
    }

    const std::vector<Modulus>& sorts() const { return sig_->sorts; }

    bool is_zero() const {
        for (const auto& c : coef_) if (!c.is_zero()) return false;
        return true;
    }
    bool is_rational() const {
        for (std::size_t i = 1; i < coef_.size(); ++i) if (!coef_[i].is_zero()) return false;
        return true;
    }
    // Valid only when is_rational().
    const Rational& rational_part() const { return coef_[0]; }

    friend CyclotomicNumber operator+(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        auto [x, y] = unify(a, b);
        for (std::size_t i = 0; i < x.coef_.size(); ++i) x.coef_[i] += y.coef_[i];
        return x;
    }
    friend CyclotomicNumber operator-(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        auto [x, y] = unify(a, b);
        for (std::size_t i = 0; i < x.coef_.size(); ++i) x.coef_[i] -= y.coef_[i];
        return x;
    }
    CyclotomicNumber operator-() const {
        CyclotomicNumber r(*this);
        for (auto& c : r.coef_) c = -c;
        return r;
    }

    friend CyclotomicNumber operator*(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        // Fast path: rational scalar on either side.
        if (a.sig_->sorts.empty()) return b.scaled(a.coef_[0]);
        if (b.sig_->sorts.empty()) return a.scaled(b.coef_[0]);
        auto [x, y] = unify(a, b);
        const auto& info = *x.sig_;
        std::size_t ns = info.sorts.size();
        // Convolve into an extended exponent box (each e_i < 2 phi_i - 1),
        // then fold each variable down with the reduction table.
        std::vector<int> ext(ns);
        int extdim = 1;
        for (std::size_t i = 0; i < ns; ++i) { ext[i] = 2 * info.phi[i] - 1; extdim *= ext[i]; }
        std::vector<int> extstride(ns, 1);
        for (int i = static_cast<int>(ns) - 1; i >= 0; --i) {
            extstride[static_cast<std::size_t>(i)] = (i + 1 < static_cast<int>(ns))
                ? extstride[static_cast<std::size_t>(i + 1)] * ext[static_cast<std::size_t>(i + 1)] : 1;
        }
        std::vector<Rational> buf(static_cast<std::size_t>(extdim), Rational(0));
        std::vector<int> ea(ns), eb(ns);
        for (int ia = 0; ia < info.dim; ++ia) {
            if (x.coef_[static_cast<std::size_t>(ia)].is_zero()) continue;
            decode(info, ia, ea);
            for (int ib = 0; ib < info.dim; ++ib) {
                if (y.coef_[static_cast<std::size_t>(ib)].is_zero()) continue;
                decode(info, ib, eb);
                int idx = 0;
                for (std::size_t i = 0; i < ns; ++i) idx += (ea[i] + eb[i]) * extstride[i];
                buf[static_cast<std::size_t>(idx)] += x.coef_[static_cast<std::size_t>(ia)] * y.coef_[static_cast<std::size_t>(ib)];
            }
        }
        // Fold sort by sort.
        std::vector<int> dims = ext;
        for (std::size_t i = 0; i < ns; ++i) {
            buf = fold_sort(info, buf, dims, i);
            dims[i] = info.phi[i];
        }
        CyclotomicNumber r;
        r.sig_ = x.sig_;
        r.coef_ = std::move(buf);
        return r;
    }

    CyclotomicNumber scaled(const Rational& r) const {
        CyclotomicNumber out(*this);
        for (auto& c : out.coef_) c *= r;
        return out;
    }

    CyclotomicNumber& operator+=(const CyclotomicNumber& o) { return *this = *this + o; }
    CyclotomicNumber& operator-=(const CyclotomicNumber& o) { return *this = *this - o; }
    CyclotomicNumber& operator*=(const CyclotomicNumber& o) { return *this = *this * o; }

    friend bool operator==(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        auto [x, y] = unify(a, b);
        return x.coef_ == y.coef_;
    }
    friend bool operator!=(const CyclotomicNumber& a, const CyclotomicNumber& b) { return !(a == b); }

    // Multiplicative inverse, by solving the "multiply by a" linear system in
    // the tensor basis over Q.
    CyclotomicNumber inverse() const {
        if (is_zero()) throw invalid_parameter("cyclotomic: division by zero");
        if (is_rational()) return CyclotomicNumber(coef_[0].inverse()).with_signature(sig_);
        const auto& info = *sig_;
        int n = info.dim;
        // Column k of M is a * t^{basis k}.
        std::vector<std::vector<Rational>> M(static_cast<std::size_t>(n),
                                             std::vector<Rational>(static_cast<std::size_t>(n), Rational(0)));
        for (int k = 0; k < n; ++k) {
            CyclotomicNumber bk;
            bk.sig_ = sig_;
            bk.coef_.assign(static_cast<std::size_t>(n), Rational(0));
            bk.coef_[static_cast<std::size_t>(k)] = Rational(1);
            CyclotomicNumber col = (*this) * bk;
            for (int r = 0; r < n; ++r) M[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] = col.coef_[static_cast<std::size_t>(r)];
        }
        std::vector<Rational> rhs(static_cast<std::size_t>(n), Rational(0));
        rhs[0] = Rational(1);
        // Gaussian elimination with first-nonzero pivoting; exact, so any
        // nonzero pivot works.
        std::vector<int> piv_col(static_cast<std::size_t>(n), -1);
        int row = 0;
        for (int col = 0; col < n && row < n; ++col) {
            int sel = -1;
            for (int r = row; r < n; ++r)
                if (!M[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].is_zero()) { sel = r; break; }
            if (sel < 0) continue;
            std::swap(M[static_cast<std::size_t>(sel)], M[static_cast<std::size_t>(row)]);
            std::swap(rhs[static_cast<std::size_t>(sel)], rhs[static_cast<std::size_t>(row)]);
            Rational inv = M[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)].inverse();
            for (int c = col; c < n; ++c) M[static_cast<std::size_t>(row)][static_cast<std::size_t>(c)] *= inv;
            rhs[static_cast<std::size_t>(row)] *= inv;
            for (int r = 0; r < n; ++r) {
                if (r == row) continue;
                Rational f = M[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
                if (f.is_zero()) continue;
                for (int c = col; c < n; ++c)
                    M[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -= f * M[static_cast<std::size_t>(row)][static_cast<std::size_t>(c)];
                rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(row)];
            }
            piv_col[static_cast<std::size_t>(row)] = col;
            ++row;
        }
        if (row < n) throw invariant_violation("cyclotomic: multiplication map is singular on a nonzero element");
        CyclotomicNumber out;
        out.sig_ = sig_;
        out.coef_.assign(static_cast<std::size_t>(n), Rational(0));
        for (int r = 0; r < n; ++r) out.coef_[static_cast<std::size_t>(piv_col[static_cast<std::size_t>(r)])] = rhs[static_cast<std::size_t>(r)];
        return out;
    }

    friend CyclotomicNumber operator/(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        return a * b.inverse();
    }

    // Drops sorts the element does not actually involve; this is the
    // canonical form used for serialization and display.
    CyclotomicNumber normalized() const {
        std::vector<bool> used(sig_->sorts.size(), false);
        std::vector<int> e(sig_->sorts.size());
        for (int i = 0; i < sig_->dim; ++i) {
            if (coef_[static_cast<std::size_t>(i)].is_zero()) continue;
            decode(*sig_, i, e);
            for (std::size_t k = 0; k < e.size(); ++k)
                if (e[k] != 0) used[k] = true;
        }
        std::vector<Modulus> kept;
        for (std::size_t k = 0; k < used.size(); ++k)
            if (used[k]) kept.push_back(sig_->sorts[k]);
        if (kept.size() == sig_->sorts.size()) return *this;
        auto nsig = detail::sig_info(kept);
        CyclotomicNumber out;
        out.sig_ = nsig;
        out.coef_.assign(static_cast<std::size_t>(nsig->dim), Rational(0));
        for (int i = 0; i < sig_->dim; ++i) {
            if (coef_[static_cast<std::size_t>(i)].is_zero()) continue;
            decode(*sig_, i, e);
            int idx = 0, kk = 0;
            for (std::size_t k = 0; k < used.size(); ++k)
                if (used[k]) idx += e[k] * nsig->stride[static_cast<std::size_t>(kk++)];
            out.coef_[static_cast<std::size_t>(idx)] = coef_[static_cast<std::size_t>(i)];
        }
        return out;
    }

    // Sparse view of the canonical table: (exponent vector, coefficient),
    // exponents ascending lexicographically.
    std::vector<std::pair<std::vector<int>, Rational>> terms() const {
        std::vector<std::pair<std::vector<int>, Rational>> out;
        std::vector<int> e(sig_->sorts.size());
        for (int i = 0; i < sig_->dim; ++i) {
            if (coef_[static_cast<std::size_t>(i)].is_zero()) continue;
            decode(*sig_, i, e);
            out.emplace_back(e, coef_[static_cast<std::size_t>(i)]);
        }
        return out;
    }

    CyclotomicNumber with_signature(const std::vector<Modulus>& sorts) const {
        return with_signature(detail::sig_info(sorts));
    }

    std::string to_string() const {
        CyclotomicNumber n = normalized();
        if (n.is_rational()) return n.coef_[0].to_string();
        std::ostringstream os;
        bool first = true;
        std::vector<int> e(n.sig_->sorts.size());
        for (int i = 0; i < n.sig_->dim; ++i) {
            const auto& c = n.coef_[static_cast<std::size_t>(i)];
            if (c.is_zero()) continue;
            decode(*n.sig_, i, e);
            if (!first) os << " + ";
            first = false;
            os << "(" << c.to_string() << ")";
            for (std::size_t k = 0; k < e.size(); ++k)
                if (e[k] != 0) os << "*w" << n.sig_->sorts[k].pm << "^" << e[k];
        }
        return first ? "0" : os.str();
    }

private:
    static void decode(const detail::SigInfo& info, int idx, std::vector<int>& e) {
        for (std::size_t i = 0; i < info.sorts.size(); ++i) {
            e[i] = idx / info.stride[i];
            idx %= info.stride[i];
        }
    }

    CyclotomicNumber with_signature(std::shared_ptr<const detail::SigInfo> target) const {
        if (target == sig_ || target->sorts == sig_->sorts) {
            CyclotomicNumber r(*this);
            r.sig_ = target;
            return r;
        }
        const auto& info = *target;
        // Map each of our sorts into the target; same prime with larger m
        // embeds via t -> t^{p^{m_new - m_old}} (a monomial remap that never
        // needs reduction because e * p^{delta} < phi_new).
        std::vector<int> pos(sig_->sorts.size(), -1);
        std::vector<std::int64_t> mult(sig_->sorts.size(), 1);
        for (std::size_t i = 0; i < sig_->sorts.size(); ++i) {
            const auto& s = sig_->sorts[i];
            for (std::size_t k = 0; k < info.sorts.size(); ++k) {
                if (info.sorts[k].p == s.p) {
                    if (info.sorts[k].m < s.m)
                        throw invalid_parameter("cyclotomic: cannot narrow a sort");
                    pos[i] = static_cast<int>(k);
                    mult[i] = pow_i64(s.p, info.sorts[k].m - s.m);
                    break;
                }
            }
            if (pos[i] < 0) throw invalid_parameter("cyclotomic: target signature misses a sort");
        }
        CyclotomicNumber out;
        out.sig_ = target;
        out.coef_.assign(static_cast<std::size_t>(info.dim), Rational(0));
        std::vector<int> e(sig_->sorts.size());
        for (int i = 0; i < sig_->dim; ++i) {
            if (coef_[static_cast<std::size_t>(i)].is_zero()) continue;
            decode(*sig_, i, e);
            int idx = 0;
            for (std::size_t k = 0; k < e.size(); ++k)
                idx += static_cast<int>(e[k] * mult[k]) * info.stride[static_cast<std::size_t>(pos[k])];
            out.coef_[static_cast<std::size_t>(idx)] += coef_[static_cast<std::size_t>(i)];
        }
        return out;
    }

    static std::pair<CyclotomicNumber, CyclotomicNumber> unify(const CyclotomicNumber& a,
                                                               const CyclotomicNumber& b) {
        if (a.sig_ == b.sig_) return {a, b};
        if (a.sig_->sorts == b.sig_->sorts) return {a, b};
        std::vector<Modulus> merged;
        std::size_t i = 0, j = 0;
        const auto& sa = a.sig_->sorts;
        const auto& sb = b.sig_->sorts;
        while (i < sa.size() || j < sb.size()) {
            if (j == sb.size() || (i < sa.size() && sa[i].p < sb[j].p)) merged.push_back(sa[i++]);
            else if (i == sa.size() || sb[j].p < sa[i].p) merged.push_back(sb[j++]);
            else {
                merged.push_back(sa[i].m >= sb[j].m ? sa[i] : sb[j]);
                ++i; ++j;
            }
        }
        auto sig = detail::sig_info(merged);
        return {a.with_signature(sig), b.with_signature(sig)};
    }

    static std::vector<Rational> fold_sort(const detail::SigInfo& info, const std::vector<Rational>& buf,
                                           const std::vector<int>& dims, std::size_t sort_idx) {
        std::vector<int> ndims = dims;
        ndims[sort_idx] = info.phi[sort_idx];
        std::vector<int> stride(dims.size(), 1), nstride(dims.size(), 1);
        for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) {
            stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i + 1)] * dims[static_cast<std::size_t>(i + 1)];
            nstride[static_cast<std::size_t>(i)] = nstride[static_cast<std::size_t>(i + 1)] * ndims[static_cast<std::size_t>(i + 1)];
        }
        int total = 1;
        for (int d : ndims) total *= d;
        std::vector<Rational> out(static_cast<std::size_t>(total), Rational(0));
        std::vector<int> e(dims.size(), 0);
        for (std::size_t idx = 0; idx < buf.size(); ++idx) {
            if (buf[idx].is_zero()) { if (!advance(e, dims)) break; continue; }
            const auto& row = info.red[sort_idx][static_cast<std::size_t>(e[sort_idx])];
            int base = 0;
            for (std::size_t k = 0; k < e.size(); ++k)
                if (k != sort_idx) base += e[k] * nstride[k];
            for (int t = 0; t < info.phi[sort_idx]; ++t) {
                if (row[static_cast<std::size_t>(t)] == 0) continue;
                out[static_cast<std::size_t>(base + t * nstride[sort_idx])] +=
                    buf[idx] * Rational(static_cast<long>(row[static_cast<std::size_t>(t)]));
            }
            if (!advance(e, dims)) break;
        }
        return out;
    }

    static bool advance(std::vector<int>& e, const std::vector<int>& dims) {
        for (int i = static_cast<int>(e.size()) - 1; i >= 0; --i) {
            if (++e[static_cast<std::size_t>(i)] < dims[static_cast<std::size_t>(i)]) return true;
            e[static_cast<std::size_t>(i)] = 0;
        }
        return false;
    }

    std::shared_ptr<const detail::SigInfo> sig_;
    std::vector<Rational> coef_;
};

inline CyclotomicNumber field_inverse(const CyclotomicNumber& a) { return a.inverse(); }

inline CyclotomicNumber omega_power(const Modulus& sort, std::int64_t a) {
    return CyclotomicNumber::omega_power(sort, a);
}

}  // namespace affimp
