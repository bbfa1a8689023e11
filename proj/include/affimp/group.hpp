#pragma once

// Finite Abelian groups as ordered lists of prime-power cyclic factors,
// the CRT bijection for cyclic groups with composite modulus, the affine
// operation x - y + z, and the prime-power embedding Z_{p^l} -> p^{m-l} Z_{p^m}.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "affimp/errors.hpp"
#include "affimp/modint.hpp"

namespace affimp {

struct CyclicFactor {
    std::int64_t p = 2;
    int l = 1;
    std::int64_t n = 2;  // p^l

    CyclicFactor() = default;
    CyclicFactor(std::int64_t p_, int l_) : p(p_), l(l_) {
        if (!is_prime_i64(p)) throw invalid_parameter("group factor: p = " + std::to_string(p) + " is not prime");
        if (l < 1) throw invalid_parameter("group factor: exponent must be >= 1");
        n = pow_i64(p, l);
    }
    friend bool operator==(const CyclicFactor& a, const CyclicFactor& b) { return a.p == b.p && a.l == b.l; }
};

struct AbelianGroup {
    std::vector<CyclicFactor> factors;  // sorted by (prime, exponent)
    bool numeric = false;               // declared as Z_n; elements are integers in [0, n)
    std::int64_t modulus = 1;           // meaningful when numeric

    std::int64_t order() const {
        std::int64_t o = 1;
        for (const auto& f : factors) o *= f.n;
        return o;
    }

    friend bool operator==(const AbelianGroup& a, const AbelianGroup& b) {
        return a.factors == b.factors && a.numeric == b.numeric && a.modulus == b.modulus;
    }
    friend bool operator!=(const AbelianGroup& a, const AbelianGroup& b) { return !(a == b); }
};

// Prime-power factor list of Z_n, primes ascending.
inline std::vector<CyclicFactor> decompose_modulus(std::int64_t n) {
    if (n < 1) throw invalid_parameter("decompose: modulus must be >= 1");
    std::vector<CyclicFactor> out;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        int l = 0;
        while (n % p == 0) { n /= p; ++l; }
        out.emplace_back(p, l);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline AbelianGroup cyclic_group(std::int64_t n) {
    AbelianGroup g;
    g.numeric = true;
    g.modulus = n;
    g.factors = decompose_modulus(n);
    return g;
}

inline AbelianGroup product_group(std::vector<CyclicFactor> factors) {
    if (factors.empty()) throw invalid_parameter("group: empty factor list");
    std::stable_sort(factors.begin(), factors.end(), [](const CyclicFactor& a, const CyclicFactor& b) {
        return a.p != b.p ? a.p < b.p : a.l < b.l;
    });
    AbelianGroup g;
    g.factors = std::move(factors);
    return g;
}

// Refines every factor of `g` into prime powers (identity on prime-power
// factors), keeping the (prime, exponent) ordering.
inline AbelianGroup decompose(const AbelianGroup& g) {
    std::vector<CyclicFactor> out;
    for (const auto& f : g.factors) out.push_back(f);
    return product_group(std::move(out));
}

// The CRT bijection between prod_i Z_{n_i} (pairwise coprime n_i) and Z_M:
//   pi(x_1,...,x_s) = sum_i (M / n_i) x_i  (mod M),
// with inverse coordinates x_i = ((M/n_i) mod n_i)^{-1} * a (mod n_i).
class CrtMap {
public:
    explicit CrtMap(std::vector<std::int64_t> moduli) : moduli_(std::move(moduli)) {
        total_ = 1;
        for (auto n : moduli_) {
            if (n < 1) throw invalid_parameter("crt: modulus must be >= 1");
            total_ *= n;
        }
        for (std::size_t i = 0; i < moduli_.size(); ++i)
            for (std::size_t j = i + 1; j < moduli_.size(); ++j)
                if (gcd_i64(moduli_[i], moduli_[j]) != 1)
                    throw invalid_parameter("crt: factor moduli are not pairwise coprime");
        fwd_.resize(moduli_.size());
        inv_.resize(moduli_.size());
        for (std::size_t i = 0; i < moduli_.size(); ++i) {
            std::int64_t q = total_ / moduli_[i];
            fwd_[i] = q % total_;
            inv_[i] = inverse_mod(q % moduli_[i], moduli_[i]);
        }
    }

    std::int64_t total() const { return total_; }
    std::size_t arity() const { return moduli_.size(); }

    std::int64_t value_of(const std::vector<std::int64_t>& coords) const {
        if (coords.size() != moduli_.size()) throw invalid_parameter("crt: coordinate arity mismatch");
        std::int64_t a = 0;
        for (std::size_t i = 0; i < coords.size(); ++i) {
            std::int64_t c = coords[i] % moduli_[i];
            if (c < 0) c += moduli_[i];
            a = (a + fwd_[i] * c) % total_;
        }
        return a;
    }

    std::vector<std::int64_t> coords_of(std::int64_t a) const {
        a %= total_;
        if (a < 0) a += total_;
        std::vector<std::int64_t> out(moduli_.size());
        for (std::size_t i = 0; i < moduli_.size(); ++i)
            out[i] = (inv_[i] * (a % moduli_[i])) % moduli_[i];
        return out;
    }

private:
    static std::int64_t gcd_i64(std::int64_t a, std::int64_t b) { return b == 0 ? a : gcd_i64(b, a % b); }
    static std::int64_t inverse_mod(std::int64_t a, std::int64_t n) {
        if (n == 1) return 0;
        std::int64_t b = n, x0 = 1, x1 = 0;
        while (b != 0) {
            std::int64_t q = a / b, t = a - q * b;
            a = b; b = t;
            t = x0 - q * x1; x0 = x1; x1 = t;
        }
        x0 %= n;
        return x0 < 0 ? x0 + n : x0;
    }

    std::vector<std::int64_t> moduli_;
    std::int64_t total_ = 1;
    std::vector<std::int64_t> fwd_, inv_;
};

inline CrtMap crt_map(const AbelianGroup& g) {
    std::vector<std::int64_t> moduli;
    for (const auto& f : g.factors) moduli.push_back(f.n);
    return CrtMap(std::move(moduli));
}

struct GroupElement {
    std::vector<std::int64_t> comp;  // one residue per factor
};

inline GroupElement make_element(const AbelianGroup& g, std::vector<std::int64_t> comp) {
    if (comp.size() != g.factors.size()) throw invalid_parameter("group element: component arity mismatch");
    for (std::size_t i = 0; i < comp.size(); ++i) {
        comp[i] %= g.factors[i].n;
        if (comp[i] < 0) comp[i] += g.factors[i].n;
    }
    return GroupElement{std::move(comp)};
}

// Componentwise a - b + c; the Mal'tsev term of the group.
inline GroupElement affine_op(const AbelianGroup& g, const GroupElement& a, const GroupElement& b,
                              const GroupElement& c) {
    if (a.comp.size() != g.factors.size() || b.comp.size() != g.factors.size() || c.comp.size() != g.factors.size())
        throw invalid_parameter("affine_op: element does not belong to the group");
    GroupElement out;
    out.comp.resize(g.factors.size());
    for (std::size_t i = 0; i < g.factors.size(); ++i) {
        std::int64_t n = g.factors[i].n;
        out.comp[i] = ((a.comp[i] - b.comp[i] + c.comp[i]) % n + n) % n;
    }
    return out;
}

// Z_{p^l} -> Z_{p^m}, x -> p^{m-l} x. Injective group homomorphism onto
// p^{m-l} Z_{p^m}.
inline std::int64_t embed_prime_power(std::int64_t p, int l, int m, std::int64_t x) {
    if (l > m) throw invalid_parameter("embed: l must be <= m");
    std::int64_t nl = pow_i64(p, l);
    x %= nl;
    if (x < 0) x += nl;
    return x * pow_i64(p, m - l);
}

// Partial inverse, defined on p^{m-l} Z_{p^m} only.
inline std::int64_t embed_prime_power_inverse(std::int64_t p, int l, int m, std::int64_t y) {
    if (l > m) throw invalid_parameter("embed: l must be <= m");
    std::int64_t nm = pow_i64(p, m);
    std::int64_t d = pow_i64(p, m - l);
    y %= nm;
    if (y < 0) y += nm;
    if (y % d != 0)
        throw invalid_parameter("embed inverse: " + std::to_string(y) + " is not in " + std::to_string(d) +
                                "Z_" + std::to_string(nm));
    return y / d;
}

}  // namespace affimp
