#pragma once

// Modular integers in Z_{p^m}. A Modulus is the prime-power descriptor
// (p, m); values are kept in [0, p^m). All ring helpers that depend on the
// prime (valuation, unit inverse, exact division by p^k) live here.

#include <cstdint>
#include <ostream>
#include <string>
#include <tuple>

#include "affimp/errors.hpp"

namespace affimp {

inline bool is_prime_i64(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::int64_t pow_i64(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > (std::int64_t{1} << 62) / (base > 0 ? base : 1))
            throw invalid_parameter("modulus: p^m overflows 64-bit range");
        r *= base;
    }
    return r;
}

struct Modulus {
    std::int64_t p = 2;
    int m = 1;
    std::int64_t pm = 2;  // p^m, cached

    Modulus() = default;
    Modulus(std::int64_t p_, int m_) : p(p_), m(m_) {
        if (!is_prime_i64(p)) throw invalid_parameter("modulus: p = " + std::to_string(p) + " is not prime");
        if (m < 1) throw invalid_parameter("modulus: exponent must be >= 1");
        pm = pow_i64(p, m);
    }

    friend bool operator==(const Modulus& a, const Modulus& b) { return a.p == b.p && a.m == b.m; }
    friend bool operator!=(const Modulus& a, const Modulus& b) { return !(a == b); }
    friend bool operator<(const Modulus& a, const Modulus& b) {
        return std::tie(a.p, a.m) < std::tie(b.p, b.m);
    }

    std::int64_t reduce(std::int64_t v) const {
        std::int64_t r = v % pm;
        return r < 0 ? r + pm : r;
    }

    // p-adic valuation of v's residue; val(0) = m by convention.
    int valuation(std::int64_t v) const {
        std::int64_t r = reduce(v);
        if (r == 0) return m;
        int k = 0;
        while (r % p == 0) { r /= p; ++k; }
        return k;
    }

    // Inverse of a unit u (p does not divide u).
    std::int64_t unit_inverse(std::int64_t u) const {
        u = reduce(u);
        if (u % p == 0) throw invalid_parameter("modint: inverse of a non-unit");
        // extended gcd over the integers
        std::int64_t a = u, b = pm, x0 = 1, x1 = 0;
        while (b != 0) {
            std::int64_t q = a / b;
            std::int64_t t = a - q * b; a = b; b = t;
            t = x0 - q * x1; x0 = x1; x1 = t;
        }
        return reduce(x0);
    }

    std::string to_string() const { return std::to_string(p) + "^" + std::to_string(m); }
};

class ModInt {
public:
    ModInt() = default;
    ModInt(std::int64_t v, Modulus mod) : mod_(mod), v_(mod.reduce(v)) {}

    std::int64_t value() const { return v_; }
    const Modulus& modulus() const { return mod_; }

    bool is_zero() const { return v_ == 0; }
    int valuation() const { return mod_.valuation(v_); }

    ModInt operator-() const { return ModInt(-v_, mod_); }
    friend ModInt operator+(const ModInt& a, const ModInt& b) { a.check(b); return ModInt(a.v_ + b.v_, a.mod_); }
    friend ModInt operator-(const ModInt& a, const ModInt& b) { a.check(b); return ModInt(a.v_ - b.v_, a.mod_); }
    friend ModInt operator*(const ModInt& a, const ModInt& b) { a.check(b); return ModInt(a.v_ * b.v_, a.mod_); }
    ModInt operator*(std::int64_t k) const { return ModInt(v_ * mod_.reduce(k), mod_); }

    friend bool operator==(const ModInt& a, const ModInt& b) { a.check(b); return a.v_ == b.v_; }
    friend bool operator!=(const ModInt& a, const ModInt& b) { return !(a == b); }

    friend std::ostream& operator<<(std::ostream& os, const ModInt& x) { return os << x.v_; }

private:
    void check(const ModInt& o) const {
        if (mod_ != o.mod_) throw invalid_parameter("modint: mixed moduli " + mod_.to_string() + " vs " + o.mod_.to_string());
    }

    Modulus mod_{};
    std::int64_t v_ = 0;
};

}  // namespace affimp
