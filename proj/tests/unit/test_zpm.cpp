#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "affimp/zpm.hpp"

using namespace affimp;

namespace {

// Row span of a matrix by exhaustive combination (desk scale).
std::set<Row> row_span(const ZpmMatrix& m) {
    SubgroupDescription s{m.mod, m.cols, m.rows};
    auto span = s.expand(1u << 18);
    REQUIRE(span.has_value());
    return *span;
}

// Kernel by exhaustive enumeration.
std::set<Row> kernel_brute(const ZpmMatrix& m) {
    std::set<Row> out;
    Row x(m.cols, 0);
    while (true) {
        bool ok = true;
        for (const auto& r : m.rows) {
            std::int64_t acc = 0;
            for (std::size_t i = 0; i < m.cols; ++i) acc = m.mod.reduce(acc + r[i] * x[i]);
            if (acc != 0) { ok = false; break; }
        }
        if (ok) out.insert(x);
        std::size_t i = m.cols;
        bool carry = true;
        while (i-- > 0) {
            if (++x[i] < m.mod.pm) { carry = false; break; }
            x[i] = 0;
        }
        if (carry) break;
        if (m.cols == 0) break;
    }
    return out;
}

ZpmMatrix random_matrix(std::mt19937_64& rng, Modulus mod, std::size_t rows, std::size_t cols) {
    ZpmMatrix m(mod, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        Row row(cols);
        for (auto& v : row) v = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(mod.pm));
        m.rows.push_back(std::move(row));
    }
    return m;
}

// Random invertible row operations: swaps, unit scalings, row additions.
ZpmMatrix shuffled(std::mt19937_64& rng, ZpmMatrix m) {
    if (m.rows.empty()) return m;
    for (int step = 0; step < 24; ++step) {
        std::size_t i = rng() % m.rows.size();
        std::size_t j = rng() % m.rows.size();
        switch (rng() % 3) {
            case 0:
                std::swap(m.rows[i], m.rows[j]);
                break;
            case 1: {
                std::int64_t u;
                do { u = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m.mod.pm)); } while (u % m.mod.p == 0);
                for (auto& v : m.rows[i]) v = m.mod.reduce(v * u);
                break;
            }
            default:
                if (i != j) {
                    std::int64_t k = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m.mod.pm));
                    for (std::size_t c = 0; c < m.cols; ++c)
                        m.rows[i][c] = m.mod.reduce(m.rows[i][c] + k * m.rows[j][c]);
                }
        }
    }
    return m;
}

}  // namespace

TEST_CASE("canonical form examples") {
    Modulus z4(2, 2);
    CHECK(canonical_form(ZpmMatrix::identity(z4, 3)) == ZpmMatrix::identity(z4, 3));

    ZpmMatrix dup(z4, {{2}, {2}}, 1);
    ZpmMatrix dup_expect(z4, {{2}}, 1);
    CHECK(canonical_form(dup) == dup_expect);

    ZpmMatrix m(z4, {{3, 1}}, 2);
    ZpmMatrix expect(z4, {{1, 3}}, 2);
    CHECK(canonical_form(m) == expect);
    CHECK(row_span(m) == row_span(expect));
}

TEST_CASE("canonical form is idempotent and a function of the row span") {
    std::mt19937_64 rng(123);
    for (Modulus mod : {Modulus(2, 2), Modulus(2, 3), Modulus(3, 2), Modulus(3, 1)}) {
        for (int t = 0; t < 40; ++t) {
            auto m = random_matrix(rng, mod, 1 + rng() % 4, 1 + rng() % 3);
            auto h = canonical_form(m);
            CHECK(canonical_form(h) == h);
            CHECK(canonical_form(shuffled(rng, m)) == h);
            CHECK(row_span(h) == row_span(m));
            // appending redundant combinations of existing rows changes nothing
            auto padded = m;
            for (int extra = 0; extra < 2; ++extra) {
                Row combo(m.cols, 0);
                for (const auto& r : m.rows) {
                    std::int64_t k = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(mod.pm));
                    for (std::size_t c = 0; c < m.cols; ++c) combo[c] = mod.reduce(combo[c] + k * r[c]);
                }
                padded.rows.push_back(std::move(combo));
            }
            CHECK(canonical_form(padded) == h);
        }
    }
}

TEST_CASE("solve_congruences examples") {
    Modulus z4(2, 2);
    {
        ZpmMatrix h(z4, {{2}}, 1);
        auto r = solve_congruences(h, {1});  // 2x = 1 (mod 4): always even
        CHECK(!r.ok());
        REQUIRE(r.witness.has_value());
        // the witness combination must derive 0 = c, c != 0
        std::int64_t lhs = 0, rhs = 0;
        for (std::size_t i = 0; i < h.rows.size(); ++i) {
            lhs = z4.reduce(lhs + r.witness->combination[i] * h.rows[i][0]);
            rhs = z4.reduce(rhs + r.witness->combination[i] * 1);
        }
        CHECK(lhs == 0);
        CHECK(rhs == r.witness->contradiction);
        CHECK(r.witness->contradiction != 0);
    }
    {
        ZpmMatrix h(z4, {{2}}, 1);
        auto r = solve_congruences(h, {2});
        REQUIRE(r.ok());
        CHECK((*r.solution)[0] == 1);  // deterministic representative
    }
    {
        ZpmMatrix h(z4, {{1}}, 1);
        auto r = solve_congruences(h, {3});
        REQUIRE(r.ok());
        CHECK((*r.solution)[0] == 3);
    }
    {
        ZpmMatrix h(z4, {{1, 2}}, 2);
        CHECK_THROWS_AS(solve_congruences(h, {1, 2}), invalid_parameter);  // rhs length
    }
}

TEST_CASE("solve_congruences on random systems") {
    std::mt19937_64 rng(321);
    for (Modulus mod : {Modulus(2, 2), Modulus(2, 3), Modulus(3, 2)}) {
        for (int t = 0; t < 60; ++t) {
            auto m = random_matrix(rng, mod, 1 + rng() % 3, 1 + rng() % 3);
            Row b(m.rows.size());
            for (auto& v : b) v = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(mod.pm));
            auto r = solve_congruences(m, b);
            // brute reference
            bool sat = false;
            Row x(m.cols, 0);
            while (true) {
                bool ok = true;
                for (std::size_t i = 0; i < m.rows.size() && ok; ++i) {
                    std::int64_t acc = 0;
                    for (std::size_t c = 0; c < m.cols; ++c) acc = mod.reduce(acc + m.rows[i][c] * x[c]);
                    ok = acc == b[i];
                }
                if (ok) { sat = true; break; }
                std::size_t i = m.cols;
                bool carry = true;
                while (i-- > 0) {
                    if (++x[i] < mod.pm) { carry = false; break; }
                    x[i] = 0;
                }
                if (carry) break;
            }
            CHECK(r.ok() == sat);
            if (r.ok()) {
                for (std::size_t i = 0; i < m.rows.size(); ++i) {
                    std::int64_t acc = 0;
                    for (std::size_t c = 0; c < m.cols; ++c) acc = mod.reduce(acc + m.rows[i][c] * (*r.solution)[c]);
                    CHECK(acc == b[i]);
                }
            } else {
                // witness audit
                for (std::size_t c = 0; c < m.cols; ++c) {
                    std::int64_t acc = 0;
                    for (std::size_t i = 0; i < m.rows.size(); ++i)
                        acc = mod.reduce(acc + r.witness->combination[i] * m.rows[i][c]);
                    CHECK(acc == 0);
                }
                std::int64_t acc = 0;
                for (std::size_t i = 0; i < m.rows.size(); ++i)
                    acc = mod.reduce(acc + r.witness->combination[i] * b[i]);
                CHECK(acc == mod.reduce(r.witness->contradiction));
                CHECK(mod.reduce(r.witness->contradiction) != 0);
            }
        }
    }
}

TEST_CASE("kernel generator examples") {
    Modulus z4(2, 2);
    {
        ZpmMatrix h(z4, {{1, 2}}, 2);
        auto k = minimize_generators(kernel_generators(h));
        REQUIRE(k.generators.size() == 1);
        CHECK(k.generators[0] == Row{2, 1});
        CHECK(*k.expand() == kernel_brute(h));
    }
    {
        ZpmMatrix h = ZpmMatrix::identity(Modulus(3, 2), 2);
        auto k = kernel_generators(h);
        CHECK(k.generators.empty());
    }
    {
        ZpmMatrix h(z4, {{0, 0, 0}}, 3);
        auto k = kernel_generators(h);
        CHECK(*k.expand(256) == kernel_brute(h));  // the full group
        CHECK(k.expand(256)->size() == 64);
    }
}

TEST_CASE("annihilator examples") {
    Modulus z4(2, 2);
    {
        SubgroupDescription s{z4, 2, {{2, 1}}};
        auto h = annihilator(s);
        REQUIRE(h.rows.size() == 1);
        CHECK(h.rows[0] == Row{1, 2});
        CHECK(kernel_brute(h) == *s.expand());
    }
    {
        SubgroupDescription full{z4, 2, {{1, 0}, {0, 1}}};
        CHECK(annihilator(full).rows.empty());
    }
    {
        SubgroupDescription trivial{z4, 1, {}};
        auto h = annihilator(trivial);
        REQUIRE(h.rows.size() == 1);
        CHECK(h.rows[0] == Row{1});
    }
}

TEST_CASE("kernel/annihilator duality, exhaustive at desk scale") {
    std::mt19937_64 rng(777);
    for (Modulus mod : {Modulus(2, 1), Modulus(3, 1), Modulus(2, 2), Modulus(2, 3), Modulus(3, 2)}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            for (int t = 0; t < 25; ++t) {
                auto m = random_matrix(rng, mod, 1 + rng() % 3, n);
                auto ker = kernel_generators(m);
                CHECK(*ker.expand(1u << 16) == kernel_brute(m));
                // annihilator(kernel(H)) has the same kernel as H
                auto h2 = annihilator(ker);
                CHECK(kernel_brute(h2) == kernel_brute(m));
                // kernel(annihilator(S)) generates the same subgroup as S
                SubgroupDescription s{mod, n, {}};
                for (int g = 0; g < 2; ++g) {
                    Row row(n);
                    for (auto& v : row) v = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(mod.pm));
                    s.generators.push_back(std::move(row));
                }
                auto back = kernel_generators(annihilator(s));
                CHECK(*back.expand(1u << 16) == *s.expand(1u << 16));
            }
        }
    }
}
