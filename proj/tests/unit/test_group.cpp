#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "affimp/coset.hpp"
#include "affimp/group.hpp"

using namespace affimp;

TEST_CASE("decompose") {
    auto z6 = cyclic_group(6);
    REQUIRE(z6.factors.size() == 2);
    CHECK(z6.factors[0] == CyclicFactor(2, 1));
    CHECK(z6.factors[1] == CyclicFactor(3, 1));

    auto z12 = cyclic_group(12);
    REQUIRE(z12.factors.size() == 2);
    CHECK(z12.factors[0] == CyclicFactor(2, 2));  // Z_4
    CHECK(z12.factors[1] == CyclicFactor(3, 1));  // Z_3
    // the CRT map is a bijection, checked by enumeration
    auto crt = crt_map(z12);
    std::set<std::int64_t> seen;
    for (std::int64_t a = 0; a < 4; ++a)
        for (std::int64_t b = 0; b < 3; ++b) seen.insert(crt.value_of({a, b}));
    CHECK(seen.size() == 12);
    for (std::int64_t v = 0; v < 12; ++v) CHECK(crt.value_of(crt.coords_of(v)) == v);

    auto z9 = cyclic_group(9);
    REQUIRE(z9.factors.size() == 1);
    CHECK(z9.factors[0] == CyclicFactor(3, 2));

    CHECK_THROWS_AS(cyclic_group(0), invalid_parameter);
}

TEST_CASE("crt table for Z_6") {
    auto crt = crt_map(cyclic_group(6));
    CHECK(crt.value_of({0, 0}) == 0);
    CHECK(crt.value_of({1, 2}) == 1);
    CHECK(crt.value_of({0, 1}) == 2);
    CHECK(crt.value_of({1, 0}) == 3);
    CHECK(crt.value_of({0, 2}) == 4);
    CHECK(crt.value_of({1, 1}) == 5);
    CHECK(crt.coords_of(1) == std::vector<std::int64_t>{1, 2});
    // single factor: identity
    auto single = crt_map(cyclic_group(5));
    CHECK(single.value_of({3}) == 3);
    // non-coprime factors are rejected
    CHECK_THROWS_AS(CrtMap({2, 4}), invalid_parameter);
}

TEST_CASE("affine operation") {
    auto g = product_group({{2, 1}, {2, 2}});  // Z_2 + Z_4
    auto a = make_element(g, {0, 1});
    auto b = make_element(g, {1, 0});
    auto c = make_element(g, {1, 2});
    CHECK(affine_op(g, a, b, c).comp == std::vector<std::int64_t>({0, 3}));
    // Mal'tsev identities
    CHECK(affine_op(g, a, a, b).comp == b.comp);
    CHECK(affine_op(g, a, b, b).comp == a.comp);
    CHECK_THROWS_AS(affine_op(g, a, b, GroupElement{{1}}), invalid_parameter);
}

TEST_CASE("prime power embedding") {
    CHECK(embed_prime_power(2, 1, 2, 1) == 2);
    CHECK(embed_prime_power_inverse(2, 1, 2, 2) == 1);
    CHECK(embed_prime_power(3, 2, 2, 7) == 7);  // l = m: identity
    CHECK_THROWS_AS(embed_prime_power_inverse(2, 1, 2, 1), invalid_parameter);
    CHECK_THROWS_AS(embed_prime_power(2, 3, 2, 0), invalid_parameter);
    // injective group homomorphism; inverse recovers each element
    for (std::int64_t x = 0; x < 2; ++x)
        for (std::int64_t y = 0; y < 2; ++y) {
            auto ex = embed_prime_power(2, 1, 3, x);
            auto ey = embed_prime_power(2, 1, 3, y);
            CHECK(Modulus(2, 3).reduce(ex + ey) == embed_prime_power(2, 1, 3, (x + y) % 2));
            CHECK(embed_prime_power_inverse(2, 1, 3, ex) == x);
        }
}

TEST_CASE("coset_from_tuples on the Z_2 x Z_4 example") {
    std::vector<Modulus> sig{Modulus(2, 1), Modulus(2, 2)};
    std::vector<Tuple> tuples{{0, 1}, {0, 3}, {1, 0}, {1, 2}};
    auto res = coset_from_tuples(sig, tuples);
    REQUIRE(res.ok());
    CHECK(res.relation->base == Tuple{0, 1});
    REQUIRE(res.relation->generators.size() == 1);
    CHECK(res.relation->generators[0] == Tuple{1, 1});
    // round trip: expansion reproduces the input exactly
    std::set<Tuple> expect(tuples.begin(), tuples.end());
    CHECK(*res.relation->expand() == expect);
}

TEST_CASE("coset_from_tuples rejects a non-affine relation with a witness") {
    std::vector<Modulus> sig{Modulus(2, 1), Modulus(2, 1)};
    std::vector<Tuple> tuples{{0, 0}, {1, 1}, {0, 1}};
    auto res = coset_from_tuples(sig, tuples);
    REQUIRE(!res.ok());
    const auto& v = *res.violation;
    // the witness triple is from R and its affine image is not
    std::set<Tuple> rel(tuples.begin(), tuples.end());
    CHECK(rel.count(v.a) == 1);
    CHECK(rel.count(v.b) == 1);
    CHECK(rel.count(v.c) == 1);
    CHECK(rel.count(v.image) == 0);
    for (std::size_t i = 0; i < sig.size(); ++i)
        CHECK(v.image[i] == sig[i].reduce(v.a[i] - v.b[i] + v.c[i]));
}

TEST_CASE("singleton relation") {
    std::vector<Modulus> sig{Modulus(3, 1), Modulus(2, 2)};
    auto res = coset_from_tuples(sig, {{2, 3}});
    REQUIRE(res.ok());
    CHECK(res.relation->base == Tuple{2, 3});
    CHECK(res.relation->generators.empty());
    CHECK_THROWS_AS(coset_from_tuples(sig, {}), invalid_parameter);
}

namespace {

// All subsets of the full product, brute-force affine closure as reference.
void exhaustive_coset_check(const std::vector<Modulus>& sig) {
    std::vector<Tuple> all;
    Tuple t(sig.size(), 0);
    while (true) {
        all.push_back(t);
        std::size_t i = sig.size();
        bool carry = true;
        while (i-- > 0) {
            if (++t[i] < sig[i].pm) { carry = false; break; }
            t[i] = 0;
        }
        if (carry) break;
    }
    const std::size_t n = all.size();
    REQUIRE(n <= 16);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<Tuple> rel;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) rel.push_back(all[i]);
        // reference: closure under f(a,b,c) = a - b + c over all triples
        std::set<Tuple> rs(rel.begin(), rel.end());
        bool closed = true;
        for (const auto& a : rel)
            for (const auto& b : rel)
                for (const auto& c : rel) {
                    Tuple img(sig.size());
                    for (std::size_t i = 0; i < sig.size(); ++i) img[i] = sig[i].reduce(a[i] - b[i] + c[i]);
                    if (!rs.count(img)) { closed = false; goto done; }
                }
    done:
        auto res = coset_from_tuples(sig, rel);
        CHECK(res.ok() == closed);
        if (res.ok()) CHECK(*res.relation->expand() == rs);
    }
}

}  // namespace

TEST_CASE("lemma-level equivalence: affine invariance iff coset, exhaustively") {
    exhaustive_coset_check({Modulus(2, 2)});                  // Z_4
    exhaustive_coset_check({Modulus(2, 3)});                  // Z_8
    exhaustive_coset_check({Modulus(2, 1), Modulus(2, 2)});   // Z_2 x Z_4
    exhaustive_coset_check({Modulus(2, 1), Modulus(2, 1), Modulus(2, 1)});  // Z_2^3
    exhaustive_coset_check({Modulus(2, 2), Modulus(2, 2)});   // Z_4 x Z_4 (order 16)
    exhaustive_coset_check({Modulus(3, 2)});                  // Z_9
    exhaustive_coset_check({Modulus(2, 1), Modulus(3, 1)});   // Z_2 x Z_3
}

TEST_CASE("decompose_relation_by_sort") {
    {
        // <(1,1)> in Z_2 x Z_3 generates the full product
        std::vector<Modulus> sig{Modulus(2, 1), Modulus(3, 1)};
        CosetRelation r = coset_from_parts(sig, {0, 0}, {{1, 1}});
        auto blocks = decompose_relation_by_sort(r);
        REQUIRE(blocks.size() == 2);
        CHECK(blocks[0].prime == 2);
        CHECK(blocks[1].prime == 3);
        CHECK(blocks[0].relation.expand()->size() == 2);
        CHECK(blocks[1].relation.expand()->size() == 3);
    }
    {
        std::vector<Modulus> sig{Modulus(2, 1), Modulus(3, 1)};
        CosetRelation r = coset_from_parts(sig, {0, 0}, {});
        auto blocks = decompose_relation_by_sort(r);
        for (const auto& b : blocks) CHECK(b.relation.expand()->size() == 1);
    }
    {
        std::vector<Modulus> sig{Modulus(5, 1), Modulus(5, 1)};
        CosetRelation r = coset_from_parts(sig, {1, 2}, {{1, 3}});
        auto blocks = decompose_relation_by_sort(r);
        REQUIRE(blocks.size() == 1);
        CHECK(*blocks[0].relation.expand() == *r.expand());
    }
}

TEST_CASE("per-prime product reconstruction over affine-invariant corpora") {
    // every coset of Z_2 x Z_3 and of Z_2 x Z_3 x Z_4: the product of the
    // per-prime projections, re-expanded, is the original relation
    auto run = [](const std::vector<Modulus>& sig) {
        // enumerate subgroups as spans of up to two generators
        std::vector<Tuple> all;
        Tuple t(sig.size(), 0);
        while (true) {
            all.push_back(t);
            std::size_t i = sig.size();
            bool carry = true;
            while (i-- > 0) {
                if (++t[i] < sig[i].pm) { carry = false; break; }
                t[i] = 0;
            }
            if (carry) break;
        }
        for (const auto& g1 : all) {
            for (const auto& g2 : all) {
                for (const auto& base : all) {
                    CosetRelation r = coset_from_parts(sig, base, {g1, g2});
                    auto whole = *r.expand();
                    auto blocks = decompose_relation_by_sort(r);
                    // product of the projections
                    std::set<Tuple> prod;
                    std::vector<std::set<Tuple>> parts;
                    for (const auto& b : blocks) parts.push_back(*b.relation.expand());
                    std::vector<std::set<Tuple>::const_iterator> its;
                    for (const auto& p : parts) its.push_back(p.begin());
                    while (true) {
                        Tuple full(sig.size());
                        for (std::size_t bi = 0; bi < blocks.size(); ++bi)
                            for (std::size_t k = 0; k < blocks[bi].coords.size(); ++k)
                                full[blocks[bi].coords[k]] = (*its[bi])[k];
                        prod.insert(full);
                        std::size_t bi = blocks.size();
                        bool carry = true;
                        while (bi-- > 0) {
                            if (++its[bi] != parts[bi].end()) { carry = false; break; }
                            its[bi] = parts[bi].begin();
                        }
                        if (carry) break;
                    }
                    CHECK(prod == whole);
                }
            }
        }
    };
    run({Modulus(2, 1), Modulus(3, 1)});
    run({Modulus(2, 1), Modulus(3, 1), Modulus(2, 2)});
}
