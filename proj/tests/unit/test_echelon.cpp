#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "support/support.hpp"

using namespace affimp;
using testsupport::CorpusGen;

namespace {

// The bijection check: walking y over prod [0, p^{o_i}) must hit every
// enumerated solution of the block exactly once, and nothing else.
void check_bijection(const McspInstance& inst, const EchelonSystem& sys) {
    auto sols = enumerate_solutions(inst, 250000);
    std::set<Assignment> expect;
    for (const auto& a : sols) {
        Assignment block;
        for (auto v : sys.xvars) block.push_back(a[v]);
        expect.insert(block);
    }
    std::set<Assignment> seen;
    std::vector<std::int64_t> y(sys.rank(), 0);
    std::uint64_t count = 0;
    while (true) {
        Assignment img = sys.apply(y);
        CHECK(expect.count(img) == 1);          // lands on a solution
        CHECK(seen.insert(img).second);         // injective
        ++count;
        bool adv = false;
        for (std::size_t i = y.size(); i-- > 0;) {
            if (++y[i] < sys.y_order[i]) { adv = true; break; }
            y[i] = 0;
        }
        if (!adv) break;
    }
    CHECK(count == expect.size());              // onto
    // full-range parameters still cover exactly the solution set
    CHECK(seen == expect);
}

}  // namespace

TEST_CASE("parametrize the Z_4 tuple relation") {
    RawInstance raw;
    raw.vars.push_back({"x1", cyclic_group(4)});
    raw.vars.push_back({"x2", cyclic_group(4)});
    RawConstraint rc;
    rc.scope = {0, 1};
    rc.rel.kind = RelationSpec::Kind::Tuples;
    rc.rel.tuples = {{1, 0}, {3, 1}, {1, 2}, {3, 3}};
    raw.constraints.push_back(rc);
    auto inst = *normalize_instance(raw).instance;
    auto res = parametrize(inst);
    REQUIRE(res.ok());
    const auto& sys = *res.system;
    CHECK(sys.c == std::vector<std::int64_t>{1, 0});           // phi_0 = (1, 0)
    REQUIRE(sys.rank() == 1);
    CHECK(sys.alpha[0] == std::vector<std::int64_t>{2, 1});    // phi'_1 = (2, 1)
    CHECK(sys.y_order[0] == 4);
    check_bijection(inst, sys);
}

TEST_CASE("parametrize a fully pinned instance") {
    RawInstance raw;
    raw.vars.push_back({"x", cyclic_group(4)});
    RawConstraint rc;
    rc.scope = {0};
    rc.rel.kind = RelationSpec::Kind::Tuples;
    rc.rel.tuples = {{3}};
    raw.constraints.push_back(rc);
    auto inst = *normalize_instance(raw).instance;
    auto res = parametrize(inst);
    REQUIRE(res.ok());
    CHECK(res.system->rank() == 0);
    CHECK(res.system->c == std::vector<std::int64_t>{3});
}

TEST_CASE("parametrize an unconstrained variable") {
    RawInstance raw;
    raw.vars.push_back({"x", cyclic_group(8)});
    auto inst = *normalize_instance(raw).instance;
    auto res = parametrize(inst);
    REQUIRE(res.ok());
    REQUIRE(res.system->rank() == 1);
    CHECK(res.system->alpha[0] == std::vector<std::int64_t>{1});
    CHECK(res.system->c == std::vector<std::int64_t>{0});
    CHECK(res.system->y_order[0] == 8);
}

TEST_CASE("parametrize a sub-range coset: x in 2Z_4") {
    RawInstance raw;
    raw.vars.push_back({"x", cyclic_group(4)});
    RawConstraint rc;
    rc.scope = {0};
    rc.rel.kind = RelationSpec::Kind::Tuples;
    rc.rel.tuples = {{0}, {2}};
    raw.constraints.push_back(rc);
    auto inst = *normalize_instance(raw).instance;
    auto res = parametrize(inst);
    REQUIRE(res.ok());
    REQUIRE(res.system->rank() == 1);
    CHECK(res.system->alpha[0] == std::vector<std::int64_t>{2});
    CHECK(res.system->y_order[0] == 2);  // graded range, not p^m
    check_bijection(inst, *res.system);
}

TEST_CASE("parametrize reports UNSAT") {
    RawInstance raw;
    raw.vars.push_back({"x", cyclic_group(4)});
    RawConstraint rc;
    rc.scope = {0};
    rc.rel.kind = RelationSpec::Kind::Linear;
    rc.rel.lin_coeffs = {2};
    rc.rel.lin_const = 1;
    raw.constraints.push_back(rc);
    auto inst = *normalize_instance(raw).instance;
    auto res = parametrize(inst);
    CHECK(!res.ok());
    CHECK(verify_unsat_witness(*res.unsat));
}

TEST_CASE("parametrize rejects multi-prime instances") {
    RawInstance raw;
    raw.vars.push_back({"v", cyclic_group(6)});
    auto inst = *normalize_instance(raw).instance;
    CHECK_THROWS_AS(parametrize(inst), invalid_parameter);
    // but parametrize_all handles the blocks
    auto all = parametrize_all(inst);
    CHECK(all.size() == 2);
    for (const auto& r : all) CHECK(r.ok());
}

TEST_CASE("determinism and per-equation satisfaction") {
    CorpusGen gen(9001);
    for (const auto& gs : testsupport::corpus_groups()) {
        for (int t = 0; t < 8; ++t) {
            auto raw = gen.instance(gs.group, static_cast<int>(gen.pick(2, 3)));
            auto inst = *normalize_instance(raw).instance;
            auto first = parametrize_all(inst);
            auto second = parametrize_all(inst);
            REQUIRE(first.size() == second.size());
            for (std::size_t i = 0; i < first.size(); ++i) {
                CHECK(first[i].ok() == second[i].ok());
                if (!first[i].ok()) continue;
                CHECK(first[i].system->alpha == second[i].system->alpha);
                CHECK(first[i].system->c == second[i].system->c);
                CHECK(first[i].system->y_order == second[i].system->y_order);
            }
            if (inst.infeasible) continue;
            // every enumerated solution satisfies x_j = sum alpha y + c for
            // some reconstructed y, i.e. lies in the parametrized image
            bool all_ok = true;
            for (const auto& r : first) all_ok = all_ok && r.ok();
            if (!all_ok) continue;
            for (const auto& r : first) check_bijection(inst, *r.system);
        }
    }
}
