#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "qgraph/graph.hpp"
#include "test_util.hpp"

using namespace qg;
using testutil::family;
using testutil::throws_kind;

TEST_CASE("single edge is an interval") {
    const MetricGraph g = MetricGraph::build(2, {{0, 1, 1.0}});
    CHECK(g.betti() == 0);
    CHECK(g.boundary().size() == 2);
    CHECK(g.min_length() == 1.0);
    CHECK(g.total_length() == 1.0);
    CHECK(g.is_tree());
}

TEST_CASE("build rejects invalid graphs") {
    CHECK(throws_kind([] { MetricGraph::build(1, {{0, 0, 1.0}}); }, ErrorKind::SingleLoopGraph));
    CHECK(throws_kind([] { MetricGraph::build(4, {{0, 1, 1.0}, {2, 3, 1.0}}); }, ErrorKind::Disconnected));
    CHECK(throws_kind([] { MetricGraph::build(2, {{0, 1, 0.0}}); }, ErrorKind::NonPositiveLength));
    CHECK(throws_kind([] { MetricGraph::build(2, {{0, 1, -1.0}}); }, ErrorKind::NonPositiveLength));
    CHECK(throws_kind([] { MetricGraph::build(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }, ErrorKind::DegreeTwoVertex));
    const MetricGraph path = MetricGraph::build(3, {{0, 1, 1.0}, {1, 2, 1.0}}, BuildOptions{true});
    CHECK_FALSE(path.standard());
}

TEST_CASE("betti numbers of the families") {
    CHECK(family(MandarinParams{7}).betti() == 6);
    CHECK(family(MandarinParams{7}).boundary().empty());
    CHECK(family(MandarinParams{3}).betti() == 2);
    CHECK(family(StowerParams{3, 4}).betti() == 3);
    CHECK(family(Tree31Params{4, {}}).betti() == 0);
    CHECK(betti(family(StarParams{5})) == 0);
}

TEST_CASE("family generators") {
    const MetricGraph star = family(StarParams{3}, 1, {0.9, 1.1, 1.3});
    CHECK(star.vertex_count() == 4);
    CHECK(star.edge_count() == 3);
    CHECK(star.betti() == 0);

    const MetricGraph t = family(Tree31Params{2, {}});
    CHECK(t.boundary().size() == 4);
    for (int v : t.interior()) CHECK(t.degree(v) == 3);

    const MetricGraph rr = family(RandomRegularParams{6, 16}, 7);
    CHECK(rr.edge_count() == 6 * 16 / 2);
    CHECK(rr.betti() == 33);
    for (int v = 0; v < rr.vertex_count(); ++v) CHECK(rr.degree(v) == 6);

    CHECK(throws_kind([] { family(MandarinParams{2}); }, ErrorKind::InvalidFamilyParams));
    CHECK(throws_kind([] { family(RandomRegularParams{3, 5}); }, ErrorKind::InvalidFamilyParams));
    CHECK(throws_kind([] { family(StarParams{3}, 1, {1.0, 2.0}); }, ErrorKind::InvalidFamilyParams));
}

TEST_CASE("stower shape: loops first, then tails, centre 0") {
    const MetricGraph g = family(StowerParams{2, 3});
    CHECK(g.loops().size() == 2);
    CHECK(g.is_loop(0));
    CHECK(g.is_loop(1));
    CHECK(g.degree(0) == 2 * 2 + 3);
    CHECK(g.boundary().size() == 3);
}

TEST_CASE("handshake identity on generated graphs") {
    for (const MetricGraph& g : {family(StowerParams{2, 3}), family(MandarinParams{5}), family(Tree31Params{3, {}}),
                                 family(RandomRegularParams{4, 8}, 2)}) {
        int sum = 0, interior = 0;
        for (int v = 0; v < g.vertex_count(); ++v) sum += g.degree(v);
        for (int v : g.interior()) interior += g.degree(v);
        CHECK(sum == 2 * g.edge_count());
        CHECK(sum == static_cast<int>(g.boundary().size()) + interior);
        CHECK(g.betti() == g.edge_count() - g.vertex_count() + 1);
    }
}

TEST_CASE("generators are deterministic under a fixed seed") {
    const FamilyShape shapes[] = {StowerParams{2, 1}, MandarinParams{5}, RandomRegularParams{6, 16}, Tree31Params{3, {}}};
    for (const auto& s : shapes) {
        CHECK(graph_to_json(family(s, 11)) == graph_to_json(family(s, 11)));
        CHECK(graph_to_json(family(s, 11)) != graph_to_json(family(s, 12)));
    }
}

TEST_CASE("graph JSON round trip") {
    const MetricGraph g = family(StowerParams{2, 3}, 5);
    const MetricGraph h = graph_from_json(graph_to_json(g));
    CHECK(graph_to_json(h) == graph_to_json(g));
    CHECK(throws_kind([] { graph_from_json("{not json"); }, ErrorKind::InvalidInput));
    CHECK(throws_kind([] { graph_from_json(R"({"vertices": 2})"); }, ErrorKind::InvalidInput));
    CHECK(throws_kind([] { graph_from_json(R"({"vertices":4,"edges":[{"u":0,"v":1,"length":1},{"u":2,"v":3,"length":1}]})"); },
                      ErrorKind::Disconnected));
}

TEST_CASE("rational dependence warning") {
    CHECK(rational_dependence_warning({1.0, 2.0, 3.0}).dependent);
    CHECK(rational_dependence_warning({0.5, 0.25}).dependent);
    const std::vector<double> irr{1.0, std::sqrt(2.0), std::sqrt(3.0)};
    CHECK_FALSE(rational_dependence_warning(irr).dependent);
    CHECK_FALSE(oracle::rationally_dependent(irr, 20));

    const RationalRelation r = rational_dependence_warning({1.0, 2.0, 3.0});
    const std::vector<double> l{1.0, 2.0, 3.0};
    double s = 0.0;
    for (size_t j = 0; j < l.size(); ++j) s += r.coefficients[j] * l[j];
    CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("rational dependence agrees with exhaustive search on random triples") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::uniform_int_distribution<int> c(-4, 4);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> l{u(rng), u(rng), 0.0};
        // half of the triples get a planted relation 3 l3 = |a l1 + b l2|
        if (trial % 2 == 0) {
            int a = c(rng), b = c(rng);
            if (a == 0 && b == 0) a = 1;
            l[2] = std::abs(a * l[0] + b * l[1]) / 3.0;
            if (l[2] == 0.0) l[2] = l[0] / 3.0;
        } else {
            l[2] = u(rng);
        }
        CHECK(rational_dependence_warning(l, 12).dependent == oracle::rationally_dependent(l, 12));
    }
}
