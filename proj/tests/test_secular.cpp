#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qgraph/analysis.hpp"
#include "test_util.hpp"

using namespace qg;
using testutil::family;
using testutil::throws_kind;

namespace {
constexpr double kPi = std::numbers::pi;

MetricGraph reversed(const MetricGraph& g) {
    std::vector<Edge> es = g.edges();
    for (auto& e : es) std::swap(e.u, e.v);
    return MetricGraph::build(g.vertex_count(), es);
}
}  // namespace

TEST_CASE("scattering matrix entries") {
    const MetricGraph g = family(StarParams{3}, 1);
    const RMat S = build_scattering(g);
    CHECK((S * S.transpose() - RMat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
    // leaf 1 of edge 0: incoming bond 0 (centre -> leaf) reflects into bond 1
    CHECK(S(1, 0) == doctest::Approx(1.0));
    // centre: incoming bond 1 (edge 0 back to centre) → out along edge 0 (bond 0) and edge 1 (bond 2)
    CHECK(S(0, 1) == doctest::Approx(2.0 / 3.0 - 1.0));
    CHECK(S(2, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(S(4, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(S(3, 1) == 0.0);
}

TEST_CASE("scattering matrix is orthogonal on every family and independent of lengths") {
    for (const MetricGraph& g : {family(StowerParams{2, 3}), family(MandarinParams{5}), family(RandomRegularParams{4, 8}, 3)}) {
        const RMat S = build_scattering(g);
        const int n = 2 * g.edge_count();
        CHECK((S * S.transpose() - RMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        std::vector<double> l = g.lengths();
        for (double& x : l) x *= 1.7;
        CHECK((build_scattering(g.with_lengths(l)) - S).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("secular unitary") {
    const MetricGraph g = family(MandarinParams{4}, 2);
    const RMat S = build_scattering(g);
    const RVec L = bond_lengths(g);
    CHECK((secular_unitary(S, L, 0.0) - S.cast<cplx>()).cwiseAbs().maxCoeff() == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> k(0.1, 200.0);
    for (int t = 0; t < 10; ++t) {
        const CMat U = secular_unitary(S, L, k(rng));
        const int n = static_cast<int>(U.rows());
        CHECK((U * U.adjoint() - CMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(std::abs(U.determinant()) - 1.0) < 1e-12);
    }
}

TEST_CASE("unit interval: k_n = nπ") {
    const MetricGraph g = MetricGraph::build(2, {{0, 1, 1.0}});
    const auto recs = SecularSolver(g).first(50);
    REQUIRE(recs.size() == 50);
    for (const auto& r : recs) {
        CHECK(r.multiplicity == 1);
        CHECK(std::abs(r.k - r.index * kPi) <= 1e-9 * r.k);
        CHECK(r.cls == EigenClass::generic);
    }
}

TEST_CASE("star eigenvalues match the tangent-sum oracle") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const MetricGraph g = family(StarParams{3}, seed);
        const double kmax = 120.0;
        const auto ref = oracle::star_eigenvalues(g.lengths(), kmax);
        const auto recs = find_eigenvalues(g, 0.0, kmax);
        REQUIRE(recs.size() == ref.size());
        for (size_t i = 0; i < ref.size(); ++i) {
            CHECK(recs[i].index == static_cast<int>(i) + 1);
            CHECK(std::abs(recs[i].k - ref[i]) <= 1e-9 * ref[i]);
        }
    }
}

TEST_CASE("equilateral star has double eigenvalues at odd multiples of π/2") {
    const MetricGraph g = family(StarParams{3}, 1, {1.0, 1.0, 1.0});
    const auto recs = SecularSolver(g).first(9);
    // π/2 (×2), π, 3π/2 (×2), 2π, 5π/2 (×2), 3π
    REQUIRE(recs.size() >= 6);
    CHECK(recs[0].k == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(recs[0].multiplicity == 2);
    CHECK(recs[0].cls == EigenClass::multiple);
    CHECK(recs[1].index == 3);
    CHECK(recs[1].k == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(recs[1].multiplicity == 1);
    CHECK(recs[2].multiplicity == 2);
    CHECK(nullity(g, kPi / 2) == 2);
    CHECK(nullity(g, kPi) == 1);
    CHECK(nullity(g, 1.0) == 0);
}

TEST_CASE("stower loop states are classified as loop records") {
    const MetricGraph g = family(StowerParams{1, 2}, 4);
    const double y = g.length(0);
    const auto recs = find_eigenvalues(g, 0.0, 40.0);
    int loops = 0;
    for (const auto& r : recs) {
        const double m = r.k * y / (2 * kPi);
        if (std::abs(m - std::round(m)) < 1e-9) {
            CHECK(r.cls == EigenClass::loop);
            CHECK(r.loop_edge == 0);
            ++loops;
        } else {
            CHECK(r.cls != EigenClass::loop);
        }
    }
    CHECK(loops == static_cast<int>(std::floor(40.0 * y / (2 * kPi))));
}

TEST_CASE("counting function agrees with records") {
    const MetricGraph g = family(RandomRegularParams{4, 8}, 5);
    const SecularSolver s(g);
    const auto recs = s.find(0.0, 40.0);
    for (double k : {5.0, 13.7, 25.0, 39.9}) {
        int n = 0;
        for (const auto& r : recs)
            if (r.k <= k) n += r.multiplicity;
        CHECK(s.count(k) == n);
    }
    // winding per unit window is 2|Γ| up to the counter
    const double w = s.winding(30.0) - s.winding(20.0);
    CHECK(std::abs(w - std::round(w)) < 1e-6);
}

TEST_CASE("split windows reproduce the full window") {
    const MetricGraph g = family(MandarinParams{5}, 6);
    const SecularSolver s(g);
    const auto full = s.find(0.0, 60.0);
    auto a = s.find(0.0, 23.4);
    const auto b = s.find(23.4, 60.0);
    a.insert(a.end(), b.begin(), b.end());
    REQUIRE(a.size() == full.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].index == full[i].index);
        CHECK(std::abs(a[i].k - full[i].k) <= 1e-10 * full[i].k);
    }
}

TEST_CASE("halved grid reproduces eigenvalues") {
    const MetricGraph g = family(StowerParams{2, 3}, 8);
    Tolerances half;
    half.step_factor = 0.5;
    const auto a = SecularSolver(g).first(300);
    const auto b = SecularSolver(g, half).first(300);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i].k - b[i].k) <= 1e-9 * a[i].k);
}

TEST_CASE("edge orientation does not change the spectrum") {
    const MetricGraph g = family(Tree31Params{2, {}}, 9);
    const auto a = find_eigenvalues(g, 0.0, 50.0);
    const auto b = find_eigenvalues(reversed(g), 0.0, 50.0);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i].k - b[i].k) <= 1e-10 * a[i].k);
}

TEST_CASE("kernel residual and bond basis") {
    const MetricGraph g = family(RandomRegularParams{3, 6}, 2);
    const RMat S = build_scattering(g);
    const RVec L = bond_lengths(g);
    for (const auto& r : SecularSolver(g).first(40)) {
        const CMat M = CMat::Identity(S.rows(), S.cols()) - secular_unitary(S, L, r.k);
        CHECK((M * r.kernel).norm() <= 1e-9 * r.kernel.norm());
    }
    CHECK(BondBasis::reverse(BondBasis::reverse(7)) == 7);
    CHECK(BondBasis::reverse(4) == 5);
    CHECK(BondBasis::edge_of(5) == 2);
}

TEST_CASE("Friedlander audit") {
    const MetricGraph g = family(StarParams{4}, 3);
    auto recs = SecularSolver(g).first(100);
    const FriedlanderReport r = friedlander_check(recs, g);
    CHECK(r.checked == 100);
    CHECK(r.min_margin >= 0.0);
    recs.erase(recs.begin() + 10);
    CHECK(throws_kind([&] { friedlander_check(recs, g); }, ErrorKind::LowerBoundViolation));
    auto low = SecularSolver(g).first(5);
    low[2].k = 0.1 * low[2].k;
    CHECK(throws_kind([&] { friedlander_check(low, g); }, ErrorKind::LowerBoundViolation));
}

TEST_CASE("invalid windows") {
    const MetricGraph g = family(StarParams{3}, 1);
    CHECK(throws_kind([&] { find_eigenvalues(g, 2.0, 1.0); }, ErrorKind::InvalidInput));
    CHECK(throws_kind([&] { find_eigenvalues(g, -1.0, 1.0); }, ErrorKind::InvalidInput));
}

TEST_CASE("tolerance overrides") {
    Tolerances t;
    CHECK(set_tolerance(t, "ker", 1e-7));
    CHECK(t.ker == 1e-7);
    CHECK_FALSE(set_tolerance(t, "nope", 1.0));
}

TEST_CASE("spectrum CSV") {
    const MetricGraph g = MetricGraph::build(2, {{0, 1, 1.0}});
    const std::string csv = spectrum_csv(SecularSolver(g).first(2));
    CHECK(csv == "n,k,multiplicity,class\n1,3.1415926535897931,1,generic\n2,6.2831853071795862,1,generic\n");
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("parallel spectrum does not depend on the worker count") {
    const MetricGraph g = family(MandarinParams{5}, 2);
    SpectrumRequest one, many;
    one.count = many.count = 600;
    many.workers = 3;
    const auto a = compute_spectrum(g, one);
    const auto b = compute_spectrum(g, many);
    CHECK(spectrum_csv(a.records) == spectrum_csv(b.records));
    CHECK(a.winding_count == a.record_count);
    CHECK(a.records.size() == 600);
}
