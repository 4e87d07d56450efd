#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qgraph/domains.hpp"
#include "test_util.hpp"

using namespace qg;
using testutil::family;
using testutil::throws_kind;

namespace {
constexpr double kPi = std::numbers::pi;

// N of a standard star or interval with Neumann leaves, eigenvalues strictly below k (0 included).
int oracle_position(const MetricGraph& omega, double k) {
    const double below = k * (1.0 - 1e-9);
    if (omega.edge_count() == 1) return static_cast<int>(std::floor(below * omega.length(0) / kPi)) + 1;
    int n = 1;
    for (double r : oracle::star_eigenvalues(omega.lengths(), below)) n += r < below;
    return n;
}

int oracle_star_position(const std::vector<double>& lengths, double k) {
    return oracle_position(star_graph(lengths), k);
}

std::vector<std::pair<EigenvalueRecord, Eigenfunction>> generic_large_k(const MetricGraph& g, int count) {
    std::vector<std::pair<EigenvalueRecord, Eigenfunction>> out;
    for (const auto& r : SecularSolver(g).first(count))
        if (r.cls == EigenClass::generic && large_k(r.k, g)) out.emplace_back(r, reconstruct(r, g));
    return out;
}
}  // namespace

TEST_CASE("interval: n − 1 Neumann points and n interval domains") {
    const MetricGraph g = MetricGraph::build(2, {{0, 1, 1.7}});
    for (const auto& r : SecularSolver(g).first(40)) {
        const Eigenfunction f = reconstruct(r, g);
        const Partition p = partition_neumann(f, g);
        CHECK(p.point_count == r.index - 1);
        CHECK(p.domain_count() == r.index);
        for (const Domain& d : p.vertex_domains) CHECK(d.kind == DomainKind::interval);
        const Partition z = partition_nodal(f, g);
        CHECK(z.point_count == r.index);
        CHECK(z.domain_count() == r.index + 1);
    }
}

TEST_CASE("partition completeness and the boundary double count") {
    for (const MetricGraph& g : {family(StarParams{4}, 2), family(Tree31Params{3, {}}, 3), family(StowerParams{2, 2}, 4),
                                 family(RandomRegularParams{3, 8}, 5)}) {
        const long boundary = static_cast<long>(g.boundary().size());
        for (const auto& r : SecularSolver(g).first(150)) {
            if (r.cls != EigenClass::generic) continue;
            const Eigenfunction f = reconstruct(r, g);
            for (PointKind kind : {PointKind::neumann, PointKind::nodal}) {
                const Partition p = partition(f, g, kind);
                double len = 0.0, rho = 0.0;
                long bsum = 0;
                for (const Domain& d : p.vertex_domains) {
                    len += d.length;
                    rho += d.rho;
                    bsum += d.boundary_size;
                }
                for (const Domain& d : trivial_domains(p, f, g)) {
                    CHECK(d.length == doctest::Approx(kPi / f.k).epsilon(1e-10));
                    CHECK(d.rho == doctest::Approx(1.0).epsilon(1e-10));
                    CHECK(d.boundary_size == 2);
                    len += d.length;
                    rho += d.rho;
                    bsum += d.boundary_size;
                }
                CHECK(std::abs(len - g.total_length()) <= 1e-10 * g.total_length());
                CHECK(std::abs(rho - g.total_length() * f.k / kPi) <= 1e-8 * std::max(1.0, rho));
                CHECK(bsum == 2 * p.point_count + boundary);
                CHECK(p.point_count == (kind == PointKind::neumann ? neumann_count(f, g) : nodal_count(f, g)));
                for (int v = 0; v < g.vertex_count(); ++v) {
                    const int id = p.domain_of_vertex[v];
                    REQUIRE(id >= 0);
                    bool listed = false;
                    for (int u : p.vertex_domains[id].vertices) listed = listed || u == v;
                    CHECK(listed);
                }
            }
        }
    }
}

TEST_CASE("tree: ξ + 1 Neumann domains and φ + 1 nodal domains") {
    const MetricGraph g = family(Tree31Params{3, {}}, 6);
    for (const auto& r : SecularSolver(g).first(200)) {
        if (r.cls != EigenClass::generic) continue;
        const Eigenfunction f = reconstruct(r, g);
        CHECK(partition_neumann(f, g).domain_count() == neumann_count(f, g) + 1);
        CHECK(partition_nodal(f, g).domain_count() == nodal_count(f, g) + 1);
    }
}

TEST_CASE("large k: Neumann domains are stars or intervals, with one star per interior vertex") {
    const MetricGraph g = family(RandomRegularParams{3, 8}, 7);
    for (const auto& [r, f] : generic_large_k(g, 250)) {
        const Partition p = partition_neumann(f, g);
        int stars = 0;
        for (const Domain& d : p.vertex_domains) {
            CHECK(d.kind != DomainKind::graph);
            if (d.kind == DomainKind::star) {
                ++stars;
                CHECK(g.degree(d.central_vertex) == d.boundary_size);
            }
        }
        CHECK(stars == static_cast<int>(g.interior().size()));
    }
}

TEST_CASE("3-star at large k: one star domain plus intervals") {
    const MetricGraph g = family(StarParams{3}, 8);
    for (const auto& [r, f] : generic_large_k(g, 120)) {
        const Partition p = partition_neumann(f, g);
        int stars = 0;
        for (const Domain& d : p.vertex_domains) stars += d.kind == DomainKind::star;
        CHECK(stars == 1);
    }
}

TEST_CASE("spectral position: sign formula equals the tangent-sum oracle") {
    int checked = 0;
    for (const MetricGraph& g : {family(StarParams{3}, 9), family(StowerParams{1, 2}, 10), family(RandomRegularParams{4, 8}, 11),
                                 family(Tree31Params{2, {}}, 12)}) {
        for (const auto& [r, f] : generic_large_k(g, 150)) {
            const Partition p = partition_neumann(f, g);
            for (int v : g.interior()) {
                const Domain& d = p.vertex_domains[p.domain_of_vertex[v]];
                REQUIRE(d.kind == DomainKind::star);
                const int N = spectral_position_sign(f, g, v);
                CHECK(N >= 1);
                CHECK(N <= g.degree(v) - 1);
                CHECK(N == oracle_position(extract(d, g), f.k));
                CHECK(N == spectral_position_direct(d, g, f.k));
                CHECK((N + 1) / 2.0 <= d.rho + 1e-9);
                CHECK(d.rho <= (N + g.degree(v) - 1) / 2.0 + 1e-9);
                ++checked;
            }
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("trivial interval domain has N = 1 and ρ = 1") {
    const double k = 3.7;
    const MetricGraph w = MetricGraph::build(2, {{0, 1, kPi / k}});
    CHECK(spectral_position_direct(w, k) == 1);
    CHECK(oracle_position(w, k) == 1);
    CHECK(wavelength_capacity(kPi / k, k) == doctest::Approx(1.0));
}

TEST_CASE("dual star identities") {
    int checked = 0;
    for (const MetricGraph& g : {family(StarParams{3}, 13), family(StarParams{5}, 14), family(RandomRegularParams{4, 8}, 15)}) {
        for (const auto& [r, f] : generic_large_k(g, 120)) {
            const Partition p = partition_neumann(f, g);
            for (int v : g.interior()) {
                const Domain& d = p.vertex_domains[p.domain_of_vertex[v]];
                const StarForm s = star_form(d, f, g);
                const StarForm t = dual_star(s);
                const int deg = static_cast<int>(s.lengths.size());
                for (size_t j = 0; j < s.lengths.size(); ++j)
                    CHECK(t.lengths[j] == doctest::Approx(kPi / f.k - s.lengths[j]).epsilon(1e-12));
                CHECK(std::abs(s.rho() + t.rho() - deg) <= 1e-8);
                const int N = spectral_position_sign(f, g, v);
                const int Nt = oracle_star_position(t.lengths, f.k);
                CHECK(N + Nt == deg);
                CHECK(spectral_position_direct(star_graph(t.lengths), f.k) == Nt);
                // f̃ is a Neumann eigenfunction of the dual star with the same k
                const MetricGraph sg = star_graph(t.lengths);
                const InvariantReport inv = check_invariants(star_eigenfunction(t), sg);
                CHECK(inv.ok(1e-8));
                const StarForm back = dual_star(t);
                for (size_t j = 0; j < s.lengths.size(); ++j) CHECK(std::abs(back.lengths[j] - s.lengths[j]) <= 1e-12);
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("self-dual lengths") {
    StarForm s;
    s.k = 2.0;
    s.lengths = {kPi / 4, kPi / 4, kPi / 4};
    s.forms = {{1.0, 0.3}, {1.0, 0.3}, {1.0, 0.3}};
    const StarForm t = dual_star(s);
    for (double l : t.lengths) CHECK(l == doctest::Approx(kPi / 4).epsilon(1e-15));
    s.lengths[0] = kPi / 2;
    CHECK(throws_kind([&] { dual_star(s); }, ErrorKind::NotNeumannStar));
}

TEST_CASE("nodal star domains obey the nodal analogue bounds and the auxiliary-star map") {
    int checked = 0;
    for (const MetricGraph& g : {family(StarParams{3}, 16), family(RandomRegularParams{3, 8}, 17), family(StowerParams{2, 2}, 18)}) {
        for (const auto& [r, f] : generic_large_k(g, 150)) {
            const Partition p = partition_nodal(f, g);
            for (const Domain& d : p.vertex_domains) {
                if (d.kind != DomainKind::star) continue;
                const StarForm s = star_form(d, f, g);
                const NodalStarAudit a = audit_nodal_star(s);
                CHECK(a.bounds_ok);
                CHECK(a.map_ok);
                CHECK(a.boundary == d.boundary_size);
                CHECK(a.xi >= 1);
                CHECK(a.xi <= a.boundary - 1);
                CHECK((a.xi + 1) / 2.0 <= a.rho + 1e-9);
                CHECK(a.rho <= (a.xi + a.boundary - 1) / 2.0 + 1e-9);
                CHECK(a.rho == doctest::Approx(d.rho).epsilon(1e-10));
                // ξ by dense sampling of f' on the domain's pieces
                int xi = 0;
                for (size_t j = 0; j < s.lengths.size(); ++j) {
                    const int m = 4096;
                    double prev = 0.0;
                    for (int i = 0; i <= m; ++i) {
                        const double x = s.lengths[j] * (1e-7 + (1 - 2e-7) * i / m);
                        const double v = -std::sin(s.forms[j].phi + s.k * x);
                        if (i > 0 && (prev < 0) != (v < 0)) ++xi;
                        prev = v;
                    }
                }
                CHECK(a.xi == xi);
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("local-global identities against per-vertex oracles") {
    const MetricGraph g = family(RandomRegularParams{6, 16}, 19);
    const long E = g.edge_count(), B = static_cast<long>(g.boundary().size());
    int checked = 0;
    for (const auto& [r, f] : generic_large_k(g, 400)) {
        const SurplusPair s = surpluses(f, g, r.index);
        const auto obs = local_observables(f, g);
        const Partition p = partition_neumann(f, g);
        long sumN = 0;
        double sumRho = 0.0;
        for (int v : g.interior()) {
            const Domain& d = p.vertex_domains[p.domain_of_vertex[v]];
            sumN += oracle_position(extract(d, g), f.k);
            sumRho += d.rho;
        }
        CHECK(sumN == s.sigma - s.omega + E - B);
        CHECK(std::abs(sumRho - (g.total_length() * f.k / kPi - s.xi + E - B)) <= 1e-8 * std::max(1.0, sumRho));
        const LocalGlobalReport rep = local_global_audit(obs, s, f.k, g);
        CHECK(rep.sum_N == rep.rhs_N);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("local-global audit rejects a perturbed observation") {
    const MetricGraph g = family(StarParams{3}, 20);
    const auto recs = generic_large_k(g, 60);
    REQUIRE(!recs.empty());
    const auto& [r, f] = recs.back();
    const SurplusPair s = surpluses(f, g, r.index);
    auto obs = local_observables(f, g);
    CHECK(obs.size() == 1);
    CHECK(obs[0].N == -s.omega);
    obs[0].rho += 1e-6;
    CHECK(throws_kind([&] { local_global_audit(obs, s, f.k, g); }, ErrorKind::IdentityViolation));
}

TEST_CASE("error paths") {
    const MetricGraph eq = family(StarParams{3}, 1, {1.0, 1.0, 1.0});
    const auto recs = SecularSolver(eq).first(4);
    REQUIRE(recs[1].cls == EigenClass::nonGenericSimple);
    const Eigenfunction f = reconstruct(recs[1], eq);
    CHECK(throws_kind([&] { partition_neumann(f, eq); }, ErrorKind::NonGenericInput));

    const MetricGraph g = family(StarParams{3}, 21);
    for (const auto& r : SecularSolver(g).first(10)) {
        if (r.cls != EigenClass::generic || large_k(r.k, g)) continue;
        const Eigenfunction h = reconstruct(r, g);
        CHECK(throws_kind([&] { spectral_position_sign(h, g, 0); }, ErrorKind::SmallK));
        CHECK(throws_kind([&] { local_observables(h, g); }, ErrorKind::SmallK));
    }
    const auto big = generic_large_k(g, 60);
    const Partition p = partition_neumann(big.back().second, g);
    for (const Domain& d : p.vertex_domains)
        if (d.kind == DomainKind::interval)
            CHECK(throws_kind([&] { star_form(d, big.back().second, g); }, ErrorKind::NotNeumannStar));
}

TEST_CASE("domain CSV") {
    CHECK(domain_csv_header() == "n,k,domain_id,kind,central_vertex,boundary_size,length,N,rho\n");
    Domain d;
    d.kind = DomainKind::interval;
    d.boundary_size = 2;
    d.length = 0.5;
    d.rho = 1.0;
    const std::string row = domain_csv_row(3, 2.0, 0, d, 1);
    CHECK(row.rfind("3,2,0,interval,-1,2,0.5,1,1", 0) == 0);
}
