#include "verify.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "qgraph/analysis.hpp"
#include "qgraph/closed_form.hpp"
#include "qgraph/error.hpp"
#include "qgraph/torus.hpp"

namespace qg::verify {

namespace {

constexpr double kPi = std::numbers::pi;

MetricGraph fixture_graph(FamilyShape shape, std::uint64_t seed, std::vector<double> lengths = {}) {
    FamilySpec s;
    s.shape = std::move(shape);
    s.seed = seed;
    s.lengths.explicit_lengths = std::move(lengths);
    return generate(s);
}

struct Row {
    std::string check;
    bool pass = false;
    std::string detail;
};

// Runs a check; an exception counts as a failure with its message as detail.
Row check(const std::string& name, const std::function<std::string()>& body) {
    Row r{name, false, ""};
    try {
        r.detail = body();
        r.pass = true;
    } catch (const std::exception& e) {
        r.detail = e.what();
    }
    return r;
}

void fail(const std::string& what) { throw Error(ErrorKind::IdentityViolation, what); }

// Every stride-th generic record with k > π/L_min, at most `cap` of them.
std::vector<size_t> sample(const std::vector<EigenvalueRecord>& recs, const MetricGraph& g, int cap) {
    std::vector<size_t> all;
    for (size_t i = 0; i < recs.size(); ++i)
        if (recs[i].cls == EigenClass::generic && large_k(recs[i].k, g)) all.push_back(i);
    if (static_cast<int>(all.size()) <= cap) return all;
    std::vector<size_t> out;
    for (int j = 0; j < cap; ++j) out.push_back(all[all.size() * j / cap]);
    return out;
}

std::vector<Row> run_fixture(const Fixture& fx, const SuiteOptions& opt) {
    const MetricGraph& g = fx.graph;
    std::vector<Row> rows;
    SpectrumRequest req;
    req.count = opt.count;
    req.workers = opt.workers;
    SpectrumResult res;

    rows.push_back(check("engine", [&] {
        res = compute_spectrum(g, req, opt.tol);
        return std::to_string(res.records.size()) + " records, winding " + std::to_string(res.winding_count) +
               ", Friedlander margin " + format_double(res.friedlander.min_margin);
    }));
    if (!rows.back().pass) return rows;

    rows.push_back(check("halved-grid", [&] {
        Tolerances half = opt.tol;
        half.step_factor *= 0.5;
        const SpectrumResult r2 = compute_spectrum(g, req, half);
        if (r2.records.size() != res.records.size()) fail("record count changed");
        double worst = 0.0;
        for (size_t i = 0; i < r2.records.size(); ++i) {
            if (r2.records[i].index != res.records[i].index || r2.records[i].multiplicity != res.records[i].multiplicity)
                fail("index or multiplicity changed");
            worst = std::max(worst, std::abs(r2.records[i].k - res.records[i].k) / res.records[i].k);
        }
        if (worst > 1e-9) fail("max relative shift " + format_double(worst));
        return "max relative shift " + format_double(worst);
    }));

    std::vector<RecordObservation> obs;
    rows.push_back(check("hard-bounds", [&] {
        AnalysisOptions ao;
        ao.tol = opt.tol;
        obs = analyze_all(res.records, g, ao, opt.workers);
        SurplusAccumulator acc(g);
        for (const auto& o : obs) acc.add(o);
        const BoundsReport b = bounds_audit(acc);
        return std::to_string(acc.generic) + " generic, omega in [" + std::to_string(b.omega_min) + "," +
               std::to_string(b.omega_max) + "], sigma in [" + std::to_string(b.sigma_min) + "," +
               std::to_string(b.sigma_max) + "]";
    }));
    if (!rows.back().pass) return rows;

    rows.push_back(check("local-global", [&] {
        long n = 0;
        for (const auto& o : obs)
            if (o.has_local) {
                local_global_audit(o.local, o.surplus, o.k, g, opt.tol.identity);
                ++n;
            }
        return std::to_string(n) + " records";
    }));

    if (fx.name == "interval") {
        rows.push_back(check("interval-exact", [&] {
            const double L = g.total_length();
            double worst = 0.0;
            for (size_t i = 0; i < res.records.size(); ++i) {
                const auto& r = res.records[i];
                worst = std::max(worst, std::abs(r.k - r.index * kPi / L) / r.k);
                if (!obs[i].has_surplus || obs[i].surplus.sigma != 0 || obs[i].surplus.omega != -1)
                    fail("surpluses at n=" + std::to_string(r.index));
            }
            if (worst > 1e-9) fail("relative error " + format_double(worst));
            return "relative error " + format_double(worst);
        }));
    }

    const bool stower = g.interior().size() == 1 && g.vertex_count() == 1 + static_cast<int>(g.boundary().size());
    const bool mandarin = g.vertex_count() == 2 && g.boundary().empty();
    if (stower || mandarin) {
        rows.push_back(check("closed-form", [&] {
            long n = 0;
            for (const auto& o : obs) {
                if (!o.has_surplus) continue;
                const TorusPoint kappa = flow_point(o.k, g.lengths());
                const SurplusValues s =
                    stower ? stower_surpluses(stower_split(kappa, g)) : mandarin_surpluses(kappa);
                if (s.sigma != o.surplus.sigma || s.omega != o.surplus.omega)
                    fail("n=" + std::to_string(o.n) + ": closed form (" + std::to_string(s.sigma) + "," +
                         std::to_string(s.omega) + ") vs engine (" + std::to_string(o.surplus.sigma) + "," +
                         std::to_string(o.surplus.omega) + ")");
                ++n;
            }
            return std::to_string(n) + " records";
        }));
    }

    const auto picks = sample(res.records, g, opt.sample_domains);
    rows.push_back(check("spectral-position", [&] {
        long stars = 0;
        for (size_t i : picks) {
            const Eigenfunction f = reconstruct(res.records[i], g);
            const Partition p = partition_neumann(f, g);
            for (const Domain& d : p.vertex_domains) {
                if (d.kind != DomainKind::star) continue;
                const int Ns = spectral_position_sign(f, g, d.central_vertex);
                const int Nd = spectral_position_direct(d, g, f.k, opt.tol);
                if (Ns != Nd) fail("sign formula " + std::to_string(Ns) + " vs direct " + std::to_string(Nd));
                const StarForm dual = dual_star(star_form(d, f, g));
                const int Nt = spectral_position_direct(star_graph(dual.lengths), f.k, opt.tol);
                if (Ns + Nt != d.boundary_size) fail("N + dual N != boundary size");
                if (std::abs(d.rho + dual.rho() - d.boundary_size) > 1e-8) fail("rho + dual rho != boundary size");
                ++stars;
            }
        }
        return std::to_string(stars) + " star domains";
    }));

    rows.push_back(check("nodal-stars", [&] {
        long stars = 0;
        for (size_t i : picks) {
            const Eigenfunction f = reconstruct(res.records[i], g);
            const Partition p = partition_nodal(f, g);
            for (const Domain& d : p.vertex_domains) {
                if (d.kind != DomainKind::star || d.touches_graph_boundary) continue;
                const NodalStarAudit a = audit_nodal_star(star_form(d, f, g));
                if (!a.bounds_ok || !a.map_ok) fail("nodal star audit failed at n=" + std::to_string(res.records[i].index));
                ++stars;
            }
        }
        return std::to_string(stars) + " nodal star domains";
    }));

    rows.push_back(check("torus", [&] {
        double worst = 0.0;
        for (size_t i : picks) {
            const RecordObservation& o = obs[i];
            const TorusPoint kappa = flow_point(o.k, g.lengths());
            const TorusObservables t = observables_at(kappa, g, opt.tol);
            if (t.sigma != o.surplus.sigma || t.omega != o.surplus.omega)
                fail("surpluses differ at n=" + std::to_string(o.n));
            for (size_t j = 0; j < t.N.size(); ++j)
                if (t.N[j] != o.local[j].N) fail("N differs at n=" + std::to_string(o.n));
            const InversionAudit a = inversion_audit(kappa, g, opt.tol);
            worst = std::max({worst, a.p_defect, a.q_defect, a.rho_defect});
            if (!a.generic_ok || !a.N_ok || !a.omega_ok) fail("inversion audit at n=" + std::to_string(o.n));
        }
        if (worst > 1e-8) fail("inversion defect " + format_double(worst));
        return std::to_string(picks.size()) + " points, inversion defect " + format_double(worst);
    }));
    return rows;
}

void print_row(std::ostream& out, const std::string& fixture, const Row& r) {
    out << std::left << std::setw(14) << fixture << std::setw(20) << r.check << std::setw(6) << (r.pass ? "PASS" : "FAIL")
        << r.detail << "\n";
}

}  // namespace

std::vector<Fixture> builtin_fixtures() {
    return {
        {"interval", fixture_graph(IntervalParams{}, 1, {1.0})},
        {"star3", fixture_graph(StarParams{3}, 1)},
        {"stower2-1", fixture_graph(StowerParams{2, 1}, 2)},
        {"mandarin3", fixture_graph(MandarinParams{3}, 3)},
        {"tree31-2", fixture_graph(Tree31Params{2, {}}, 4)},
    };
}

bool run_suite(const std::vector<Fixture>& fixtures, const SuiteOptions& opt, std::ostream& out) {
    bool all = true;
    long failed = 0, total = 0;
    for (const auto& fx : fixtures)
        for (const Row& r : run_fixture(fx, opt)) {
            print_row(out, fx.name, r);
            all = all && r.pass;
            failed += !r.pass;
            ++total;
        }
    out << "summary: " << total - failed << "/" << total << " checks passed\n";
    return all;
}

bool run_negative_controls(std::ostream& out) {
    auto detected = [](const std::function<void()>& inject, ErrorKind kind) {
        try {
            inject();
        } catch (const Error& e) {
            return e.kind() == kind;
        }
        return false;
    };
    std::vector<Row> rows;
    const MetricGraph star = fixture_graph(StarParams{3}, 1);
    const MetricGraph tree = fixture_graph(Tree31Params{2, {}}, 4);

    rows.push_back({"missed-eigenvalue", detected([&] {
                        SpectrumRequest req;
                        req.count = 20;
                        auto recs = compute_spectrum(star, req).records;
                        recs.erase(recs.begin() + 5);
                        friedlander_check(recs, star);
                    }, ErrorKind::LowerBoundViolation), "record 6 removed"});

    rows.push_back({"omega-out-of-range", detected([&] {
                        SurplusAccumulator acc(star);
                        RecordObservation o;
                        o.has_surplus = true;
                        o.surplus.omega = 2 * star.betti();
                        acc.add(o);
                    }, ErrorKind::HardBoundViolation), "omega = 2*beta injected"});

    rows.push_back({"local-global", detected([&] {
                        SpectrumRequest req;
                        req.count = 60;
                        for (const auto& r : compute_spectrum(star, req).records) {
                            if (r.cls != EigenClass::generic || !large_k(r.k, star)) continue;
                            RecordObservation o = analyze(r, star);
                            o.local[0].rho += 1e-6;
                            local_global_audit(o.local, o.surplus, o.k, star);
                            return;
                        }
                    }, ErrorKind::IdentityViolation), "rho perturbed by 1e-6"});

    {
        SurplusAccumulator acc(star);
        acc.generic = 20000;
        acc.omega = {{-2, 9000}, {-1, 11000}};
        const Verdict v = symmetry_tests(acc).front();
        rows.push_back({"asymmetric-omega", !v.pass, "defect " + format_double(v.value)});
    }
    {
        SurplusAccumulator acc(tree, {{0, 1}});
        acc.pair_counts[{0, 1}] = {{{1, 1}, 6000}, {{2, 2}, 6000}};
        bool caught = false;
        for (const auto& v : independence_tests(acc, tree)) caught = caught || !v.pass;
        rows.push_back({"correlated-pairs", caught, "N^(0) = N^(1) injected"});
    }
    {
        SurplusAccumulator acc(tree);
        acc.generic = 12000;
        acc.omega = {{-1, 4000}, {-2, 4000}, {-3, 4000}};
        const Verdict v = binomial_test(acc, tree);
        rows.push_back({"non-binomial", !v.pass, "uniform thirds injected"});
    }
    bool all = true;
    for (auto& r : rows) {
        r.detail = (r.pass ? "detected: " : "NOT detected: ") + r.detail;
        print_row(out, "negative", r);
        all = all && r.pass;
    }
    return all;
}

}  // namespace qg::verify
