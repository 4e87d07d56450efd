#include "qgraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "qgraph/error.hpp"

namespace qg {

namespace {
constexpr int kStepsPerChunk = 32;

void add_stats(SolverStats& into, const SolverStats& s) {
    into.eigensolves += s.eigensolves;
    into.lu_solves += s.lu_solves;
    into.fallbacks += s.fallbacks;
    into.max_winding_defect = std::max(into.max_winding_defect, s.max_winding_defect);
}
}  // namespace

void parallel_for(int n, int workers, const std::function<void(int)>& job) {
    if (n <= 0) return;
    workers = std::clamp(workers, 1, n);
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](int w) {
        for (int i = w; i < n; i += workers) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

SpectrumResult compute_spectrum(const MetricGraph& g, const SpectrumRequest& req, const Tolerances& tol) {
    if (req.count <= 0 && !(req.kmax > 0.0)) throw Error(ErrorKind::InvalidInput, "need kmax > 0 or count > 0");
    const SecularSolver solver(g, tol);
    const double chunk = solver.grid_step() * kStepsPerChunk;
    SpectrumResult res;

    auto solve = [&](double lo, double hi) {
        const long j0 = static_cast<long>(std::floor(lo / chunk));
        std::vector<std::pair<double, double>> windows;
        for (long j = j0; j * chunk < hi; ++j) {
            const double a = std::max(lo, j * chunk), b = std::min(hi, (j + 1) * chunk);
            if (b > a) windows.emplace_back(a, b);
        }
        const int nw = static_cast<int>(windows.size());
        std::vector<std::vector<EigenvalueRecord>> parts(nw);
        std::vector<SolverStats> stats(nw);
        parallel_for(nw, req.workers,
                     [&](int i) { parts[i] = solver.find(windows[i].first, windows[i].second, &stats[i]); });
        for (int i = 0; i < nw; ++i) {
            add_stats(res.stats, stats[i]);
            for (auto& r : parts[i]) res.records.push_back(std::move(r));
        }
    };

    if (req.count <= 0) {
        solve(0.0, req.kmax);
        res.k_end = req.kmax;
    } else {
        // Weyl estimate of k_count plus a margin, rounded up to whole chunks
        const double unit = std::numbers::pi / g.total_length();
        const double slack = g.edge_count() + static_cast<double>(g.boundary().size()) + 2.0;
        auto align = [&](double k) { return std::ceil(k / chunk) * chunk; };
        double lo = 0.0, hi = align(unit * (req.count + slack));
        for (;;) {
            solve(lo, hi);
            const int have = res.records.empty() ? 0 : res.records.back().index + res.records.back().multiplicity - 1;
            if (have >= req.count) break;
            lo = hi;
            hi = align(hi + unit * (req.count - have + slack));
        }
        res.k_end = hi;
    }

    for (size_t i = 1; i < res.records.size(); ++i)
        if (!(res.records[i].k > res.records[i - 1].k) ||
            res.records[i].index != res.records[i - 1].index + res.records[i - 1].multiplicity)
            throw Error(ErrorKind::SolverFailure, "sub-window records do not join at k=" + format_double(res.records[i].k));
    res.record_count = res.records.empty() ? 0 : res.records.back().index + res.records.back().multiplicity - 1;
    res.winding_count = solver.count(solver.safe_point(res.k_end));
    if (res.winding_count != res.record_count)
        throw Error(ErrorKind::SolverFailure, "winding counter " + std::to_string(res.winding_count) + " vs " +
                                                  std::to_string(res.record_count) + " records");
    if (req.count > 0)
        while (!res.records.empty() && res.records.back().index > req.count) res.records.pop_back();
    res.friedlander = friedlander_check(res.records, g);
    return res;
}

RecordObservation analyze(const EigenvalueRecord& rec, const MetricGraph& g, const AnalysisOptions& opt) {
    RecordObservation obs;
    obs.n = rec.index;
    obs.k = rec.k;
    obs.cls = rec.cls;
    obs.multiplicity = rec.multiplicity;
    if (rec.cls != EigenClass::generic) return obs;
    const Eigenfunction f = reconstruct(rec, g);
    obs.surplus = surpluses(f, g, rec.index);
    obs.has_surplus = true;
    if (opt.local && large_k(rec.k, g)) {
        obs.local = local_observables(f, g);
        obs.has_local = true;
        if (opt.audit_local_global) local_global_audit(obs.local, obs.surplus, rec.k, g, opt.tol.identity);
    }
    return obs;
}

std::vector<RecordObservation> analyze_all(const std::vector<EigenvalueRecord>& recs, const MetricGraph& g,
                                           const AnalysisOptions& opt, int workers) {
    std::vector<RecordObservation> out(recs.size());
    const int n = static_cast<int>(recs.size());
    const int slices = std::max(1, std::min(n, workers * 4));
    parallel_for(slices, workers, [&](int s) {
        const int a = static_cast<int>(static_cast<long>(n) * s / slices);
        const int b = static_cast<int>(static_cast<long>(n) * (s + 1) / slices);
        for (int i = a; i < b; ++i) out[i] = analyze(recs[i], g, opt);
    });
    return out;
}

}  // namespace qg
