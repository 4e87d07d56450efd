#pragma once

#include <functional>
#include <vector>

#include "qgraph/statistics.hpp"

namespace qg {

struct SpectrumRequest {
    double kmax = 0.0;  // window (0, kmax] when count == 0
    int count = 0;      // first `count` records by index otherwise
    int workers = 1;
};

struct SpectrumResult {
    std::vector<EigenvalueRecord> records;
    SolverStats stats;
    double k_end = 0.0;       // upper end of the solved window
    int winding_count = 0;    // counter value at k_end
    int record_count = 0;     // eigenvalues covered by records in (0, k_end]
    FriedlanderReport friedlander;
};

// Window-parallel solve. Sub-windows have a fixed width (a multiple of the grid
// step), so the records do not depend on the worker count. Runs the Friedlander
// audit and compares the winding counter with the records (SolverFailure on mismatch).
SpectrumResult compute_spectrum(const MetricGraph& g, const SpectrumRequest& req, const Tolerances& tol = {});

struct AnalysisOptions {
    Tolerances tol;
    bool local = true;               // N^(v), ρ^(v) when k > π/L_min
    bool audit_local_global = false;  // throws IdentityViolation / HardBoundViolation
};

RecordObservation analyze(const EigenvalueRecord& rec, const MetricGraph& g, const AnalysisOptions& opt = {});

// analyze() over all records, split into contiguous slices across workers.
std::vector<RecordObservation> analyze_all(const std::vector<EigenvalueRecord>& recs, const MetricGraph& g,
                                           const AnalysisOptions& opt = {}, int workers = 1);

// Runs `job(i)` for i in [0, n) on up to `workers` threads (static round-robin);
// the first exception by index is rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& job);

}  // namespace qg
