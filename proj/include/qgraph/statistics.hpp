#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qgraph/domains.hpp"

namespace qg {

// What one eigenvalue record contributes to the statistics.
struct RecordObservation {
    int n = 0;
    double k = 0.0;
    EigenClass cls = EigenClass::generic;
    int multiplicity = 1;
    bool has_surplus = false;  // generic records only
    SurplusPair surplus;
    bool has_local = false;    // generic and k > π/L_min
    std::vector<VertexObservables> local;
};

class SurplusAccumulator {
public:
    SurplusAccumulator() = default;
    // pairs: (u, v) interior-vertex pairs whose joint N counts are kept.
    explicit SurplusAccumulator(const MetricGraph& g, std::vector<std::pair<int, int>> pairs = {},
                                double rho_bin = 0.01);

    // Throws HardBoundViolation for σ or ω outside the theorem bounds.
    void add(const RecordObservation& obs);
    void merge(const SurplusAccumulator& other);
    bool operator==(const SurplusAccumulator& other) const = default;

    // Totals. records counts eigenvalues with multiplicity.
    long records = 0;
    long generic = 0;
    long loops = 0;
    long excluded = 0;

    std::map<int, long> omega;
    std::map<int, long> sigma;
    std::map<std::pair<int, int>, long> joint;                // (σ, ω)
    std::map<int, std::map<int, long>> N;                      // vertex → N → count
    std::map<int, std::vector<long>> rho_hist;                 // vertex → bins over (0, deg v)
    std::map<std::pair<int, int>, std::map<std::pair<int, int>, long>> pair_counts;
    std::vector<std::pair<int, int>> pairs;
    double rho_bin = 0.01;
    int betti = 0;
    int boundary = 0;
    std::map<int, int> degree;  // interior vertices

    long local_count(int v) const;
};

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;  // observed defect / deviation
    double band = 0.0;   // allowed
    bool informational = false;
    std::string detail;
};

struct StatOptions {
    long min_sample = 10000;
};

struct DensityReport {
    long records = 0;
    double d_loop = 0.0;
    double d_generic = 0.0;
    double theory_loop = 0.0;
    double theory_generic = 0.0;
};
// Throws InsufficientSample below options.min_sample records.
DensityReport density_report(const SurplusAccumulator& acc, const MetricGraph& g, const StatOptions& opt = {});

// Symmetry of P(ω) around (β − |∂Γ|)/2, of N^(v) around deg v/2, of the ρ^(v) histogram.
std::vector<Verdict> symmetry_tests(const SurplusAccumulator& acc);
// E σ = β/2, E ω = (β − |∂Γ|)/2 within 3 standard errors.
std::vector<Verdict> expectation_tests(const SurplusAccumulator& acc);
// −ω − 1 ~ Bin(|∂Γ| − 2, ½). Throws WrongFamily unless g is a (3,1)-tree.
Verdict binomial_test(const SurplusAccumulator& acc, const MetricGraph& g);
// Conditional symmetry, correlation and product form of (N^(u), N^(v)) on trees.
// Throws WrongFamily for non-trees, InsufficientSample for small samples.
std::vector<Verdict> independence_tests(const SurplusAccumulator& acc, const MetricGraph& g,
                                        const StatOptions& opt = {});

struct BoundsReport {
    int omega_min = 0, omega_max = 0;
    int sigma_min = 0, sigma_max = 0;
    int hard_omega_lo = 0, hard_omega_hi = 0;
    int conj_omega_lo = 0, conj_omega_hi = 0;  // informational
    bool hard_ok = true;
    bool within_conjecture = true;
};
BoundsReport bounds_audit(const SurplusAccumulator& acc);

// Kolmogorov–Smirnov distance of standardized ω to the standard normal.
double clt_diagnostic(const SurplusAccumulator& acc);

// max_j |P̂_a(ω = j) − P̂_b(ω = j)|, e.g. between a prefix and the full run.
double frequency_drift(const SurplusAccumulator& a, const SurplusAccumulator& b);

// ρ^(v) bins exceeding 20× their neighbours' mean (informational).
std::vector<double> rho_atom_candidates(const SurplusAccumulator& acc, int v);

// value,count,frequency
std::string histogram_csv(const std::map<int, long>& counts);
std::string rho_histogram_csv(const SurplusAccumulator& acc, int v);

// Full JSON report (distributions, moments, verdicts, diagnostics).
std::string stat_report_json(const SurplusAccumulator& acc, const MetricGraph& g, const StatOptions& opt = {},
                             const SurplusAccumulator* prefix = nullptr);

}  // namespace qg
