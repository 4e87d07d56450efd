#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/graph.hpp"

namespace qg {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Bond 2j runs u -> v along edge j, bond 2j+1 runs v -> u.
struct BondBasis {
    static int forward(int edge) { return 2 * edge; }
    static int backward(int edge) { return 2 * edge + 1; }
    static int reverse(int bond) { return bond ^ 1; }
    static int edge_of(int bond) { return bond >> 1; }
    // Bond leaving a vertex through the given edge end, and the one arriving.
    static int outgoing(const EdgeEnd& end) { return end.at_start ? forward(end.edge) : backward(end.edge); }
    static int incoming(const EdgeEnd& end) { return reverse(outgoing(end)); }
};

struct Tolerances {
    double ker = 1e-9;        // kernel residual / singular-value nullity
    double k_rel = 1e-10;     // relative eigenvalue accuracy
    double loop = 1e-8;       // loop test: dist(k l, 2πZ) <= loop * k
    double gen = 1e-8;        // genericity threshold relative to vertex scale
    double identity = 1e-8;   // real-valued identities
    double phase_safe = 1e-9; // grid points keep every eigenphase this far from 0
    double winding = 1e-6;    // integrality defect of the winding counter
    double step_factor = 1.0; // multiplies the default grid step (0.5 halves it)
    double per_step = 4.0;    // cap: expected eigenvalues per grid step
    int max_retries = 4;
};

// Sets a named tolerance; returns false for an unknown name.
bool set_tolerance(Tolerances& tol, const std::string& name, double value);

enum class EigenClass { generic, loop, nonGenericSimple, multiple, borderline };

const char* to_string(EigenClass c);

struct EigenvalueRecord {
    int index = 0;  // first spectral index covered (n >= 1)
    double k = 0.0;
    int multiplicity = 1;
    EigenClass cls = EigenClass::generic;
    CMat kernel;            // 2E x multiplicity, orthonormal columns
    double residual = 0.0;  // max ||(I - U(k)) a|| over kernel columns
    int loop_edge = -1;     // set for loop records
};

RMat build_scattering(const MetricGraph& g);
RVec bond_lengths(const MetricGraph& g);
CMat secular_unitary(const RMat& S, const RVec& bond_len, double k);

struct SolverStats {
    long eigensolves = 0;
    long lu_solves = 0;
    long fallbacks = 0;
    double max_winding_defect = 0.0;
};

class SecularSolver {
public:
    explicit SecularSolver(const MetricGraph& g, Tolerances tol = {});

    const MetricGraph& graph() const { return g_; }
    const Tolerances& tolerances() const { return tol_; }

    // Number of eigenvalues in (0, k] counted with multiplicity.
    int count(double k) const;
    // Raw winding value (2k|Γ| − Σ[θ_j])/2π minus its value near k = 0.
    double winding(double k) const;

    // Records with k in (k_lo, k_hi], classified.
    std::vector<EigenvalueRecord> find(double k_lo, double k_hi, SolverStats* stats = nullptr) const;
    // The first `count` records (by index, multiplicities included).
    std::vector<EigenvalueRecord> first(int count, SolverStats* stats = nullptr) const;

    double grid_step() const;
    double safe_point(double k, SolverStats* stats = nullptr) const;

private:
    struct Node {
        double k;
        int n;
        Eigen::VectorXd phases;  // principal phases (−π, π]
    };
    Node node(double k, SolverStats* stats) const;
    Node safe_node(double k, SolverStats* stats) const;
    void solve_step(const Node& a, const Node& b, std::vector<EigenvalueRecord>& out, SolverStats* stats,
                    int depth = 0) const;
    bool fast_step(const Node& a, const Node& b, std::vector<EigenvalueRecord>& out, SolverStats* stats) const;
    void isolate(const Node& a, const Node& b, std::vector<EigenvalueRecord>& out, SolverStats* stats, int depth) const;
    bool newton(double k, CVec v, double lo, double hi, double& k_out, CVec& v_out, SolverStats* stats) const;
    CVec eigvec_at(double k, double phase, SolverStats* stats) const;
    EigenvalueRecord multiple_record(double lo, double hi, int m, SolverStats* stats) const;
    std::vector<EigenvalueRecord> find_with_step(double k_lo, double k_hi, double step, SolverStats* stats) const;

    MetricGraph g_;
    Tolerances tol_;
    RMat S_;
    RVec L_;
    double base_winding_ = 0.0;
};

// Convenience wrappers.
std::vector<EigenvalueRecord> find_eigenvalues(const MetricGraph& g, double k_lo, double k_hi,
                                               const Tolerances& tol = {});

// Classification (fills rec.cls, rec.loop_edge).
EigenClass classify(EigenvalueRecord& rec, const MetricGraph& g, const Tolerances& tol = {});

// Null-space dimension of I − U(k) (singular values below tol).
int nullity(const MetricGraph& g, double k, double tol = 1e-9);

struct FriedlanderReport {
    int checked = 0;
    double min_margin = 0.0;  // min over n of k_n − π(n+1)/(2|Γ|)
};
// Throws LowerBoundViolation on a bound violation or an index gap.
FriedlanderReport friedlander_check(const std::vector<EigenvalueRecord>& records, const MetricGraph& g,
                                    double tol = 1e-12);

// n,k,multiplicity,class
std::string spectrum_csv(const std::vector<EigenvalueRecord>& records);

std::string format_double(double x);

}  // namespace qg
