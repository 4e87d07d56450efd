#pragma once

#include <string>
#include <vector>

#include "qgraph/eigenfunction.hpp"

namespace qg {

// κ ∈ (0, 2π]^E, one coordinate per edge.
using TorusPoint = std::vector<double>;

// x mod 2π mapped into (0, 2π]; residues within 1e-12·max(1,|x|) of 0 map to 2π.
double torus_coordinate(double x);
TorusPoint flow_point(double k, const std::vector<double>& lengths);
// [−κ]
TorusPoint inversion(const TorusPoint& kappa);

// Canonical eigenfunction of Γ_κ at k = 1 built from the adjugate of I − e^{iκ}S.
struct CanonicalData {
    TorusPoint kappa;
    CVec a;                           // a·a* = adjugate divided by the phase of its trace
    double sigma_min = 0.0;           // smallest singular value of I − e^{iκ}S
    double sigma_next = 0.0;          // second smallest
    double adjugate_residual = 0.0;   // ‖adj' − a a*‖_F / ‖a‖²
    bool regular = false;             // exactly one singular value below tol.ker
    std::vector<cplx> f;              // f_κ(v)
    std::vector<std::vector<cplx>> df;  // ∂_e f_κ(v), incident order
    std::vector<double> p;            // p_{v,v} = |f_κ(v)|²
    std::vector<std::vector<double>> q;  // q_{v,v,e} = f_κ(v)·conj(∂_e f_κ(v)), incident order
    double max_imag = 0.0;            // largest |Im| of the q products relative to the scale
    double continuity = 0.0;          // vertex-value mismatch across incident ends, relative
    bool generic = false;             // p > 0 everywhere, q ≠ 0 at interior ends (thresholded)
};

// Throws BadCoordinate for a coordinate outside (0, 2π].
CanonicalData canonical_data(const TorusPoint& kappa, const MetricGraph& g, const Tolerances& tol = {});

// arctan* : ℝ∖{0} → (0, π/2) ∪ (π/2, π)
double arctan_star(double x);

struct TorusObservables {
    int n = 0;      // index of k = 1 in the spectrum of Γ_κ
    int sigma = 0;
    int omega = 0;
    std::vector<int> vertices;  // interior vertices
    std::vector<int> N;
    std::vector<double> rho;
};

// Throws NotOnSigmaReg / NotGeneric.
TorusObservables observables_at(const TorusPoint& kappa, const MetricGraph& g, const Tolerances& tol = {});
// Local part only (no Γ_κ spectrum).
TorusObservables local_observables_at(const CanonicalData& cd, const MetricGraph& g);

struct InversionAudit {
    double p_defect = 0.0;    // max |p(Iκ) − p(κ)| / max p
    double q_defect = 0.0;    // max |q(Iκ) + q(κ)| / max(max |q|, max p)
    double rho_defect = 0.0;  // max |ρ(Iκ) − (deg − ρ(κ))|
    bool N_ok = false;        // N(Iκ) = deg − N(κ)
    bool omega_ok = false;    // ω(Iκ) = β − |∂Γ| − ω(κ)
    bool generic_ok = false;  // Iκ still on Σ^gen
    TorusObservables at, inverted;
};
InversionAudit inversion_audit(const TorusPoint& kappa, const MetricGraph& g, const Tolerances& tol = {});

// kappa_1..kappa_E,sigma,omega,N_<v>...,rho_<v>...
std::string torus_csv_header(const MetricGraph& g);
std::string torus_csv_row(const TorusPoint& kappa, const TorusObservables& obs);

}  // namespace qg
