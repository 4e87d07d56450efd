#pragma once

#include <string>
#include <vector>

#include "qgraph/secular.hpp"

namespace qg {

// f|_e(x) = A cos(phi + k x), x in [0, l_e] measured from edge.u.
struct EdgeForm {
    double A = 0.0;
    double phi = 0.0;
};

struct Eigenfunction {
    double k = 0.0;
    CVec a;                      // bond amplitudes (after realization)
    cplx c{1.0, 0.0};            // realization phase applied to the raw kernel vector
    std::vector<EdgeForm> edges;
    double max_imag = 0.0;       // realness defect before projection, relative to sup|f|

    double value(const MetricGraph& g, int e, double x) const;
    double derivative(const MetricGraph& g, int e, double x) const;
    // Vertex value taken from the given edge end.
    double end_value(const MetricGraph& g, const EdgeEnd& end) const;
    // Outgoing derivative at the vertex through the given edge end.
    double end_derivative(const MetricGraph& g, const EdgeEnd& end) const;
    double vertex_value(const MetricGraph& g, int v) const;
    double sup_amplitude() const;
};

// Built from the (first) kernel column of a record. Throws NotSimple / RealizationFailure.
Eigenfunction reconstruct(const EigenvalueRecord& rec, const MetricGraph& g);
Eigenfunction reconstruct(const CVec& a, double k, const MetricGraph& g);
// Directly from canonical edge forms (dual stars, glued trees).
Eigenfunction from_forms(double k, std::vector<EdgeForm> forms);

struct InvariantReport {
    double continuity = 0.0;  // max relative mismatch of vertex values
    double kirchhoff = 0.0;   // max relative derivative sum
    double max_imag = 0.0;
    bool ok(double tol = 1e-9) const { return continuity <= tol && kirchhoff <= tol && max_imag <= tol; }
};
InvariantReport check_invariants(const Eigenfunction& f, const MetricGraph& g);

struct GenericityReport {
    bool generic = false;
    bool borderline = false;
    double scale = 0.0;       // max over vertices of |f|, |∂f|/k
    double min_value = 0.0;   // min |f(v)| / scale
    double min_deriv = 0.0;   // min interior |∂_e f(v)|/k / scale
};
GenericityReport genericity(const Eigenfunction& f, const MetricGraph& g, double eps = 1e-8);

// sgn(x) = 1 if x > 0, −1 otherwise.
inline int sgn(double x) { return x > 0.0 ? 1 : -1; }

// Number of integers strictly inside (lo, hi); endpoints within snap of an
// integer are treated as that integer.
inline constexpr double kEndSnap = 1e-10;
long count_open_integers(double lo, double hi, double snap = kEndSnap);
long count_open_integers(double lo, double hi, double snap_lo, double snap_hi);

// Snap used for Neumann end phases at degree-1 vertices (the phase there is an
// integer by the vertex condition; only rounding moves it).
inline constexpr double kLeafSnap = 0.25;

int count_nodal_on_edge(const Eigenfunction& f, const MetricGraph& g, int e);
int count_neumann_on_edge(const Eigenfunction& f, const MetricGraph& g, int e);
// sgn(f(v)·∂_e f(v)) at an edge end; boundary vertices give −1 (product is 0).
int end_sign(const Eigenfunction& f, const MetricGraph& g, int v, const EdgeEnd& end);
// −(sgn(f(u)∂f(u)) + sgn(f(v)∂f(v)))/2, which equals nodal minus Neumann points on e.
// Throws SignDegeneracy on a zero product at an interior vertex.
int edge_diff(const Eigenfunction& f, const MetricGraph& g, int e);

int nodal_count(const Eigenfunction& f, const MetricGraph& g);
int neumann_count(const Eigenfunction& f, const MetricGraph& g);

struct SurplusPair {
    int n = 0;
    int phi = 0;
    int xi = 0;
    int sigma = 0;
    int omega = 0;
};
SurplusPair surpluses(const Eigenfunction& f, const MetricGraph& g, int n);

// n,k,phi,xi,sigma,omega,class
std::string surplus_csv_header();
std::string surplus_csv_row(const EigenvalueRecord& rec, const SurplusPair* s);

}  // namespace qg
