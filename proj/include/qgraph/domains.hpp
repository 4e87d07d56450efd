#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "qgraph/eigenfunction.hpp"

namespace qg {

enum class PointKind { neumann, nodal };
enum class DomainKind { interval, star, graph };

const char* to_string(DomainKind k);

enum class SegmentSide { whole, start, end, inner };

// Sub-interval [x0, x1] of a parent edge, in the parent's coordinate.
struct Segment {
    int edge = 0;
    SegmentSide side = SegmentSide::whole;  // which parent-edge end the segment touches
    double x0 = 0.0;
    double x1 = 0.0;
};

struct Domain {
    DomainKind kind = DomainKind::interval;
    int central_vertex = -1;          // star only
    std::vector<int> vertices;        // parent vertices inside the domain
    std::vector<Segment> segments;
    int boundary_size = 0;            // |∂Ω|: cut points plus parent boundary vertices
    double length = 0.0;
    double rho = 0.0;                 // |Ω|k/π, accumulated in phase units
    bool touches_graph_boundary = false;
};

// Domains containing at least one vertex are explicit; the remaining ones
// (between two consecutive cut points on one edge, length π/k, ρ = 1) are counted.
struct Partition {
    PointKind kind = PointKind::neumann;
    double k = 0.0;
    std::vector<Domain> vertex_domains;
    std::vector<int> domain_of_vertex;
    long trivial_count = 0;
    long point_count = 0;  // ξ(f) or φ(f)

    long domain_count() const { return static_cast<long>(vertex_domains.size()) + trivial_count; }
};

// Throws NonGenericInput unless f is generic on g.
Partition partition(const Eigenfunction& f, const MetricGraph& g, PointKind kind, double eps_gen = 1e-8);
inline Partition partition_neumann(const Eigenfunction& f, const MetricGraph& g) {
    return partition(f, g, PointKind::neumann);
}
inline Partition partition_nodal(const Eigenfunction& f, const MetricGraph& g) {
    return partition(f, g, PointKind::nodal);
}
// Materializes the counted trivial domains (export and tests).
std::vector<Domain> trivial_domains(const Partition& p, const Eigenfunction& f, const MetricGraph& g);

double wavelength_capacity(double length, double k);

// k > π/L_min with a relative margin, so k = π/L_min computed in floating point stays small.
inline bool large_k(double k, const MetricGraph& g) { return k * g.min_length() / std::numbers::pi > 1.0 + kEndSnap; }

// The domain as a standalone standard graph; cut points become degree-1 vertices.
MetricGraph extract(const Domain& d, const MetricGraph& g);

// N(Ω): eigenvalues of the extracted domain with 0 <= λ < k², by the secular engine.
int spectral_position_direct(const Domain& d, const MetricGraph& g, double k, const Tolerances& tol = {});
int spectral_position_direct(const MetricGraph& omega, double k, const Tolerances& tol = {});

// deg(v)/2 − ½ Σ_e sgn(f(v) ∂_e f(v)). Throws SmallK when k <= π/L_min.
int spectral_position_sign(const Eigenfunction& f, const MetricGraph& g, int v);

// ---- stars ------------------------------------------------------------------

// Star written from its centre: edge j has length lengths[j] and
// f_j(x) = forms[j].A cos(forms[j].phi + k x), x = 0 at the centre.
struct StarForm {
    int central_vertex = -1;
    double k = 0.0;
    std::vector<double> lengths;
    std::vector<EdgeForm> forms;

    double total_length() const;
    double rho() const;
};

// Star graph: centre 0, leaf j+1 at the end of edge j.
MetricGraph star_graph(const std::vector<double>& lengths);
Eigenfunction star_eigenfunction(const StarForm& s);

// Throws NotNeumannStar unless the domain is a star.
StarForm star_form(const Domain& d, const Eigenfunction& f, const MetricGraph& g);

// l̃_j = π/k − l_j, f̃_j(x) = −A_j cos(k(l̃_j − x)) with A_j the value at the cut point.
// Throws NotNeumannStar if some l_j >= π/k.
StarForm dual_star(const StarForm& s);

// Nodal star → Neumann star with lengths l_j ∓ π/(2k), same edge forms.
StarForm auxiliary_neumann_star(const StarForm& nodal);

// Interior zeros of f' on the star's edges.
int star_neumann_count(const StarForm& s);
int star_nodal_count(const StarForm& s);

struct NodalStarAudit {
    int boundary = 0;
    int xi = 0;
    double rho = 0.0;
    double rho_aux = 0.0;  // ρ of the auxiliary Neumann star
    int phi_aux = 0;       // nodal count of the auxiliary function
    bool bounds_ok = false;
    bool map_ok = false;   // φ_aux + ξ = |∂Ω|, ρ_aux = ρ + |∂Ω|/2 − ξ
};
NodalStarAudit audit_nodal_star(const StarForm& nodal, double tol = 1e-8);

// ---- local observables --------------------------------------------------------

struct VertexObservables {
    int vertex = 0;
    int N = 0;
    double rho = 0.0;
};

// N(Ω^(v)) by the sign formula and ρ(Ω^(v)) for every interior vertex.
// Throws SmallK when k <= π/L_min.
std::vector<VertexObservables> local_observables(const Eigenfunction& f, const MetricGraph& g);

struct LocalGlobalReport {
    long sum_N = 0;
    long rhs_N = 0;
    double sum_rho = 0.0;
    double rhs_rho = 0.0;
};
// Σ_v N = σ − ω + E − |∂Γ| exactly and Σ_v ρ = |Γ|k/π − ξ + E − |∂Γ|.
// Throws IdentityViolation, or HardBoundViolation for a per-vertex bound.
LocalGlobalReport local_global_audit(const std::vector<VertexObservables>& obs, const SurplusPair& s,
                                     double k, const MetricGraph& g, double tol = 1e-8);

// n,k,domain_id,kind,central_vertex,boundary_size,length,N,rho
std::string domain_csv_header();
std::string domain_csv_row(int n, double k, int id, const Domain& d, int N);

}  // namespace qg
