#include "qgraph/closed_form.hpp"

#include <cmath>
#include <numbers>

#include "qgraph/error.hpp"

namespace qg {

namespace {
constexpr double kPi = std::numbers::pi;

bool near_zero_sin_or_cos(double x, double band) {
    return std::abs(std::sin(x)) <= band || std::abs(std::cos(x)) <= band;
}
}  // namespace

StowerPoint stower_split(const TorusPoint& kappa, const MetricGraph& g) {
    if (g.interior().size() != 1) throw Error(ErrorKind::WrongFamily, "stower needs exactly one interior vertex");
    if (static_cast<int>(kappa.size()) != g.edge_count()) throw Error(ErrorKind::BadCoordinate, "dimension mismatch");
    StowerPoint p;
    for (int e = 0; e < g.edge_count(); ++e) (g.is_loop(e) ? p.y : p.z).push_back(kappa[e]);
    return p;
}

double stower_secular(const StowerPoint& p) {
    double s = 0.0;
    for (double z : p.z) s += std::tan(z);
    for (double y : p.y) s += 2.0 * std::tan(0.5 * y);
    return s;
}

double stower_secular_scale(const StowerPoint& p) {
    double s = 0.0;
    for (double z : p.z) s += 1.0 + std::pow(std::tan(z), 2);
    for (double y : p.y) s += 1.0 + std::pow(std::tan(0.5 * y), 2);
    return s;
}

bool stower_has_bad_coordinate(const StowerPoint& p, double band) {
    for (double z : p.z)
        if (near_zero_sin_or_cos(z, band)) return true;
    for (double y : p.y)
        if (near_zero_sin_or_cos(0.5 * y, band)) return true;
    return false;
}

int stower_i_tails(const StowerPoint& p) {
    int i = 0;
    for (double z : p.z) i += std::tan(z) < 0.0;
    return i;
}

int stower_i_loops(const StowerPoint& p) {
    int i = 0;
    for (double y : p.y) i += std::tan(0.5 * y) < 0.0;
    return i;
}

SurplusValues stower_surpluses(const StowerPoint& p, double tol) {
    if (stower_has_bad_coordinate(p)) throw Error(ErrorKind::BadCoordinate, "stower coordinate in the bad set");
    const double F = stower_secular(p);
    if (!(std::abs(F) <= tol * stower_secular_scale(p)))
        throw Error(ErrorKind::NotOnSecularSet, "stower secular sum " + format_double(F));
    const int il = stower_i_loops(p);
    SurplusValues s;
    s.sigma = il;
    s.omega = static_cast<int>(p.y.size()) - (stower_i_tails(p) + il);
    return s;
}

double mandarin_Fs(const TorusPoint& kappa) {
    double s = 0.0;
    for (double x : kappa) s += std::tan(0.5 * x);
    return s;
}

double mandarin_Fa(const TorusPoint& kappa) {
    double s = 0.0;
    for (double x : kappa) s += 1.0 / std::tan(0.5 * x);
    return s;
}

double mandarin_Fs_scale(const TorusPoint& kappa) {
    double s = 0.0;
    for (double x : kappa) s += 1.0 + std::pow(std::tan(0.5 * x), 2);
    return s;
}

double mandarin_Fa_scale(const TorusPoint& kappa) {
    double s = 0.0;
    for (double x : kappa) s += 1.0 + std::pow(1.0 / std::tan(0.5 * x), 2);
    return s;
}

bool mandarin_has_bad_coordinate(const TorusPoint& kappa, double band) {
    for (double x : kappa)
        if (near_zero_sin_or_cos(0.5 * x, band)) return true;
    return false;
}

TorusPoint mandarin_T(const TorusPoint& kappa) {
    TorusPoint out(kappa.size());
    for (size_t j = 0; j < kappa.size(); ++j) out[j] = torus_coordinate(kappa[j] + kPi);
    return out;
}

MandarinBranch mandarin_branch(const TorusPoint& kappa, double tol) {
    if (mandarin_has_bad_coordinate(kappa)) throw Error(ErrorKind::BadCoordinate, "mandarin coordinate in the bad set");
    const bool s = std::abs(mandarin_Fs(kappa)) <= tol * mandarin_Fs_scale(kappa);
    const bool a = std::abs(mandarin_Fa(kappa)) <= tol * mandarin_Fa_scale(kappa);
    if (s == a) throw Error(ErrorKind::NotOnSecularSet, s ? "both mandarin branches vanish" : "neither mandarin branch vanishes");
    return s ? MandarinBranch::symmetric : MandarinBranch::antisymmetric;
}

int mandarin_index(const TorusPoint& kappa) {
    int i = 0;
    for (double x : kappa) i += std::tan(0.5 * x) < 0.0;
    return i;
}

int mandarin_C(const TorusPoint& kappa) { return mandarin_Fa(kappa) <= 0.0 ? 1 : 0; }

SurplusValues mandarin_surpluses(const TorusPoint& kappa, double tol) {
    const TorusPoint ks = mandarin_branch(kappa, tol) == MandarinBranch::symmetric ? kappa : mandarin_T(kappa);
    const int E = static_cast<int>(ks.size());
    const int i = mandarin_index(ks);
    const int C = mandarin_C(ks);
    return {i - C, E - i - C};
}

GluedTree tree_glue(const MetricGraph& g1, const Eigenfunction& f1, int w1, const MetricGraph& g2,
                    const Eigenfunction& f2, int w2) {
    if (!g1.is_boundary(w1) || !g2.is_boundary(w2))
        throw Error(ErrorKind::InvalidInput, "glue vertices must be boundary vertices");
    if (!(std::abs(f1.k - f2.k) <= 1e-12 * std::max(1.0, f1.k)))
        throw Error(ErrorKind::MismatchedK, format_double(f1.k) + " vs " + format_double(f2.k));
    const double v1 = f1.vertex_value(g1, w1);
    const double v2 = f2.vertex_value(g2, w2);
    if (!(std::abs(v1) > 1e-12 * f1.sup_amplitude()) || !(std::abs(v2) > 1e-12 * f2.sup_amplitude()))
        throw Error(ErrorKind::ZeroBoundaryValue, "eigenfunction vanishes at a glue vertex");
    const double k = f1.k;

    const int e1 = g1.incident(w1).front().edge;
    const int e2 = g2.incident(w2).front().edge;
    std::vector<int> id1(g1.vertex_count(), -1), id2(g2.vertex_count(), -1);
    int n = 0;
    for (int v = 0; v < g1.vertex_count(); ++v)
        if (v != w1) id1[v] = n++;
    for (int v = 0; v < g2.vertex_count(); ++v)
        if (v != w2) id2[v] = n++;

    std::vector<Edge> edges;
    std::vector<EdgeForm> forms;
    for (int e = 0; e < g1.edge_count(); ++e) {
        if (e == e1) continue;
        edges.push_back({id1[g1.edge(e).u], id1[g1.edge(e).v], g1.length(e)});
        forms.push_back({f1.edges[e].A / v1, f1.edges[e].phi});
    }
    for (int e = 0; e < g2.edge_count(); ++e) {
        if (e == e2) continue;
        edges.push_back({id2[g2.edge(e).u], id2[g2.edge(e).v], g2.length(e)});
        forms.push_back({f2.edges[e].A / v2, f2.edges[e].phi});
    }
    // merged edge runs from the far end of e1 to the far end of e2
    const Edge& a = g1.edge(e1);
    const bool w1_at_end = a.v == w1;
    const int a1 = w1_at_end ? a.u : a.v;
    const Edge& b = g2.edge(e2);
    const int a2 = b.v == w2 ? b.u : b.v;
    const double l1 = g1.length(e1);
    edges.push_back({id1[a1], id2[a2], l1 + g2.length(e2)});
    const EdgeForm& p1 = f1.edges[e1];
    forms.push_back({p1.A / v1, w1_at_end ? p1.phi : -(p1.phi + k * l1)});

    BuildOptions opt;
    opt.allow_degree_two = !g1.standard() || !g2.standard();
    GluedTree out;
    out.graph = MetricGraph::build(n, std::move(edges), opt);
    out.f = from_forms(k, std::move(forms));
    out.merged_edge = out.graph.edge_count() - 1;
    return out;
}

}  // namespace qg
