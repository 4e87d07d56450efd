#include "qgraph/eigenfunction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qgraph/error.hpp"

namespace qg {

namespace {
constexpr double kPi = std::numbers::pi;
}

double Eigenfunction::value(const MetricGraph&, int e, double x) const {
    return edges[e].A * std::cos(edges[e].phi + k * x);
}

double Eigenfunction::derivative(const MetricGraph&, int e, double x) const {
    return -k * edges[e].A * std::sin(edges[e].phi + k * x);
}

double Eigenfunction::end_value(const MetricGraph& g, const EdgeEnd& end) const {
    const auto& f = edges[end.edge];
    return end.at_start ? f.A * std::cos(f.phi) : f.A * std::cos(f.phi + k * g.length(end.edge));
}

double Eigenfunction::end_derivative(const MetricGraph& g, const EdgeEnd& end) const {
    const auto& f = edges[end.edge];
    return end.at_start ? -k * f.A * std::sin(f.phi) : k * f.A * std::sin(f.phi + k * g.length(end.edge));
}

double Eigenfunction::vertex_value(const MetricGraph& g, int v) const {
    return end_value(g, g.incident(v).front());
}

double Eigenfunction::sup_amplitude() const {
    double s = 0.0;
    for (const auto& f : edges) s = std::max(s, f.A);
    return s;
}

Eigenfunction reconstruct(const EigenvalueRecord& rec, const MetricGraph& g) {
    if (rec.multiplicity != 1) throw Error(ErrorKind::NotSimple, "multiplicity " + std::to_string(rec.multiplicity));
    return reconstruct(CVec(rec.kernel.col(0)), rec.k, g);
}

Eigenfunction reconstruct(const CVec& a, double k, const MetricGraph& g) {
    const int E = g.edge_count();
    if (a.size() != 2 * E) throw Error(ErrorKind::InvalidInput, "kernel vector size mismatch");
    // f|_e(x) = alpha e^{ikx} + beta e^{-ikx}
    std::vector<cplx> alpha(E), beta(E);
    double amp = 0.0;
    for (int e = 0; e < E; ++e) {
        alpha[e] = a[2 * e] * std::polar(1.0, -k * g.length(e));
        beta[e] = a[2 * e + 1];
        amp = std::max(amp, std::abs(alpha[e]) + std::abs(beta[e]));
    }
    if (amp == 0.0) throw Error(ErrorKind::RealizationFailure, "zero kernel vector");

    int best_v = -1;
    cplx best{0.0, 0.0};
    for (int v = 0; v < g.vertex_count(); ++v) {
        const EdgeEnd& end = g.incident(v).front();
        const int e = end.edge;
        const cplx fv = end.at_start ? alpha[e] + beta[e] : a[2 * e] + beta[e] * std::polar(1.0, -k * g.length(e));
        if (std::abs(fv) > std::abs(best)) {
            best = fv;
            best_v = v;
        }
    }
    cplx c{1.0, 0.0};
    if (best_v >= 0 && std::abs(best) > 1e-6 * amp) {
        c = std::conj(best) / std::abs(best);
    } else {
        // function (nearly) vanishes at all vertices: fix the phase on the largest edge
        int e_max = 0;
        for (int e = 1; e < E; ++e)
            if (std::abs(alpha[e]) + std::abs(beta[e]) > std::abs(alpha[e_max]) + std::abs(beta[e_max])) e_max = e;
        const cplx z = std::conj(beta[e_max]) / alpha[e_max];
        c = std::sqrt(z / std::abs(z));
    }

    Eigenfunction f;
    f.k = k;
    f.c = c;
    f.a = c * a;
    f.edges.resize(E);
    double defect = 0.0;
    for (int e = 0; e < E; ++e) {
        const cplx al = c * alpha[e];
        const cplx be = c * beta[e];
        defect = std::max(defect, std::abs(be - std::conj(al)));
        const cplx gamma = 0.5 * (al + std::conj(be));
        f.edges[e].A = 2.0 * std::abs(gamma);
        f.edges[e].phi = std::arg(gamma);
    }
    f.max_imag = defect / amp;
    if (f.max_imag > 1e-7)
        throw Error(ErrorKind::RealizationFailure, "imaginary part " + format_double(f.max_imag) + " relative");
    return f;
}

Eigenfunction from_forms(double k, std::vector<EdgeForm> forms) {
    Eigenfunction f;
    f.k = k;
    f.edges = std::move(forms);
    for (auto& e : f.edges) {
        if (e.A < 0.0) {
            e.A = -e.A;
            e.phi += kPi;
        }
        e.phi = std::remainder(e.phi, 2.0 * kPi);
    }
    return f;
}

InvariantReport check_invariants(const Eigenfunction& f, const MetricGraph& g) {
    InvariantReport rep;
    const double sup = std::max(f.sup_amplitude(), 1e-300);
    for (int v = 0; v < g.vertex_count(); ++v) {
        const auto& ends = g.incident(v);
        const double f0 = f.end_value(g, ends.front());
        double dsum = 0.0;
        for (const auto& end : ends) {
            rep.continuity = std::max(rep.continuity, std::abs(f.end_value(g, end) - f0) / sup);
            dsum += f.end_derivative(g, end);
        }
        rep.kirchhoff = std::max(rep.kirchhoff, std::abs(dsum) / (f.k * sup));
    }
    rep.max_imag = f.max_imag;
    return rep;
}

GenericityReport genericity(const Eigenfunction& f, const MetricGraph& g, double eps) {
    GenericityReport rep;
    double scale = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v)
        for (const auto& end : g.incident(v)) {
            scale = std::max(scale, std::abs(f.end_value(g, end)));
            scale = std::max(scale, std::abs(f.end_derivative(g, end)) / f.k);
        }
    rep.scale = scale;
    if (scale == 0.0) return rep;
    double min_val = std::numeric_limits<double>::infinity();
    double min_der = std::numeric_limits<double>::infinity();
    for (int v = 0; v < g.vertex_count(); ++v) {
        min_val = std::min(min_val, std::abs(f.vertex_value(g, v)) / scale);
        if (g.is_boundary(v)) continue;
        for (const auto& end : g.incident(v))
            min_der = std::min(min_der, std::abs(f.end_derivative(g, end)) / f.k / scale);
    }
    rep.min_value = min_val;
    rep.min_deriv = std::isinf(min_der) ? 1.0 : min_der;
    const double worst = std::min(rep.min_value, rep.min_deriv);
    rep.generic = worst > 10.0 * eps;
    rep.borderline = worst > eps && worst <= 10.0 * eps;
    return rep;
}

EigenClass classify(EigenvalueRecord& rec, const MetricGraph& g, const Tolerances& tol) {
    rec.loop_edge = -1;
    if (rec.multiplicity > 1) return rec.cls = EigenClass::multiple;
    const Eigenfunction f = reconstruct(rec, g);
    const double sup = f.sup_amplitude();
    for (int e : g.loops()) {
        const double kl = rec.k * g.length(e);
        const double m = std::round(kl / (2.0 * kPi));
        if (m < 1.0 || std::abs(kl - 2.0 * kPi * m) > tol.loop * rec.k) continue;
        double off = 0.0;
        for (int o = 0; o < g.edge_count(); ++o)
            if (o != e) off = std::max(off, f.edges[o].A);
        if (off <= tol.gen * sup) {
            rec.loop_edge = e;
            return rec.cls = EigenClass::loop;
        }
    }
    const auto gr = genericity(f, g, tol.gen);
    if (gr.generic) return rec.cls = EigenClass::generic;
    if (gr.borderline) return rec.cls = EigenClass::borderline;
    return rec.cls = EigenClass::nonGenericSimple;
}

long count_open_integers(double lo, double hi, double snap) { return count_open_integers(lo, hi, snap, snap); }

long count_open_integers(double lo, double hi, double snap_lo, double snap_hi) {
    auto snapped = [](double x, double snap, bool& integral) {
        const double r = std::round(x);
        integral = std::abs(x - r) <= snap;
        return integral ? r : x;
    };
    bool lo_int, hi_int;
    const double a = snapped(lo, snap_lo, lo_int);
    const double b = snapped(hi, snap_hi, hi_int);
    const double bottom = lo_int ? a + 1.0 : std::ceil(a);
    const double top = hi_int ? b - 1.0 : std::floor(b);
    return top >= bottom ? static_cast<long>(top - bottom) + 1 : 0;
}

namespace {
void require_nondegenerate(const Eigenfunction& f, int e) {
    if (!(f.edges[e].A > 1e-12 * f.sup_amplitude()))
        throw Error(ErrorKind::DegenerateEdge, "f vanishes on edge " + std::to_string(e));
}
}  // namespace

int count_nodal_on_edge(const Eigenfunction& f, const MetricGraph& g, int e) {
    require_nondegenerate(f, e);
    const double p0 = f.edges[e].phi;
    const double p1 = p0 + f.k * g.length(e);
    return static_cast<int>(count_open_integers(p0 / kPi - 0.5, p1 / kPi - 0.5));
}

int count_neumann_on_edge(const Eigenfunction& f, const MetricGraph& g, int e) {
    require_nondegenerate(f, e);
    const double p0 = f.edges[e].phi;
    const double p1 = p0 + f.k * g.length(e);
    // f' = 0 holds exactly at a degree-1 vertex: its end phase is an integer
    const auto& ed = g.edge(e);
    return static_cast<int>(count_open_integers(p0 / kPi, p1 / kPi, g.is_boundary(ed.u) ? kLeafSnap : kEndSnap,
                                                g.is_boundary(ed.v) ? kLeafSnap : kEndSnap));
}

int end_sign(const Eigenfunction& f, const MetricGraph& g, int v, const EdgeEnd& end) {
    if (g.is_boundary(v)) return -1;
    const double prod = f.end_value(g, end) * f.end_derivative(g, end);
    if (prod == 0.0) throw Error(ErrorKind::SignDegeneracy, "vertex " + std::to_string(v));
    return sgn(prod);
}

int edge_diff(const Eigenfunction& f, const MetricGraph& g, int e) {
    const auto& ed = g.edge(e);
    const int su = end_sign(f, g, ed.u, EdgeEnd{e, true});
    const int sv = end_sign(f, g, ed.v, EdgeEnd{e, false});
    return -(su + sv) / 2;
}

int nodal_count(const Eigenfunction& f, const MetricGraph& g) {
    int n = 0;
    for (int e = 0; e < g.edge_count(); ++e) n += count_nodal_on_edge(f, g, e);
    return n;
}

int neumann_count(const Eigenfunction& f, const MetricGraph& g) {
    int n = 0;
    for (int e = 0; e < g.edge_count(); ++e) n += count_neumann_on_edge(f, g, e);
    return n;
}

SurplusPair surpluses(const Eigenfunction& f, const MetricGraph& g, int n) {
    SurplusPair s;
    s.n = n;
    s.phi = nodal_count(f, g);
    s.xi = neumann_count(f, g);
    s.sigma = s.phi - n;
    s.omega = s.xi - n;
    return s;
}

std::string surplus_csv_header() { return "n,k,phi,xi,sigma,omega,class\n"; }

std::string surplus_csv_row(const EigenvalueRecord& rec, const SurplusPair* s) {
    std::ostringstream os;
    os << rec.index << ',' << format_double(rec.k) << ',';
    if (s)
        os << s->phi << ',' << s->xi << ',' << s->sigma << ',' << s->omega;
    else
        os << ",,,";
    os << ',' << to_string(rec.cls) << '\n';
    return os.str();
}

}  // namespace qg
