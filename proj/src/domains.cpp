#include "qgraph/domains.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qgraph/error.hpp"

namespace qg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSnap = kEndSnap;

// Cut points on an edge sit where the shifted phase s(x) = (φ + kx)/π − offset
// is an integer; offset 0 for Neumann points, ½ for nodal points.
struct Cuts {
    double s0 = 0.0;
    double s1 = 0.0;
    long first = 0;
    long last = -1;
    long count() const { return last >= first ? last - first + 1 : 0; }
};

Cuts edge_cuts(const Eigenfunction& f, const MetricGraph& g, int e, PointKind kind) {
    Cuts c;
    const double offset = kind == PointKind::nodal ? 0.5 : 0.0;
    c.s0 = f.edges[e].phi / kPi - offset;
    c.s1 = c.s0 + f.k * g.length(e) / kPi;
    const double r0 = std::round(c.s0);
    const double r1 = std::round(c.s1);
    const bool neumann = kind == PointKind::neumann;
    const double snap0 = neumann && g.is_boundary(g.edge(e).u) ? kLeafSnap : kSnap;
    const double snap1 = neumann && g.is_boundary(g.edge(e).v) ? kLeafSnap : kSnap;
    c.first = static_cast<long>(std::abs(c.s0 - r0) <= snap0 ? r0 + 1.0 : std::ceil(c.s0));
    c.last = static_cast<long>(std::abs(c.s1 - r1) <= snap1 ? r1 - 1.0 : std::floor(c.s1));
    return c;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};
}  // namespace

const char* to_string(DomainKind k) {
    switch (k) {
        case DomainKind::interval: return "interval";
        case DomainKind::star: return "star";
        case DomainKind::graph: return "graph";
    }
    return "unknown";
}

double wavelength_capacity(double length, double k) { return length * k / kPi; }

Partition partition(const Eigenfunction& f, const MetricGraph& g, PointKind kind, double eps_gen) {
    if (!genericity(f, g, eps_gen).generic)
        throw Error(ErrorKind::NonGenericInput, "partition requires a generic eigenfunction");
    const int V = g.vertex_count();
    const int E = g.edge_count();
    Partition p;
    p.kind = kind;
    p.k = f.k;

    std::vector<Cuts> cuts(E);
    UnionFind uf(V);
    for (int e = 0; e < E; ++e) {
        cuts[e] = edge_cuts(f, g, e, kind);
        if (cuts[e].count() == 0) uf.unite(g.edge(e).u, g.edge(e).v);
    }

    p.domain_of_vertex.assign(V, -1);
    for (int v = 0; v < V; ++v) {
        const int r = uf.find(v);
        if (p.domain_of_vertex[r] < 0) {
            p.domain_of_vertex[r] = static_cast<int>(p.vertex_domains.size());
            p.vertex_domains.emplace_back();
        }
        p.domain_of_vertex[v] = p.domain_of_vertex[r];
        Domain& d = p.vertex_domains[p.domain_of_vertex[v]];
        d.vertices.push_back(v);
        if (g.is_boundary(v)) {
            ++d.boundary_size;
            d.touches_graph_boundary = true;
        }
    }

    const double unit = kPi / f.k;
    for (int e = 0; e < E; ++e) {
        const Cuts& c = cuts[e];
        const double l = g.length(e);
        Domain& du = p.vertex_domains[p.domain_of_vertex[g.edge(e).u]];
        if (c.count() == 0) {
            du.segments.push_back({e, SegmentSide::whole, 0.0, l});
            du.rho += c.s1 - c.s0;
            continue;
        }
        Domain& dv = p.vertex_domains[p.domain_of_vertex[g.edge(e).v]];
        const double a = static_cast<double>(c.first) - c.s0;
        const double b = c.s1 - static_cast<double>(c.last);
        du.segments.push_back({e, SegmentSide::start, 0.0, a * unit});
        du.rho += a;
        ++du.boundary_size;
        dv.segments.push_back({e, SegmentSide::end, l - b * unit, l});
        dv.rho += b;
        ++dv.boundary_size;
        p.point_count += c.count();
        p.trivial_count += c.count() - 1;
    }

    for (Domain& d : p.vertex_domains) {
        d.length = d.rho * unit;
        int interior = 0;
        for (int v : d.vertices)
            if (!g.is_boundary(v)) {
                ++interior;
                d.central_vertex = v;
            }
        bool whole = false;
        for (const auto& s : d.segments) whole = whole || s.side == SegmentSide::whole;
        if (interior == 0) {
            d.kind = DomainKind::interval;
            d.central_vertex = -1;
        } else if (interior == 1 && !whole && d.vertices.size() == 1) {
            d.kind = DomainKind::star;
        } else {
            d.kind = DomainKind::graph;
            d.central_vertex = -1;
        }
    }
    return p;
}

std::vector<Domain> trivial_domains(const Partition& p, const Eigenfunction& f, const MetricGraph& g) {
    std::vector<Domain> out;
    const double unit = kPi / f.k;
    for (int e = 0; e < g.edge_count(); ++e) {
        const Cuts c = edge_cuts(f, g, e, p.kind);
        for (long m = c.first; m < c.last; ++m) {
            Domain d;
            d.kind = DomainKind::interval;
            d.boundary_size = 2;
            d.segments.push_back({e, SegmentSide::inner, (static_cast<double>(m) - c.s0) * unit,
                                  (static_cast<double>(m + 1) - c.s0) * unit});
            d.length = unit;
            d.rho = 1.0;
            out.push_back(std::move(d));
        }
    }
    return out;
}

MetricGraph extract(const Domain& d, const MetricGraph& g) {
    std::vector<int> id(g.vertex_count(), -1);
    int n = 0;
    for (int v : d.vertices) id[v] = n++;
    std::vector<Edge> edges;
    for (const auto& s : d.segments) {
        const Edge& pe = g.edge(s.edge);
        const double len = s.x1 - s.x0;
        switch (s.side) {
            case SegmentSide::whole: edges.push_back({id[pe.u], id[pe.v], len}); break;
            case SegmentSide::start: edges.push_back({id[pe.u], n++, len}); break;
            case SegmentSide::end: edges.push_back({id[pe.v], n++, len}); break;
            case SegmentSide::inner:
                edges.push_back({n, n + 1, len});
                n += 2;
                break;
        }
    }
    BuildOptions opt;
    opt.allow_degree_two = !g.standard();
    return MetricGraph::build(n, std::move(edges), opt);
}

int spectral_position_direct(const MetricGraph& omega, double k, const Tolerances& tol) {
    // λ = k² itself is excluded; the constant state (λ = 0) is included
    const SecularSolver solver(omega, tol);
    return 1 + solver.count(k * (1.0 - 1e-9));
}

int spectral_position_direct(const Domain& d, const MetricGraph& g, double k, const Tolerances& tol) {
    return spectral_position_direct(extract(d, g), k, tol);
}

int spectral_position_sign(const Eigenfunction& f, const MetricGraph& g, int v) {
    if (!large_k(f.k, g)) throw Error(ErrorKind::SmallK, "k <= π/L_min");
    if (g.is_boundary(v)) throw Error(ErrorKind::InvalidInput, "vertex " + std::to_string(v) + " is a boundary vertex");
    int s = 0;
    for (const auto& end : g.incident(v)) s += end_sign(f, g, v, end);
    return (g.degree(v) - s) / 2;
}

// ---- stars ------------------------------------------------------------------

double StarForm::total_length() const { return std::accumulate(lengths.begin(), lengths.end(), 0.0); }

double StarForm::rho() const { return total_length() * k / kPi; }

MetricGraph star_graph(const std::vector<double>& lengths) {
    std::vector<Edge> edges;
    for (size_t j = 0; j < lengths.size(); ++j) edges.push_back({0, static_cast<int>(j) + 1, lengths[j]});
    BuildOptions opt;
    opt.allow_degree_two = lengths.size() == 2;
    return MetricGraph::build(static_cast<int>(lengths.size()) + 1, std::move(edges), opt);
}

Eigenfunction star_eigenfunction(const StarForm& s) { return from_forms(s.k, s.forms); }

StarForm star_form(const Domain& d, const Eigenfunction& f, const MetricGraph& g) {
    if (d.kind != DomainKind::star) throw Error(ErrorKind::NotNeumannStar, "domain is not a star");
    StarForm s;
    s.central_vertex = d.central_vertex;
    s.k = f.k;
    for (const auto& seg : d.segments) {
        const int e = seg.edge;
        const EdgeForm& pf = f.edges[e];
        if (seg.side == SegmentSide::start) {
            s.lengths.push_back(seg.x1);
            s.forms.push_back(pf);
        } else if (seg.side == SegmentSide::end) {
            s.lengths.push_back(g.length(e) - seg.x0);
            s.forms.push_back({pf.A, -(pf.phi + f.k * g.length(e))});
        } else {
            throw Error(ErrorKind::NotNeumannStar, "star domain holds a whole edge");
        }
    }
    return s;
}

StarForm dual_star(const StarForm& s) {
    StarForm d;
    d.central_vertex = s.central_vertex;
    d.k = s.k;
    for (size_t j = 0; j < s.lengths.size(); ++j) {
        const double kl = s.k * s.lengths[j];
        if (!(kl > 0.0 && kl < kPi)) throw Error(ErrorKind::NotNeumannStar, "edge holds an interior Neumann point");
        const double lt = kPi / s.k - s.lengths[j];
        const double end_value = s.forms[j].A * std::cos(s.forms[j].phi + kl);
        d.lengths.push_back(lt);
        d.forms.push_back({-end_value, -s.k * lt});
    }
    return d;
}

StarForm auxiliary_neumann_star(const StarForm& nodal) {
    StarForm a = nodal;
    const double q = 0.5 * kPi / nodal.k;
    for (size_t j = 0; j < nodal.lengths.size(); ++j) {
        const double kl = nodal.k * nodal.lengths[j];
        if (!(kl > 0.0 && kl < kPi) || std::abs(kl - 0.5 * kPi) <= kSnap)
            throw Error(ErrorKind::NonGenericInput, "nodal star edge outside (0,π/2)∪(π/2,π)");
        a.lengths[j] = kl > 0.5 * kPi ? nodal.lengths[j] - q : nodal.lengths[j] + q;
    }
    return a;
}

int star_neumann_count(const StarForm& s) {
    long n = 0;
    for (size_t j = 0; j < s.lengths.size(); ++j) {
        const double p0 = s.forms[j].phi / kPi;
        n += count_open_integers(p0, p0 + s.k * s.lengths[j] / kPi);
    }
    return static_cast<int>(n);
}

int star_nodal_count(const StarForm& s) {
    long n = 0;
    for (size_t j = 0; j < s.lengths.size(); ++j) {
        const double p0 = s.forms[j].phi / kPi - 0.5;
        n += count_open_integers(p0, p0 + s.k * s.lengths[j] / kPi);
    }
    return static_cast<int>(n);
}

NodalStarAudit audit_nodal_star(const StarForm& nodal, double tol) {
    NodalStarAudit a;
    a.boundary = static_cast<int>(nodal.lengths.size());
    a.xi = star_neumann_count(nodal);
    a.rho = nodal.rho();
    const StarForm aux = auxiliary_neumann_star(nodal);
    a.rho_aux = aux.rho();
    a.phi_aux = star_nodal_count(aux);
    const double d = a.boundary;
    a.bounds_ok = a.xi >= 1 && a.xi <= a.boundary - 1 && a.rho >= 0.5 * (a.xi + 1) - tol &&
                  a.rho <= 0.5 * (a.xi + d - 1.0) + tol;
    a.map_ok = a.phi_aux + a.xi == a.boundary && std::abs(a.rho_aux - (a.rho + 0.5 * d - a.xi)) <= tol;
    return a;
}

// ---- local observables --------------------------------------------------------

std::vector<VertexObservables> local_observables(const Eigenfunction& f, const MetricGraph& g) {
    if (!large_k(f.k, g)) throw Error(ErrorKind::SmallK, "k <= π/L_min");
    std::vector<Cuts> cuts(g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        cuts[e] = edge_cuts(f, g, e, PointKind::neumann);
        if (cuts[e].count() == 0) throw Error(ErrorKind::IdentityViolation, "edge without Neumann point above π/L_min");
    }
    std::vector<VertexObservables> out;
    for (int v : g.interior()) {
        VertexObservables o;
        o.vertex = v;
        o.N = spectral_position_sign(f, g, v);
        for (const auto& end : g.incident(v)) {
            const Cuts& c = cuts[end.edge];
            o.rho += end.at_start ? static_cast<double>(c.first) - c.s0 : c.s1 - static_cast<double>(c.last);
        }
        out.push_back(o);
    }
    return out;
}

LocalGlobalReport local_global_audit(const std::vector<VertexObservables>& obs, const SurplusPair& s,
                                     double k, const MetricGraph& g, double tol) {
    LocalGlobalReport r;
    const int shift = g.edge_count() - static_cast<int>(g.boundary().size());
    for (const auto& o : obs) {
        const int deg = g.degree(o.vertex);
        if (o.N < 1 || o.N > deg - 1 || o.rho < 0.5 * (o.N + 1) - tol || o.rho > 0.5 * (o.N + deg - 1) + tol)
            throw Error(ErrorKind::HardBoundViolation, "local observable bound at vertex " + std::to_string(o.vertex) +
                                                           " (N=" + std::to_string(o.N) + ", rho=" + format_double(o.rho) + ")");
        r.sum_N += o.N;
        r.sum_rho += o.rho;
    }
    r.rhs_N = s.sigma - s.omega + shift;
    r.rhs_rho = g.total_length() * k / kPi - s.xi + shift;
    if (r.sum_N != r.rhs_N)
        throw Error(ErrorKind::IdentityViolation, "sum of N = " + std::to_string(r.sum_N) + ", expected " +
                                                      std::to_string(r.rhs_N) + " at n=" + std::to_string(s.n));
    const double scale = std::max<double>(1.0, static_cast<double>(obs.size()));
    if (!(std::abs(r.sum_rho - r.rhs_rho) <= tol * scale))
        throw Error(ErrorKind::IdentityViolation, "sum of rho = " + format_double(r.sum_rho) + ", expected " +
                                                      format_double(r.rhs_rho) + " at n=" + std::to_string(s.n));
    return r;
}

std::string domain_csv_header() { return "n,k,domain_id,kind,central_vertex,boundary_size,length,N,rho\n"; }

std::string domain_csv_row(int n, double k, int id, const Domain& d, int N) {
    std::ostringstream os;
    os << n << ',' << format_double(k) << ',' << id << ',' << to_string(d.kind) << ',' << d.central_vertex << ','
       << d.boundary_size << ',' << format_double(d.length) << ',' << N << ',' << format_double(d.rho) << '\n';
    return os.str();
}

}  // namespace qg
