#include "qgraph/torus.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "qgraph/error.hpp"

namespace qg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double torus_coordinate(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r <= 0.0) r += kTwoPi;
    // a multiple of 2π up to rounding is 2π, not a tiny positive length
    if (r <= 1e-12 * std::max(1.0, std::abs(x))) r = kTwoPi;
    return r;
}

TorusPoint flow_point(double k, const std::vector<double>& lengths) {
    if (!(k > 0.0)) throw Error(ErrorKind::InvalidInput, "flow point needs k > 0");
    TorusPoint kappa(lengths.size());
    for (size_t j = 0; j < lengths.size(); ++j) kappa[j] = torus_coordinate(k * lengths[j]);
    return kappa;
}

TorusPoint inversion(const TorusPoint& kappa) {
    TorusPoint out(kappa.size());
    for (size_t j = 0; j < kappa.size(); ++j) out[j] = torus_coordinate(-kappa[j]);
    return out;
}

double arctan_star(double x) { return x > 0.0 ? std::atan(x) : kPi + std::atan(x); }

CanonicalData canonical_data(const TorusPoint& kappa, const MetricGraph& g, const Tolerances& tol) {
    const int E = g.edge_count();
    if (static_cast<int>(kappa.size()) != E) throw Error(ErrorKind::BadCoordinate, "torus point has wrong dimension");
    for (double x : kappa)
        if (!(x > 0.0 && x <= kTwoPi)) throw Error(ErrorKind::BadCoordinate, "coordinate outside (0,2π]");
    const int n = 2 * E;
    RVec L(n);
    for (int e = 0; e < E; ++e) L[2 * e] = L[2 * e + 1] = kappa[e];
    const CMat M = CMat::Identity(n, n) - secular_unitary(build_scattering(g), L, 1.0);

    CanonicalData cd;
    cd.kappa = kappa;
    Eigen::BDCSVD<CMat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVec s = svd.singularValues();
    cd.sigma_min = s[n - 1];
    cd.sigma_next = n > 1 ? s[n - 2] : 0.0;
    cd.regular = cd.sigma_min <= tol.ker && cd.sigma_next > tol.ker;

    // adj(M) = det(U) conj(det(V)) Σ_i (Π_{j≠i} s_j) v_i u_i*
    const cplx unit = Eigen::PartialPivLU<CMat>(svd.matrixU()).determinant() *
                      std::conj(Eigen::PartialPivLU<CMat>(svd.matrixV()).determinant());
    double log_all = 0.0;
    for (int j = 0; j < n - 1; ++j) log_all += std::log(s[j]);
    CMat adj = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double w;
        if (i == n - 1) {
            w = std::exp(log_all);
        } else {
            if (s[n - 1] == 0.0) continue;
            w = std::exp(log_all - std::log(s[i]) + std::log(s[n - 1]));
        }
        adj.noalias() += w * svd.matrixV().col(i) * svd.matrixU().col(i).adjoint();
    }
    adj *= unit;
    const cplx tr = adj.trace();
    if (std::abs(tr) > 0.0) adj *= std::conj(tr) / std::abs(tr);
    int jmax = 0;
    for (int j = 1; j < n; ++j)
        if (adj(j, j).real() > adj(jmax, jmax).real()) jmax = j;
    const double djj = adj(jmax, jmax).real();
    if (!(djj > 0.0)) throw Error(ErrorKind::NotOnSigmaReg, "adjugate vanishes");
    cd.a = adj.col(jmax) / std::sqrt(djj);
    const double a2 = cd.a.squaredNorm();
    cd.adjugate_residual = (adj - cd.a * cd.a.adjoint()).norm() / a2;

    // f(x) = α e^{ix} + β e^{−ix} on each edge, α = a_e e^{−iκ_e}, β = a_ê
    const int V = g.vertex_count();
    cd.f.assign(V, cplx{});
    cd.df.assign(V, {});
    cd.p.assign(V, 0.0);
    cd.q.assign(V, {});
    double scale = 0.0;
    for (int v = 0; v < V; ++v) {
        bool first = true;
        for (const auto& end : g.incident(v)) {
            const int e = end.edge;
            const cplx ph = std::polar(1.0, -kappa[e]);
            const cplx ae = cd.a[2 * e], ab = cd.a[2 * e + 1];
            cplx fv, dv;
            if (end.at_start) {
                fv = ae * ph + ab;
                dv = cplx(0.0, 1.0) * (ae * ph - ab);
            } else {
                fv = ae + ab * ph;
                dv = cplx(0.0, -1.0) * (ae - ab * ph);
            }
            if (first) {
                cd.f[v] = fv;
                first = false;
            }
            cd.continuity = std::max(cd.continuity, std::abs(fv - cd.f[v]));
            cd.df[v].push_back(dv);
            scale = std::max({scale, std::abs(fv), std::abs(dv)});
        }
    }
    double min_f = std::numeric_limits<double>::infinity();
    double min_d = std::numeric_limits<double>::infinity();
    for (int v = 0; v < V; ++v) {
        cd.p[v] = std::norm(cd.f[v]);
        min_f = std::min(min_f, std::abs(cd.f[v]));
        for (const cplx& dv : cd.df[v]) {
            const cplx prod = cd.f[v] * std::conj(dv);
            cd.q[v].push_back(prod.real());
            cd.max_imag = std::max(cd.max_imag, std::abs(prod.imag()));
            if (!g.is_boundary(v)) min_d = std::min(min_d, std::abs(dv));
        }
    }
    if (scale > 0.0) {
        cd.continuity /= scale;
        cd.max_imag /= scale * scale;
        const double worst = std::min(min_f, std::isinf(min_d) ? scale : min_d) / scale;
        cd.generic = worst > 10.0 * tol.gen;
    }
    return cd;
}

TorusObservables local_observables_at(const CanonicalData& cd, const MetricGraph& g) {
    TorusObservables obs;
    for (int v : g.interior()) {
        int s = 0;
        double r = 0.0;
        for (double q : cd.q[v]) {
            s += sgn(q);
            r += arctan_star(q / cd.p[v]);
        }
        obs.vertices.push_back(v);
        obs.N.push_back((g.degree(v) - s) / 2);
        obs.rho.push_back(r / kPi);
    }
    return obs;
}

TorusObservables observables_at(const TorusPoint& kappa, const MetricGraph& g, const Tolerances& tol) {
    const CanonicalData cd = canonical_data(kappa, g, tol);
    if (!cd.regular)
        throw Error(ErrorKind::NotOnSigmaReg, "singular values " + format_double(cd.sigma_min) + ", " +
                                                  format_double(cd.sigma_next));
    if (!cd.generic) throw Error(ErrorKind::NotGeneric, "torus point is not on the generic part");
    TorusObservables obs = local_observables_at(cd, g);
    const MetricGraph gk = g.with_lengths(kappa);
    obs.n = 1 + SecularSolver(gk, tol).count(1.0 - 1e-9);
    const Eigenfunction f = reconstruct(cd.a, 1.0, gk);
    obs.sigma = nodal_count(f, gk) - obs.n;
    obs.omega = neumann_count(f, gk) - obs.n;
    return obs;
}

InversionAudit inversion_audit(const TorusPoint& kappa, const MetricGraph& g, const Tolerances& tol) {
    InversionAudit r;
    const TorusPoint ik = inversion(kappa);
    const CanonicalData c0 = canonical_data(kappa, g, tol);
    const CanonicalData c1 = canonical_data(ik, g, tol);
    r.generic_ok = c0.generic && c1.generic && c0.regular && c1.regular;
    double pmax = 0.0, qmax = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        pmax = std::max(pmax, c0.p[v]);
        for (double q : c0.q[v]) qmax = std::max(qmax, std::abs(q));
    }
    qmax = std::max(qmax, pmax);  // q vanishes identically at degree-1 vertices
    for (int v = 0; v < g.vertex_count(); ++v) {
        r.p_defect = std::max(r.p_defect, std::abs(c1.p[v] - c0.p[v]) / pmax);
        for (size_t j = 0; j < c0.q[v].size(); ++j)
            r.q_defect = std::max(r.q_defect, std::abs(c1.q[v][j] + c0.q[v][j]) / qmax);
    }
    if (!r.generic_ok) return r;
    r.at = observables_at(kappa, g, tol);
    r.inverted = observables_at(ik, g, tol);
    r.N_ok = true;
    for (size_t i = 0; i < r.at.vertices.size(); ++i) {
        const int deg = g.degree(r.at.vertices[i]);
        r.N_ok = r.N_ok && r.inverted.N[i] == deg - r.at.N[i];
        r.rho_defect = std::max(r.rho_defect, std::abs(r.inverted.rho[i] - (deg - r.at.rho[i])));
    }
    const int bd = static_cast<int>(g.boundary().size());
    r.omega_ok = r.inverted.omega == g.betti() - bd - r.at.omega;
    return r;
}

std::string torus_csv_header(const MetricGraph& g) {
    std::ostringstream os;
    for (int e = 0; e < g.edge_count(); ++e) os << "kappa_" << e + 1 << ',';
    os << "sigma,omega";
    for (int v : g.interior()) os << ",N_" << v;
    for (int v : g.interior()) os << ",rho_" << v;
    os << '\n';
    return os.str();
}

std::string torus_csv_row(const TorusPoint& kappa, const TorusObservables& obs) {
    std::ostringstream os;
    for (double x : kappa) os << format_double(x) << ',';
    os << obs.sigma << ',' << obs.omega;
    for (int N : obs.N) os << ',' << N;
    for (double r : obs.rho) os << ',' << format_double(r);
    os << '\n';
    return os.str();
}

}  // namespace qg
