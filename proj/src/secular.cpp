#include "qgraph/secular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "qgraph/error.hpp"

namespace qg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_positive(double theta) { return theta < 0.0 ? theta + kTwoPi : theta; }

// Fixed starting vector for inverse iteration (deterministic output).
CVec seed_vector(int n) {
    CVec v(n);
    for (int b = 0; b < n; ++b) v[b] = std::polar(1.0 + 0.37 * std::sin(1.3 * b + 0.2), 0.71 * b + 0.4);
    return v.normalized();
}

// Principal eigenphases of a unitary matrix through the Hermitian Cayley
// transform H = i(I+V)^{-1}(I-V), V = e^{-iα}U, eigenvalues tan((θ-α)/2).
// α = 0 keeps phases near 0 most accurate; α moves when a phase sits near α+π.
Eigen::VectorXd eigenphases(const CMat& U) {
    const int n = static_cast<int>(U.rows());
    const CMat I = CMat::Identity(n, n);
    for (double alpha : {0.0, 0.37, -0.53, 1.1, -1.3, 0.5 * kPi}) {
        const CMat V = std::polar(1.0, -alpha) * U;
        Eigen::PartialPivLU<CMat> lu(I + V);
        if (!(lu.rcond() > 1e-5)) continue;
        CMat H = lu.solve(I - V) * cplx(0.0, 1.0);
        H = (0.5 * (H + H.adjoint())).eval();
        Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) continue;
        const Eigen::VectorXd t = es.eigenvalues();
        if (!t.allFinite() || t.cwiseAbs().maxCoeff() > 1e4) continue;
        Eigen::VectorXd th(n);
        for (int j = 0; j < n; ++j) th[j] = std::remainder(alpha + 2.0 * std::atan(t[j]), kTwoPi);
        return th;
    }
    Eigen::ComplexEigenSolver<CMat> es(U, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "eigensolver did not converge");
    Eigen::VectorXd th(n);
    for (int j = 0; j < n; ++j) th[j] = std::arg(es.eigenvalues()[j]);
    return th;
}

double phase_sum(const Eigen::VectorXd& th) {
    double sum = 0.0;
    for (int j = 0; j < th.size(); ++j) sum += wrap_positive(th[j]);
    return sum;
}

bool all_finite(const CVec& v) {
    for (int i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    return true;
}
}  // namespace

bool set_tolerance(Tolerances& tol, const std::string& name, double value) {
    if (name == "ker") tol.ker = value;
    else if (name == "k_rel") tol.k_rel = value;
    else if (name == "loop") tol.loop = value;
    else if (name == "gen") tol.gen = value;
    else if (name == "identity") tol.identity = value;
    else if (name == "phase_safe") tol.phase_safe = value;
    else if (name == "winding") tol.winding = value;
    else if (name == "step_factor") tol.step_factor = value;
    else if (name == "per_step") tol.per_step = value;
    else if (name == "max_retries") tol.max_retries = static_cast<int>(value);
    else return false;
    return true;
}

const char* to_string(EigenClass c) {
    switch (c) {
        case EigenClass::generic: return "generic";
        case EigenClass::loop: return "loop";
        case EigenClass::nonGenericSimple: return "nonGenericSimple";
        case EigenClass::multiple: return "multiple";
        case EigenClass::borderline: return "borderline";
    }
    return "unknown";
}

RMat build_scattering(const MetricGraph& g) {
    const int n = 2 * g.edge_count();
    RMat S = RMat::Zero(n, n);
    for (int v = 0; v < g.vertex_count(); ++v) {
        const auto& ends = g.incident(v);
        const double t = 2.0 / static_cast<double>(ends.size());
        for (size_t i = 0; i < ends.size(); ++i) {
            const int in = BondBasis::incoming(ends[i]);
            for (size_t j = 0; j < ends.size(); ++j) {
                const int out = BondBasis::outgoing(ends[j]);
                S(out, in) = t - (i == j ? 1.0 : 0.0);
            }
        }
    }
    return S;
}

RVec bond_lengths(const MetricGraph& g) {
    RVec L(2 * g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e) L[2 * e] = L[2 * e + 1] = g.length(e);
    return L;
}

CMat secular_unitary(const RMat& S, const RVec& L, double k) {
    const int n = static_cast<int>(S.rows());
    CMat U(n, n);
    for (int b = 0; b < n; ++b) {
        const cplx ph = std::polar(1.0, k * L[b]);
        for (int c = 0; c < n; ++c) U(b, c) = ph * S(b, c);
    }
    return U;
}

// ---- solver -------------------------------------------------------------------

SecularSolver::SecularSolver(const MetricGraph& g, Tolerances tol)
    : g_(g), tol_(tol), S_(build_scattering(g)), L_(bond_lengths(g)) {
    const double k0 = 0.5 * kPi / g_.total_length();
    const double sum = phase_sum(eigenphases(secular_unitary(S_, L_, k0)));
    base_winding_ = (2.0 * k0 * g_.total_length() - sum) / kTwoPi;
}

double SecularSolver::grid_step() const {
    const double h = std::min(0.5 * kPi / g_.max_length(), tol_.per_step * kPi / g_.total_length());
    return h * tol_.step_factor;
}

SecularSolver::Node SecularSolver::node(double k, SolverStats* stats) const {
    Node nd;
    nd.k = k;
    const double k0 = 0.5 * kPi / g_.total_length();
    nd.phases = eigenphases(secular_unitary(S_, L_, k));
    if (stats) ++stats->eigensolves;
    const double sum = phase_sum(nd.phases);
    if (k <= k0) {
        nd.n = 0;
        return nd;
    }
    const double w = (2.0 * k * g_.total_length() - sum) / kTwoPi - base_winding_;
    const double r = std::round(w);
    const double defect = std::abs(w - r);
    if (stats) stats->max_winding_defect = std::max(stats->max_winding_defect, defect);
    if (defect > tol_.winding)
        throw Error(ErrorKind::SolverFailure, "winding counter not integral at k=" + format_double(k));
    nd.n = static_cast<int>(r);
    return nd;
}

double SecularSolver::winding(double k) const {
    const double sum = phase_sum(eigenphases(secular_unitary(S_, L_, k)));
    return (2.0 * k * g_.total_length() - sum) / kTwoPi - base_winding_;
}

int SecularSolver::count(double k) const { return node(k, nullptr).n; }

SecularSolver::Node SecularSolver::safe_node(double k, SolverStats* stats) const {
    const double nudge = 2.0 * tol_.phase_safe / g_.min_length();
    for (int attempt = 0; attempt < 64; ++attempt) {
        Node nd = node(k, stats);
        if (nd.phases.cwiseAbs().minCoeff() >= tol_.phase_safe) return nd;
        k += std::max(nudge, 4.0 * std::numeric_limits<double>::epsilon() * k);
    }
    throw Error(ErrorKind::PhaseTrackingAmbiguity, "no safe grid point near k=" + format_double(k));
}

double SecularSolver::safe_point(double k, SolverStats* stats) const { return safe_node(k, stats).k; }

CVec SecularSolver::eigvec_at(double k, double phase, SolverStats* stats) const {
    const int n = static_cast<int>(L_.size());
    CMat A = secular_unitary(S_, L_, k);
    A.diagonal().array() -= std::polar(1.0, phase);
    Eigen::PartialPivLU<CMat> lu(A);
    if (stats) ++stats->lu_solves;
    CVec v = seed_vector(n);
    for (int it = 0; it < 2; ++it) {
        CVec w = lu.solve(v);
        if (!all_finite(w) || w.norm() == 0.0) break;
        v = w.normalized();
    }
    return v;
}

// Newton on the tracked eigenphase; the vector follows by inverse iteration
// with shift 1 at each new k.
bool SecularSolver::newton(double k, CVec v, double lo, double hi, double& k_out, CVec& v_out,
                           SolverStats* stats) const {
    const double span = hi - lo;
    for (int it = 0; it < 60; ++it) {
        const CMat U = secular_unitary(S_, L_, k);
        const cplx lambda = v.dot(U * v);
        const double theta = std::arg(lambda);
        const double d = (v.cwiseAbs2().array() * L_.array()).sum();
        const double dk = -theta / d;
        const double k_new = k + dk;
        if (!(k_new > lo - span) || !(k_new < hi + span)) return false;
        CMat A = secular_unitary(S_, L_, k_new);
        A.diagonal().array() -= 1.0;
        Eigen::PartialPivLU<CMat> lu(A);
        if (stats) ++stats->lu_solves;
        CVec w = lu.solve(v);
        if (all_finite(w) && w.norm() > 0.0) v = w.normalized();
        k = k_new;
        // quadratic convergence: the next correction would be below rounding
        if (std::abs(dk) <= 1e-9 * std::max(1.0, std::abs(k))) break;
    }
    const CMat U = secular_unitary(S_, L_, k);
    const double res = (U * v - v).norm();
    if (!(res <= tol_.ker)) return false;
    k_out = k;
    v_out = v;
    return true;
}

namespace {
std::vector<int> candidates(const Eigen::VectorXd& phases, double reach) {
    std::vector<int> out;
    for (int j = 0; j < phases.size(); ++j)
        if (phases[j] < 0.0 && phases[j] >= -reach) out.push_back(j);
    std::sort(out.begin(), out.end(), [&](int a, int b) { return phases[a] > phases[b]; });
    return out;
}
}  // namespace

bool SecularSolver::fast_step(const Node& a, const Node& b, std::vector<EigenvalueRecord>& out,
                              SolverStats* stats) const {
    const int m = b.n - a.n;
    const double h = b.k - a.k;
    const double reach = h * g_.max_length() * (1.0 + 1e-9) + 1e-12;
    const double slack = 1e-12 * std::max(1.0, b.k);
    std::vector<std::pair<double, CVec>> roots;
    auto try_from = [&](const Node& nd, int j) {
        CVec v = eigvec_at(nd.k, nd.phases[j], stats);
        const double d = (v.cwiseAbs2().array() * L_.array()).sum();
        const double k0 = std::clamp(nd.k - nd.phases[j] / d, a.k, b.k);
        double kr;
        CVec vr;
        if (!newton(k0, v, a.k, b.k, kr, vr, stats)) return;
        if (kr <= a.k - slack || kr > b.k + slack) return;
        roots.emplace_back(kr, vr);
    };
    auto distinct_roots = [&]() {
        std::sort(roots.begin(), roots.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        std::vector<std::pair<double, CVec>> d;
        for (const auto& r : roots) {
            if (!d.empty() && std::abs(r.first - d.back().first) <= 1e-9 * std::max(1.0, r.first)) continue;
            d.push_back(r);
        }
        return d;
    };
    for (int j : candidates(a.phases, reach)) try_from(a, j);
    auto distinct = distinct_roots();
    if (static_cast<int>(distinct.size()) < m) {
        // phases that crossed 0 arrive at b in (0, reach]
        Eigen::VectorXd neg = -b.phases;
        for (int j : candidates(neg, reach)) try_from(b, j);
        distinct = distinct_roots();
    }
    if (static_cast<int>(distinct.size()) != m) return false;
    int index = a.n;
    for (auto& [kr, vr] : distinct) {
        EigenvalueRecord rec;
        rec.index = ++index;
        rec.k = kr;
        rec.multiplicity = 1;
        rec.kernel = vr;
        rec.residual = (secular_unitary(S_, L_, kr) * vr - vr).norm();
        out.push_back(std::move(rec));
    }
    return true;
}

EigenvalueRecord SecularSolver::multiple_record(double lo, double hi, int m, SolverStats* stats) const {
    double k = 0.5 * (lo + hi);
    // Newton on the mean phase of the m phases nearest 0.
    for (int it = 0; it < 4; ++it) {
        const CMat U = secular_unitary(S_, L_, k);
        Eigen::ComplexEigenSolver<CMat> es(U, true);
        if (stats) ++stats->eigensolves;
        const int n = static_cast<int>(U.rows());
        std::vector<int> idx(n);
        for (int j = 0; j < n; ++j) idx[j] = j;
        std::sort(idx.begin(), idx.end(), [&](int x, int y) {
            return std::abs(std::arg(es.eigenvalues()[x])) < std::abs(std::arg(es.eigenvalues()[y]));
        });
        double th = 0.0, d = 0.0;
        for (int j = 0; j < m; ++j) {
            th += std::arg(es.eigenvalues()[idx[j]]);
            CVec v = es.eigenvectors().col(idx[j]).normalized();
            d += (v.cwiseAbs2().array() * L_.array()).sum();
        }
        const double dk = -th / d;
        k = std::clamp(k + dk, lo - (hi - lo), hi + (hi - lo));
        if (std::abs(dk) < 1e-15 * std::max(1.0, k)) break;
    }
    CMat A = CMat::Identity(L_.size(), L_.size()) - secular_unitary(S_, L_, k);
    Eigen::JacobiSVD<CMat> svd(A, Eigen::ComputeFullV);
    const int n = static_cast<int>(A.rows());
    EigenvalueRecord rec;
    rec.k = k;
    rec.multiplicity = m;
    rec.kernel = svd.matrixV().rightCols(m);
    rec.residual = 0.0;
    for (int j = 0; j < m; ++j) rec.residual = std::max(rec.residual, (A * rec.kernel.col(j)).norm());
    (void)n;
    return rec;
}

void SecularSolver::isolate(const Node& a, const Node& b, std::vector<EigenvalueRecord>& out,
                            SolverStats* stats, int depth) const {
    const int m = b.n - a.n;
    if (m <= 0) {
        if (m < 0) throw Error(ErrorKind::PhaseTrackingAmbiguity, "counting function decreased");
        return;
    }
    const double width = b.k - a.k;
    const double scale = std::max(1.0, b.k);
    if (m >= 2 && width <= 1e-11 * scale) {
        EigenvalueRecord rec = multiple_record(a.k, b.k, m, stats);
        rec.index = a.n + 1;
        out.push_back(std::move(rec));
        return;
    }
    if (m == 1) {
        const double reach = width * g_.max_length() * (1.0 + 1e-9) + 1e-12;
        const auto cand = candidates(a.phases, reach);
        if (cand.size() == 1) {
            CVec v = eigvec_at(a.k, a.phases[cand[0]], stats);
            const double d = (v.cwiseAbs2().array() * L_.array()).sum();
            double k0 = std::clamp(a.k - a.phases[cand[0]] / d, a.k, b.k);
            double kr;
            CVec vr;
            const double slack = 1e-12 * scale;
            if (newton(k0, v, a.k, b.k, kr, vr, stats) && kr > a.k - slack && kr <= b.k + slack) {
                EigenvalueRecord rec;
                rec.index = a.n + 1;
                rec.k = kr;
                rec.kernel = vr;
                rec.residual = (secular_unitary(S_, L_, kr) * vr - vr).norm();
                out.push_back(std::move(rec));
                return;
            }
        }
        if (width <= 1e-13 * scale) {
            EigenvalueRecord rec = multiple_record(a.k, b.k, 1, stats);
            rec.index = a.n + 1;
            out.push_back(std::move(rec));
            return;
        }
    }
    if (depth > 200) throw Error(ErrorKind::PhaseTrackingAmbiguity, "bisection depth exceeded");
    const Node c = node(0.5 * (a.k + b.k), stats);
    if (c.n < a.n || c.n > b.n) throw Error(ErrorKind::PhaseTrackingAmbiguity, "non-monotone count");
    isolate(a, c, out, stats, depth + 1);
    isolate(c, b, out, stats, depth + 1);
}

void SecularSolver::solve_step(const Node& a, const Node& b, std::vector<EigenvalueRecord>& out,
                               SolverStats* stats, int depth) const {
    if (b.n == a.n) return;
    if (b.n < a.n) throw Error(ErrorKind::PhaseTrackingAmbiguity, "counting function decreased");
    const size_t mark = out.size();
    if (fast_step(a, b, out, stats)) return;
    out.resize(mark);
    if (depth < 3) {
        const double mid = 0.5 * (a.k + b.k);
        const Node c = safe_node(mid, stats);
        if (c.k < b.k && c.n >= a.n && c.n <= b.n) {
            solve_step(a, c, out, stats, depth + 1);
            solve_step(c, b, out, stats, depth + 1);
            return;
        }
    }
    if (stats) ++stats->fallbacks;
    isolate(a, b, out, stats, 0);
}

std::vector<EigenvalueRecord> SecularSolver::find_with_step(double k_lo, double k_hi, double h,
                                                            SolverStats* stats) const {
    const double k0 = 0.5 * kPi / g_.total_length();
    std::vector<double> pts;
    pts.push_back(std::max(k_lo, k0));
    for (long j = static_cast<long>(std::floor(pts[0] / h)) + 1; j * h < k_hi; ++j)
        if (j * h > pts[0]) pts.push_back(static_cast<double>(j) * h);
    pts.push_back(k_hi);
    std::vector<EigenvalueRecord> out;
    if (pts[0] >= k_hi) return out;
    Node a = pts[0] <= k0 ? node(pts[0], stats) : safe_node(pts[0], stats);
    for (size_t i = 1; i < pts.size(); ++i) {
        Node b = safe_node(pts[i], stats);
        solve_step(a, b, out, stats);
        a = std::move(b);
    }
    return out;
}

std::vector<EigenvalueRecord> SecularSolver::find(double k_lo, double k_hi, SolverStats* stats) const {
    if (!(k_lo >= 0.0) || !(k_hi > k_lo)) throw Error(ErrorKind::InvalidInput, "window must satisfy 0 <= k_lo < k_hi");
    double h = grid_step();
    for (int attempt = 0;; ++attempt) {
        try {
            auto recs = find_with_step(k_lo, k_hi, h, stats);
            for (size_t i = 1; i < recs.size(); ++i)
                if (!(recs[i].k > recs[i - 1].k) ||
                    recs[i].index != recs[i - 1].index + recs[i - 1].multiplicity)
                    throw Error(ErrorKind::PhaseTrackingAmbiguity, "records not strictly increasing");
            for (auto& r : recs) classify(r, g_, tol_);
            return recs;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PhaseTrackingAmbiguity || attempt >= tol_.max_retries) throw;
            h *= 0.5;
        }
    }
}

std::vector<EigenvalueRecord> SecularSolver::first(int count, SolverStats* stats) const {
    std::vector<EigenvalueRecord> out;
    if (count <= 0) return out;
    const double h = grid_step();
    const double unit = kPi / g_.total_length();
    auto align = [&](double k) { return std::ceil(k / h) * h; };
    double lo = 0.0;
    double hi = align(unit * (count + g_.edge_count() + static_cast<double>(g_.boundary().size()) + 2));
    int have = 0;
    while (have < count) {
        auto part = find(lo, hi, stats);
        for (auto& r : part) {
            if (r.index > count) break;
            have = r.index + r.multiplicity - 1;
            out.push_back(std::move(r));
        }
        lo = hi;
        hi = align(hi + unit * (count - have + g_.edge_count() + 4));
    }
    return out;
}

std::vector<EigenvalueRecord> find_eigenvalues(const MetricGraph& g, double k_lo, double k_hi,
                                               const Tolerances& tol) {
    return SecularSolver(g, tol).find(k_lo, k_hi);
}

int nullity(const MetricGraph& g, double k, double tol) {
    const RMat S = build_scattering(g);
    const RVec L = bond_lengths(g);
    CMat A = CMat::Identity(L.size(), L.size()) - secular_unitary(S, L, k);
    Eigen::JacobiSVD<CMat> svd(A);
    int n = 0;
    for (int j = 0; j < svd.singularValues().size(); ++j)
        if (svd.singularValues()[j] < tol) ++n;
    return n;
}

FriedlanderReport friedlander_check(const std::vector<EigenvalueRecord>& records, const MetricGraph& g,
                                    double tol) {
    FriedlanderReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    int expected = 1;
    for (const auto& r : records) {
        if (r.index != expected)
            throw Error(ErrorKind::LowerBoundViolation,
                        "index gap before k=" + format_double(r.k) + ": expected n=" + std::to_string(expected) +
                            ", found n=" + std::to_string(r.index));
        for (int j = 0; j < r.multiplicity; ++j) {
            const int n = r.index + j;
            const double bound = kPi * (n + 1) / (2.0 * g.total_length());
            const double margin = r.k - bound;
            rep.min_margin = std::min(rep.min_margin, margin);
            if (margin < -tol * std::max(1.0, bound))
                throw Error(ErrorKind::LowerBoundViolation,
                            "k_" + std::to_string(n) + "=" + format_double(r.k) + " below " + format_double(bound));
            ++rep.checked;
        }
        expected = r.index + r.multiplicity;
    }
    return rep;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string spectrum_csv(const std::vector<EigenvalueRecord>& records) {
    std::ostringstream os;
    os << "n,k,multiplicity,class\n";
    for (const auto& r : records)
        os << r.index << ',' << format_double(r.k) << ',' << r.multiplicity << ',' << to_string(r.cls) << '\n';
    return os.str();
}

}  // namespace qg
