#pragma once
// Test-side oracles. Nothing here calls the library's root finder or point counters.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "qgraph/secular.hpp"

namespace oracle {

constexpr double kPi = std::numbers::pi;

// Poles k = (m + 1/2)π/a, or k = mπ/a (m >= 1) when !half_poles; all <= kmax.
inline std::vector<double> poles(const std::vector<double>& a, double kmax, bool half_poles = true) {
    std::vector<double> out;
    for (double s : a)
        for (int m = 0;; ++m) {
            const double k = (half_poles ? m + 0.5 : m + 1.0) * kPi / s;
            if (k > kmax) break;
            out.push_back(k);
        }
    std::sort(out.begin(), out.end());
    return out;
}

// Root of a function increasing from −∞ to +∞ on (lo, hi).
inline double bisect(const std::function<double(double)>& F, double lo, double hi) {
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// One root of an increasing F per interval between consecutive poles (from the
// first pole on), plus one in (0, first pole) when `from_zero`.
inline std::vector<double> roots(const std::function<double(double)>& F, std::vector<double> p, double kmax,
                                 bool from_zero = false) {
    std::vector<double> out;
    if (from_zero) p.insert(p.begin(), 0.0);
    for (size_t i = 0; i + 1 < p.size(); ++i) {
        const double gap = p[i + 1] - p[i];
        if (gap < 1e-9 * p[i + 1]) continue;  // coinciding poles
        const double d = 1e-13 * p[i + 1];
        out.push_back(bisect(F, p[i] + d, p[i + 1] - d));
    }
    // beyond the last pole below kmax there may be one more root
    if (!p.empty()) {
        const double d = 1e-13 * std::max(1.0, p.back());
        if (F(kmax) > 0.0 && p.back() + d < kmax) out.push_back(bisect(F, p.back() + d, kmax));
    }
    std::erase_if(out, [&](double k) { return k > kmax; });
    return out;
}

// Star with Neumann leaves: Σ tan(k l_j) = 0, plus states at poles shared by equal edges.
inline std::vector<double> star_eigenvalues(const std::vector<double>& l, double kmax) {
    auto F = [&](double k) {
        double s = 0.0;
        for (double x : l) s += std::tan(k * x);
        return s;
    };
    auto out = roots(F, poles(l, kmax), kmax);
    // c equal lengths: k = (m + ½)π/l has multiplicity c − 1 (antisymmetric states)
    std::vector<double> s = l;
    std::sort(s.begin(), s.end());
    for (size_t i = 0; i < s.size();) {
        size_t j = i + 1;
        while (j < s.size() && std::abs(s[j] - s[i]) <= 1e-12 * s[i]) ++j;
        for (size_t c = 1; c < j - i; ++c)
            for (int m = 0; (m + 0.5) * kPi / s[i] <= kmax; ++m) out.push_back((m + 0.5) * kPi / s[i]);
        i = j;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Stower: Σ tan(k z) + 2 Σ tan(k y/2) = 0 together with the loop states k = 2πm/y.
inline std::vector<double> stower_eigenvalues(const std::vector<double>& y, const std::vector<double>& z, double kmax) {
    auto F = [&](double k) {
        double s = 0.0;
        for (double x : z) s += std::tan(k * x);
        for (double x : y) s += 2.0 * std::tan(0.5 * k * x);
        return s;
    };
    std::vector<double> a = z;
    for (double x : y) a.push_back(0.5 * x);
    auto out = roots(F, poles(a, kmax), kmax);
    for (double x : y)
        for (int m = 1; 2.0 * m * kPi / x <= kmax; ++m) out.push_back(2.0 * m * kPi / x);
    std::sort(out.begin(), out.end());
    return out;
}

// Mandarin: symmetric branch Σ tan(k l/2) = 0, antisymmetric branch Σ cot(k l/2) = 0.
inline std::vector<double> mandarin_eigenvalues(const std::vector<double>& l, double kmax) {
    std::vector<double> h;
    for (double x : l) h.push_back(0.5 * x);
    auto Fs = [&](double k) {
        double s = 0.0;
        for (double x : h) s += std::tan(k * x);
        return s;
    };
    auto minusFa = [&](double k) {  // −Σ cot is increasing
        double s = 0.0;
        for (double x : h) s -= 1.0 / std::tan(k * x);
        return s;
    };
    auto out = roots(Fs, poles(h, kmax), kmax);
    auto anti = roots(minusFa, poles(h, kmax, false), kmax, true);
    out.insert(out.end(), anti.begin(), anti.end());
    std::sort(out.begin(), out.end());
    return out;
}

// f on edge e from raw bond amplitudes: α e^{ikx} + β e^{−ikx}, α = a_{2e} e^{−ikl}, β = a_{2e+1}.
struct RawFunction {
    const qg::MetricGraph* g;
    Eigen::VectorXcd a;
    double k;
    std::complex<double> c{1.0, 0.0};  // rotation making f real

    RawFunction(const qg::MetricGraph& graph, const qg::EigenvalueRecord& rec) : g(&graph), a(rec.kernel.col(0)), k(rec.k) {
        // rotate by the phase of the largest vertex value
        std::complex<double> best = 0.0;
        for (int e = 0; e < g->edge_count(); ++e) {
            const std::complex<double> v = raw(e, 0.0);
            if (std::abs(v) > std::abs(best)) best = v;
        }
        c = std::conj(best) / std::abs(best);
    }
    std::complex<double> raw(int e, double x) const {
        const double l = g->length(e);
        const std::complex<double> I(0.0, 1.0);
        return a[2 * e] * std::exp(I * k * (x - l)) + a[2 * e + 1] * std::exp(-I * k * x);
    }
    std::complex<double> raw_d(int e, double x) const {
        const double l = g->length(e);
        const std::complex<double> I(0.0, 1.0);
        return I * k * (a[2 * e] * std::exp(I * k * (x - l)) - a[2 * e + 1] * std::exp(-I * k * x));
    }
    double value(int e, double x) const { return (c * raw(e, x)).real(); }
    double deriv(int e, double x) const { return (c * raw_d(e, x)).real(); }
};

// Sign changes on the open edge interiors, sampled at `per_half_wave` points per π/k.
inline int dense_sign_changes(const RawFunction& f, bool derivative, int per_half_wave = 64) {
    int total = 0;
    for (int e = 0; e < f.g->edge_count(); ++e) {
        const double l = f.g->length(e);
        const int n = std::max(16, static_cast<int>(std::ceil(l * f.k / kPi * per_half_wave)));
        const double margin = 1e-6 * l / n;
        double prev = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double x = margin + (l - 2.0 * margin) * i / n;
            const double v = derivative ? f.deriv(e, x) : f.value(e, x);
            if (i > 0 && ((prev < 0.0) != (v < 0.0))) ++total;
            prev = v;
        }
    }
    return total;
}

// Exhaustive search over the coefficient box [−cmax, cmax]^n (n <= 3).
inline bool rationally_dependent(const std::vector<double>& l, int cmax, double rel_tol = 1e-10) {
    const int n = static_cast<int>(l.size());
    double scale = 0.0;
    for (double x : l) scale = std::max(scale, x);
    std::vector<int> c(n, -cmax);
    for (;;) {
        bool nonzero = false;
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            nonzero = nonzero || c[j] != 0;
            s += c[j] * l[j];
        }
        if (nonzero && std::abs(s) <= rel_tol * scale * cmax) return true;
        int j = 0;
        while (j < n && ++c[j] > cmax) c[j++] = -cmax;
        if (j == n) return false;
    }
}

// Third length making k an eigenvalue of the 3-star (l1, l2, l3), l3 in [lo, lo + π/k).
inline double star_third_length(double k, double l1, double l2, double lo) {
    const double t = -(std::tan(k * l1) + std::tan(k * l2));
    double l3 = std::atan(t) / k;
    while (l3 < lo) l3 += kPi / k;
    return l3;
}

}  // namespace oracle
