#include "qgraph/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qgraph/error.hpp"

namespace qg {

namespace {

double freq(const std::map<int, long>& m, int key, long total) {
    const auto it = m.find(key);
    return it == m.end() || total == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

long total_of(const std::map<int, long>& m) {
    long t = 0;
    for (const auto& [k, c] : m) t += c;
    return t;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    long n = 0;
};

Moments moments(const std::map<int, long>& m) {
    Moments r;
    r.n = total_of(m);
    if (r.n == 0) return r;
    for (const auto& [v, c] : m) r.mean += static_cast<double>(v) * c;
    r.mean /= static_cast<double>(r.n);
    for (const auto& [v, c] : m) r.var += c * (v - r.mean) * (v - r.mean);
    r.var /= static_cast<double>(std::max<long>(1, r.n - 1));
    return r;
}

// max_j |P(j) − P(c − j)| over the support and its mirror image (c = 2·centre).
double mirror_defect(const std::map<int, long>& m, int c) {
    const long n = total_of(m);
    double d = 0.0;
    for (const auto& [j, cnt] : m) d = std::max(d, std::abs(freq(m, j, n) - freq(m, c - j, n)));
    return d;
}

}  // namespace

SurplusAccumulator::SurplusAccumulator(const MetricGraph& g, std::vector<std::pair<int, int>> pairs_in,
                                       double bin)
    : pairs(std::move(pairs_in)), rho_bin(bin), betti(g.betti()), boundary(static_cast<int>(g.boundary().size())) {
    for (int v : g.interior()) {
        degree[v] = g.degree(v);
        rho_hist[v].assign(static_cast<size_t>(std::lround(g.degree(v) / rho_bin)), 0);
    }
}

long SurplusAccumulator::local_count(int v) const {
    const auto it = N.find(v);
    return it == N.end() ? 0 : total_of(it->second);
}

void SurplusAccumulator::add(const RecordObservation& obs) {
    records += obs.multiplicity;
    if (obs.cls == EigenClass::loop) {
        ++loops;
        return;
    }
    if (obs.cls != EigenClass::generic || !obs.has_surplus) {
        excluded += obs.multiplicity;
        return;
    }
    const SurplusPair& s = obs.surplus;
    if (s.sigma < 0 || s.sigma > betti)
        throw Error(ErrorKind::HardBoundViolation, "sigma=" + std::to_string(s.sigma) + " at n=" + std::to_string(s.n));
    if (s.omega < 1 - betti - boundary || s.omega > 2 * betti - 1)
        throw Error(ErrorKind::HardBoundViolation, "omega=" + std::to_string(s.omega) + " at n=" + std::to_string(s.n));
    ++generic;
    ++omega[s.omega];
    ++sigma[s.sigma];
    ++joint[{s.sigma, s.omega}];
    if (!obs.has_local) return;
    std::map<int, int> Nv;
    for (const auto& o : obs.local) {
        ++N[o.vertex][o.N];
        Nv[o.vertex] = o.N;
        auto& h = rho_hist[o.vertex];
        if (!h.empty()) {
            const long b = std::clamp<long>(static_cast<long>(std::floor(o.rho / rho_bin)), 0,
                                            static_cast<long>(h.size()) - 1);
            ++h[b];
        }
    }
    for (const auto& p : pairs) {
        const auto iu = Nv.find(p.first), iv = Nv.find(p.second);
        if (iu != Nv.end() && iv != Nv.end()) ++pair_counts[p][{iu->second, iv->second}];
    }
}

void SurplusAccumulator::merge(const SurplusAccumulator& o) {
    records += o.records;
    generic += o.generic;
    loops += o.loops;
    excluded += o.excluded;
    for (const auto& [k, c] : o.omega) omega[k] += c;
    for (const auto& [k, c] : o.sigma) sigma[k] += c;
    for (const auto& [k, c] : o.joint) joint[k] += c;
    for (const auto& [v, m] : o.N)
        for (const auto& [k, c] : m) N[v][k] += c;
    for (const auto& [v, h] : o.rho_hist) {
        auto& mine = rho_hist[v];
        if (mine.size() < h.size()) mine.resize(h.size(), 0);
        for (size_t i = 0; i < h.size(); ++i) mine[i] += h[i];
    }
    for (const auto& [p, m] : o.pair_counts)
        for (const auto& [k, c] : m) pair_counts[p][k] += c;
    if (pairs.empty()) pairs = o.pairs;
    if (degree.empty()) {
        degree = o.degree;
        betti = o.betti;
        boundary = o.boundary;
        rho_bin = o.rho_bin;
    }
}

DensityReport density_report(const SurplusAccumulator& acc, const MetricGraph& g, const StatOptions& opt) {
    if (acc.records < opt.min_sample)
        throw Error(ErrorKind::InsufficientSample, std::to_string(acc.records) + " records < " +
                                                       std::to_string(opt.min_sample));
    DensityReport r;
    r.records = acc.records;
    r.d_loop = static_cast<double>(acc.loops) / static_cast<double>(acc.records);
    r.d_generic = static_cast<double>(acc.generic) / static_cast<double>(acc.records);
    r.theory_loop = g.loop_length() / (2.0 * g.total_length());
    r.theory_generic = 1.0 - r.theory_loop;
    return r;
}

std::vector<Verdict> symmetry_tests(const SurplusAccumulator& acc) {
    std::vector<Verdict> out;
    {
        Verdict v;
        v.name = "omega_symmetry";
        v.value = mirror_defect(acc.omega, acc.betti - acc.boundary);
        v.band = 3.0 / std::sqrt(std::max<double>(1.0, acc.generic));
        v.pass = v.value <= v.band;
        out.push_back(v);
    }
    for (const auto& [vert, m] : acc.N) {
        Verdict v;
        v.name = "N_symmetry_v" + std::to_string(vert);
        v.value = mirror_defect(m, acc.degree.at(vert));
        v.band = 3.0 / std::sqrt(std::max<double>(1.0, total_of(m)));
        v.pass = v.value <= v.band;
        out.push_back(v);
    }
    for (const auto& [vert, h] : acc.rho_hist) {
        long n = 0;
        for (long c : h) n += c;
        if (n == 0) continue;
        Verdict v;
        v.name = "rho_symmetry_v" + std::to_string(vert);
        const size_t B = h.size();
        for (size_t i = 0; i < B; ++i)
            v.value = std::max(v.value, std::abs(static_cast<double>(h[i]) - static_cast<double>(h[B - 1 - i])) /
                                            static_cast<double>(n));
        v.band = 3.0 / std::sqrt(static_cast<double>(n));
        v.pass = v.value <= v.band;
        out.push_back(v);
    }
    return out;
}

std::vector<Verdict> expectation_tests(const SurplusAccumulator& acc) {
    std::vector<Verdict> out;
    auto test = [&](const char* name, const std::map<int, long>& m, double target) {
        const Moments mo = moments(m);
        Verdict v;
        v.name = name;
        v.value = std::abs(mo.mean - target);
        v.band = mo.n > 0 ? 3.0 * std::sqrt(mo.var / static_cast<double>(mo.n)) : 0.0;
        v.pass = mo.n > 0 && v.value <= v.band + 1e-12;
        std::ostringstream os;
        os << "mean " << format_double(mo.mean) << " target " << format_double(target) << " n " << mo.n;
        v.detail = os.str();
        out.push_back(v);
    };
    test("mean_sigma", acc.sigma, 0.5 * acc.betti);
    test("mean_omega", acc.omega, 0.5 * (acc.betti - acc.boundary));
    return out;
}

Verdict binomial_test(const SurplusAccumulator& acc, const MetricGraph& g) {
    bool ok = g.is_tree();
    for (int v : g.interior()) ok = ok && g.degree(v) == 3;
    if (!ok) throw Error(ErrorKind::WrongFamily, "binomial law needs a (3,1)-regular tree");
    const int m = static_cast<int>(g.boundary().size()) - 2;
    Verdict v;
    v.name = "binomial_omega";
    v.pass = acc.generic > 0;
    const double n = static_cast<double>(acc.generic);
    std::ostringstream os;
    for (const auto& [w, c] : acc.omega) {
        const int j = -w - 1;
        if (j < 0 || j > m) {
            v.pass = false;
            os << "mass at omega=" << w << "; ";
        }
    }
    double worst_ratio = -1.0;
    for (int j = 0; j <= m; ++j) {
        const double p = std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0)) /
                         std::pow(2.0, m);
        const double ph = freq(acc.omega, -j - 1, acc.generic);
        const double dev = std::abs(ph - p);
        const double band = 3.0 * std::sqrt(p * (1.0 - p) / std::max(1.0, n));
        const double ratio = band > 0 ? dev / band : (dev > 0 ? 1e300 : 0.0);
        if (ratio > worst_ratio) {  // report the worst cell
            worst_ratio = ratio;
            v.value = dev;
            v.band = band;
        }
        if (dev > band) v.pass = false;
        os << "j=" << j << " p=" << format_double(p) << " emp=" << format_double(ph) << "; ";
    }
    v.detail = os.str();
    return v;
}

std::vector<Verdict> independence_tests(const SurplusAccumulator& acc, const MetricGraph& g, const StatOptions& opt) {
    if (!g.is_tree()) throw Error(ErrorKind::WrongFamily, "independence tests need a tree");
    std::vector<Verdict> out;
    for (const auto& p : acc.pairs) {
        const auto it = acc.pair_counts.find(p);
        long n = 0;
        if (it != acc.pair_counts.end())
            for (const auto& [k, c] : it->second) n += c;
        if (n < opt.min_sample)
            throw Error(ErrorKind::InsufficientSample, "pair sample " + std::to_string(n));
        const auto& m = it->second;
        const int dv = g.degree(p.second);
        const std::string tag = "_" + std::to_string(p.first) + "_" + std::to_string(p.second);

        std::map<int, long> mu, mv;
        for (const auto& [ij, c] : m) {
            mu[ij.first] += c;
            mv[ij.second] += c;
        }
        Verdict cs;
        cs.name = "conditional_symmetry" + tag;
        cs.pass = true;
        for (const auto& [i, ci] : mu) {
            std::map<int, long> cond;
            for (const auto& [ij, c] : m)
                if (ij.first == i) cond[ij.second] += c;
            const double d = mirror_defect(cond, dv);
            const double band = 3.0 / std::sqrt(static_cast<double>(ci));
            cs.value = std::max(cs.value, d);
            cs.band = std::max(cs.band, band);
            if (d > band) cs.pass = false;
        }
        out.push_back(cs);

        const Moments a = moments(mu), b = moments(mv);
        double cov = 0.0;
        for (const auto& [ij, c] : m) cov += c * (ij.first - a.mean) * (ij.second - b.mean);
        cov /= static_cast<double>(n);
        Verdict cr;
        cr.name = "correlation" + tag;
        const double denom = std::sqrt(a.var * b.var);
        cr.value = denom > 0 ? std::abs(cov / denom) : 0.0;
        cr.band = 3.0 / std::sqrt(static_cast<double>(n));
        cr.pass = cr.value <= cr.band;
        out.push_back(cr);

        Verdict pf;
        pf.name = "product_form" + tag;
        pf.band = 3.0 / std::sqrt(static_cast<double>(n));
        for (const auto& [i, ci] : mu)
            for (const auto& [j, cj] : mv) {
                const auto f = m.find({i, j});
                const double pij = f == m.end() ? 0.0 : static_cast<double>(f->second) / n;
                pf.value = std::max(pf.value, std::abs(pij - (static_cast<double>(ci) / n) * (static_cast<double>(cj) / n)));
            }
        pf.pass = pf.value <= pf.band;
        out.push_back(pf);
    }
    return out;
}

BoundsReport bounds_audit(const SurplusAccumulator& acc) {
    BoundsReport r;
    r.hard_omega_lo = 1 - acc.betti - acc.boundary;
    r.hard_omega_hi = 2 * acc.betti - 1;
    r.conj_omega_lo = -1 - acc.boundary;
    r.conj_omega_hi = acc.betti + 1;
    if (!acc.omega.empty()) {
        r.omega_min = acc.omega.begin()->first;
        r.omega_max = acc.omega.rbegin()->first;
    }
    if (!acc.sigma.empty()) {
        r.sigma_min = acc.sigma.begin()->first;
        r.sigma_max = acc.sigma.rbegin()->first;
    }
    if (acc.generic > 0) {
        r.hard_ok = r.omega_min >= r.hard_omega_lo && r.omega_max <= r.hard_omega_hi && r.sigma_min >= 0 &&
                    r.sigma_max <= acc.betti;
        r.within_conjecture = r.omega_min >= r.conj_omega_lo && r.omega_max <= r.conj_omega_hi;
    }
    return r;
}

double clt_diagnostic(const SurplusAccumulator& acc) {
    const Moments mo = moments(acc.omega);
    if (mo.n == 0) return 1.0;
    if (!(mo.var > 0.0)) return 0.5;
    const double sd = std::sqrt(mo.var);
    double cum = 0.0, ks = 0.0;
    for (const auto& [w, c] : acc.omega) {
        const double phi = 0.5 * std::erfc(-((w - mo.mean) / sd) / std::sqrt(2.0));
        ks = std::max(ks, std::abs(cum - phi));
        cum += static_cast<double>(c) / static_cast<double>(mo.n);
        ks = std::max(ks, std::abs(cum - phi));
    }
    return std::min(1.0, ks);
}

double frequency_drift(const SurplusAccumulator& a, const SurplusAccumulator& b) {
    std::set<int> keys;
    for (const auto& [k, c] : a.omega) keys.insert(k);
    for (const auto& [k, c] : b.omega) keys.insert(k);
    double d = 0.0;
    for (int k : keys) d = std::max(d, std::abs(freq(a.omega, k, a.generic) - freq(b.omega, k, b.generic)));
    return d;
}

std::vector<double> rho_atom_candidates(const SurplusAccumulator& acc, int v) {
    std::vector<double> out;
    const auto it = acc.rho_hist.find(v);
    if (it == acc.rho_hist.end()) return out;
    const auto& h = it->second;
    for (size_t i = 0; i < h.size(); ++i) {
        double nb = 0.0;
        int cnt = 0;
        if (i > 0) nb += h[i - 1], ++cnt;
        if (i + 1 < h.size()) nb += h[i + 1], ++cnt;
        if (cnt == 0 || h[i] == 0) continue;
        nb /= cnt;
        if (static_cast<double>(h[i]) > 20.0 * std::max(nb, 1.0)) out.push_back((i + 0.5) * acc.rho_bin);
    }
    return out;
}

std::string histogram_csv(const std::map<int, long>& counts) {
    const long n = total_of(counts);
    std::ostringstream os;
    os << "value,count,frequency\n";
    for (const auto& [v, c] : counts) os << v << ',' << c << ',' << format_double(freq(counts, v, n)) << '\n';
    return os.str();
}

std::string rho_histogram_csv(const SurplusAccumulator& acc, int v) {
    std::ostringstream os;
    os << "value,count,frequency\n";
    const auto it = acc.rho_hist.find(v);
    if (it == acc.rho_hist.end()) return os.str();
    long n = 0;
    for (long c : it->second) n += c;
    for (size_t i = 0; i < it->second.size(); ++i) {
        const long c = it->second[i];
        os << format_double((i + 0.5) * acc.rho_bin) << ',' << c << ','
           << format_double(n ? static_cast<double>(c) / n : 0.0) << '\n';
    }
    return os.str();
}

namespace {
nlohmann::json verdict_json(const Verdict& v) {
    return {{"name", v.name},   {"pass", v.pass},
            {"value", v.value}, {"band", v.band},
            {"informational", v.informational}, {"detail", v.detail}};
}

nlohmann::json distribution_json(const std::map<int, long>& m) {
    nlohmann::json j = nlohmann::json::object();
    const long n = total_of(m);
    for (const auto& [v, c] : m) j[std::to_string(v)] = {{"count", c}, {"frequency", freq(m, v, n)}};
    return j;
}
}  // namespace

std::string stat_report_json(const SurplusAccumulator& acc, const MetricGraph& g, const StatOptions& opt,
                             const SurplusAccumulator* prefix) {
    nlohmann::json j;
    j["graph"] = {{"vertices", g.vertex_count()},
                  {"edges", g.edge_count()},
                  {"betti", g.betti()},
                  {"boundary", g.boundary().size()},
                  {"total_length", g.total_length()},
                  {"loop_length", g.loop_length()}};
    j["totals"] = {{"records", acc.records}, {"generic", acc.generic}, {"loops", acc.loops}, {"excluded", acc.excluded}};
    j["distributions"]["omega"] = distribution_json(acc.omega);
    j["distributions"]["sigma"] = distribution_json(acc.sigma);
    nlohmann::json joint = nlohmann::json::array();
    for (const auto& [sw, c] : acc.joint) joint.push_back({{"sigma", sw.first}, {"omega", sw.second}, {"count", c}});
    j["distributions"]["joint"] = joint;
    for (const auto& [v, m] : acc.N) j["distributions"]["N"][std::to_string(v)] = distribution_json(m);

    const Moments ms = moments(acc.sigma), mw = moments(acc.omega);
    j["moments"] = {{"sigma_mean", ms.mean}, {"sigma_var", ms.var}, {"omega_mean", mw.mean}, {"omega_var", mw.var}};

    nlohmann::json verdicts = nlohmann::json::array();
    nlohmann::json skipped = nlohmann::json::array();
    bool all = true;
    auto push = [&](const Verdict& v) {
        verdicts.push_back(verdict_json(v));
        if (!v.informational) all = all && v.pass;
    };
    try {
        const DensityReport d = density_report(acc, g, opt);
        j["density"] = {{"d_loop", d.d_loop},
                        {"d_generic", d.d_generic},
                        {"theory_loop", d.theory_loop},
                        {"theory_generic", d.theory_generic}};
    } catch (const Error& e) {
        skipped.push_back({{"name", "density"}, {"reason", e.what()}});
    }
    if (acc.generic >= opt.min_sample) {
        for (const auto& v : symmetry_tests(acc)) push(v);
        for (const auto& v : expectation_tests(acc)) push(v);
    } else {
        skipped.push_back({{"name", "symmetry/expectation"}, {"reason", "generic sample below floor"}});
    }
    try {
        push(binomial_test(acc, g));
    } catch (const Error& e) {
        skipped.push_back({{"name", "binomial_omega"}, {"reason", e.what()}});
    }
    if (!acc.pairs.empty()) {
        try {
            for (const auto& v : independence_tests(acc, g, opt)) push(v);
        } catch (const Error& e) {
            skipped.push_back({{"name", "independence"}, {"reason", e.what()}});
        }
    }
    const BoundsReport b = bounds_audit(acc);
    j["bounds"] = {{"omega_min", b.omega_min},         {"omega_max", b.omega_max},
                   {"sigma_min", b.sigma_min},         {"sigma_max", b.sigma_max},
                   {"hard_omega", {b.hard_omega_lo, b.hard_omega_hi}},
                   {"conjecture_omega", {b.conj_omega_lo, b.conj_omega_hi}},
                   {"hard_ok", b.hard_ok},             {"within_conjecture", b.within_conjecture}};
    all = all && b.hard_ok;
    j["diagnostics"]["clt_ks"] = clt_diagnostic(acc);
    if (prefix) j["diagnostics"]["omega_drift_half_to_full"] = frequency_drift(*prefix, acc);
    for (const auto& [v, h] : acc.rho_hist) j["diagnostics"]["rho_atoms"][std::to_string(v)] = rho_atom_candidates(acc, v);
    j["verdicts"] = verdicts;
    j["skipped"] = skipped;
    j["all_pass"] = all;
    return j.dump(2) + "\n";
}

}  // namespace qg
