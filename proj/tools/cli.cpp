#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "qgraph/analysis.hpp"
#include "qgraph/error.hpp"
#include "qgraph/torus.hpp"
#include "verify.hpp"

namespace qg::cli {

namespace {

struct Config {
    std::string graph_file;
    std::string family;
    std::string params;
    std::uint64_t seed = 1;
    double kmax = 0.0;
    int count = 0;
    int workers = 1;
    std::string out = ".";
    std::vector<std::string> tols;
    std::string audit;
    bool all_domains = false;
    bool negative_controls = false;
    std::vector<std::string> histograms;
    int vertex = -1;
    long min_sample = 10000;
    int limit = 0;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidInput, "bad value for " + key + ": '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != static_cast<int>(x)) throw Error(ErrorKind::InvalidInput, key + " must be an integer");
    return static_cast<int>(x);
}

// --params "loops=2,tails=1,lo=0.5,hi=1.5" ; lists use ':' ("lengths=1:1.2:0.7", "parents=-1:0:0").
FamilySpec parse_family(const std::string& name, const std::string& params, std::uint64_t seed) {
    std::map<std::string, std::string> kv;
    for (const auto& item : split(params, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, "param '" + item + "' is not key=value");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    auto take_int = [&](const std::string& key, int def) {
        const auto it = kv.find(key);
        if (it == kv.end()) return def;
        const int v = to_int(key, it->second);
        kv.erase(it);
        return v;
    };
    FamilySpec spec;
    spec.seed = seed;
    if (name == "interval") {
        spec.shape = IntervalParams{};
    } else if (name == "star") {
        spec.shape = StarParams{take_int("edges", 3)};
    } else if (name == "stower") {
        const int loops = take_int("loops", 1);
        spec.shape = StowerParams{loops, take_int("tails", 1)};
    } else if (name == "mandarin") {
        spec.shape = MandarinParams{take_int("edges", 3)};
    } else if (name == "tree31") {
        Tree31Params p;
        p.interior = take_int("interior", 1);
        if (auto it = kv.find("parents"); it != kv.end()) {
            for (const auto& s : split(it->second, ':')) p.parents.push_back(to_int("parents", s));
            kv.erase(it);
        }
        spec.shape = p;
    } else if (name == "random-regular" || name == "randomRegular") {
        const int d = take_int("degree", 3);
        spec.shape = RandomRegularParams{d, take_int("vertices", 4)};
    } else {
        throw Error(ErrorKind::InvalidInput, "unknown family '" + name + "'");
    }
    if (auto it = kv.find("lengths"); it != kv.end()) {
        for (const auto& s : split(it->second, ':')) spec.lengths.explicit_lengths.push_back(to_double("lengths", s));
        kv.erase(it);
    }
    if (auto it = kv.find("lo"); it != kv.end()) {
        spec.lengths.lo = to_double("lo", it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("hi"); it != kv.end()) {
        spec.lengths.hi = to_double("hi", it->second);
        kv.erase(it);
    }
    if (!kv.empty()) throw Error(ErrorKind::InvalidInput, "unknown param '" + kv.begin()->first + "' for " + name);
    return spec;
}

MetricGraph resolve_graph(const Config& c) {
    if (!c.graph_file.empty() && !c.family.empty())
        throw Error(ErrorKind::InvalidInput, "--graph and --family are exclusive");
    if (!c.graph_file.empty()) return load_graph(c.graph_file);
    if (!c.family.empty()) return generate(parse_family(c.family, c.params, c.seed));
    throw Error(ErrorKind::InvalidInput, "need --graph FILE or --family NAME");
}

Tolerances resolve_tolerances(const Config& c) {
    Tolerances t;
    for (const auto& item : c.tols) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, "--tol expects name=value");
        const std::string name = item.substr(0, eq);
        if (!set_tolerance(t, name, to_double(name, item.substr(eq + 1))))
            throw Error(ErrorKind::InvalidInput, "unknown tolerance '" + name + "'");
    }
    return t;
}

std::set<std::string> resolve_audits(const Config& c, const std::set<std::string>& allowed) {
    std::set<std::string> out;
    for (const auto& a : split(c.audit, ',')) {
        if (!allowed.count(a)) throw Error(ErrorKind::InvalidInput, "unknown audit '" + a + "' for this command");
        out.insert(a);
    }
    return out;
}

SpectrumRequest request(const Config& c) {
    if ((c.kmax > 0.0) == (c.count > 0)) throw Error(ErrorKind::InvalidInput, "give exactly one of --kmax, --count");
    SpectrumRequest r;
    r.kmax = c.kmax;
    r.count = c.count;
    r.workers = std::max(1, c.workers);
    return r;
}

std::filesystem::path out_file(const Config& c, const std::string& name) {
    std::filesystem::create_directories(c.out);
    return std::filesystem::path(c.out) / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidInput, "cannot write " + p.string());
    f << text;
}

void print_spectrum_summary(const SpectrumResult& res, std::ostream& out) {
    out << "records: " << res.records.size() << "\n"
        << "k_end: " << format_double(res.k_end) << "\n"
        << "winding_count: " << res.winding_count << "\n"
        << "record_count: " << res.record_count << "\n"
        << "friedlander_checked: " << res.friedlander.checked << "\n"
        << "friedlander_min_margin: " << format_double(res.friedlander.min_margin) << "\n"
        << "max_winding_defect: " << format_double(res.stats.max_winding_defect) << "\n"
        << "fallbacks: " << res.stats.fallbacks << "\n";
}

// Halved-grid rerun: same indices and multiplicities, k to relative 1e-9.
double grid_audit(const MetricGraph& g, const SpectrumRequest& req, const Tolerances& tol,
                  const std::vector<EigenvalueRecord>& base) {
    Tolerances half = tol;
    half.step_factor *= 0.5;
    const SpectrumResult rerun = compute_spectrum(g, req, half);
    if (rerun.records.size() != base.size())
        throw Error(ErrorKind::IdentityViolation, "halved grid found " + std::to_string(rerun.records.size()) +
                                                      " records, expected " + std::to_string(base.size()));
    double worst = 0.0;
    for (size_t i = 0; i < base.size(); ++i) {
        if (rerun.records[i].index != base[i].index || rerun.records[i].multiplicity != base[i].multiplicity)
            throw Error(ErrorKind::IdentityViolation, "halved grid changed record " + std::to_string(base[i].index));
        worst = std::max(worst, std::abs(rerun.records[i].k - base[i].k) / base[i].k);
    }
    if (worst > 1e-9) throw Error(ErrorKind::IdentityViolation, "halved grid moved k by " + format_double(worst));
    return worst;
}

int cmd_spectrum(const Config& c, std::ostream& out) {
    const auto audits = resolve_audits(c, {"friedlander", "grid"});
    const MetricGraph g = resolve_graph(c);
    const Tolerances tol = resolve_tolerances(c);
    const SpectrumRequest req = request(c);
    const SpectrumResult res = compute_spectrum(g, req, tol);
    write_file(out_file(c, "spectrum.csv"), spectrum_csv(res.records));
    print_spectrum_summary(res, out);
    if (audits.count("grid")) out << "grid_max_rel_shift: " << format_double(grid_audit(g, req, tol, res.records)) << "\n";
    return 0;
}

int domain_N(const Domain& d, const Eigenfunction& f, const MetricGraph& g, const Tolerances& tol) {
    if (d.kind == DomainKind::star && large_k(f.k, g))
        return spectral_position_sign(f, g, d.central_vertex);
    return spectral_position_direct(d, g, f.k, tol);
}

int cmd_observables(const Config& c, std::ostream& out) {
    const auto audits = resolve_audits(c, {"friedlander", "grid", "local-global"});
    const MetricGraph g = resolve_graph(c);
    const Tolerances tol = resolve_tolerances(c);
    const SpectrumRequest req = request(c);
    const SpectrumResult res = compute_spectrum(g, req, tol);
    if (audits.count("grid")) grid_audit(g, req, tol, res.records);

    AnalysisOptions opt;
    opt.tol = tol;
    opt.audit_local_global = audits.count("local-global") > 0;
    const int n = static_cast<int>(res.records.size());
    std::vector<std::string> rows(n), drows(n);
    const auto& interior = g.interior();
    const int slices = std::max(1, std::min(n, req.workers * 4));
    parallel_for(slices, req.workers, [&](int s) {
        for (int i = static_cast<int>(static_cast<long>(n) * s / slices);
             i < static_cast<int>(static_cast<long>(n) * (s + 1) / slices); ++i) {
            const EigenvalueRecord& rec = res.records[i];
            const RecordObservation o = analyze(rec, g, opt);
            std::string row = surplus_csv_row(rec, o.has_surplus ? &o.surplus : nullptr);
            row.pop_back();
            std::ostringstream tail;
            if (o.has_surplus) {
                const Eigenfunction f = reconstruct(rec, g);
                const Partition p = partition_neumann(f, g);
                tail << ',' << p.domain_count();
                std::ostringstream ds;
                int id = 0;
                for (const Domain& d : p.vertex_domains) ds << domain_csv_row(rec.index, rec.k, id++, d, domain_N(d, f, g, tol));
                if (c.all_domains)
                    for (const Domain& d : trivial_domains(p, f, g)) ds << domain_csv_row(rec.index, rec.k, id++, d, 1);
                drows[i] = ds.str();
            } else {
                tail << ',';
            }
            for (size_t j = 0; j < interior.size(); ++j) tail << ',' << (o.has_local ? std::to_string(o.local[j].N) : "");
            for (size_t j = 0; j < interior.size(); ++j) tail << ',' << (o.has_local ? format_double(o.local[j].rho) : "");
            rows[i] = row + tail.str() + "\n";
        }
    });

    std::string header = surplus_csv_header();
    header.pop_back();
    header += ",neumann_domains";
    for (int v : interior) header += ",N_" + std::to_string(v);
    for (int v : interior) header += ",rho_" + std::to_string(v);
    std::ostringstream body, dom;
    body << header << '\n';
    dom << domain_csv_header();
    for (int i = 0; i < n; ++i) {
        body << rows[i];
        dom << drows[i];
    }
    write_file(out_file(c, "observables.csv"), body.str());
    write_file(out_file(c, "domains.csv"), dom.str());
    print_spectrum_summary(res, out);
    if (opt.audit_local_global) out << "local_global: pass\n";
    return 0;
}

int cmd_stats(const Config& c, std::ostream& out) {
    const auto audits = resolve_audits(c, {"friedlander", "grid", "local-global"});
    const MetricGraph g = resolve_graph(c);
    const Tolerances tol = resolve_tolerances(c);
    const SpectrumRequest req = request(c);
    const SpectrumResult res = compute_spectrum(g, req, tol);
    if (audits.count("grid")) grid_audit(g, req, tol, res.records);

    AnalysisOptions opt;
    opt.tol = tol;
    opt.audit_local_global = audits.count("local-global") > 0;
    const auto obs = analyze_all(res.records, g, opt, req.workers);

    std::vector<std::pair<int, int>> pairs;
    if (g.is_tree())
        for (size_t a = 0; a < g.interior().size(); ++a)
            for (size_t b = a + 1; b < g.interior().size(); ++b) pairs.emplace_back(g.interior()[a], g.interior()[b]);
    SurplusAccumulator acc(g, pairs), prefix(g, pairs);
    for (size_t i = 0; i < obs.size(); ++i) {
        acc.add(obs[i]);
        if (2 * i + 2 == obs.size() || (obs.size() == 1 && i == 0)) prefix = acc;
    }
    StatOptions so;
    so.min_sample = c.min_sample;
    write_file(out_file(c, "stats.json"), stat_report_json(acc, g, so, &prefix));
    write_file(out_file(c, "histogram_omega.csv"), histogram_csv(acc.omega));
    write_file(out_file(c, "histogram_sigma.csv"), histogram_csv(acc.sigma));
    for (const auto& [v, m] : acc.N) write_file(out_file(c, "histogram_N_v" + std::to_string(v) + ".csv"), histogram_csv(m));
    for (const auto& h : c.histograms) {
        if (h != "rho") {
            if (h == "omega" || h == "sigma" || h == "N") continue;  // always written
            throw Error(ErrorKind::InvalidInput, "unknown histogram '" + h + "'");
        }
        std::vector<int> verts;
        if (c.vertex >= 0) {
            if (!acc.rho_hist.count(c.vertex)) throw Error(ErrorKind::InvalidInput, "--vertex must be an interior vertex");
            verts.push_back(c.vertex);
        } else {
            for (int v : g.interior()) verts.push_back(v);
        }
        for (int v : verts) write_file(out_file(c, "histogram_rho_v" + std::to_string(v) + ".csv"), rho_histogram_csv(acc, v));
    }
    print_spectrum_summary(res, out);
    out << "generic: " << acc.generic << "\nloops: " << acc.loops << "\nexcluded: " << acc.excluded << "\n";
    const BoundsReport b = bounds_audit(acc);
    out << "omega_range: " << b.omega_min << " " << b.omega_max << "\nsigma_range: " << b.sigma_min << " " << b.sigma_max
        << "\nwithin_conjecture: " << (b.within_conjecture ? "yes" : "no") << "\n";
    return 0;
}

int cmd_torus(const Config& c, std::ostream& out) {
    const auto audits = resolve_audits(c, {"friedlander", "inversion"});
    const MetricGraph g = resolve_graph(c);
    const Tolerances tol = resolve_tolerances(c);
    const SpectrumRequest req = request(c);
    const SpectrumResult res = compute_spectrum(g, req, tol);
    AnalysisOptions opt;
    opt.tol = tol;

    std::vector<int> picks;
    for (int i = 0; i < static_cast<int>(res.records.size()); ++i)
        if (res.records[i].cls == EigenClass::generic && large_k(res.records[i].k, g)) picks.push_back(i);
    if (c.limit > 0 && static_cast<int>(picks.size()) > c.limit) picks.resize(c.limit);
    const int n = static_cast<int>(picks.size());
    std::vector<std::string> rows(n);
    std::vector<int> mismatch(n, 0);
    std::vector<double> inv_defect(n, 0.0);
    std::vector<int> inv_bad(n, 0);
    parallel_for(n, req.workers, [&](int i) {
        const EigenvalueRecord& rec = res.records[picks[i]];
        const RecordObservation o = analyze(rec, g, opt);
        const TorusPoint kappa = flow_point(rec.k, g.lengths());
        const TorusObservables t = observables_at(kappa, g, tol);
        rows[i] = std::to_string(rec.index) + "," + torus_csv_row(kappa, t);
        bool same = o.has_local && t.sigma == o.surplus.sigma && t.omega == o.surplus.omega;
        for (size_t j = 0; same && j < t.N.size(); ++j) same = t.N[j] == o.local[j].N;
        mismatch[i] = !same;
        if (audits.count("inversion")) {
            const InversionAudit a = inversion_audit(kappa, g, tol);
            inv_defect[i] = std::max({a.p_defect, a.q_defect, a.rho_defect});
            inv_bad[i] = !(a.generic_ok && a.N_ok && a.omega_ok && inv_defect[i] <= tol.identity);
        }
    });
    std::ostringstream body;
    body << "n," << torus_csv_header(g);
    for (const auto& r : rows) body << r;
    write_file(out_file(c, "torus.csv"), body.str());
    print_spectrum_summary(res, out);
    const long mism = std::count(mismatch.begin(), mismatch.end(), 1);
    out << "torus_points: " << n << "\nflow_mismatches: " << mism << "\n";
    if (audits.count("inversion"))
        out << "inversion_failures: " << std::count(inv_bad.begin(), inv_bad.end(), 1)
            << "\ninversion_max_defect: " << format_double(n ? *std::max_element(inv_defect.begin(), inv_defect.end()) : 0.0)
            << "\n";
    if (mism > 0) throw Error(ErrorKind::IdentityViolation, "torus observables disagree with the engine on " + std::to_string(mism) + " records");
    if (std::count(inv_bad.begin(), inv_bad.end(), 1) > 0) throw Error(ErrorKind::IdentityViolation, "inversion audit failed");
    return 0;
}

int cmd_verify(const Config& c, std::ostream& out) {
    const Tolerances tol = resolve_tolerances(c);
    std::vector<verify::Fixture> fixtures;
    if (!c.graph_file.empty() || !c.family.empty())
        fixtures.push_back({c.family.empty() ? "graph" : c.family, resolve_graph(c)});
    else
        fixtures = verify::builtin_fixtures();
    verify::SuiteOptions opt;
    opt.count = c.count > 0 ? c.count : 300;
    opt.workers = std::max(1, c.workers);
    opt.tol = tol;
    const bool ok = verify::run_suite(fixtures, opt, out);
    const bool controls = !c.negative_controls || verify::run_negative_controls(out);
    return ok && controls ? 0 : 3;
}

void add_common(CLI::App* sub, Config& c, bool window = true) {
    sub->add_option("--graph", c.graph_file, "graph JSON file");
    sub->add_option("--family", c.family, "interval|star|stower|mandarin|tree31|random-regular");
    sub->add_option("--params", c.params, "family parameters key=value,... (lists use ':')");
    sub->add_option("--seed", c.seed, "length / topology seed");
    if (window) sub->add_option("--kmax", c.kmax, "solve (0, kmax]");
    sub->add_option("--count", c.count, "first N eigenvalues");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--tol", c.tols, "tolerance override name=value")->take_all();
    sub->add_option("--audit", c.audit, "comma-separated audits");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Config c;
    CLI::App app{"quantum graph spectra, surpluses and statistics", "qgraph"};
    app.require_subcommand(1);
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues to spectrum.csv");
    add_common(spectrum, c);
    auto* observables = app.add_subcommand("observables", "per-record surpluses, domains, N and rho");
    add_common(observables, c);
    observables->add_flag("--all-domains", c.all_domains, "also export the trivial interval domains");
    auto* stats = app.add_subcommand("stats", "statistics report and histograms");
    add_common(stats, c);
    stats->add_option("--histogram", c.histograms, "extra histograms (rho)")->take_all();
    stats->add_option("--vertex", c.vertex, "vertex for --histogram rho");
    stats->add_option("--min-sample", c.min_sample, "sample floor for verdicts");
    auto* verify_cmd = app.add_subcommand("verify", "property suite on built-in fixtures");
    add_common(verify_cmd, c, false);
    verify_cmd->add_flag("--negative-controls", c.negative_controls, "check that injected failures are caught");
    auto* torus = app.add_subcommand("torus", "observables at flow points to torus.csv");
    add_common(torus, c);
    torus->add_option("--limit", c.limit, "at most this many torus points");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    try {
        if (spectrum->parsed()) return cmd_spectrum(c, out);
        if (observables->parsed()) return cmd_observables(c, out);
        if (stats->parsed()) return cmd_stats(c, out);
        if (verify_cmd->parsed()) return cmd_verify(c, out);
        return cmd_torus(c, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace qg::cli
