#include "qgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qgraph/error.hpp"

namespace qg {

namespace {

bool connected(int n, const std::vector<Edge>& edges) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = n;
    for (const auto& e : edges) {
        int a = find(e.u), b = find(e.v);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

}  // namespace

MetricGraph MetricGraph::build(int vertices, std::vector<Edge> edges, BuildOptions opt) {
    if (vertices < 1) throw Error(ErrorKind::InvalidInput, "graph needs at least one vertex");
    if (edges.empty()) throw Error(ErrorKind::InvalidInput, "graph needs at least one edge");
    for (const auto& e : edges) {
        if (e.u < 0 || e.u >= vertices || e.v < 0 || e.v >= vertices)
            throw Error(ErrorKind::InvalidInput, "edge endpoint out of range");
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw Error(ErrorKind::NonPositiveLength,
                        "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    }
    if (!connected(vertices, edges)) throw Error(ErrorKind::Disconnected, "graph is not connected");

    MetricGraph g;
    g.vertex_count_ = vertices;
    g.edges_ = std::move(edges);
    g.incident_.assign(vertices, {});
    for (int e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edges_[e];
        g.incident_[ed.u].push_back({e, true});
        g.incident_[ed.v].push_back({e, false});
        if (ed.u == ed.v) {
            g.loops_.push_back(e);
            g.loop_length_ += ed.length;
        }
        g.total_length_ += ed.length;
    }
    bool all_two = true;
    for (int v = 0; v < vertices; ++v) {
        if (g.degree(v) != 2) all_two = false;
        if (g.degree(v) == 1)
            g.boundary_.push_back(v);
        else
            g.interior_.push_back(v);
    }
    if (all_two) throw Error(ErrorKind::SingleLoopGraph, "graph is a single loop");
    g.standard_ = true;
    for (int v = 0; v < vertices; ++v) {
        if (g.degree(v) == 2) {
            if (!opt.allow_degree_two)
                throw Error(ErrorKind::DegreeTwoVertex, "vertex " + std::to_string(v));
            g.standard_ = false;
        }
    }
    g.min_length_ = g.max_length_ = g.edges_[0].length;
    for (const auto& e : g.edges_) {
        g.min_length_ = std::min(g.min_length_, e.length);
        g.max_length_ = std::max(g.max_length_, e.length);
    }
    return g;
}

std::vector<double> MetricGraph::lengths() const {
    std::vector<double> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) out.push_back(e.length);
    return out;
}

MetricGraph MetricGraph::with_lengths(const std::vector<double>& lengths) const {
    if (lengths.size() != edges_.size())
        throw Error(ErrorKind::InvalidInput, "length vector size mismatch");
    std::vector<Edge> es = edges_;
    for (size_t j = 0; j < es.size(); ++j) es[j].length = lengths[j];
    return build(vertex_count_, std::move(es), BuildOptions{!standard_});
}

int betti(const MetricGraph& g) { return g.betti(); }

// ---- families -------------------------------------------------------------

namespace {

std::vector<double> draw_lengths(const LengthSource& src, int count, std::uint64_t seed) {
    if (!src.explicit_lengths.empty()) {
        if (static_cast<int>(src.explicit_lengths.size()) != count)
            throw Error(ErrorKind::InvalidFamilyParams,
                        "expected " + std::to_string(count) + " lengths, got " +
                            std::to_string(src.explicit_lengths.size()));
        return src.explicit_lengths;
    }
    if (!(src.lo > 0.0) || !(src.hi >= src.lo))
        throw Error(ErrorKind::InvalidFamilyParams, "length range must satisfy 0 < a <= b");
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_real_distribution<double> dist(src.lo, src.hi);
    std::vector<double> out(count);
    for (auto& l : out) l = dist(rng);
    return out;
}

std::vector<std::pair<int, int>> random_regular_pairs(int d, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<int> points;
        for (int v = 0; v < n; ++v)
            for (int j = 0; j < d; ++j) points.push_back(v);
        std::set<std::pair<int, int>> used;
        std::vector<std::pair<int, int>> pairs;
        bool stuck = false;
        while (!points.empty() && !stuck) {
            bool placed = false;
            for (int tries = 0; tries < 200 && !placed; ++tries) {
                std::uniform_int_distribution<size_t> pick(0, points.size() - 1);
                size_t i = pick(rng), j = pick(rng);
                if (i == j) continue;
                int a = points[i], b = points[j];
                if (a == b) continue;
                auto key = std::minmax(a, b);
                if (used.count(key)) continue;
                used.insert(key);
                pairs.emplace_back(key.first, key.second);
                if (i < j) std::swap(i, j);
                points.erase(points.begin() + static_cast<long>(i));
                points.erase(points.begin() + static_cast<long>(j));
                placed = true;
            }
            if (!placed) stuck = true;
        }
        if (stuck) continue;
        std::vector<Edge> es;
        for (auto [a, b] : pairs) es.push_back({a, b, 1.0});
        if (!connected(n, es)) continue;
        return pairs;
    }
    throw Error(ErrorKind::InvalidFamilyParams, "could not draw a simple connected regular graph");
}

}  // namespace

MetricGraph generate(const FamilySpec& spec) {
    std::vector<Edge> es;
    int vertices = 0;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, IntervalParams>) {
                vertices = 2;
                es.push_back({0, 1, 1.0});
            } else if constexpr (std::is_same_v<T, StarParams>) {
                if (p.edges < 3) throw Error(ErrorKind::InvalidFamilyParams, "star needs >= 3 edges");
                vertices = p.edges + 1;
                for (int j = 1; j <= p.edges; ++j) es.push_back({0, j, 1.0});
            } else if constexpr (std::is_same_v<T, StowerParams>) {
                if (p.loops < 0 || p.tails < 0 || (p.loops == 0 && p.tails < 3) ||
                    (p.loops == 1 && p.tails == 0))
                    throw Error(ErrorKind::InvalidFamilyParams, "stower needs a centre of degree >= 3");
                vertices = 1 + p.tails;
                for (int i = 0; i < p.loops; ++i) es.push_back({0, 0, 1.0});
                for (int j = 1; j <= p.tails; ++j) es.push_back({0, j, 1.0});
            } else if constexpr (std::is_same_v<T, MandarinParams>) {
                if (p.edges < 3) throw Error(ErrorKind::InvalidFamilyParams, "mandarin needs E >= 3");
                vertices = 2;
                for (int j = 0; j < p.edges; ++j) es.push_back({0, 1, 1.0});
            } else if constexpr (std::is_same_v<T, Tree31Params>) {
                int m = p.interior;
                if (m < 1) throw Error(ErrorKind::InvalidFamilyParams, "tree31 needs >= 1 interior vertex");
                std::vector<int> parents = p.parents;
                if (parents.empty()) {
                    parents.assign(m, -1);
                    for (int i = 1; i < m; ++i) parents[i] = i - 1;
                }
                if (static_cast<int>(parents.size()) != m)
                    throw Error(ErrorKind::InvalidFamilyParams, "tree31 parent list size mismatch");
                std::vector<int> deg(m, 0);
                for (int i = 1; i < m; ++i) {
                    if (parents[i] < 0 || parents[i] >= i)
                        throw Error(ErrorKind::InvalidFamilyParams, "tree31 parent must precede child");
                    es.push_back({parents[i], i, 1.0});
                    ++deg[parents[i]];
                    ++deg[i];
                }
                int next = m;
                for (int i = 0; i < m; ++i) {
                    if (deg[i] > 3) throw Error(ErrorKind::InvalidFamilyParams, "tree31 vertex degree > 3");
                    for (int j = deg[i]; j < 3; ++j) es.push_back({i, next++, 1.0});
                }
                vertices = next;
            } else if constexpr (std::is_same_v<T, RandomRegularParams>) {
                if (p.degree < 3 || p.vertices <= p.degree || (p.degree * p.vertices) % 2 != 0)
                    throw Error(ErrorKind::InvalidFamilyParams, "random regular needs d >= 3, V > d, dV even");
                vertices = p.vertices;
                for (auto [a, b] : random_regular_pairs(p.degree, p.vertices, spec.seed))
                    es.push_back({a, b, 1.0});
            }
        },
        spec.shape);
    auto ls = draw_lengths(spec.lengths, static_cast<int>(es.size()), spec.seed);
    for (size_t j = 0; j < es.size(); ++j) es[j].length = ls[j];
    return MetricGraph::build(vertices, std::move(es));
}

std::string family_name(const FamilyShape& shape) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, IntervalParams>) return "interval";
            else if constexpr (std::is_same_v<T, StarParams>) return "star";
            else if constexpr (std::is_same_v<T, StowerParams>) return "stower";
            else if constexpr (std::is_same_v<T, MandarinParams>) return "mandarin";
            else if constexpr (std::is_same_v<T, Tree31Params>) return "tree31";
            else return "random-regular";
        },
        shape);
}

// ---- rational dependence --------------------------------------------------

RationalRelation rational_dependence_warning(const std::vector<double>& l, int c_max, double rel_tol) {
    RationalRelation out;
    const int n = static_cast<int>(l.size());
    double scale = 0.0;
    for (double x : l) scale = std::max(scale, std::abs(x));
    const double tol = rel_tol * scale * c_max;
    auto found = [&](std::initializer_list<std::pair<int, int>> terms) {
        out.dependent = true;
        out.coefficients.assign(n, 0);
        for (auto [idx, c] : terms) out.coefficients[idx] = c;
    };
    // the last coefficient is solved for instead of enumerated
    auto solve_last = [&](double partial, int k, int& c) {
        double q = -partial / l[k];
        double r = std::round(q);
        if (r == 0.0 || std::abs(r) > c_max) return false;
        if (std::abs(partial + r * l[k]) > tol) return false;
        c = static_cast<int>(r);
        return true;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int ci = 1; ci <= c_max; ++ci) {
                int cj;
                if (solve_last(ci * l[i], j, cj)) {
                    found({{i, ci}, {j, cj}});
                    return out;
                }
            }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int ci = 1; ci <= c_max; ++ci)
                for (int cj = -c_max; cj <= c_max; ++cj) {
                    if (cj == 0) continue;
                    double partial = ci * l[i] + cj * l[j];
                    for (int k = j + 1; k < n; ++k) {
                        int ck;
                        if (solve_last(partial, k, ck)) {
                            found({{i, ci}, {j, cj}, {k, ck}});
                            return out;
                        }
                    }
                }
    return out;
}

// ---- JSON io ----------------------------------------------------------------

MetricGraph graph_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("graph JSON parse error: ") + e.what());
    }
    try {
        int n = j.at("vertices").get<int>();
        std::vector<Edge> es;
        for (const auto& e : j.at("edges"))
            es.push_back({e.at("u").get<int>(), e.at("v").get<int>(), e.at("length").get<double>()});
        bool standard = j.value("standard", true);
        return MetricGraph::build(n, std::move(es), BuildOptions{!standard});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("graph JSON schema error: ") + e.what());
    }
}

MetricGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open graph file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return graph_from_json(ss.str());
}

std::string graph_to_json(const MetricGraph& g) {
    nlohmann::json j;
    j["vertices"] = g.vertex_count();
    j["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges()) j["edges"].push_back({{"u", e.u}, {"v", e.v}, {"length", e.length}});
    j["standard"] = g.standard();
    return j.dump(2);
}

}  // namespace qg
