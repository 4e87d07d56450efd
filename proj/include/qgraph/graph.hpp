#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace qg {

struct Edge {
    int u = 0;
    int v = 0;
    double length = 1.0;
};

// One end of an edge seen from a vertex. at_start: the x = 0 end (vertex u).
struct EdgeEnd {
    int edge = 0;
    bool at_start = true;
};

struct BuildOptions {
    bool allow_degree_two = false;  // test fixtures only (glued trees)
};

class MetricGraph {
public:
    MetricGraph() = default;

    // Validates and derives topology. Throws qg::Error.
    static MetricGraph build(int vertices, std::vector<Edge> edges, BuildOptions opt = {});

    int vertex_count() const { return vertex_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[e]; }
    double length(int e) const { return edges_[e].length; }
    std::vector<double> lengths() const;

    int degree(int v) const { return static_cast<int>(incident_[v].size()); }
    const std::vector<EdgeEnd>& incident(int v) const { return incident_[v]; }
    bool is_boundary(int v) const { return degree(v) == 1; }
    const std::vector<int>& boundary() const { return boundary_; }
    const std::vector<int>& interior() const { return interior_; }
    const std::vector<int>& loops() const { return loops_; }
    bool is_loop(int e) const { return edges_[e].u == edges_[e].v; }

    int betti() const { return edge_count() - vertex_count_ + 1; }
    bool is_tree() const { return betti() == 0; }
    double total_length() const { return total_length_; }
    double min_length() const { return min_length_; }
    double max_length() const { return max_length_; }
    double loop_length() const { return loop_length_; }
    bool standard() const { return standard_; }

    // Same topology, new lengths (re-validated).
    MetricGraph with_lengths(const std::vector<double>& lengths) const;

private:
    int vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeEnd>> incident_;
    std::vector<int> boundary_;
    std::vector<int> interior_;
    std::vector<int> loops_;
    double total_length_ = 0.0;
    double min_length_ = 0.0;
    double max_length_ = 0.0;
    double loop_length_ = 0.0;
    bool standard_ = true;
};

int betti(const MetricGraph& g);

// ---- families -------------------------------------------------------------

struct IntervalParams {};
struct StarParams {
    int edges = 3;
};
struct StowerParams {
    int loops = 1;  // n
    int tails = 1;  // m
};
struct MandarinParams {
    int edges = 3;
};
// (3,1)-regular tree. parents[i] (i >= 1) is the interior parent of interior
// vertex i, parents[i] < i. Empty with `interior` set gives a caterpillar.
struct Tree31Params {
    int interior = 1;
    std::vector<int> parents;
};
struct RandomRegularParams {
    int degree = 3;
    int vertices = 4;
};

using FamilyShape = std::variant<IntervalParams, StarParams, StowerParams, MandarinParams,
                                 Tree31Params, RandomRegularParams>;

struct LengthSource {
    std::vector<double> explicit_lengths;  // used when non-empty
    double lo = 0.5;
    double hi = 1.5;
};

struct FamilySpec {
    FamilyShape shape;
    LengthSource lengths;
    std::uint64_t seed = 1;
};

// Edge order: stower lists loops first then tails (central vertex 0);
// mandarin joins vertex 0 and 1; tree31 interior vertices come first.
MetricGraph generate(const FamilySpec& spec);

std::string family_name(const FamilyShape& shape);

// ---- rational dependence --------------------------------------------------

struct RationalRelation {
    bool dependent = false;
    std::vector<int> coefficients;  // one per length
};

// Bounded search for Σ c_j l_j = 0 with |c_j| <= c_max and at most 3 nonzero
// coefficients. Advisory only.
RationalRelation rational_dependence_warning(const std::vector<double>& lengths, int c_max = 20,
                                             double rel_tol = 1e-10);

// ---- JSON io ----------------------------------------------------------------

MetricGraph graph_from_json(const std::string& text);
MetricGraph load_graph(const std::string& path);
std::string graph_to_json(const MetricGraph& g);

}  // namespace qg
