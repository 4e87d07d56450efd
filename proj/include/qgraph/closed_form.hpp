#pragma once

#include <vector>

#include "qgraph/eigenfunction.hpp"
#include "qgraph/torus.hpp"

namespace qg {

struct SurplusValues {
    int sigma = 0;
    int omega = 0;
};

// ---- stowers ------------------------------------------------------------------

// y: loop coordinates, z: tail coordinates (edge order of the graph).
struct StowerPoint {
    std::vector<double> y;
    std::vector<double> z;
};

// Throws WrongFamily unless g is a stower (one interior vertex, loops and pendant edges).
StowerPoint stower_split(const TorusPoint& kappa, const MetricGraph& g);

// Σ tan(z_j) + 2 Σ tan(y_i/2)
double stower_secular(const StowerPoint& p);
// First-order error scale of the secular sum: Σ (1 + tan²) over all terms.
double stower_secular_scale(const StowerPoint& p);
// A coordinate whose sine or cosine (of z, or of y/2) is within band of 0.
bool stower_has_bad_coordinate(const StowerPoint& p, double band = 1e-10);

int stower_i_tails(const StowerPoint& p);
int stower_i_loops(const StowerPoint& p);

// σ = i_loops, ω = n − (i_tails + i_loops). Throws BadCoordinate / NotOnSecularSet.
SurplusValues stower_surpluses(const StowerPoint& p, double tol = 1e-8);

// ---- mandarins ----------------------------------------------------------------

enum class MandarinBranch { symmetric, antisymmetric };

double mandarin_Fs(const TorusPoint& kappa);  // Σ tan(κ_j/2)
double mandarin_Fa(const TorusPoint& kappa);  // Σ cot(κ_j/2)
double mandarin_Fs_scale(const TorusPoint& kappa);
double mandarin_Fa_scale(const TorusPoint& kappa);
bool mandarin_has_bad_coordinate(const TorusPoint& kappa, double band = 1e-10);
// [κ + (π,...,π)]
TorusPoint mandarin_T(const TorusPoint& kappa);
// Throws NotOnSecularSet when neither function vanishes.
MandarinBranch mandarin_branch(const TorusPoint& kappa, double tol = 1e-8);

int mandarin_index(const TorusPoint& kappa);  // #{tan(κ_j/2) < 0}
int mandarin_C(const TorusPoint& kappa);      // 1 if F_a <= 0

// Symmetric branch: σ = i − C, ω = E − i − C; antisymmetric points are moved by T first.
SurplusValues mandarin_surpluses(const TorusPoint& kappa, double tol = 1e-8);

// ---- tree gluing --------------------------------------------------------------

struct GluedTree {
    MetricGraph graph;
    Eigenfunction f;
    int merged_edge = -1;  // the edge through the glue point
};

// Glues g1 at boundary vertex w1 to g2 at w2; the two pendant edges become one
// edge with the glue point in its interior. f_i is scaled by 1/f_i(w_i).
// Throws ZeroBoundaryValue, MismatchedK, InvalidInput.
GluedTree tree_glue(const MetricGraph& g1, const Eigenfunction& f1, int w1, const MetricGraph& g2,
                    const Eigenfunction& f2, int w2);

}  // namespace qg
