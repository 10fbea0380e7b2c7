#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "attractorkit/bounds.hpp"
#include "attractorkit/common.hpp"

namespace attractorkit::covering {

using Point = std::vector<double>;

/// Finite set of points in R^d under a named norm (desk-scale surrogate for a
/// bounded set; segment clouds are stored flattened, where the sup norm over
/// entries reproduces the segment sup norm).
struct PointCloud {
    int dim = 1;
    VecNorm norm = VecNorm::MaxAbs;
    std::vector<Point> pts;
    std::vector<std::string> labels;  // optional, empty or one per point

    void validate() const;
};

/// m 2^m (1 + ratio)^m with ratio = covered radius / covering radius.
double covering_count_bound(int dim, double ratio);

struct CoverOptions {
    double sample_step_fraction = 0.5;  // sample grid step as a fraction of the cell half-width
};

/// Cover the ball of radius r_ball by balls of radius r_cover: cells of an
/// axis-aligned lattice are added greedily as samples need them. The count is
/// checked against the covering-lemma bound and coverage of every sample is
/// verified exhaustively.
std::vector<Point> cover_ball(int dim, VecNorm norm, double r_ball, double r_cover,
                              const CoverOptions& opts = {});

double hausdorff_semidist(const PointCloud& a, const PointCloud& b);

/// Discrete map with a coordinate-subspace projection: P keeps `p_coords`,
/// I - P keeps the rest.
struct MapSystem {
    int dim = 1;
    VecNorm norm = VecNorm::MaxAbs;
    std::vector<int> p_coords;
    std::function<Point(const Point&)> map;

    Point project(const Point& x) const;
    Point complement(const Point& x) const;
};

struct TreeLevel {
    double radius = 0.0;        // zeta^m R_B
    std::vector<Point> centers;  // W^m
};

struct CoveringTree {
    double zeta = 0.0;
    double R_B = 0.0;
    std::vector<TreeLevel> levels;        // W^1, W^2, ...
    std::vector<std::vector<Point>> E;    // E^1, E^2, ...
    double per_level_bound = 0.0;         // Lambda 2^Lambda (1 + M1/alpha)^Lambda
};

/// Inductive covering construction: per level, the projected images around
/// each center are covered in the P-subspace and translated by the center's
/// tail image; every sampled image point must land within zeta^{m} R_B of a
/// new center, checked exhaustively.
CoveringTree build_covering_tree(const MapSystem& sys, const bounds::SqueezingCertificate& cert,
                                 double R_B, int levels, const PointCloud& cloud);

struct BoxCountResult {
    double estimate = 0.0;
    std::vector<double> eps;
    std::vector<int> counts;
    int skipped_leading = 0;  // saturated rungs excluded from the regression
};

/// Box-counting estimate: greedy farthest-point nets give N_eps for each rung
/// of the ladder; the estimate is the least-squares slope of ln N vs ln(1/eps).
BoxCountResult box_counting_dimension(const PointCloud& cloud, std::span<const double> eps_ladder);

struct AttractionRow {
    int n = 0;
    double semidist = 0.0;
    double bound = 0.0;
};

struct AttractionReport {
    std::vector<AttractionRow> rows;
    double fitted_rate = 0.0;
    double expected_rate = 0.0;  // -ln zeta
    bool pass = false;
};

/// Iterate D under the map and measure the Hausdorff semidistance to the union
/// of E-sets; the fitted decay rate must reach -ln zeta up to the slack.
AttractionReport verify_exponential_attraction(const MapSystem& sys, const CoveringTree& tree,
                                               const PointCloud& D, int horizon,
                                               double slack = 0.1);

}  // namespace attractorkit::covering
