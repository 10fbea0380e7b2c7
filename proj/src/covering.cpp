#include "attractorkit/covering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace attractorkit::covering {

void PointCloud::validate() const {
    if (pts.empty()) throw UsageError("USAGE_CLOUD", "empty point cloud");
    if (!labels.empty() && labels.size() != pts.size())
        throw UsageError("USAGE_CLOUD", "labels must be empty or match the point count");
    for (const auto& p : pts) {
        if (static_cast<int>(p.size()) != dim)
            throw UsageError("USAGE_CLOUD", "point dimension mismatch");
        for (double x : p)
            if (!std::isfinite(x)) throw NumericError("NUMERIC_NONFINITE", "non-finite point");
    }
}

double covering_count_bound(int dim, double ratio) {
    return dim * std::pow(2.0, dim) * std::pow(1.0 + ratio, dim);
}

namespace {

/// Axis-aligned cell lattice covering [-R, R]^d symmetrically: n_ax cells per
/// axis of half-width w, centers at -n_ax w + (2j+1) w. For the sup norm
/// w = r_cover; for the Euclidean norm w = r_cover / sqrt(d) so that the cell
/// circumradius equals r_cover.
struct CellLattice {
    int dim;
    double w;
    int n_ax;

    CellLattice(int d, VecNorm norm, double r_ball, double r_cover) : dim(d) {
        w = norm == VecNorm::MaxAbs ? r_cover : r_cover / std::sqrt(static_cast<double>(d));
        n_ax = std::max(1, static_cast<int>(std::ceil(r_ball / w - 1e-12)));
    }

    int axis_cell(double x) const {
        const int j = static_cast<int>(std::floor((x + n_ax * w) / (2.0 * w)));
        return std::clamp(j, 0, n_ax - 1);
    }
    double axis_center(int j) const { return -n_ax * w + (2.0 * j + 1.0) * w; }

    std::vector<int> cell_of(const Point& rel) const {
        std::vector<int> idx(dim);
        for (int d = 0; d < dim; ++d) idx[d] = axis_cell(rel[d]);
        return idx;
    }
    Point center_of(const std::vector<int>& idx) const {
        Point c(dim);
        for (int d = 0; d < dim; ++d) c[d] = axis_center(idx[d]);
        return c;
    }
};

double point_dist(const Point& a, const Point& b, VecNorm norm) {
    return vec_dist(std::span<const double>(a), std::span<const double>(b), norm);
}

}  // namespace

std::vector<Point> cover_ball(int dim, VecNorm norm, double r_ball, double r_cover,
                              const CoverOptions& opts) {
    if (dim < 1 || dim > 8) throw UsageError("USAGE_COVER", "dim must be in 1..8");
    if (!(r_ball > 0.0) || !(r_cover > 0.0))
        throw UsageError("USAGE_COVER", "radii must be positive");

    const CellLattice lat(dim, norm, r_ball, r_cover);
    const double step = lat.w * opts.sample_step_fraction;
    const int per_axis = std::max(2, static_cast<int>(std::ceil(2.0 * r_ball / step)) + 1);
    const std::vector<double> axis = linspace(-r_ball, r_ball, per_axis);

    std::map<std::vector<int>, int> cells;  // cell index -> center slot
    std::vector<Point> centers;

    Point x(dim);
    std::vector<int> counter(dim, 0);
    auto covered = [&](const Point& p) {
        // any covering center lies within two cells of p in every axis
        const std::vector<int> home = lat.cell_of(p);
        std::vector<int> probe(dim);
        std::vector<int> off(dim, -2);
        for (;;) {
            bool valid = true;
            for (int d = 0; d < dim; ++d) {
                probe[d] = home[d] + off[d];
                if (probe[d] < 0 || probe[d] >= lat.n_ax) valid = false;
            }
            if (valid) {
                auto it = cells.find(probe);
                if (it != cells.end() &&
                    point_dist(p, centers[it->second], norm) <= r_cover * (1.0 + 1e-12))
                    return true;
            }
            int d = 0;
            while (d < dim && ++off[d] > 2) off[d++] = -2;
            if (d == dim) return false;
        }
    };

    for (;;) {
        for (int d = 0; d < dim; ++d) x[d] = axis[counter[d]];
        if (vec_norm(x, norm) <= r_ball * (1.0 + 1e-12)) {
            if (!covered(x)) {
                const std::vector<int> idx = lat.cell_of(x);
                cells.emplace(idx, static_cast<int>(centers.size()));
                centers.push_back(lat.center_of(idx));
            }
        }
        int d = 0;
        while (d < dim && ++counter[d] >= per_axis) counter[d++] = 0;
        if (d == dim) break;
    }

    const double bound = covering_count_bound(dim, r_ball / r_cover);
    if (static_cast<double>(centers.size()) > bound)
        throw NumericError("NUMERIC_LEMMA_VIOLATION",
                           "greedy cover used " + std::to_string(centers.size()) +
                               " centers, above the lemma bound " + std::to_string(bound));

    // exhaustive coverage audit over the same sample
    std::fill(counter.begin(), counter.end(), 0);
    for (;;) {
        for (int d = 0; d < dim; ++d) x[d] = axis[counter[d]];
        if (vec_norm(x, norm) <= r_ball * (1.0 + 1e-12) && !covered(x))
            throw NumericError("NUMERIC_COVER", "sample point left uncovered");
        int d = 0;
        while (d < dim && ++counter[d] >= per_axis) counter[d++] = 0;
        if (d == dim) break;
    }
    return centers;
}

double hausdorff_semidist(const PointCloud& a, const PointCloud& b) {
    a.validate();
    b.validate();
    if (a.dim != b.dim) throw UsageError("USAGE_CLOUD", "cloud dimensions differ");
    double sup = 0.0;
    for (const auto& p : a.pts) {
        double inf = std::numeric_limits<double>::infinity();
        for (const auto& q : b.pts) inf = std::min(inf, point_dist(p, q, a.norm));
        sup = std::max(sup, inf);
    }
    return sup;
}

Point MapSystem::project(const Point& x) const {
    Point out(x.size(), 0.0);
    for (int c : p_coords) out[c] = x[c];
    return out;
}

Point MapSystem::complement(const Point& x) const {
    Point out = x;
    for (int c : p_coords) out[c] = 0.0;
    return out;
}

CoveringTree build_covering_tree(const MapSystem& sys, const bounds::SqueezingCertificate& cert,
                                 double R_B, int levels, const PointCloud& cloud) {
    cloud.validate();
    if (levels < 1 || levels > 12) throw UsageError("USAGE_TREE", "levels must be in 1..12");
    if (static_cast<int>(sys.p_coords.size()) != cert.Lambda)
        throw UsageError("USAGE_TREE", "projection rank does not match the certificate Lambda");
    for (const auto& p : cloud.pts)
        if (vec_norm(p, sys.norm) > R_B * (1.0 + 1e-9))
            throw UsageError("USAGE_TREE", "cloud point outside the radius-R_B ball");

    CoveringTree tree;
    tree.zeta = cert.zeta;
    tree.R_B = R_B;
    tree.per_level_bound = cert.Lambda * std::pow(2.0, cert.Lambda) *
                           std::pow(1.0 + cert.M1_literal / cert.alpha, cert.Lambda);

    const double e0 = std::exp(cert.lambda0);
    const int pdim = cert.Lambda;

    // parent centers and the current iterates assigned to each of them;
    // level 0 is the single anchor at the origin holding the whole cloud
    std::vector<Point> parents = {Point(sys.dim, 0.0)};
    std::vector<std::vector<Point>> members = {cloud.pts};

    for (int level = 0; level < levels; ++level) {
        const double scale = std::pow(cert.zeta, level) * R_B;  // zeta^l R_B
        const double r_covered = cert.M1_literal * e0 * scale;
        const double r_cover = cert.alpha * e0 * scale;
        const double child_radius = std::pow(cert.zeta, level + 1) * R_B;

        std::vector<Point> new_centers;
        std::vector<std::vector<Point>> new_members;

        for (size_t pi = 0; pi < parents.size(); ++pi) {
            if (members[pi].empty()) continue;
            const Point anchor_image = sys.map(parents[pi]);
            const Point p_anchor = sys.project(anchor_image);
            const Point q_anchor = sys.complement(anchor_image);

            // Half-radius cells, with each center snapped to the first image
            // point landing in the cell: any two points of one cell are then
            // within r_cover of the center, and centers are projected images.
            const CellLattice lat(pdim, sys.norm, r_covered, 0.5 * r_cover);
            std::map<std::vector<int>, int> cells;

            for (const auto& pt : members[pi]) {
                const Point image = sys.map(pt);
                const Point p_img = sys.project(image);
                Point rel(pdim);
                for (int d = 0; d < pdim; ++d)
                    rel[d] = p_img[sys.p_coords[d]] - p_anchor[sys.p_coords[d]];
                if (vec_norm(rel, sys.norm) > r_covered * (1.0 + 1e-9))
                    throw NumericError("NUMERIC_TREE",
                                       "projected contraction bound violated at level " +
                                           std::to_string(level + 1));
                const std::vector<int> idx = lat.cell_of(rel);
                auto it = cells.find(idx);
                if (it == cells.end()) {
                    Point child = q_anchor;  // center update: y + (I-P) S(1) u
                    for (int d = 0; d < pdim; ++d)
                        child[sys.p_coords[d]] = p_img[sys.p_coords[d]];
                    it = cells.emplace(idx, static_cast<int>(new_centers.size())).first;
                    new_centers.push_back(child);
                    new_members.emplace_back();
                }
                const double d = point_dist(image, new_centers[it->second], sys.norm);
                if (d > child_radius * (1.0 + 1e-9))
                    throw NumericError(
                        "NUMERIC_TREE",
                        "covering radius violated at level " + std::to_string(level + 1) +
                            ", image point " + std::to_string(&pt - members[pi].data()));
                new_members[it->second].push_back(image);
            }
        }

        // (W2): per-level cardinality within [Lambda 2^Lambda (1+M1/alpha)^Lambda]^{m}
        const double card_bound = std::pow(tree.per_level_bound, level + 1);
        if (static_cast<double>(new_centers.size()) > card_bound)
            throw NumericError("NUMERIC_TREE", "center count above the per-level bound");

        tree.levels.push_back({child_radius, new_centers});
        parents = std::move(new_centers);
        members = std::move(new_members);

        // E^{n+1} = W^{n+1} u S(1) E^n
        std::vector<Point> e = tree.levels.back().centers;
        if (!tree.E.empty())
            for (const auto& p : tree.E.back()) e.push_back(sys.map(p));
        // (E2) cardinality audit
        double e_bound = 0.0;
        for (int i = 0; i <= level + 1; ++i) e_bound += std::pow(tree.per_level_bound, i);
        if (static_cast<double>(e.size()) > e_bound)
            throw NumericError("NUMERIC_TREE", "E-set count above the cumulative bound");
        tree.E.push_back(std::move(e));
    }
    return tree;
}

BoxCountResult box_counting_dimension(const PointCloud& cloud,
                                      std::span<const double> eps_ladder) {
    cloud.validate();
    if (eps_ladder.size() < 4) throw UsageError("USAGE_LADDER", "ladder needs at least 4 rungs");
    for (size_t i = 0; i < eps_ladder.size(); ++i) {
        if (!(eps_ladder[i] > 0.0)) throw UsageError("USAGE_LADDER", "ladder must be positive");
        if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
            throw UsageError("USAGE_LADDER", "ladder must be strictly decreasing");
    }

    // by-need cell covering, as in cover_ball: a point claims its lattice cell
    // of half-width eps, and N_eps is the number of claimed cells (an
    // eps-ball covering with centers at the cell midpoints)
    BoxCountResult res;
    res.eps.assign(eps_ladder.begin(), eps_ladder.end());
    for (double eps : eps_ladder) {
        const double w = cloud.norm == VecNorm::MaxAbs
                             ? eps
                             : eps / std::sqrt(static_cast<double>(cloud.dim));
        std::set<std::vector<long>> cells;
        std::vector<long> idx(cloud.dim);
        for (const auto& p : cloud.pts) {
            for (int d = 0; d < cloud.dim; ++d)
                idx[d] = static_cast<long>(std::floor(p[d] / (2.0 * w)));
            cells.insert(idx);
        }
        res.counts.push_back(static_cast<int>(cells.size()));
    }

    size_t first = 0;
    while (first < res.counts.size() - 2 && res.counts[first] <= 1) ++first;
    res.skipped_leading = static_cast<int>(first);

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(res.counts.size() - first);
    for (size_t i = first; i < res.counts.size(); ++i) {
        const double x = std::log(1.0 / res.eps[i]);
        const double y = std::log(static_cast<double>(res.counts[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    res.estimate = den > 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    return res;
}

AttractionReport verify_exponential_attraction(const MapSystem& sys, const CoveringTree& tree,
                                               const PointCloud& D, int horizon, double slack) {
    D.validate();
    PointCloud targets{D.dim, D.norm, {}, {}};
    for (const auto& level : tree.E)
        for (const auto& p : level) targets.pts.push_back(p);

    AttractionReport rep;
    rep.expected_rate = -std::log(tree.zeta);
    PointCloud iter = D;
    for (int n = 0; n <= horizon; ++n) {
        AttractionRow row;
        row.n = n;
        row.semidist = hausdorff_semidist(iter, targets);
        row.bound = std::pow(tree.zeta, n) * tree.R_B;
        rep.rows.push_back(row);
        if (n < horizon)
            for (auto& p : iter.pts) p = sys.map(p);
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (const auto& row : rep.rows) {
        if (row.semidist < 1e-13) continue;
        const double x = row.n;
        const double y = std::log(row.semidist);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 2) {
        const double den = m * sxx - sx * sx;
        rep.fitted_rate = den > 0.0 ? -(m * sxy - sx * sy) / den : 0.0;
        rep.pass = rep.fitted_rate >= rep.expected_rate * (1.0 - slack);
    } else {
        rep.fitted_rate = std::numeric_limits<double>::infinity();
        rep.pass = true;  // semidistance vanished everywhere
    }
    return rep;
}

}  // namespace attractorkit::covering
