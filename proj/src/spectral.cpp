#include "attractorkit/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace attractorkit::spectral {

CharacteristicFunction CharacteristicFunction::from_model(const dde::DelayModel& model) {
    CharacteristicFunction chi;
    chi.dim = model.dim;
    chi.A.resize(model.dim, model.dim);
    for (int i = 0; i < model.dim; ++i)
        for (int j = 0; j < model.dim; ++j)
            chi.A(i, j) = model.A[static_cast<size_t>(i) * model.dim + j];
    chi.b = model.b;
    chi.tau = model.tau;
    return chi;
}

CharacteristicFunction CharacteristicFunction::scalar_mode(double a_coeff, double b_coeff,
                                                           double delay, double offset) {
    CharacteristicFunction chi;
    chi.dim = 1;
    chi.A.resize(1, 1);
    chi.A(0, 0) = a_coeff;
    chi.b.is_scalar = true;
    chi.b.scalar = b_coeff;
    chi.tau = delay;
    chi.mode_offset = offset;
    return chi;
}

Eigen::MatrixXcd CharacteristicFunction::delta(Complex lambda) const {
    const Complex e = std::exp(-lambda * tau);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(dim, dim) * (lambda + mode_offset);
    d -= A.cast<Complex>();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) d(i, j) -= b.entry(i, j) * e;
    return d;
}

Eigen::MatrixXcd CharacteristicFunction::delta_deriv(Complex lambda) const {
    const Complex e = std::exp(-lambda * tau);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) d(i, j) += tau * b.entry(i, j) * e;
    return d;
}

Complex CharacteristicFunction::det(Complex lambda) const {
    if (dim == 1) return delta(lambda)(0, 0);
    return delta(lambda).partialPivLu().determinant();
}

std::pair<Complex, Complex> CharacteristicFunction::det_and_trace(Complex lambda) const {
    if (dim == 1) {
        const Complex f = delta(lambda)(0, 0);
        const Complex fp = delta_deriv(lambda)(0, 0);
        return {f, fp / f};
    }
    const Eigen::MatrixXcd d = delta(lambda);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(d);
    const Complex f = lu.determinant();
    const Eigen::MatrixXcd sol = lu.solve(delta_deriv(lambda));
    return {f, sol.trace()};
}

double CharacteristicFunction::a_inf_norm() const {
    double m = 0.0;
    for (int i = 0; i < dim; ++i) {
        double row = 0.0;
        for (int j = 0; j < dim; ++j) row += std::abs(A(i, j));
        m = std::max(m, row);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Root enumeration.
//
// Zeros of det Delta inside a rectangle are counted by tracking the argument
// of det Delta along the boundary (det Delta is entire, so the winding equals
// the zero count with multiplicity). Rectangles are subdivided recursively
// until each holds a single zero, which complex Newton then polishes. Cuts
// that land on a zero are detected (tiny modulus or unresolvable phase step)
// and retried at shifted fractions; the outer contour is inflated instead.
// ---------------------------------------------------------------------------

namespace {

struct ContourFailure {};  // cut or contour touches a zero; caller re-cuts/jitters

constexpr double kPhaseStep = 1.2;  // max accepted |d arg| per boundary sample pair
constexpr double kModulusFloor = 1e-280;

double edge_phase(const CharacteristicFunction& chi, Complex z1, Complex f1, Complex z2,
                  Complex f2, int depth) {
    if (std::abs(f1) < kModulusFloor || std::abs(f2) < kModulusFloor) throw ContourFailure{};
    if (!std::isfinite(std::abs(f1)) || !std::isfinite(std::abs(f2)))
        throw NumericError("NUMERIC_CONTOUR", "non-finite characteristic value on contour");
    const double d = std::arg(f2 / f1);
    if (std::abs(d) <= kPhaseStep) return d;
    if (depth >= 36) throw ContourFailure{};
    const Complex zm = 0.5 * (z1 + z2);
    const Complex fm = chi.det(zm);
    return edge_phase(chi, z1, f1, zm, fm, depth + 1) +
           edge_phase(chi, zm, fm, z2, f2, depth + 1);
}

double region_phase(const CharacteristicFunction& chi, const SearchRegion& r) {
    const Complex corners[5] = {{r.re_min, r.im_min},
                                {r.re_max, r.im_min},
                                {r.re_max, r.im_max},
                                {r.re_min, r.im_max},
                                {r.re_min, r.im_min}};
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        // the exponential term winds at rate tau along an edge, and adaptive
        // refinement cannot detect a full 2 pi slip between samples, so the
        // initial density must resolve that rate a priori
        const double len = std::abs(corners[e + 1] - corners[e]);
        const int init =
            std::clamp(static_cast<int>(std::ceil(len * chi.tau / 0.8)) + chi.dim, 8, 1 << 14);
        Complex zp = corners[e];
        Complex fp = chi.det(zp);
        for (int s = 1; s <= init; ++s) {
            const double u = static_cast<double>(s) / init;
            const Complex z = corners[e] + u * (corners[e + 1] - corners[e]);
            const Complex f = chi.det(z);
            total += edge_phase(chi, zp, fp, z, f, 0);
            zp = z;
            fp = f;
        }
    }
    return total / (2.0 * M_PI);
}

int region_winding(const CharacteristicFunction& chi, const SearchRegion& r) {
    const double turns = region_phase(chi, r);
    const long w = std::lround(turns);
    if (std::abs(turns - static_cast<double>(w)) > 0.2) throw ContourFailure{};
    if (w < 0) throw NumericError("NUMERIC_CONTOUR", "negative winding (contour corrupted)");
    return static_cast<int>(w);
}

std::optional<Complex> newton_polish(const CharacteristicFunction& chi, Complex z0, int mult,
                                     double target) {
    Complex z = z0;
    Complex best = z0;
    double best_f = std::abs(chi.det(z0));
    for (int it = 0; it < 100; ++it) {
        const auto [f, tr] = chi.det_and_trace(z);
        const double af = std::abs(f);
        if (std::isfinite(af) && af < best_f) {
            best_f = af;
            best = z;
        }
        if (!std::isfinite(af)) break;
        if (af == 0.0) return z;
        const double atr = std::abs(tr);
        if (!std::isfinite(atr) || atr == 0.0) break;
        const Complex step = -static_cast<double>(mult) / tr;
        z += step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) {
            const double ff = std::abs(chi.det(z));
            if (ff < best_f) {
                best_f = ff;
                best = z;
            }
            break;
        }
    }
    if (best_f < target) return best;
    return std::nullopt;
}

bool inside(const SearchRegion& r, Complex z, double slack) {
    return z.real() >= r.re_min - slack && z.real() <= r.re_max + slack &&
           z.imag() >= r.im_min - slack && z.imag() <= r.im_max + slack;
}

constexpr double kCutFractions[] = {0.5, 0.55, 0.45, 0.6, 0.4, 0.65, 0.35, 0.52, 0.48};

void subdivide(const CharacteristicFunction& chi, const SearchRegion& region, int winding,
               int depth, const RootSearchOptions& opts, std::vector<CharacteristicRoot>& out) {
    if (winding == 0) return;
    const double diam = std::hypot(region.width(), region.height());
    const Complex center(0.5 * (region.re_min + region.re_max),
                         0.5 * (region.im_min + region.im_max));

    if (winding >= 2 && diam < opts.multiple_root_diameter) {
        const Complex z = newton_polish(chi, center, winding, opts.residual_tol).value_or(center);
        out.push_back({z, winding, std::abs(chi.det(z))});
        return;
    }
    if (winding == 1) {
        if (auto z = newton_polish(chi, center, 1, opts.residual_tol)) {
            if (inside(region, *z, 1e-9 + 0.05 * diam)) {
                out.push_back({*z, 1, std::abs(chi.det(*z))});
                return;
            }
        }
        // Newton escaped or stalled; keep shrinking the box around the zero
    }
    if (depth >= opts.max_depth)
        throw NumericError("NUMERIC_ENUMERATION",
                           "subdivision depth exhausted with unresolved zeros");

    const bool cut_re = region.width() >= region.height();
    for (double frac : kCutFractions) {
        SearchRegion r1 = region, r2 = region;
        if (cut_re) {
            const double c = region.re_min + frac * region.width();
            r1.re_max = c;
            r2.re_min = c;
        } else {
            const double c = region.im_min + frac * region.height();
            r1.im_max = c;
            r2.im_min = c;
        }
        try {
            const int w1 = region_winding(chi, r1);
            const int w2 = region_winding(chi, r2);
            if (w1 + w2 != winding) continue;  // aliasing or zero on the cut
            subdivide(chi, r1, w1, depth + 1, opts, out);
            subdivide(chi, r2, w2, depth + 1, opts, out);
            return;
        } catch (const ContourFailure&) {
            continue;
        }
    }
    throw NumericError("NUMERIC_ENUMERATION", "could not place a cut avoiding all zeros");
}

void symmetrize_conjugates(std::vector<CharacteristicRoot>& roots) {
    constexpr double kImSnap = 1e-9;
    for (auto& r : roots)
        if (std::abs(r.lambda.imag()) < kImSnap) r.lambda.imag(0.0);
    for (auto& r : roots) {
        if (r.lambda.imag() <= 0.0) continue;
        for (auto& s : roots) {
            if (s.lambda.imag() >= 0.0) continue;
            if (std::abs(s.lambda - std::conj(r.lambda)) < 1e-7 * (1.0 + std::abs(r.lambda))) {
                const Complex avg = 0.5 * (r.lambda + std::conj(s.lambda));
                r.lambda = avg;
                s.lambda = std::conj(avg);
                break;
            }
        }
    }
}

}  // namespace

int winding_number(const CharacteristicFunction& chi, const SearchRegion& region) {
    try {
        return region_winding(chi, region);
    } catch (const ContourFailure&) {
        throw NumericError("NUMERIC_CONTOUR", "root on or near the requested contour");
    }
}

std::vector<CharacteristicRoot> char_roots(const CharacteristicFunction& chi, double re_min,
                                           double re_max, double im_max,
                                           const RootSearchOptions& opts) {
    if (!(re_min < re_max) || !(im_max > 0.0))
        throw UsageError("USAGE_WINDOW", "need re_min < re_max and im_max > 0");
    SearchRegion region{re_min, re_max, -im_max, im_max};
    const double scale = std::hypot(region.width(), region.height());

    std::vector<CharacteristicRoot> roots;
    int winding = -1;
    for (int attempt = 0; attempt <= opts.max_contour_attempts; ++attempt) {
        try {
            winding = region_winding(chi, region);
            roots.clear();
            subdivide(chi, region, winding, 0, opts, roots);
            break;
        } catch (const ContourFailure&) {
            if (attempt == opts.max_contour_attempts)
                throw NumericError("NUMERIC_CONTOUR",
                                   "contour repeatedly hit a root despite jitter");
            const double eps = scale * 1e-9 * std::pow(4.0, attempt);
            region.re_min -= eps;
            region.re_max += eps;
            region.im_min -= eps;
            region.im_max += eps;
        }
    }

    // a multiple root perturbed by rounding splits into a cluster at the
    // sqrt(eps) scale; clusters within the multiple-root diameter are one root
    std::vector<CharacteristicRoot> merged;
    for (const auto& r : roots) {
        bool found = false;
        for (auto& m : merged) {
            if (std::abs(m.lambda - r.lambda) <
                opts.multiple_root_diameter * (1.0 + std::abs(r.lambda))) {
                m.lambda = 0.5 * (m.lambda + r.lambda);
                m.multiplicity += r.multiplicity;
                found = true;
                break;
            }
        }
        if (!found) merged.push_back(r);
    }
    for (auto& r : merged)
        if (r.multiplicity > 1)
            r.lambda = newton_polish(chi, r.lambda, r.multiplicity, opts.residual_tol)
                           .value_or(r.lambda);
    symmetrize_conjugates(merged);
    for (auto& r : merged) {
        r.residual = std::abs(chi.det(r.lambda));
        if (r.residual > opts.residual_tol)
            throw NumericError("NUMERIC_ENUMERATION", "root residual above tolerance");
    }
    std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
        const double ia = std::abs(a.lambda.imag()), ib = std::abs(b.lambda.imag());
        if (ia != ib) return ia < ib;
        return a.lambda.imag() > b.lambda.imag();
    });
    return merged;
}

SearchRegion default_window(const CharacteristicFunction& chi) {
    const double an = chi.a_inf_norm() + chi.mode_offset;
    const double bn = chi.b_inf_norm();
    double re_min = std::min(-10.0, 5.0 * (-an - bn));
    re_min = std::max(re_min, -600.0 / chi.tau);  // exp overflow guard
    const double im = std::max(20.0, 4.0 * M_PI / chi.tau);
    return {re_min, 1.0, -im, im};
}

RightmostResult rightmost_root(const CharacteristicFunction& chi, const RootSearchOptions& opts) {
    SearchRegion region = default_window(chi);
    const double an = chi.a_inf_norm() + chi.mode_offset;
    const double bn = chi.b_inf_norm();

    RightmostResult res;
    res.certificate.enlargements = 0;
    for (int pass = 0;; ++pass) {
        if (pass > opts.max_enlargements)
            throw NumericError("NUMERIC_WINDOW",
                               "window kept growing; suggested bounds re_min=" +
                                   std::to_string(region.re_min * 2.0) +
                                   " im_max=" + std::to_string(region.im_max * 2.0));
        auto roots = char_roots(chi, region.re_min, region.re_max, region.im_max, opts);
        if (roots.empty()) {
            region.re_min -= std::max(5.0, std::abs(region.re_min));
            region.im_max *= 2.0;
            region.im_min = -region.im_max;
            ++res.certificate.enlargements;
            continue;
        }
        const double sigma = roots.front().lambda.real();
        const double margin = 1e-6 * std::max(region.width(), region.height());
        bool grow = false;
        for (const auto& r : roots) {
            if (r.lambda.real() > region.re_max - margin) {
                region.re_max += std::max(5.0, 0.5 * region.width());
                grow = true;
                break;
            }
            if (std::abs(r.lambda.imag()) > region.im_max - margin) {
                region.im_max *= 2.0;
                region.im_min = -region.im_max;
                grow = true;
                break;
            }
        }
        if (!grow) {
            // a priori: roots with Re >= sigma satisfy |lambda| <= |A| + |B| e^{-sigma tau}
            const double needed = an + bn * std::exp(-sigma * chi.tau);
            if (region.im_max < needed) {
                region.im_max = needed * 1.05;
                region.im_min = -region.im_max;
                grow = true;
            } else if (region.re_max < needed &&
                       region.re_max < an + bn * std::exp(-region.re_max * chi.tau)) {
                region.re_max = an + bn + 1.0;
                grow = true;
            }
            if (!grow) {
                res.root = roots.front();
                res.all_roots = std::move(roots);
                res.certificate.region = region;
                res.certificate.needed_im = needed;
                res.certificate.im_window_sufficient = region.im_max >= needed;
                int total = 0;
                for (const auto& r : res.all_roots) total += r.multiplicity;
                res.certificate.winding_total = total;
                return res;
            }
        }
        ++res.certificate.enlargements;
    }
}

std::vector<SpectralLevel> cluster_levels(const std::vector<CharacteristicRoot>& roots) {
    std::vector<const CharacteristicRoot*> sorted;
    sorted.reserve(roots.size());
    for (const auto& r : roots) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->lambda.real() > b->lambda.real(); });
    std::vector<SpectralLevel> levels;
    for (const auto* r : sorted) {
        const double re = r->lambda.real();
        if (!levels.empty() && std::abs(levels.back().rho - re) < 1e-7 * (1.0 + std::abs(re))) {
            levels.back().multiplicity += r->multiplicity;
        } else {
            levels.push_back({re, r->multiplicity});
        }
    }
    return levels;
}

SpectralDecomposition decompose(const CharacteristicFunction& chi, int m,
                                const DecompositionOptions& opts) {
    SearchRegion region = default_window(chi);
    const double an = chi.a_inf_norm() + chi.mode_offset;
    const double bn = chi.b_inf_norm();
    for (int pass = 0; pass <= opts.search.max_enlargements; ++pass) {
        auto roots = char_roots(chi, region.re_min, region.re_max, region.im_max, opts.search);
        auto levels = cluster_levels(roots);
        if (static_cast<int>(levels.size()) >= m) {
            const double rho_m = levels[m - 1].rho;
            const double needed = an + bn * std::exp(-rho_m * chi.tau);
            if (region.im_max >= needed) return decompose_with_roots(chi, roots, m, opts);
            region.im_max = needed * 1.05;
            region.im_min = -region.im_max;
        } else {
            region.re_min = region.re_min * 1.5 - 5.0;
            region.re_min = std::max(region.re_min, -600.0 / chi.tau);
        }
    }
    throw UsageError("USAGE_CUT_INDEX", "cut index m exceeds the enumerable root levels");
}

SpectralDecomposition decompose_with_roots(const CharacteristicFunction& chi,
                                           const std::vector<CharacteristicRoot>& roots, int m,
                                           const DecompositionOptions& opts) {
    if (m < 1) throw UsageError("USAGE_CUT_INDEX", "cut index must be >= 1");
    auto levels = cluster_levels(roots);
    if (static_cast<int>(levels.size()) < m)
        throw UsageError("USAGE_CUT_INDEX", "cut index m exceeds enumerated root levels");

    SpectralDecomposition dec;
    dec.levels = levels;
    dec.cut_m = m;
    dec.delay_span = chi.tau;
    dec.dim = chi.dim;
    dec.quadrature_nodes = opts.quadrature_nodes;
    const double rho_m = levels[m - 1].rho;
    const double tol = 1e-7 * (1.0 + std::abs(rho_m));

    dec.b_matrix_.resize(chi.dim, chi.dim);
    for (int i = 0; i < chi.dim; ++i)
        for (int j = 0; j < chi.dim; ++j) dec.b_matrix_(i, j) = chi.b.entry(i, j);

    for (const auto& r : roots) {
        if (r.lambda.real() < rho_m - tol) continue;
        const Eigen::MatrixXcd d = chi.delta(r.lambda);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sing = svd.singularValues();
        // tolerance on the scale of the matrix entries, not sigma_max (which
        // vanishes at a scalar root)
        const double scale = 1.0 + std::abs(r.lambda) + chi.mode_offset + chi.a_inf_norm() +
                             chi.b_inf_norm() * std::exp(-r.lambda.real() * chi.tau);
        const double null_tol = 1e-8 * scale;
        int geo = 0;
        for (int i = 0; i < sing.size(); ++i)
            if (sing(i) < null_tol) ++geo;
        if (geo < r.multiplicity)
            throw NumericError("NUMERIC_DECOMPOSE",
                               "defective root cluster beyond resolvable multiplicity");
        // right null vectors of Delta and of Delta^T (transpose, not adjoint)
        Eigen::JacobiSVD<Eigen::MatrixXcd> svdT(d.transpose(),
                                                Eigen::ComputeFullU | Eigen::ComputeFullV);
        for (int g = 0; g < r.multiplicity; ++g) {
            SpectralDecomposition::EigenPair p;
            p.lambda = r.lambda;
            p.xi = svd.matrixV().col(chi.dim - 1 - g);
            p.eta = svdT.matrixV().col(chi.dim - 1 - g);
            dec.basis_.push_back(std::move(p));
        }
        dec.k_m += r.multiplicity;
    }

    dec.quad_ = gauss_legendre(opts.quadrature_nodes, -chi.tau, 0.0);
    const int k = dec.k_m;
    dec.gram_.resize(k, k);
    const double r_span = chi.tau;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const auto& pi = dec.basis_[i];
            const auto& pj = dec.basis_[j];
            const Complex head = pi.eta.transpose() * pj.xi;
            const Complex coupling = pi.eta.transpose() * dec.b_matrix_.cast<Complex>() * pj.xi;
            Complex integral = 0.0;
            for (size_t q = 0; q < dec.quad_.nodes.size(); ++q) {
                const double x = dec.quad_.nodes[q];
                integral += dec.quad_.weights[q] *
                            std::exp(-pi.lambda * (x + r_span) + pj.lambda * x);
            }
            dec.gram_(i, j) = head + coupling * integral;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> gsvd(dec.gram_);
    if (gsvd.singularValues()(k - 1) < opts.rank_tol * gsvd.singularValues()(0))
        throw NumericError("NUMERIC_DECOMPOSE", "pairing Gram matrix numerically singular");
    dec.gram_lu_.compute(dec.gram_);
    return dec;
}

Eigen::VectorXcd SpectralDecomposition::pairing_coefficients(
    const dde::HistorySegment& phi) const {
    if (phi.dim != dim) throw UsageError("USAGE_SEGMENT", "segment dimension mismatch");
    const int k = k_m;
    Eigen::VectorXcd beta(k);
    std::vector<double> buf(dim);
    Eigen::VectorXd phi0(dim), phix(dim);
    phi.value_at(0.0, buf);
    for (int c = 0; c < dim; ++c) phi0(c) = buf[c];
    // Composite two-point panels aligned with the segment grid: extracted
    // segments have derivative jumps at grid points (breakpoint images), where
    // a single global rule loses accuracy.
    constexpr double kOff = 0.28867513459481287;  // 1/(2 sqrt 3)
    const size_t panels = phi.grid.size() - 1;
    std::vector<double> nodes(2 * panels), weights(2 * panels);
    for (size_t i = 0; i < panels; ++i) {
        const double lo = phi.grid[i], hi = phi.grid[i + 1];
        const double mid = 0.5 * (lo + hi), len = hi - lo;
        nodes[2 * i] = mid - kOff * len;
        nodes[2 * i + 1] = mid + kOff * len;
        weights[2 * i] = weights[2 * i + 1] = 0.5 * len;
    }
    Eigen::MatrixXd bphi(dim, static_cast<int>(nodes.size()));
    for (size_t q = 0; q < nodes.size(); ++q) {
        phi.value_at(nodes[q], buf);
        for (int c = 0; c < dim; ++c) phix(c) = buf[c];
        bphi.col(static_cast<int>(q)) = b_matrix_ * phix;
    }
    for (int i = 0; i < k; ++i) {
        const auto& p = basis_[i];
        Complex acc = p.eta.transpose() * phi0.cast<Complex>();
        for (size_t q = 0; q < nodes.size(); ++q) {
            const Complex w = weights[q] * std::exp(-p.lambda * (nodes[q] + delay_span));
            acc += w * (p.eta.transpose() * bphi.col(static_cast<int>(q)).cast<Complex>())(0);
        }
        beta(i) = acc;
    }
    return gram_lu_.solve(beta);
}

dde::HistorySegment SpectralDecomposition::project(const dde::HistorySegment& phi) const {
    const Eigen::VectorXcd c = pairing_coefficients(phi);
    dde::HistorySegment out = phi;
    for (size_t g = 0; g < phi.grid.size(); ++g) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
        for (int j = 0; j < k_m; ++j)
            acc += c(j) * std::exp(basis_[j].lambda * phi.grid[g]) * basis_[j].xi;
        for (int d = 0; d < dim; ++d) out.values[g * dim + d] = acc(d).real();
    }
    return out;
}

dde::HistorySegment SpectralDecomposition::complement(const dde::HistorySegment& phi) const {
    return dde::segment_sub(phi, project(phi));
}

double SpectralDecomposition::gram_min_singular() const {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram_);
    return svd.singularValues()(k_m - 1);
}

DecayEstimate estimate_decay_constants(const CharacteristicFunction& chi,
                                       const SpectralDecomposition& decomp, int sample_count,
                                       std::span<const double> t_grid, uint64_t seed,
                                       const DecayOptions& opts) {
    if (t_grid.empty()) throw UsageError("USAGE_GRID", "t_grid must be nonempty");
    if (decomp.rho1() >= 0.0)
        throw HypothesisError("HYPOTHESIS_UNSTABLE_RHO1",
                              "decay constants require rho_1 < 0");
    double h = opts.h > 0.0 ? opts.h : chi.tau / 512.0;
    h = chi.tau / std::max(1.0, std::round(chi.tau / h));

    dde::DelayModel lin;
    lin.dim = chi.dim;
    lin.A.assign(static_cast<size_t>(chi.dim) * chi.dim, 0.0);
    for (int i = 0; i < chi.dim; ++i)
        for (int j = 0; j < chi.dim; ++j)
            lin.A[static_cast<size_t>(i) * chi.dim + j] =
                chi.A(i, j) - (i == j ? chi.mode_offset : 0.0);
    lin.b = chi.b;
    lin.tau = chi.tau;

    DecayEstimate est;
    est.gamma_fraction = opts.gamma_fraction;
    est.gamma = opts.gamma_fraction * (-decomp.rho1());
    est.safety = opts.safety;
    est.sample_count = sample_count;
    est.seed = seed;
    est.t_grid.assign(t_grid.begin(), t_grid.end());

    const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
    const double rho_m = decomp.rho_m();
    const int steps = static_cast<int>(std::lround(chi.tau / h));

    Rng rng(seed);
    double k0_ratio = 0.0, k_ratio = 0.0;
    for (int s = 0; s < sample_count; ++s) {
        // differences of two draws: the constants are applied to trajectory
        // differences downstream, so calibrate on the same family
        dde::HistorySegment phi = dde::segment_sub(
            dde::random_segment(chi.tau, chi.dim, steps, rng, 1.0),
            dde::random_segment(chi.tau, chi.dim, steps, rng, 1.0));
        const double nphi = phi.norm(opts.norm);
        if (nphi == 0.0) continue;
        const auto traj = dde::integrate(lin, phi, t_max, h);
        const dde::HistorySegment qphi = decomp.complement(phi);
        const auto qtraj = dde::integrate(lin, qphi, t_max, h);
        for (double t : t_grid) {
            const double full = traj.segment_at(t).norm(opts.norm);
            k0_ratio = std::max(k0_ratio, full * std::exp(est.gamma * t) / nphi);
            const double tail = qtraj.segment_at(t).norm(opts.norm);
            k_ratio = std::max(k_ratio, tail * std::exp(-rho_m * t) / nphi);
        }
    }
    est.K0 = opts.safety * k0_ratio;
    est.K = opts.safety * k_ratio;
    return est;
}

}  // namespace attractorkit::spectral
