#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "attractorkit/common.hpp"
#include "attractorkit/dde.hpp"

namespace attractorkit::spectral {

using Complex = std::complex<double>;

/// det Delta(lambda) with Delta(lambda) = (lambda + mode_offset) I - A - B e^{-lambda tau}.
/// mode_offset carries the k^2 shift of the per-mode reaction-diffusion equation.
struct CharacteristicFunction {
    int dim = 1;
    Eigen::MatrixXd A;
    dde::DelayCoefficient b;
    double tau = 1.0;
    double mode_offset = 0.0;

    static CharacteristicFunction from_model(const dde::DelayModel& model);
    static CharacteristicFunction scalar_mode(double a_coeff, double b_coeff, double delay,
                                              double offset);

    Eigen::MatrixXcd delta(Complex lambda) const;
    Eigen::MatrixXcd delta_deriv(Complex lambda) const;
    Complex det(Complex lambda) const;
    /// (det Delta, tr(Delta^{-1} Delta')); the Newton step is -1/trace.
    std::pair<Complex, Complex> det_and_trace(Complex lambda) const;
    double b_inf_norm() const { return b.inf_norm(dim); }
    double a_inf_norm() const;
};

struct CharacteristicRoot {
    Complex lambda;
    int multiplicity = 1;
    double residual = 0.0;
    int mode = -1;  // reaction-diffusion mode index, -1 for plain delay models
};

struct SearchRegion {
    double re_min, re_max, im_min, im_max;
    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
};

struct RootSearchOptions {
    double residual_tol = 1e-10;
    int max_depth = 64;
    int max_contour_attempts = 10;
    double multiple_root_diameter = 1e-8;
    int max_enlargements = 8;
};

/// Certificate of what was searched: region, total zero count, enlargement
/// history, and whether the imaginary window provably captures every root to
/// the right of the found abscissa.
struct RootSearchCertificate {
    SearchRegion region{};
    int winding_total = 0;
    int enlargements = 0;
    bool im_window_sufficient = false;
    double needed_im = 0.0;
};

/// Zero count (with multiplicity) inside the rectangle by boundary phase tracking.
int winding_number(const CharacteristicFunction& chi, const SearchRegion& region);

/// All characteristic roots in [re_min, re_max] x [-im_max, im_max].
std::vector<CharacteristicRoot> char_roots(const CharacteristicFunction& chi, double re_min,
                                           double re_max, double im_max,
                                           const RootSearchOptions& opts = {});

SearchRegion default_window(const CharacteristicFunction& chi);

struct RightmostResult {
    CharacteristicRoot root;
    std::vector<CharacteristicRoot> all_roots;
    RootSearchCertificate certificate;
};

/// Root maximizing Re(lambda); the window auto-enlarges on boundary hits and
/// until the imaginary extent provably suffices at the found abscissa.
RightmostResult rightmost_root(const CharacteristicFunction& chi,
                               const RootSearchOptions& opts = {});

struct SpectralLevel {
    double rho = 0.0;      // common real part
    int multiplicity = 0;  // summed over the level (conjugate pairs count twice)
};

/// Group roots into strictly decreasing distinct real parts.
std::vector<SpectralLevel> cluster_levels(const std::vector<CharacteristicRoot>& roots);

struct DecompositionOptions {
    RootSearchOptions search{};
    int quadrature_nodes = 64;
    double rank_tol = 1e-8;
};

/// Finite-dimensional spectral projection onto the span of the eigenfunctions
/// e^{lambda theta} xi for the leading k_m roots, realized through the adjoint
/// bilinear pairing <psi, phi> = psi(0) phi(0) + int_{-r}^0 psi(s + r) B phi(s) ds.
class SpectralDecomposition {
public:
    struct EigenPair {
        Complex lambda;
        Eigen::VectorXcd xi;   // right null vector of Delta(lambda)
        Eigen::VectorXcd eta;  // left null vector (transpose sense)
    };

    std::vector<SpectralLevel> levels;  // all enumerated levels, leading first
    int cut_m = 1;
    int k_m = 0;
    double delay_span = 1.0;
    int dim = 1;
    int quadrature_nodes = 64;

    // decay constants; NaN until estimated (sampled, not analytic)
    double K = std::numeric_limits<double>::quiet_NaN();
    double K0 = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double safety_factor = 0.0;

    double rho1() const { return levels.front().rho; }
    double rho_m() const { return levels[cut_m - 1].rho; }
    const std::vector<EigenPair>& basis() const { return basis_; }

    Eigen::VectorXcd pairing_coefficients(const dde::HistorySegment& phi) const;
    dde::HistorySegment project(const dde::HistorySegment& phi) const;
    dde::HistorySegment complement(const dde::HistorySegment& phi) const;
    /// Smallest singular value of the pairing Gram matrix (rank certificate).
    double gram_min_singular() const;

    friend SpectralDecomposition decompose_with_roots(const CharacteristicFunction&,
                                                      const std::vector<CharacteristicRoot>&, int,
                                                      const DecompositionOptions&);

private:
    std::vector<EigenPair> basis_;
    Eigen::MatrixXcd gram_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> gram_lu_;
    Eigen::MatrixXd b_matrix_;  // delayed coefficient as a dense matrix
    Quadrature quad_;
};

SpectralDecomposition decompose(const CharacteristicFunction& chi, int m,
                                const DecompositionOptions& opts = {});

/// Same, with the root enumeration supplied by the caller (used by the
/// per-mode reaction-diffusion analysis where roots are found mode by mode).
SpectralDecomposition decompose_with_roots(const CharacteristicFunction& chi,
                                           const std::vector<CharacteristicRoot>& roots, int m,
                                           const DecompositionOptions& opts = {});

struct DecayOptions {
    double h = 0.0;  // 0 -> tau/512
    double gamma_fraction = 0.9;
    double safety = 1.1;
    VecNorm norm = VecNorm::MaxAbs;
    int segment_steps = 128;
};

struct DecayEstimate {
    double K = 1.0;
    double K0 = 1.0;
    double gamma = 0.0;
    int sample_count = 0;
    uint64_t seed = 0;
    std::vector<double> t_grid;
    double safety = 1.1;
    double gamma_fraction = 0.9;
};

/// Sampled estimates of the dichotomy constants: gamma is a fraction of
/// -rho_1; K0 and K are suprema of measured decay ratios over random segments
/// and the given times, times a safety factor. Estimates, not proofs.
DecayEstimate estimate_decay_constants(const CharacteristicFunction& chi,
                                       const SpectralDecomposition& decomp, int sample_count,
                                       std::span<const double> t_grid, uint64_t seed,
                                       const DecayOptions& opts = {});

}  // namespace attractorkit::spectral
