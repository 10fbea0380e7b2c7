#pragma once

#include <vector>

#include "attractorkit/bounds.hpp"
#include "attractorkit/dde.hpp"
#include "attractorkit/spectral.hpp"

namespace attractorkit::rds {

/// u_t = u_xx - a u - b u(t-r) + f(u(t-r)) on (0, pi), Dirichlet boundary,
/// reduced onto the sine eigenbasis of the Laplacian.
struct RdModel {
    double a = 1.0;
    double b = 0.0;
    double r = 1.0;
    dde::Nonlinearity f;
    double lipschitz = 0.0;
    double f0_norm = 0.0;
    int n_modes = 16;

    void validate() const;
    bool hypothesis_b_minus_a() const { return b - a < 1.0; }
};

/// Sine-basis truncation: an n_modes-dimensional delay model with
/// instantaneous matrix diag(-k^2 - a), delayed coefficient -b I, and the
/// nonlinearity applied pointwise in physical space through the transform.
dde::DelayModel galerkin_reduce(const RdModel& model);

struct ModeRoots {
    int mode = 1;
    std::vector<spectral::CharacteristicRoot> roots;
};

struct ModeSpectrum {
    std::vector<ModeRoots> per_mode;
    std::vector<spectral::SpectralLevel> levels;  // global, leading first
    double rho1 = 0.0;
    bool hypothesis_b_minus_a = false;
    bool stable_certified = false;  // rho1 < 0 confirmed and hypothesis holds
    bool tail_certified = false;    // modes beyond n_modes provably below the cut
    int n_modes = 0;

    std::vector<spectral::CharacteristicRoot> all_roots() const;
};

/// Per-mode characteristic roots lambda + k^2 + a + b e^{-lambda r} = 0 and the
/// global ordering of real parts across modes.
ModeSpectrum mode_spectrum(const RdModel& model, const spectral::RootSearchOptions& opts = {});

/// Projection for the reduced system assembled from the per-mode roots.
spectral::SpectralDecomposition rd_decompose(const RdModel& model, const ModeSpectrum& spectrum,
                                             int m, const spectral::DecompositionOptions& opts = {});

struct DissipativityRow {
    double t = 0.0;
    double norm = 0.0;
    double rhs = 0.0;
};

struct DissipativityReport {
    std::vector<DissipativityRow> rows;
    bool gamma_above_a = false;       // the stated gamma > a condition
    bool attractor_condition = false; // a > L_f e^{gamma r}
    bool pass = false;
    double slack = 0.05;
};

struct DissipativityOptions {
    double h = 0.0;  // 0 -> r/256
    double slack = 0.05;
    int time_samples = 64;
};

/// Simulated ||x_t|| (sup-over-theta L2 field norm) against the printed decay
/// envelope c1 e^{gr}/(a - L e^{gr}) + e^{gr}(||phi|| - c1/(a - L e^{gr})) e^{(L e^{gr}-a)t}.
DissipativityReport dissipativity_check(const RdModel& model, const dde::HistorySegment& phi,
                                        double gamma, double horizon,
                                        const DissipativityOptions& opts = {});

/// X-norm of a coefficient segment: sup over the grid of the L2 field norm.
double segment_field_norm(const dde::HistorySegment& seg);

struct RdBoundOptions {
    double h = 0.0;  // 0 -> r/512
    int sample_count = 30;
    uint64_t seed = 2027;
    std::vector<double> t_grid;  // empty -> {0.25, 0.5, ..., 5} * r
    double safety = 1.1;
    spectral::RootSearchOptions search{};
};

struct RdBoundResult {
    bounds::SqueezingCertificate cert;
    bounds::DimensionBoundReport report;
    double K = 0.0;
    int k_m = 0;
    double rho1 = 0.0, rho_m = 0.0;
    ModeSpectrum spectrum;
};

/// Squeezing constants for the reaction-diffusion case: lambda0 = L_f + rho1,
/// M2 = K, lambda1 = rho_m, M3 = K L_f / (rho1 + L_f - rho_m); bound
/// k_m [ln k_m + ln(2 + 2/alpha)] / (-ln zeta).
bounds::SqueezingCertificate rd_squeezing_certificate(double rho1, double rho_m, int k_m,
                                                      double K, double L_f, double alpha);

RdBoundResult rd_dimension_bound(const RdModel& model, int m, double alpha,
                                 const RdBoundOptions& opts = {});

}  // namespace attractorkit::rds
