#pragma once

#include <span>
#include <string>
#include <vector>

#include "attractorkit/dde.hpp"
#include "attractorkit/spectral.hpp"

namespace attractorkit::bounds {

struct AbsorbingSet {
    double radius = 0.0;  // R_B
    double K0 = 0.0, gamma = 0.0, L_f = 0.0, c1 = 0.0;
    bool valid = false;  // K0 L_f - gamma < 0 held at construction
};

/// R_B = 1/(1-K0) * [K0 L_f c1 / gamma + 1/(gamma - K0 L_f)], as printed.
AbsorbingSet absorbing_set(double K0, double gamma, double L_f, double c1);

/// T_D = (1/gamma) ln[ r_D gamma (1-K0)(gamma - K0 L_f) /
///                     (K0 L_f c1 (gamma - K0 L_f) + gamma) ], clamped at 0.
double absorption_time(const AbsorbingSet& set, double r_D);

/// The contraction certificate: difference of two trajectories splits into a
/// finite-dimensional part growing at most like M1 e^{lambda0 t} and a tail
/// decaying like M2 e^{lambda1 t} + M3 e^{lambda0 t}; zeta is the time-1
/// contraction factor alpha e^{lambda0} + M2 e^{lambda1} + M3 e^{lambda0}.
struct SqueezingCertificate {
    int Lambda = 1;  // dim of the projected range (k_m)
    double M1_literal = 2.0;
    double M1_conservative = 2.0;  // K0 + K; used for empirical pass/fail
    double M2 = 0.0;
    double M3 = 0.0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double alpha = 1.0;
    double zeta = 0.0;
    bool admissible = false;           // zeta < 1
    std::string formula = "rfde";      // which theorem assembled the constants
};

/// Constants from the delay-equation squeezing theorem: lambda0 = L_f K0 - gamma,
/// M2 = K, lambda1 = rho_m, M3 = K L_f K0 / (-gamma + L_f K0 - rho_m).
SqueezingCertificate squeezing_certificate(const spectral::SpectralDecomposition& decomp,
                                           double L_f, double alpha);

double zeta_of_alpha(const SqueezingCertificate& cert, double alpha);

enum class M1Choice { Literal, Conservative };

struct DimensionBoundReport {
    double bound = 0.0;
    int Lambda = 1;
    double M1 = 2.0;
    double alpha = 1.0;
    double zeta = 0.0;
    std::string formula = "general";
};

/// Lambda [ln Lambda + ln(2 + M1/alpha)] / (-ln zeta).
double general_dimension_bound(int Lambda, double M1, double alpha, double zeta);

DimensionBoundReport dimension_bound(const SqueezingCertificate& cert,
                                     M1Choice m1 = M1Choice::Literal);

/// Specialized forms for a simple leading root (k_1 = 1).
double corollary_bound_rfde(double alpha, double K, double K0, double L_f, double rho1);
double corollary_bound_rrd(double alpha, double K, double L_f, double rho1);

struct AlphaOptimum {
    bool feasible = false;
    double alpha = 0.0;
    double min_zeta = 0.0;  // infimum of zeta over the grid when infeasible
    DimensionBoundReport report;
};

struct AlphaOptions {
    int grid_points = 256;
    double rel_tol = 1e-6;
    M1Choice m1 = M1Choice::Literal;
};

/// Minimize the bound over alpha for fixed e^{lambda0} and tail term
/// M2 e^{lambda1} + M3 e^{lambda0} (log grid + golden-section refinement).
AlphaOptimum minimize_bound_over_alpha(int Lambda, double M1, double e_lambda0, double tail,
                                       const AlphaOptions& opts = {});

AlphaOptimum optimize_alpha(const spectral::SpectralDecomposition& decomp, double L_f,
                            const AlphaOptions& opts = {});

struct SqueezeRow {
    int pair = 0;
    double t = 0.0;
    double lhs_p = 0.0, rhs_p = 0.0;
    double lhs_q = 0.0, rhs_q = 0.0;
    bool pass = true;
};

struct SqueezeReport {
    std::vector<SqueezeRow> rows;
    int pairs = 0;
    double slack = 0.05;
    int resamples = 0;
    double pass_rate = 0.0;
    double worst_margin = 0.0;  // max lhs/rhs over both inequalities
    bool pass = false;
};

struct VerifyOptions {
    double h = 1e-3;
    double slack = 0.05;
    VecNorm norm = VecNorm::MaxAbs;
    int max_resamples = 50;
};

/// Empirical check of both squeezing inequalities along simulated pairs drawn
/// from the absorbing ball, against the certificate right-hand sides with the
/// conservative M1.
SqueezeReport verify_squeezing(const dde::DelayModel& model,
                               const spectral::SpectralDecomposition& decomp,
                               const SqueezingCertificate& cert, const AbsorbingSet& set,
                               int n_pairs, std::span<const double> t_grid, uint64_t seed,
                               const VerifyOptions& opts = {});

struct AbsorptionRow {
    int sample = 0;
    double entry_time = -1.0;  // first grid time with ||u_t|| <= R_B
    bool pass = false;
};

struct AbsorptionReport {
    std::vector<AbsorptionRow> rows;
    double T_D = 0.0;
    double deadline = 0.0;  // T_D * (1 + slack)
    bool pass = false;
};

/// Segments of norm r_D must enter the ball of radius R_B no later than the
/// printed T_D (with slack).
AbsorptionReport verify_absorption(const dde::DelayModel& model, const AbsorbingSet& set,
                                   double r_D, int count, uint64_t seed,
                                   const VerifyOptions& opts = {});

struct InvarianceReport {
    double max_norm = 0.0;
    bool pass = false;
};

/// Trajectories started inside the ball stay inside over the horizon.
InvarianceReport verify_invariance(const dde::DelayModel& model, const AbsorbingSet& set,
                                   int count, double horizon, uint64_t seed,
                                   const VerifyOptions& opts = {});

}  // namespace attractorkit::bounds
