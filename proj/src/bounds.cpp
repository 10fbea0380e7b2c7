#include "attractorkit/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace attractorkit::bounds {

AbsorbingSet absorbing_set(double K0, double gamma, double L_f, double c1) {
    if (!(gamma > 0.0)) throw UsageError("USAGE_BOUNDS", "gamma must be positive");
    if (!(K0 > 0.0)) throw UsageError("USAGE_BOUNDS", "K0 must be positive");
    if (K0 >= 1.0)
        throw HypothesisError("HYPOTHESIS_K0_GE_ONE", "absorbing set requires K0 < 1");
    if (K0 * L_f - gamma >= 0.0)
        throw HypothesisError("HYPOTHESIS_NO_ABSORPTION",
                              "absorbing set requires K0 L_f < gamma");
    AbsorbingSet set;
    set.K0 = K0;
    set.gamma = gamma;
    set.L_f = L_f;
    set.c1 = c1;
    set.radius = 1.0 / (1.0 - K0) * (K0 * L_f * c1 / gamma + 1.0 / (gamma - K0 * L_f));
    set.valid = true;
    return set;
}

double absorption_time(const AbsorbingSet& set, double r_D) {
    if (!(r_D > 0.0)) throw UsageError("USAGE_BOUNDS", "r_D must be positive");
    const double num = r_D * set.gamma * (1.0 - set.K0) * (set.gamma - set.K0 * set.L_f);
    const double den = set.K0 * set.L_f * set.c1 * (set.gamma - set.K0 * set.L_f) + set.gamma;
    const double arg = num / den;
    if (arg <= 1.0) return 0.0;  // already absorbed
    return std::log(arg) / set.gamma;
}

SqueezingCertificate squeezing_certificate(const spectral::SpectralDecomposition& decomp,
                                           double L_f, double alpha) {
    if (!(alpha > 0.0)) throw UsageError("USAGE_BOUNDS", "alpha must be positive");
    if (!std::isfinite(decomp.K) || !std::isfinite(decomp.K0) || !std::isfinite(decomp.gamma))
        throw UsageError("USAGE_BOUNDS", "decomposition lacks estimated decay constants");
    SqueezingCertificate cert;
    cert.Lambda = decomp.k_m;
    cert.lambda0 = L_f * decomp.K0 - decomp.gamma;
    cert.lambda1 = decomp.rho_m();
    cert.M1_literal = 2.0;
    cert.M1_conservative = decomp.K0 + decomp.K;
    cert.M2 = decomp.K;
    const double den = -decomp.gamma + L_f * decomp.K0 - decomp.rho_m();
    if (std::abs(den) < 1e-12)
        throw NumericError("NUMERIC_RESONANCE",
                           "vanishing M3 denominator; pick a different cut index m");
    cert.M3 = decomp.K * L_f * decomp.K0 / den;
    cert.alpha = alpha;
    cert.zeta = zeta_of_alpha(cert, alpha);
    cert.admissible = cert.zeta < 1.0;
    cert.formula = "rfde";
    return cert;
}

double zeta_of_alpha(const SqueezingCertificate& cert, double alpha) {
    return alpha * std::exp(cert.lambda0) + cert.M2 * std::exp(cert.lambda1) +
           cert.M3 * std::exp(cert.lambda0);
}

double general_dimension_bound(int Lambda, double M1, double alpha, double zeta) {
    if (!(zeta > 0.0 && zeta < 1.0))
        throw HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "dimension bound requires zeta < 1");
    if (Lambda < 1 || !(alpha > 0.0)) throw UsageError("USAGE_BOUNDS", "need Lambda >= 1, alpha > 0");
    return Lambda * (std::log(static_cast<double>(Lambda)) + std::log(2.0 + M1 / alpha)) /
           (-std::log(zeta));
}

DimensionBoundReport dimension_bound(const SqueezingCertificate& cert, M1Choice m1) {
    if (!cert.admissible)
        throw HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "certificate inadmissible (zeta >= 1)");
    DimensionBoundReport rep;
    rep.Lambda = cert.Lambda;
    rep.M1 = m1 == M1Choice::Literal ? cert.M1_literal : cert.M1_conservative;
    rep.alpha = cert.alpha;
    rep.zeta = cert.zeta;
    rep.bound = general_dimension_bound(cert.Lambda, rep.M1, cert.alpha, cert.zeta);
    rep.formula = cert.formula;
    return rep;
}

double corollary_bound_rfde(double alpha, double K, double K0, double L_f, double rho1) {
    const double zeta = (alpha + K) * std::exp(L_f * K0 + rho1) + K * std::exp(rho1);
    if (!(zeta > 0.0 && zeta < 1.0))
        throw HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "corollary requires zeta < 1");
    return std::log(2.0 + 2.0 / alpha) / (-std::log(zeta));
}

double corollary_bound_rrd(double alpha, double K, double L_f, double rho1) {
    const double zeta = (alpha + K) * std::exp(L_f + rho1) + K * std::exp(rho1);
    if (!(zeta > 0.0 && zeta < 1.0))
        throw HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "corollary requires zeta < 1");
    return std::log(2.0 + 2.0 / alpha) / (-std::log(zeta));
}

AlphaOptimum minimize_bound_over_alpha(int Lambda, double M1, double e_lambda0, double tail,
                                       const AlphaOptions& opts) {
    AlphaOptimum out;
    if (tail >= 1.0) {
        out.feasible = false;
        out.min_zeta = tail;
        return out;
    }
    const double alpha_max = (1.0 - tail) / e_lambda0;
    const double lo = alpha_max * 1e-6;
    const double hi = alpha_max * (1.0 - 1e-9);
    auto objective = [&](double a) {
        return general_dimension_bound(Lambda, M1, a, a * e_lambda0 + tail);
    };
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> grid(opts.grid_points);
    for (int i = 0; i < opts.grid_points; ++i) {
        grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (opts.grid_points - 1));
        const double v = objective(grid[i]);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    // golden-section refinement between the grid neighbors of the best point
    double a = grid[std::max(0, best - 1)];
    double b = grid[std::min(opts.grid_points - 1, best + 1)];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while ((b - a) > opts.rel_tol * std::max(1e-300, std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = objective(x2);
        }
    }
    const double alpha_star = 0.5 * (a + b);
    out.feasible = true;
    out.alpha = alpha_star;
    out.min_zeta = tail;
    out.report.Lambda = Lambda;
    out.report.M1 = M1;
    out.report.alpha = alpha_star;
    out.report.zeta = alpha_star * e_lambda0 + tail;
    out.report.bound = objective(alpha_star);
    out.report.formula = "general";
    return out;
}

AlphaOptimum optimize_alpha(const spectral::SpectralDecomposition& decomp, double L_f,
                            const AlphaOptions& opts) {
    // assemble at a probe alpha to obtain the constants, then scan
    SqueezingCertificate probe = squeezing_certificate(decomp, L_f, 1.0);
    const double e0 = std::exp(probe.lambda0);
    const double tail =
        probe.M2 * std::exp(probe.lambda1) + probe.M3 * std::exp(probe.lambda0);
    const double M1 =
        opts.m1 == M1Choice::Literal ? probe.M1_literal : probe.M1_conservative;
    AlphaOptimum out = minimize_bound_over_alpha(probe.Lambda, M1, e0, tail, opts);
    return out;
}

namespace {

dde::HistorySegment sample_in_ball(double tau, int dim, int steps, double radius, Rng& rng,
                                   VecNorm norm) {
    dde::HistorySegment s = dde::random_segment(tau, dim, steps, rng, 1.0);
    const double n = s.norm(norm);
    if (n > 0.0) {
        const double scale = radius * rng.uniform(0.1, 1.0) / n;
        for (double& v : s.values) v *= scale;
    }
    return s;
}

}  // namespace

SqueezeReport verify_squeezing(const dde::DelayModel& model,
                               const spectral::SpectralDecomposition& decomp,
                               const SqueezingCertificate& cert, const AbsorbingSet& set,
                               int n_pairs, std::span<const double> t_grid, uint64_t seed,
                               const VerifyOptions& opts) {
    SqueezeReport rep;
    rep.pairs = n_pairs;
    rep.slack = opts.slack;
    const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
    const int steps = static_cast<int>(std::lround(model.tau / opts.h));
    const double R = set.radius;

    Rng rng(seed);
    int done = 0;
    while (done < n_pairs) {
        if (rep.resamples > opts.max_resamples + n_pairs)
            throw NumericError("NUMERIC_SAMPLING",
                               "pairs kept escaping the absorbing ball; resampling exhausted");
        dde::HistorySegment phi = sample_in_ball(model.tau, model.dim, steps, R, rng, opts.norm);
        dde::HistorySegment psi = sample_in_ball(model.tau, model.dim, steps, R, rng, opts.norm);
        const double w0 = dde::segment_sub(phi, psi).norm(opts.norm);
        if (w0 == 0.0) {
            ++rep.resamples;
            continue;
        }
        const auto traj_phi = dde::integrate(model, phi, t_max, opts.h);
        const auto traj_psi = dde::integrate(model, psi, t_max, opts.h);
        bool escaped = false;
        for (double t : t_grid) {
            if (traj_phi.segment_at(t).norm(opts.norm) > R * (1.0 + 1e-9) ||
                traj_psi.segment_at(t).norm(opts.norm) > R * (1.0 + 1e-9)) {
                escaped = true;
                break;
            }
        }
        if (escaped) {
            ++rep.resamples;
            continue;
        }
        for (double t : t_grid) {
            const dde::HistorySegment wt =
                dde::segment_sub(traj_phi.segment_at(t), traj_psi.segment_at(t));
            const dde::HistorySegment pw = decomp.project(wt);
            const dde::HistorySegment qw = dde::segment_sub(wt, pw);
            SqueezeRow row;
            row.pair = done;
            row.t = t;
            row.lhs_p = pw.norm(opts.norm);
            row.rhs_p = cert.M1_conservative * std::exp(cert.lambda0 * t) * w0;
            row.lhs_q = qw.norm(opts.norm);
            row.rhs_q = (cert.M2 * std::exp(cert.lambda1 * t) +
                         cert.M3 * std::exp(cert.lambda0 * t)) *
                        w0;
            row.pass = row.lhs_p <= row.rhs_p * (1.0 + opts.slack) &&
                       row.lhs_q <= row.rhs_q * (1.0 + opts.slack);
            rep.worst_margin = std::max({rep.worst_margin,
                                         row.rhs_p > 0 ? row.lhs_p / row.rhs_p : 0.0,
                                         row.rhs_q > 0 ? row.lhs_q / row.rhs_q : 0.0});
            rep.rows.push_back(row);
        }
        ++done;
    }
    int passed = 0;
    for (const auto& r : rep.rows) passed += r.pass ? 1 : 0;
    rep.pass_rate = rep.rows.empty() ? 1.0 : static_cast<double>(passed) / rep.rows.size();
    rep.pass = passed == static_cast<int>(rep.rows.size());
    return rep;
}

AbsorptionReport verify_absorption(const dde::DelayModel& model, const AbsorbingSet& set,
                                   double r_D, int count, uint64_t seed,
                                   const VerifyOptions& opts) {
    AbsorptionReport rep;
    rep.T_D = absorption_time(set, r_D);
    rep.deadline = rep.T_D * (1.0 + opts.slack);
    const int steps = static_cast<int>(std::lround(model.tau / opts.h));
    Rng rng(seed);
    bool all = true;
    for (int s = 0; s < count; ++s) {
        dde::HistorySegment phi = dde::random_segment(model.tau, model.dim, steps, rng, 1.0);
        const double n = phi.norm(opts.norm);
        for (double& v : phi.values) v *= r_D / n;
        const auto traj = dde::integrate(model, phi, rep.deadline + opts.h, opts.h);
        AbsorptionRow row;
        row.sample = s;
        for (double t = 0.0; t <= rep.deadline + 1e-12; t += model.tau / 16.0) {
            if (traj.segment_at(std::min(t, traj.T)).norm(opts.norm) <= set.radius) {
                row.entry_time = t;
                break;
            }
        }
        row.pass = row.entry_time >= 0.0 && row.entry_time <= rep.deadline;
        all = all && row.pass;
        rep.rows.push_back(row);
    }
    rep.pass = all;
    return rep;
}

InvarianceReport verify_invariance(const dde::DelayModel& model, const AbsorbingSet& set,
                                   int count, double horizon, uint64_t seed,
                                   const VerifyOptions& opts) {
    InvarianceReport rep;
    const int steps = static_cast<int>(std::lround(model.tau / opts.h));
    Rng rng(seed);
    for (int s = 0; s < count; ++s) {
        dde::HistorySegment phi =
            sample_in_ball(model.tau, model.dim, steps, set.radius, rng, opts.norm);
        const auto traj = dde::integrate(model, phi, horizon, opts.h);
        for (double t = 0.0; t <= horizon + 1e-12; t += model.tau / 8.0)
            rep.max_norm = std::max(rep.max_norm,
                                    traj.segment_at(std::min(t, traj.T)).norm(opts.norm));
    }
    rep.pass = rep.max_norm <= set.radius * (1.0 + opts.slack);
    return rep;
}

}  // namespace attractorkit::bounds
