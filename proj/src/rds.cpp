#include "attractorkit/rds.hpp"

#include <algorithm>
#include <cmath>

namespace attractorkit::rds {

void RdModel::validate() const {
    if (!(a > 0.0)) throw UsageError("USAGE_MODEL", "a must be positive");
    if (b < 0.0) throw UsageError("USAGE_MODEL", "b must be nonnegative");
    if (!(r > 0.0)) throw UsageError("USAGE_MODEL", "r must be positive");
    if (n_modes < 1) throw UsageError("USAGE_MODEL", "n_modes must be positive");
    if (lipschitz < f.catalog_lipschitz() - 1e-12)
        throw UsageError("USAGE_MODEL", "lipschitz below the certified catalog value");
}

dde::DelayModel galerkin_reduce(const RdModel& model) {
    model.validate();
    const int n = model.n_modes;
    dde::DelayModel out;
    out.dim = n;
    out.A.assign(static_cast<size_t>(n) * n, 0.0);
    for (int k = 1; k <= n; ++k)
        out.A[static_cast<size_t>(k - 1) * n + (k - 1)] = -(static_cast<double>(k) * k) - model.a;
    out.b.is_scalar = true;
    out.b.scalar = -model.b;
    out.tau = model.r;
    out.f = model.f;
    out.f.galerkin_modes = n;
    out.f.quad_points = 4 * n;
    out.lipschitz = model.lipschitz;
    out.f0_norm = model.f0_norm;
    return out;
}

std::vector<spectral::CharacteristicRoot> ModeSpectrum::all_roots() const {
    std::vector<spectral::CharacteristicRoot> out;
    for (const auto& m : per_mode)
        for (const auto& r : m.roots) out.push_back(r);
    return out;
}

ModeSpectrum mode_spectrum(const RdModel& model, const spectral::RootSearchOptions& opts) {
    model.validate();
    ModeSpectrum spec;
    spec.n_modes = model.n_modes;
    spec.hypothesis_b_minus_a = model.hypothesis_b_minus_a();
    for (int k = 1; k <= model.n_modes; ++k) {
        const auto chi = spectral::CharacteristicFunction::scalar_mode(
            -model.a, -model.b, model.r, static_cast<double>(k) * k);
        auto res = spectral::rightmost_root(chi, opts);
        ModeRoots mr;
        mr.mode = k;
        mr.roots = std::move(res.all_roots);
        for (auto& root : mr.roots) root.mode = k;
        spec.per_mode.push_back(std::move(mr));
    }
    spec.levels = spectral::cluster_levels(spec.all_roots());
    spec.rho1 = spec.levels.front().rho;
    // modes beyond the truncation have no roots with Re >= 0 once k^2 + a > b
    const double k_next = static_cast<double>(model.n_modes + 1);
    spec.tail_certified = k_next * k_next + model.a > model.b;
    spec.stable_certified = spec.hypothesis_b_minus_a && spec.rho1 < 0.0 && spec.tail_certified;
    return spec;
}

spectral::SpectralDecomposition rd_decompose(const RdModel& model, const ModeSpectrum& spectrum,
                                             int m, const spectral::DecompositionOptions& opts) {
    const auto reduced = galerkin_reduce(model);
    const auto chi = spectral::CharacteristicFunction::from_model(reduced);
    return spectral::decompose_with_roots(chi, spectrum.all_roots(), m, opts);
}

double segment_field_norm(const dde::HistorySegment& seg) {
    double m = 0.0;
    for (size_t i = 0; i < seg.grid.size(); ++i)
        m = std::max(m, dde::sine::field_l2_norm(seg.point(i)));
    return m;
}

DissipativityReport dissipativity_check(const RdModel& model, const dde::HistorySegment& phi,
                                        double gamma, double horizon,
                                        const DissipativityOptions& opts) {
    model.validate();
    const double L = model.lipschitz;
    const double egr = std::exp(gamma * model.r);
    const double den = model.a - L * egr;
    if (std::abs(den) < 1e-12)
        throw NumericError("NUMERIC_DEGENERATE", "a equals L_f e^{gamma r}");

    DissipativityReport rep;
    rep.slack = opts.slack;
    rep.gamma_above_a = gamma > model.a;
    rep.attractor_condition = den > 0.0;

    double h = opts.h > 0.0 ? opts.h : model.r / 256.0;
    h = model.r / std::max(1.0, std::round(model.r / h));
    const auto reduced = galerkin_reduce(model);
    const auto traj = dde::integrate(reduced, phi, horizon, h);
    const double nphi = segment_field_norm(traj.segment_at(0.0));
    const double c1 = model.f0_norm;

    bool all = true;
    for (int i = 0; i <= opts.time_samples; ++i) {
        const double t = horizon * static_cast<double>(i) / opts.time_samples;
        DissipativityRow row;
        row.t = t;
        row.norm = segment_field_norm(traj.segment_at(t));
        row.rhs = c1 * egr / den + egr * (nphi - c1 / den) * std::exp((L * egr - model.a) * t);
        all = all && row.norm <= row.rhs * (1.0 + opts.slack);
        rep.rows.push_back(row);
    }
    rep.pass = all;
    return rep;
}

bounds::SqueezingCertificate rd_squeezing_certificate(double rho1, double rho_m, int k_m,
                                                      double K, double L_f, double alpha) {
    if (!(alpha > 0.0)) throw UsageError("USAGE_BOUNDS", "alpha must be positive");
    bounds::SqueezingCertificate cert;
    cert.Lambda = k_m;
    cert.lambda0 = L_f + rho1;
    cert.lambda1 = rho_m;
    cert.M1_literal = 2.0;
    cert.M1_conservative = 2.0 * K;
    cert.M2 = K;
    const double den = rho1 + L_f - rho_m;
    if (std::abs(den) < 1e-12 && L_f > 0.0)
        throw NumericError("NUMERIC_RESONANCE", "vanishing M3 denominator");
    cert.M3 = L_f > 0.0 ? K * L_f / den : 0.0;
    cert.alpha = alpha;
    cert.zeta = bounds::zeta_of_alpha(cert, alpha);
    cert.admissible = cert.zeta < 1.0;
    cert.formula = "rrd";
    return cert;
}

RdBoundResult rd_dimension_bound(const RdModel& model, int m, double alpha,
                                 const RdBoundOptions& opts) {
    RdBoundResult res;
    res.spectrum = mode_spectrum(model, opts.search);
    if (!res.spectrum.hypothesis_b_minus_a)
        throw HypothesisError("HYPOTHESIS_B_MINUS_A", "requires b - a < 1");
    if (static_cast<int>(res.spectrum.levels.size()) < m)
        throw UsageError("USAGE_CUT_INDEX", "cut index m exceeds enumerated root levels");

    spectral::DecompositionOptions dopts;
    dopts.search = opts.search;
    auto decomp = rd_decompose(model, res.spectrum, m, dopts);

    std::vector<double> t_grid = opts.t_grid;
    if (t_grid.empty())
        for (double u : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0})
            t_grid.push_back(u * model.r);
    spectral::DecayOptions decay;
    decay.h = opts.h > 0.0 ? opts.h : model.r / 512.0;
    decay.safety = opts.safety;
    decay.norm = VecNorm::Euclid;  // coefficient l2 realizes the L2 field norm
    const auto chi = spectral::CharacteristicFunction::from_model(galerkin_reduce(model));
    const auto est =
        spectral::estimate_decay_constants(chi, decomp, opts.sample_count, t_grid, opts.seed, decay);

    res.K = est.K;
    res.k_m = decomp.k_m;
    res.rho1 = res.spectrum.rho1;
    res.rho_m = decomp.rho_m();
    res.cert = rd_squeezing_certificate(res.rho1, res.rho_m, res.k_m, res.K, model.lipschitz,
                                        alpha);
    if (res.cert.admissible) {
        res.report = bounds::dimension_bound(res.cert, bounds::M1Choice::Literal);
        res.report.formula = "rrd";
    } else {
        res.report.Lambda = res.k_m;
        res.report.alpha = alpha;
        res.report.zeta = res.cert.zeta;
        res.report.bound = std::numeric_limits<double>::infinity();
        res.report.formula = "rrd";
    }
    return res;
}

}  // namespace attractorkit::rds
