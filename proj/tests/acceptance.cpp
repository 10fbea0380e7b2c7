// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "attractorkit/bounds.hpp"
#include "attractorkit/covering.hpp"
#include "attractorkit/dde.hpp"
#include "attractorkit/io.hpp"
#include "attractorkit/rds.hpp"
#include "attractorkit/spectral.hpp"
#include "oracles.hpp"

namespace ak = attractorkit;

namespace {

int failures = 0;

void criterion(int id, const char* label, const std::function<bool(std::string&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", id, label, secs,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

ak::io::LoadedModel load_fixture(const std::string& name) {
    return ak::io::load_model(std::string(FIXTURES_DIR) + "/" + name);
}

struct RfdePipeline {
    ak::dde::DelayModel model;
    ak::spectral::SpectralDecomposition decomp;
    ak::bounds::AbsorbingSet set;
    ak::bounds::SqueezingCertificate cert;
    double bound_literal = 0.0;
    std::vector<double> squeeze_grid;
};

/// The certification pipeline for the shipped stable delay fixture, with the
/// same constants policy as the command-line `certify`.
RfdePipeline rfde_pipeline() {
    RfdePipeline p;
    p.model = load_fixture("rfde_stable.json").rfde;
    const auto chi = ak::spectral::CharacteristicFunction::from_model(p.model);
    p.decomp = ak::spectral::decompose(chi, 2);
    for (double u : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0})
        p.squeeze_grid.push_back(u * p.model.tau);
    std::vector<double> decay_grid;
    for (double u : {4.0, 5.0, 6.0, 8.0, 10.0}) decay_grid.push_back(u * p.model.tau);
    ak::spectral::DecayOptions dopts;
    dopts.gamma_fraction = 0.5;
    const auto est_sq =
        ak::spectral::estimate_decay_constants(chi, p.decomp, 200, p.squeeze_grid, 2027, dopts);
    const auto est_decay =
        ak::spectral::estimate_decay_constants(chi, p.decomp, 200, decay_grid, 2028, dopts);
    p.decomp.K = est_sq.K;
    p.decomp.K0 = est_decay.K0;
    p.decomp.gamma = est_decay.gamma;
    p.set = ak::bounds::absorbing_set(p.decomp.K0, p.decomp.gamma, p.model.lipschitz,
                                      p.model.f0_norm);
    const auto opt = ak::bounds::optimize_alpha(p.decomp, p.model.lipschitz);
    if (!opt.feasible) throw ak::HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "fixture infeasible");
    p.cert = ak::bounds::squeezing_certificate(p.decomp, p.model.lipschitz, opt.alpha);
    p.bound_literal =
        ak::bounds::dimension_bound(p.cert, ak::bounds::M1Choice::Literal).bound;
    return p;
}

ak::covering::PointCloud sampled_attractor(const ak::dde::DelayModel& model, double radius,
                                           uint64_t seed) {
    const int steps = 1000;
    const double h = model.tau / steps;
    ak::Rng rng(seed);
    auto phi = ak::dde::random_segment(model.tau, model.dim, steps, rng, 1.0);
    const double n = phi.norm();
    for (double& v : phi.values) v *= 0.9 * radius / n;
    const double settle = 30.0 * model.tau;
    const auto traj = ak::dde::integrate(model, phi, settle + 16.0 * model.tau, h);
    ak::covering::PointCloud cloud;
    cloud.norm = ak::VecNorm::MaxAbs;
    cloud.dim = (steps + 1) * model.dim;
    for (int i = 0; i < 64; ++i)
        cloud.pts.push_back(traj.segment_at(settle + i * model.tau / 4.0).values);
    return cloud;
}

}  // namespace

int main() {
    std::printf("attractorkit acceptance suite\n");

    criterion(1, "dimension-formula fidelity", [](std::string& detail) {
        const double anchor = ak::bounds::general_dimension_bound(1, 2.0, 2.0, 0.5);
        if (std::abs(anchor - std::log(3.0) / std::log(2.0)) > 1e-12) {
            detail = "anchor mismatch";
            return false;
        }
        ak::Rng rng(11);
        int done = 0;
        while (done < 100) {
            const double K = rng.uniform(0.2, 3.0);
            const double K0 = rng.uniform(0.1, 0.95);
            const double L = rng.uniform(0.0, 0.3);
            const double rho1 = rng.uniform(-3.0, -0.5);
            const double alpha = rng.uniform(0.05, 2.0);
            const double zc = (alpha + K) * std::exp(L * K0 + rho1) + K * std::exp(rho1);
            const double zr = (alpha + K) * std::exp(L + rho1) + K * std::exp(rho1);
            if (zc >= 1.0 || zr >= 1.0) continue;
            const double gen_c = ak::bounds::general_dimension_bound(
                1, 2.0, alpha,
                alpha * std::exp(L * K0 + rho1) + K * std::exp(rho1) +
                    K * std::exp(L * K0 + rho1));
            const double cor_c = ak::bounds::corollary_bound_rfde(alpha, K, K0, L, rho1);
            const double gen_r = ak::bounds::general_dimension_bound(
                1, 2.0, alpha,
                alpha * std::exp(L + rho1) + K * std::exp(rho1) + K * std::exp(L + rho1));
            const double cor_r = ak::bounds::corollary_bound_rrd(alpha, K, L, rho1);
            if (std::abs(gen_c - cor_c) > 1e-12 * std::max(1.0, cor_c) ||
                std::abs(gen_r - cor_r) > 1e-12 * std::max(1.0, cor_r)) {
                detail = "corollary disagreement";
                return false;
            }
            ++done;
        }
        return true;
    });

    criterion(2, "covering-lemma compliance", [](std::string& detail) {
        for (int dim : {1, 2, 3}) {
            for (double ratio : {1.0, 2.0, 4.0, 8.0}) {
                for (ak::VecNorm norm : {ak::VecNorm::MaxAbs, ak::VecNorm::Euclid}) {
                    const auto centers =
                        ak::covering::cover_ball(dim, norm, 1.0, 1.0 / ratio);
                    const double bound = ak::covering::covering_count_bound(dim, ratio);
                    if (static_cast<double>(centers.size()) > bound) {
                        detail = "count " + std::to_string(centers.size()) + " above bound " +
                                 std::to_string(bound);
                        return false;
                    }
                }
            }
        }
        return true;
    });

    criterion(3, "root-solver accuracy", [](std::string& detail) {
        ak::Rng rng(411);
        for (int trial = 0; trial < 25; ++trial) {
            const double a = rng.uniform(-3.0, -0.5);
            const double b = rng.uniform(-0.8, 0.8) * std::abs(a);
            const double tau = rng.uniform(0.3, 2.0);
            const auto chi = ak::spectral::CharacteristicFunction::scalar_mode(a, b, tau, 0.0);
            const ak::spectral::SearchRegion region{-8.0, 0.5, -25.0, 25.0};
            const int winding = ak::spectral::winding_number(chi, region);
            const auto roots =
                ak::spectral::char_roots(chi, region.re_min, region.re_max, region.im_max);
            int count = 0;
            for (const auto& r : roots) {
                count += r.multiplicity;
                if (r.residual >= 1e-10) {
                    detail = "residual above 1e-10";
                    return false;
                }
            }
            if (count != winding) {
                detail = "winding/count mismatch";
                return false;
            }
        }
        const auto hayes =
            ak::spectral::CharacteristicFunction::scalar_mode(0.0, -M_PI / 2.0, 1.0, 0.0);
        const auto rm = ak::spectral::rightmost_root(hayes);
        if (std::abs(rm.root.lambda.real()) > 1e-8) {
            detail = "Hayes abscissa " + std::to_string(rm.root.lambda.real());
            return false;
        }
        return true;
    });

    RfdePipeline pipe;
    bool pipe_ready = false;
    try {
        pipe = rfde_pipeline();
        pipe_ready = true;
    } catch (const std::exception& e) {
        std::printf("[FAIL] fixture pipeline: %s\n", e.what());
        ++failures;
    }

    criterion(4, "squeezing verification on the certified delay fixture",
              [&](std::string& detail) {
                  if (!pipe_ready) {
                      detail = "pipeline unavailable";
                      return false;
                  }
                  ak::bounds::VerifyOptions vo;
                  vo.h = 1e-3;
                  vo.slack = 0.05;
                  const auto rep = ak::bounds::verify_squeezing(
                      pipe.model, pipe.decomp, pipe.cert, pipe.set, 100, pipe.squeeze_grid,
                      909, vo);
                  detail = "pass rate " + std::to_string(rep.pass_rate) + ", worst margin " +
                           std::to_string(rep.worst_margin);
                  return rep.pass && rep.pass_rate == 1.0;
              });

    criterion(5, "absorbing-set entry by the printed deadline", [&](std::string& detail) {
        if (!pipe_ready) {
            detail = "pipeline unavailable";
            return false;
        }
        ak::bounds::VerifyOptions vo;
        vo.h = 1e-3;
        vo.slack = 0.05;
        const auto rep =
            ak::bounds::verify_absorption(pipe.model, pipe.set, 3.0 * pipe.set.radius, 50,
                                          910, vo);
        detail = "T_D " + std::to_string(rep.T_D);
        return rep.pass;
    });

    criterion(6, "covering-tree soundness and attraction rate", [](std::string& detail) {
        ak::covering::MapSystem sys;
        sys.dim = 1;
        sys.norm = ak::VecNorm::MaxAbs;
        sys.p_coords = {0};
        sys.map = [](const ak::covering::Point& x) { return ak::covering::Point{x[0] / 4.0}; };
        ak::bounds::SqueezingCertificate cert;
        cert.Lambda = 1;
        cert.M1_literal = cert.M1_conservative = 2.0;
        cert.M2 = cert.M3 = 0.0;
        cert.lambda0 = std::log(0.25);
        cert.lambda1 = -700.0;
        cert.alpha = 1.0;
        cert.zeta = 0.25;
        cert.admissible = true;

        ak::covering::PointCloud cloud{1, ak::VecNorm::MaxAbs, {}, {}};
        for (int i = 0; i < 401; ++i) cloud.pts.push_back({-1.0 + 2.0 * i / 400.0});
        // build throws if (W1)-(W3) or the cardinality bounds fail; 6 levels
        const auto tree = ak::covering::build_covering_tree(sys, cert, 1.0, 6, cloud);

        ak::covering::MapSystem sys2;
        sys2.dim = 2;
        sys2.norm = ak::VecNorm::MaxAbs;
        sys2.p_coords = {0};
        sys2.map = [](const ak::covering::Point& x) {
            return ak::covering::Point{x[0] / 4.0, x[1] / 8.0};
        };
        ak::bounds::SqueezingCertificate cert2 = cert;
        cert2.M2 = 1.0;
        cert2.lambda1 = std::log(0.125);
        cert2.alpha = 0.5;
        cert2.zeta = 0.25;
        ak::covering::PointCloud cloud2{2, ak::VecNorm::MaxAbs, {}, {}};
        ak::Rng rng(5);
        for (int i = 0; i < 800; ++i)
            cloud2.pts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        ak::covering::build_covering_tree(sys2, cert2, 1.0, 6, cloud2);

        const auto deep = ak::covering::build_covering_tree(sys, cert, 1.0, 8, cloud);
        ak::covering::PointCloud D{1, ak::VecNorm::MaxAbs, {}, {}};
        for (int i = 0; i < 57; ++i) D.pts.push_back({-0.9 + 1.8 * i / 56.0});
        const auto att = ak::covering::verify_exponential_attraction(sys, deep, D, 6, 0.1);
        detail = "fitted rate " + std::to_string(att.fitted_rate) + " vs ln 4 = " +
                 std::to_string(std::log(4.0));
        return att.pass && std::abs(att.fitted_rate - std::log(4.0)) <= 0.1 * std::log(4.0);
    });

    criterion(7, "box-counting calibration", [](std::string& detail) {
        ak::Rng rng(2000);
        ak::covering::PointCloud seg{1, ak::VecNorm::MaxAbs, {}, {}};
        for (int i = 0; i < 2000; ++i) seg.pts.push_back({rng.uniform(0.0, 1.0)});
        std::vector<double> ladder;
        for (int k = 3; k <= 8; ++k) ladder.push_back(std::pow(2.0, -k));
        const double d1 = ak::covering::box_counting_dimension(seg, ladder).estimate;

        ak::covering::PointCloud sq{2, ak::VecNorm::MaxAbs, {}, {}};
        for (int i = 0; i < 12000; ++i)
            sq.pts.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        std::vector<double> ladder2;
        for (int k = 2; k <= 6; ++k) ladder2.push_back(std::pow(2.0, -k));
        const double d2 = ak::covering::box_counting_dimension(sq, ladder2).estimate;

        ak::covering::PointCloud cantor{1, ak::VecNorm::MaxAbs, {}, {}};
        for (double x : oracles::cantor_points(8)) cantor.pts.push_back({x});
        std::vector<double> ladder3;
        for (int k = 2; k <= 6; ++k) ladder3.push_back(1.5 * std::pow(3.0, -k));
        const double d3 = ak::covering::box_counting_dimension(cantor, ladder3).estimate;

        char buf[160];
        snprintf(buf, sizeof(buf), "segment %.3f, square %.3f, cantor %.4f", d1, d2, d3);
        detail = buf;
        const double cantor_dim = std::log(2.0) / std::log(3.0);
        return std::abs(d1 - 1.0) <= 0.15 && std::abs(d2 - 2.0) <= 0.2 &&
               std::abs(d3 - cantor_dim) <= 0.1;
    });

    criterion(8, "end-to-end: sampled attractor below the certified bound",
              [&](std::string& detail) {
                  if (!pipe_ready) {
                      detail = "pipeline unavailable";
                      return false;
                  }
                  const auto cloud1 = sampled_attractor(pipe.model, pipe.set.radius, 31);
                  std::vector<double> ladder;
                  for (int k = 3; k <= 8; ++k)
                      ladder.push_back(pipe.set.radius * std::pow(2.0, -k));
                  const double est1 =
                      ak::covering::box_counting_dimension(cloud1, ladder).estimate;

                  const auto rrd = load_fixture("rrd_stable.json").rrd;
                  ak::rds::RdBoundOptions opts;
                  opts.sample_count = 100;
                  const auto probe = ak::rds::rd_dimension_bound(rrd, 1, 1.0, opts);
                  const double e0 = std::exp(probe.cert.lambda0);
                  const double tail = probe.cert.M2 * std::exp(probe.cert.lambda1) +
                                      probe.cert.M3 * std::exp(probe.cert.lambda0);
                  const auto best =
                      ak::bounds::minimize_bound_over_alpha(probe.k_m, 2.0, e0, tail);
                  if (!best.feasible) {
                      detail = "reaction-diffusion certificate infeasible";
                      return false;
                  }
                  const auto res = ak::rds::rd_dimension_bound(rrd, 1, best.alpha, opts);
                  const auto reduced = ak::rds::galerkin_reduce(rrd);
                  const auto cloud2 = sampled_attractor(reduced, 1.0, 32);
                  std::vector<double> ladder2;
                  for (int k = 3; k <= 8; ++k) ladder2.push_back(std::pow(2.0, -k));
                  const double est2 =
                      ak::covering::box_counting_dimension(cloud2, ladder2).estimate;

                  char buf[200];
                  snprintf(buf, sizeof(buf),
                           "delay: est %.3f <= bound %.3f; reaction-diffusion: est %.3f <= %.3f",
                           est1, pipe.bound_literal, est2, res.report.bound);
                  detail = buf;
                  return est1 <= pipe.bound_literal + 1e-9 &&
                         est2 <= res.report.bound + 1e-9 && res.cert.admissible;
              });

    criterion(9, "reaction-diffusion oracle match", [](std::string& detail) {
        const auto rrd = load_fixture("rrd_stable.json").rrd;
        const auto reduced = ak::rds::galerkin_reduce(rrd);
        auto phi = ak::dde::make_uniform_segment(rrd.r, rrd.n_modes, 64);
        for (size_t g = 0; g < phi.grid.size(); ++g) phi.values[g * rrd.n_modes] = 1.0;
        const auto traj = ak::dde::integrate(reduced, phi, 1.0, rrd.r / 256.0);
        std::vector<double> coeffs(rrd.n_modes);
        traj.state_at(1.0, coeffs);

        const int grid = 400;
        std::vector<double> u0(grid - 1);
        for (int i = 1; i < grid; ++i) u0[i - 1] = std::sin(M_PI * i / grid);
        const auto fd = oracles::rd_finite_difference(rrd.a, rrd.b, rrd.r, rrd.f, u0, grid, 1.0,
                                                      rrd.r / 6400.0);
        std::vector<double> diff(grid - 1);
        for (int i = 1; i < grid; ++i)
            diff[i - 1] = fd[i - 1] - ak::dde::sine::synth(coeffs, M_PI * i / grid);
        const double err = oracles::fd_l2_norm(diff, grid);

        auto pure = rrd;
        pure.b = 0.0;
        pure.f = ak::dde::Nonlinearity{};
        pure.lipschitz = 0.0;
        const auto spec = ak::rds::mode_spectrum(pure);
        for (const auto& mr : spec.per_mode) {
            double best = -1e300;
            for (const auto& root : mr.roots) best = std::max(best, root.lambda.real());
            const double expect = -(static_cast<double>(mr.mode) * mr.mode + pure.a);
            if (std::abs(best - expect) > 1e-10) {
                detail = "pure heat mode root off";
                return false;
            }
        }
        char buf[80];
        snprintf(buf, sizeof(buf), "L2 error at t=1: %.2e", err);
        detail = buf;
        return err < 1e-3;
    });

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
