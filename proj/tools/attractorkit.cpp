// attractorkit command line: model ingestion, root analysis, certification,
// simulation, covering experiments and report emission.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "attractorkit/bounds.hpp"
#include "attractorkit/covering.hpp"
#include "attractorkit/dde.hpp"
#include "attractorkit/io.hpp"
#include "attractorkit/rds.hpp"
#include "attractorkit/spectral.hpp"

namespace ak = attractorkit;
using ak::io::Json;

namespace {

int env_threads() {
    if (const char* t = std::getenv("ATTRACTORKIT_THREADS"))
        return std::max(1, std::atoi(t));
    return 1;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<double> scale_grid(const std::vector<double>& multipliers, double tau) {
    std::vector<double> g;
    for (double m : multipliers) g.push_back(m * tau);
    return g;
}

struct InitSpec {
    std::string kind = "random";  // random | const | mode
    double value = 1.0;
    int mode = 1;
    double scale = 1.0;
};

ak::dde::HistorySegment make_initial(const ak::dde::DelayModel& model, const InitSpec& init,
                                     int steps, uint64_t seed) {
    if (init.kind == "const")
        return ak::dde::make_constant_segment(model.tau, model.dim, steps, init.value);
    if (init.kind == "mode") {
        auto seg = ak::dde::make_uniform_segment(model.tau, model.dim, steps);
        if (init.mode < 1 || init.mode > model.dim)
            throw ak::UsageError("USAGE_INIT", "init mode out of range");
        for (size_t g = 0; g < seg.grid.size(); ++g)
            seg.values[g * model.dim + (init.mode - 1)] = init.scale;
        return seg;
    }
    ak::Rng rng(seed);
    auto seg = ak::dde::random_segment(model.tau, model.dim, steps, rng, 1.0);
    const double n = seg.norm();
    if (n > 0.0)
        for (double& v : seg.values) v *= init.scale / n;
    return seg;
}

/// Post-absorption trajectory samples as a flattened point cloud.
ak::covering::PointCloud attractor_cloud(const ak::dde::DelayModel& model, double radius,
                                         double settle_time, int count, double spacing,
                                         int steps_per_delay, uint64_t seed) {
    const double h = model.tau / steps_per_delay;
    ak::Rng rng(seed);
    auto phi = ak::dde::random_segment(model.tau, model.dim, steps_per_delay, rng, 1.0);
    const double n = phi.norm();
    if (n > 0.0)
        for (double& v : phi.values) v *= 0.9 * radius / n;
    const double T = settle_time + count * spacing;
    const auto traj = ak::dde::integrate(model, phi, T, h);
    ak::covering::PointCloud cloud;
    cloud.norm = ak::VecNorm::MaxAbs;
    cloud.dim = (steps_per_delay + 1) * model.dim;
    for (int i = 0; i < count; ++i) {
        const auto seg = traj.segment_at(settle_time + i * spacing);
        cloud.pts.push_back(seg.values);
    }
    return cloud;
}

std::vector<double> default_ladder(double scale) {
    std::vector<double> ladder;
    for (int k = 3; k <= 8; ++k) ladder.push_back(scale * std::pow(2.0, -k));
    return ladder;
}

Json run_header(uint64_t seed) {
    Json j;
    j["schema_version"] = ak::io::kSchemaVersion;
    j["toolkit_version"] = ak::io::kToolkitVersion;
    j["timestamp"] = ak::io::timestamp();
    j["seed"] = seed;
    j["threads"] = env_threads();
    return j;
}

struct CertifyConfig {
    int cut_m = 1;
    double alpha = 0.0;  // 0 = optimize
    uint64_t seed = 2027;
    int steps_per_delay = 1000;
    int pairs = 20;
    int absorb_count = 10;
    int sample_count = 200;
    double gamma_fraction = 0.5;
    double slack = 0.05;
    double rd_gamma = 0.0;       // 0 = 1.2 a
    double rd_ball_radius = 1.0;
    std::vector<double> squeeze_mult = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0};
    std::vector<double> decay_mult = {4.0, 5.0, 6.0, 8.0, 10.0};
};

Json constants_block(double rho1, double rho_m, double K, double K0, double gamma, double L_f,
                     double c1) {
    Json arr = Json::array();
    auto add = [&](const char* name, double v, const char* prov) {
        arr.push_back({{"name", name}, {"value", v}, {"provenance", prov}});
    };
    add("rho1", rho1, "analytic");
    add("rho_m", rho_m, "analytic");
    add("K", K, "sampled-estimate");
    add("K0", K0, "sampled-estimate");
    add("gamma", gamma, "analytic-fraction");
    add("L_f", L_f, "analytic");
    add("c1", c1, "analytic");
    return arr;
}

int certify_rfde(const ak::io::LoadedModel& loaded, const CertifyConfig& cfg,
                 const std::string& out_dir) {
    const auto& model = loaded.rfde;
    const auto chi = ak::spectral::CharacteristicFunction::from_model(model);
    auto decomp = ak::spectral::decompose(chi, cfg.cut_m);

    const auto squeeze_grid = scale_grid(cfg.squeeze_mult, model.tau);
    const auto decay_grid = scale_grid(cfg.decay_mult, model.tau);
    ak::spectral::DecayOptions sq_opts;
    sq_opts.gamma_fraction = cfg.gamma_fraction;
    const auto est_sq = ak::spectral::estimate_decay_constants(chi, decomp, cfg.sample_count,
                                                               squeeze_grid, cfg.seed, sq_opts);
    const auto est_decay = ak::spectral::estimate_decay_constants(
        chi, decomp, cfg.sample_count, decay_grid, cfg.seed + 1, sq_opts);
    decomp.K = est_sq.K;
    decomp.K0 = est_decay.K0;
    decomp.gamma = est_decay.gamma;
    decomp.safety_factor = est_decay.safety;

    Json report = run_header(cfg.seed);
    report["model"] = ak::io::model_echo(loaded);
    report["spectral"] = ak::io::decomposition_report(decomp, est_sq, est_decay);
    {
        const auto rm = ak::spectral::rightmost_root(chi);
        report["roots"] = ak::io::roots_report(rm.all_roots);
    }
    report["constants"] = constants_block(decomp.rho1(), decomp.rho_m(), decomp.K, decomp.K0,
                                          decomp.gamma, model.lipschitz, model.f0_norm);

    const auto set = ak::bounds::absorbing_set(decomp.K0, decomp.gamma, model.lipschitz,
                                               model.f0_norm);
    report["absorbing_set"] = {{"radius", set.radius},
                               {"T_D_at_3RB", ak::bounds::absorption_time(set, 3.0 * set.radius)}};

    double alpha = cfg.alpha;
    if (alpha <= 0.0) {
        const auto opt = ak::bounds::optimize_alpha(decomp, model.lipschitz);
        if (!opt.feasible) {
            report["certificate"] = {{"admissible", false}, {"min_zeta", opt.min_zeta}};
            ak::io::atomic_write_text(out_dir + "/certify_report.json", report.dump(2) + "\n");
            throw ak::HypothesisError("HYPOTHESIS_ZETA_GE_ONE",
                                      "no alpha gives zeta < 1 (report written)");
        }
        alpha = opt.alpha;
    }
    const auto cert = ak::bounds::squeezing_certificate(decomp, model.lipschitz, alpha);
    report["certificate"] = ak::io::certificate_json(cert);
    if (!cert.admissible) {
        ak::io::atomic_write_text(out_dir + "/certify_report.json", report.dump(2) + "\n");
        throw ak::HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "zeta >= 1 at the chosen alpha");
    }

    const auto rep_lit = ak::bounds::dimension_bound(cert, ak::bounds::M1Choice::Literal);
    const auto rep_cons = ak::bounds::dimension_bound(cert, ak::bounds::M1Choice::Conservative);
    report["bound_literal"] = ak::io::bound_report_json(rep_lit);
    report["bound_conservative"] = ak::io::bound_report_json(rep_cons);
    if (decomp.k_m == 1) {
        report["bound_corollary"] = ak::bounds::corollary_bound_rfde(
            alpha, decomp.K, decomp.K0, model.lipschitz, decomp.rho1());
    }

    ak::bounds::VerifyOptions vo;
    vo.h = model.tau / cfg.steps_per_delay;
    vo.slack = cfg.slack;
    const auto sq_rep = ak::bounds::verify_squeezing(model, decomp, cert, set, cfg.pairs,
                                                     squeeze_grid, cfg.seed + 2, vo);
    const auto ab_rep =
        ak::bounds::verify_absorption(model, set, 3.0 * set.radius, cfg.absorb_count,
                                      cfg.seed + 3, vo);
    const auto inv_rep =
        ak::bounds::verify_invariance(model, set, 10, 10.0 * model.tau, cfg.seed + 4, vo);

    const auto cloud = attractor_cloud(model, set.radius, 30.0 * model.tau, 64, model.tau / 4.0,
                                       cfg.steps_per_delay, cfg.seed + 5);
    const auto ladder = default_ladder(set.radius);
    const auto box = ak::covering::box_counting_dimension(cloud, ladder);
    const bool box_ok = box.estimate <= rep_lit.bound + 1e-9;

    report["verification"] = {
        {"squeezing",
         {{"pairs", sq_rep.pairs},
          {"pass_rate", sq_rep.pass_rate},
          {"worst_margin", sq_rep.worst_margin},
          {"slack", sq_rep.slack},
          {"pass", sq_rep.pass}}},
        {"absorption", {{"T_D", ab_rep.T_D}, {"deadline", ab_rep.deadline}, {"pass", ab_rep.pass}}},
        {"invariance", {{"max_norm", inv_rep.max_norm}, {"pass", inv_rep.pass}}},
        {"boxdim",
         {{"estimate", box.estimate}, {"bound", rep_lit.bound}, {"below_bound", box_ok}}}};
    report["config"] = {{"cut_m", cfg.cut_m},
                        {"alpha", alpha},
                        {"steps_per_delay", cfg.steps_per_delay},
                        {"pairs", cfg.pairs},
                        {"sample_count", cfg.sample_count},
                        {"gamma_fraction", cfg.gamma_fraction},
                        {"squeeze_grid", squeeze_grid},
                        {"decay_grid", decay_grid},
                        {"slack", cfg.slack}};

    ak::io::atomic_write_text(out_dir + "/certify_report.json", report.dump(2) + "\n");
    std::cout << "certify: zeta = " << cert.zeta << ", dim bound = " << rep_lit.bound
              << " (conservative " << rep_cons.bound << ")\n"
              << "report: " << out_dir << "/certify_report.json\n";
    if (!sq_rep.pass || !ab_rep.pass || !inv_rep.pass || !box_ok)
        throw ak::HypothesisError("VERIFY_FAILED", "an empirical verification failed");
    return 0;
}

int certify_rrd(const ak::io::LoadedModel& loaded, const CertifyConfig& cfg,
                const std::string& out_dir) {
    const auto& model = loaded.rrd;
    if (!model.hypothesis_b_minus_a())
        throw ak::HypothesisError("HYPOTHESIS_B_MINUS_A", "requires b - a < 1");

    ak::rds::RdBoundOptions opts;
    opts.seed = cfg.seed;
    opts.sample_count = cfg.sample_count;
    opts.t_grid = scale_grid(cfg.squeeze_mult, model.r);

    double alpha = cfg.alpha;
    if (alpha <= 0.0) {
        // probe constants at alpha = 1, then optimize over alpha
        const auto probe = ak::rds::rd_dimension_bound(model, cfg.cut_m, 1.0, opts);
        const double e0 = std::exp(probe.cert.lambda0);
        const double tail = probe.cert.M2 * std::exp(probe.cert.lambda1) +
                            probe.cert.M3 * std::exp(probe.cert.lambda0);
        const auto best = ak::bounds::minimize_bound_over_alpha(probe.k_m, 2.0, e0, tail);
        if (!best.feasible)
            throw ak::HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "no alpha gives zeta < 1");
        alpha = best.alpha;
    }
    const auto res = ak::rds::rd_dimension_bound(model, cfg.cut_m, alpha, opts);

    Json report = run_header(cfg.seed);
    report["model"] = ak::io::model_echo(loaded);
    report["roots"] = ak::io::roots_report(res.spectrum.all_roots());
    report["spectral"] = {{"rho1", res.rho1},
                          {"rho_m", res.rho_m},
                          {"k_m", res.k_m},
                          {"stable_certified", res.spectrum.stable_certified},
                          {"tail_certified", res.spectrum.tail_certified},
                          {"n_modes", res.spectrum.n_modes}};
    report["constants"] =
        constants_block(res.rho1, res.rho_m, res.K, std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), model.lipschitz, model.f0_norm);
    report["certificate"] = ak::io::certificate_json(res.cert);
    if (!res.cert.admissible) {
        ak::io::atomic_write_text(out_dir + "/certify_report.json", report.dump(2) + "\n");
        throw ak::HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "zeta >= 1 at the chosen alpha");
    }
    report["bound"] = ak::io::bound_report_json(res.report);
    if (res.k_m == 1)
        report["bound_corollary"] =
            ak::bounds::corollary_bound_rrd(alpha, res.K, model.lipschitz, res.rho1);

    const auto reduced = ak::rds::galerkin_reduce(model);
    const double gamma = cfg.rd_gamma > 0.0 ? cfg.rd_gamma : 1.2 * model.a;
    auto phi = ak::dde::make_uniform_segment(model.r, model.n_modes, 64);
    for (size_t g = 0; g < phi.grid.size(); ++g) phi.values[g * model.n_modes] = 1.0;
    const auto diss = ak::rds::dissipativity_check(model, phi, gamma, 8.0 * model.r);

    auto dec = ak::rds::rd_decompose(model, res.spectrum, cfg.cut_m);
    dec.K = res.K;
    ak::bounds::AbsorbingSet ball;
    ball.radius = cfg.rd_ball_radius;
    ball.valid = true;
    ak::bounds::VerifyOptions vo;
    vo.h = model.r / cfg.steps_per_delay;
    vo.slack = cfg.slack;
    vo.norm = ak::VecNorm::Euclid;
    const auto sq_rep = ak::bounds::verify_squeezing(reduced, dec, res.cert, ball, cfg.pairs,
                                                     opts.t_grid, cfg.seed + 2, vo);

    const auto cloud = attractor_cloud(reduced, cfg.rd_ball_radius, 30.0 * model.r, 64,
                                       model.r / 4.0, cfg.steps_per_delay, cfg.seed + 5);
    const auto box = ak::covering::box_counting_dimension(cloud, default_ladder(1.0));
    const bool box_ok = box.estimate <= res.report.bound + 1e-9;

    report["verification"] = {
        {"dissipativity",
         {{"gamma", gamma},
          {"gamma_above_a", diss.gamma_above_a},
          {"attractor_condition", diss.attractor_condition},
          {"pass", diss.pass}}},
        {"squeezing",
         {{"pairs", sq_rep.pairs},
          {"pass_rate", sq_rep.pass_rate},
          {"worst_margin", sq_rep.worst_margin},
          {"pass", sq_rep.pass}}},
        {"boxdim",
         {{"estimate", box.estimate}, {"bound", res.report.bound}, {"below_bound", box_ok}}}};
    report["config"] = {{"cut_m", cfg.cut_m},
                        {"alpha", alpha},
                        {"steps_per_delay", cfg.steps_per_delay},
                        {"pairs", cfg.pairs},
                        {"sample_count", cfg.sample_count},
                        {"gamma", gamma},
                        {"ball_radius", cfg.rd_ball_radius},
                        {"t_grid", opts.t_grid},
                        {"slack", cfg.slack}};

    ak::io::atomic_write_text(out_dir + "/certify_report.json", report.dump(2) + "\n");
    std::cout << "certify: zeta = " << res.cert.zeta << ", dim bound = " << res.report.bound
              << "\nreport: " << out_dir << "/certify_report.json\n";
    if (!diss.pass || !sq_rep.pass || !box_ok)
        throw ak::HypothesisError("VERIFY_FAILED", "an empirical verification failed");
    return 0;
}

int run_report(const std::string& in_path, const std::string& out_dir) {
    std::ifstream in(in_path);
    if (!in) throw ak::UsageError("USAGE_PATH", "cannot open report " + in_path);
    Json rep;
    in >> rep;
    if (!rep.contains("certificate") || !rep.contains("roots"))
        throw ak::UsageError("USAGE_SCHEMA", "not a certify report (certificate/roots missing)");

    std::ostringstream roots;
    roots << "re,im,multiplicity\n";
    for (const auto& r : rep.at("roots"))
        roots << r.at("re").get<double>() << ',' << r.at("im").get<double>() << ','
              << r.at("multiplicity").get<int>() << "\n";
    ak::io::atomic_write_text(out_dir + "/roots.csv", roots.str());

    const auto& cert = rep.at("certificate");
    std::ostringstream sweep;
    sweep << "alpha,zeta,bound\n";
    if (cert.contains("lambda0")) {
        const double l0 = cert.at("lambda0").get<double>();
        const double l1 = cert.at("lambda1").get<double>();
        const double M1 = cert.at("M1_literal").get<double>();
        const double M2 = cert.at("M2").get<double>();
        const double M3 = cert.at("M3").get<double>();
        const int Lambda = cert.at("Lambda").get<int>();
        const double tail = M2 * std::exp(l1) + M3 * std::exp(l0);
        for (int i = 0; i <= 200; ++i) {
            const double alpha = std::pow(10.0, -3.0 + 4.0 * i / 200.0);
            const double zeta = alpha * std::exp(l0) + tail;
            sweep << alpha << ',' << zeta << ',';
            if (zeta < 1.0)
                sweep << ak::bounds::general_dimension_bound(Lambda, M1, alpha, zeta);
            else
                sweep << "inf";
            sweep << "\n";
        }
    }
    ak::io::atomic_write_text(out_dir + "/alpha_sweep.csv", sweep.str());

    Json manifest;
    manifest["schema_version"] = ak::io::kSchemaVersion;
    manifest["plots"] = Json::array(
        {Json{{"title", "characteristic roots"},
              {"file", "roots.csv"},
              {"x", "re"},
              {"y", "im"},
              {"logx", false},
              {"logy", false},
              {"style", "scatter"}},
         Json{{"title", "dimension bound vs alpha"},
              {"file", "alpha_sweep.csv"},
              {"x", "alpha"},
              {"y", "bound"},
              {"logx", true},
              {"logy", false},
              {"style", "line"}}});
    ak::io::atomic_write_text(out_dir + "/plot_manifest.json", manifest.dump(2) + "\n");
    std::cout << "report artifacts in " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attractorkit: certified fractal-dimension bounds for delay systems"};
    app.require_subcommand(1);

    std::string model_path, out_dir = ".", format = "json", cloud_path, in_path;
    uint64_t seed = 2027;
    CertifyConfig cfg;
    InitSpec init;
    double T = 5.0, re_min = 0.0, re_max = 0.0, im_max = 0.0;
    int steps_per_delay = 256;
    std::string eps_ladder_csv, norm_name = "sup", tree_demo;
    double r_ball = 1.0, r_cover = 0.5;
    int cover_dim = 1;

    auto add_common = [&](CLI::App* sub, bool needs_model) {
        auto* m = sub->add_option("--model", model_path, "model config file (JSON)");
        if (needs_model) m->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "RNG seed recorded in outputs");
        sub->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    };

    auto* roots_cmd = app.add_subcommand("roots", "characteristic roots in a window");
    add_common(roots_cmd, true);
    roots_cmd->add_option("--re-min", re_min, "window left edge");
    roots_cmd->add_option("--re-max", re_max, "window right edge");
    roots_cmd->add_option("--im-max", im_max, "window imaginary extent");

    auto* dec_cmd = app.add_subcommand("decompose", "spectral decomposition and decay constants");
    add_common(dec_cmd, true);
    dec_cmd->add_option("--cut-m", cfg.cut_m, "spectral cut index");
    dec_cmd->add_option("--gamma-fraction", cfg.gamma_fraction, "gamma as a fraction of -rho1");
    dec_cmd->add_option("--samples", cfg.sample_count, "sampled segments per estimate");

    auto* cert_cmd = app.add_subcommand("certify", "full certification pipeline");
    add_common(cert_cmd, true);
    cert_cmd->add_option("--cut-m", cfg.cut_m, "spectral cut index");
    cert_cmd->add_option("--alpha", cfg.alpha, "fixed alpha (default: optimized)");
    cert_cmd->add_option("--pairs", cfg.pairs, "trajectory pairs for squeezing verification");
    cert_cmd->add_option("--samples", cfg.sample_count, "sampled segments per estimate");
    cert_cmd->add_option("--steps-per-delay", cfg.steps_per_delay, "integrator resolution");
    cert_cmd->add_option("--gamma-fraction", cfg.gamma_fraction, "gamma as a fraction of -rho1");
    cert_cmd->add_option("--slack", cfg.slack, "relative slack on empirical inequalities");
    cert_cmd->add_option("--gamma", cfg.rd_gamma, "dissipativity gamma (reaction-diffusion)");
    cert_cmd->add_option("--ball-radius", cfg.rd_ball_radius,
                         "sampling ball radius (reaction-diffusion)");

    auto* sim_cmd = app.add_subcommand("simulate", "integrate and export a trajectory CSV");
    add_common(sim_cmd, true);
    sim_cmd->add_option("--T", T, "final time");
    sim_cmd->add_option("--steps-per-delay", steps_per_delay, "integrator resolution");
    sim_cmd->add_option("--init", init.kind, "random|const|mode")
        ->check(CLI::IsMember({"random", "const", "mode"}));
    sim_cmd->add_option("--init-value", init.value, "constant initial value");
    sim_cmd->add_option("--init-mode", init.mode, "mode index for --init mode");
    sim_cmd->add_option("--init-scale", init.scale, "initial norm scale");

    auto* sq_cmd = app.add_subcommand("squeeze-verify", "empirical squeezing check");
    add_common(sq_cmd, true);
    sq_cmd->add_option("--cut-m", cfg.cut_m, "spectral cut index");
    sq_cmd->add_option("--alpha", cfg.alpha, "fixed alpha (default: optimized)");
    sq_cmd->add_option("--pairs", cfg.pairs, "trajectory pairs");
    sq_cmd->add_option("--steps-per-delay", cfg.steps_per_delay, "integrator resolution");
    sq_cmd->add_option("--gamma-fraction", cfg.gamma_fraction, "gamma as a fraction of -rho1");
    sq_cmd->add_option("--slack", cfg.slack, "relative slack");

    auto* cover_cmd = app.add_subcommand("cover", "ball covering and covering-tree demos");
    add_common(cover_cmd, false);
    cover_cmd->add_option("--dim", cover_dim, "ambient dimension (1..8)");
    cover_cmd->add_option("--norm", norm_name, "sup|euclid");
    cover_cmd->add_option("--r-ball", r_ball, "covered ball radius");
    cover_cmd->add_option("--r-cover", r_cover, "covering ball radius");
    cover_cmd->add_option("--tree-demo", tree_demo, "affine1d|affine2d covering-tree demo");

    auto* box_cmd = app.add_subcommand("boxdim", "box-counting dimension of a point cloud");
    add_common(box_cmd, false);
    box_cmd->add_option("--cloud", cloud_path, "CSV of points (one row per point)");
    box_cmd->add_option("--eps-ladder", eps_ladder_csv, "comma-separated decreasing radii");
    box_cmd->add_option("--norm", norm_name, "sup|euclid");
    box_cmd->add_option("--steps-per-delay", cfg.steps_per_delay, "integrator resolution");

    auto* rep_cmd = app.add_subcommand("report", "emit plot data from a certify report");
    rep_cmd->add_option("--in", in_path, "certify report JSON")->required()->check(
        CLI::ExistingFile);
    rep_cmd->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "USAGE_CLI: " << e.what() << "\n";
        return 64;
    }

    try {
        cfg.seed = seed;
        if (roots_cmd->parsed()) {
            const auto loaded = ak::io::load_model(model_path);
            std::vector<ak::spectral::CharacteristicRoot> roots;
            if (loaded.kind == ak::io::LoadedModel::Kind::Rfde) {
                const auto chi = ak::spectral::CharacteristicFunction::from_model(loaded.rfde);
                auto w = ak::spectral::default_window(chi);
                if (roots_cmd->count("--re-min")) w.re_min = re_min;
                if (roots_cmd->count("--re-max")) w.re_max = re_max;
                if (roots_cmd->count("--im-max")) w.im_max = im_max;
                roots = ak::spectral::char_roots(chi, w.re_min, w.re_max, w.im_max);
            } else {
                roots = ak::rds::mode_spectrum(loaded.rrd).all_roots();
            }
            if (format == "csv") {
                ak::io::atomic_write_text(out_dir + "/roots.csv", ak::io::roots_csv(roots));
                std::cout << out_dir << "/roots.csv\n";
            } else {
                ak::io::atomic_write_text(out_dir + "/roots.json",
                                          ak::io::roots_report(roots).dump(2) + "\n");
                std::cout << out_dir << "/roots.json\n";
            }
            return 0;
        }
        if (dec_cmd->parsed()) {
            const auto loaded = ak::io::load_model(model_path);
            ak::spectral::SpectralDecomposition decomp;
            double tau;
            ak::spectral::CharacteristicFunction chi;
            if (loaded.kind == ak::io::LoadedModel::Kind::Rfde) {
                chi = ak::spectral::CharacteristicFunction::from_model(loaded.rfde);
                decomp = ak::spectral::decompose(chi, cfg.cut_m);
                tau = loaded.rfde.tau;
            } else {
                const auto spec = ak::rds::mode_spectrum(loaded.rrd);
                decomp = ak::rds::rd_decompose(loaded.rrd, spec, cfg.cut_m);
                chi = ak::spectral::CharacteristicFunction::from_model(
                    ak::rds::galerkin_reduce(loaded.rrd));
                tau = loaded.rrd.r;
            }
            ak::spectral::DecayOptions dopts;
            dopts.gamma_fraction = cfg.gamma_fraction;
            if (loaded.kind == ak::io::LoadedModel::Kind::Rrd) dopts.norm = ak::VecNorm::Euclid;
            const auto grid_sq = scale_grid(cfg.squeeze_mult, tau);
            const auto grid_decay = scale_grid(cfg.decay_mult, tau);
            const auto est_sq = ak::spectral::estimate_decay_constants(
                chi, decomp, cfg.sample_count, grid_sq, seed, dopts);
            const auto est_decay = ak::spectral::estimate_decay_constants(
                chi, decomp, cfg.sample_count, grid_decay, seed + 1, dopts);
            Json j = run_header(seed);
            j["model"] = ak::io::model_echo(loaded);
            j["decomposition"] = ak::io::decomposition_report(decomp, est_sq, est_decay);
            ak::io::atomic_write_text(out_dir + "/decomposition.json", j.dump(2) + "\n");
            std::cout << out_dir << "/decomposition.json\n";
            return 0;
        }
        if (cert_cmd->parsed()) {
            const auto loaded = ak::io::load_model(model_path);
            return loaded.kind == ak::io::LoadedModel::Kind::Rfde
                       ? certify_rfde(loaded, cfg, out_dir)
                       : certify_rrd(loaded, cfg, out_dir);
        }
        if (sim_cmd->parsed()) {
            const auto loaded = ak::io::load_model(model_path);
            const auto model = loaded.kind == ak::io::LoadedModel::Kind::Rfde
                                   ? loaded.rfde
                                   : ak::rds::galerkin_reduce(loaded.rrd);
            const auto phi = make_initial(model, init, steps_per_delay, seed);
            const auto traj =
                ak::dde::integrate(model, phi, T, model.tau / steps_per_delay);
            std::ostringstream os;
            ak::dde::export_trajectory_csv(traj, os);
            ak::io::atomic_write_text(out_dir + "/trajectory.csv", os.str());
            std::cout << out_dir << "/trajectory.csv\n";
            return 0;
        }
        if (sq_cmd->parsed()) {
            const auto loaded = ak::io::load_model(model_path);
            if (loaded.kind != ak::io::LoadedModel::Kind::Rfde)
                throw ak::UsageError("USAGE_MODEL",
                                     "squeeze-verify expects an rfde model (use certify for rrd)");
            const auto& model = loaded.rfde;
            const auto chi = ak::spectral::CharacteristicFunction::from_model(model);
            auto decomp = ak::spectral::decompose(chi, cfg.cut_m);
            const auto squeeze_grid = scale_grid(cfg.squeeze_mult, model.tau);
            const auto decay_grid = scale_grid(cfg.decay_mult, model.tau);
            ak::spectral::DecayOptions dopts;
            dopts.gamma_fraction = cfg.gamma_fraction;
            const auto est_sq = ak::spectral::estimate_decay_constants(
                chi, decomp, cfg.sample_count, squeeze_grid, seed, dopts);
            const auto est_decay = ak::spectral::estimate_decay_constants(
                chi, decomp, cfg.sample_count, decay_grid, seed + 1, dopts);
            decomp.K = est_sq.K;
            decomp.K0 = est_decay.K0;
            decomp.gamma = est_decay.gamma;
            const auto set = ak::bounds::absorbing_set(decomp.K0, decomp.gamma, model.lipschitz,
                                                       model.f0_norm);
            double alpha = cfg.alpha;
            if (alpha <= 0.0) {
                const auto opt = ak::bounds::optimize_alpha(decomp, model.lipschitz);
                if (!opt.feasible)
                    throw ak::HypothesisError("HYPOTHESIS_ZETA_GE_ONE", "no feasible alpha");
                alpha = opt.alpha;
            }
            const auto cert = ak::bounds::squeezing_certificate(decomp, model.lipschitz, alpha);
            ak::bounds::VerifyOptions vo;
            vo.h = model.tau / cfg.steps_per_delay;
            vo.slack = cfg.slack;
            const auto rep = ak::bounds::verify_squeezing(model, decomp, cert, set, cfg.pairs,
                                                          squeeze_grid, seed + 2, vo);
            Json j = run_header(seed);
            j["model"] = ak::io::model_echo(loaded);
            j["certificate"] = ak::io::certificate_json(cert);
            j["squeezing"] = ak::io::squeeze_report_json(rep);
            ak::io::atomic_write_text(out_dir + "/squeeze_report.json", j.dump(2) + "\n");
            std::cout << out_dir << "/squeeze_report.json\n";
            if (!rep.pass) throw ak::HypothesisError("VERIFY_FAILED", "squeezing check failed");
            return 0;
        }
        if (cover_cmd->parsed()) {
            if (!tree_demo.empty()) {
                ak::covering::MapSystem sys;
                ak::bounds::SqueezingCertificate cert;
                cert.M1_literal = 2.0;
                cert.M1_conservative = 2.0;
                if (tree_demo == "affine1d") {
                    sys.dim = 1;
                    sys.p_coords = {0};
                    sys.map = [](const ak::covering::Point& x) {
                        return ak::covering::Point{x[0] / 4.0};
                    };
                    cert.Lambda = 1;
                    cert.lambda0 = std::log(0.25);
                    cert.lambda1 = -700.0;
                    cert.M2 = 0.0;
                    cert.M3 = 0.0;
                    cert.alpha = 1.0;
                    cert.zeta = 0.25;
                } else if (tree_demo == "affine2d") {
                    sys.dim = 2;
                    sys.p_coords = {0};
                    sys.map = [](const ak::covering::Point& x) {
                        return ak::covering::Point{x[0] / 4.0, x[1] / 8.0};
                    };
                    cert.Lambda = 1;
                    cert.lambda0 = std::log(0.25);
                    cert.lambda1 = std::log(0.125);
                    cert.M2 = 1.0;
                    cert.M3 = 0.0;
                    cert.alpha = 0.5;
                    cert.zeta = 0.25;
                } else {
                    throw ak::UsageError("USAGE_TREE", "unknown tree demo " + tree_demo);
                }
                cert.admissible = true;
                ak::covering::PointCloud cloud{sys.dim, ak::VecNorm::MaxAbs, {}, {}};
                ak::Rng rng(seed);
                for (int i = 0; i < 600; ++i) {
                    ak::covering::Point p(sys.dim);
                    for (int d = 0; d < sys.dim; ++d) p[d] = rng.uniform(-1.0, 1.0);
                    cloud.pts.push_back(p);
                }
                const auto tree = ak::covering::build_covering_tree(sys, cert, 1.0, 6, cloud);
                ak::io::atomic_write_text(out_dir + "/tree.json",
                                          ak::io::tree_json(tree).dump(2) + "\n");
                const auto att = ak::covering::verify_exponential_attraction(sys, tree, cloud, 6);
                ak::io::atomic_write_text(out_dir + "/attraction.csv",
                                          ak::io::attraction_csv(att));
                std::cout << out_dir << "/tree.json\n" << out_dir << "/attraction.csv\n";
                return 0;
            }
            const auto centers = ak::covering::cover_ball(
                cover_dim, ak::norm_from_name(norm_name), r_ball, r_cover);
            Json j = run_header(seed);
            j["dim"] = cover_dim;
            j["norm"] = norm_name;
            j["r_ball"] = r_ball;
            j["r_cover"] = r_cover;
            j["count"] = centers.size();
            j["bound"] = ak::covering::covering_count_bound(cover_dim, r_ball / r_cover);
            j["centers"] = centers;
            ak::io::atomic_write_text(out_dir + "/cover.json", j.dump(2) + "\n");
            std::cout << out_dir << "/cover.json\n";
            return 0;
        }
        if (box_cmd->parsed()) {
            ak::covering::PointCloud cloud;
            cloud.norm = ak::norm_from_name(norm_name);
            std::vector<double> ladder;
            if (!cloud_path.empty()) {
                std::ifstream in(cloud_path);
                if (!in) throw ak::UsageError("USAGE_PATH", "cannot open cloud " + cloud_path);
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    const auto row = parse_csv_doubles(line);
                    if (row.empty()) continue;
                    cloud.dim = static_cast<int>(row.size());
                    cloud.pts.push_back(row);
                }
                if (eps_ladder_csv.empty())
                    throw ak::UsageError("USAGE_LADDER", "--eps-ladder required with --cloud");
            } else if (!model_path.empty()) {
                const auto loaded = ak::io::load_model(model_path);
                const auto model = loaded.kind == ak::io::LoadedModel::Kind::Rfde
                                       ? loaded.rfde
                                       : ak::rds::galerkin_reduce(loaded.rrd);
                cloud = attractor_cloud(model, 1.0, 10.0 * model.tau, 64, model.tau / 4.0,
                                        cfg.steps_per_delay, seed);
                ladder = default_ladder(1.0);
            } else {
                throw ak::UsageError("USAGE_CLOUD", "boxdim needs --cloud or --model");
            }
            if (!eps_ladder_csv.empty()) ladder = parse_csv_doubles(eps_ladder_csv);
            const auto res = ak::covering::box_counting_dimension(cloud, ladder);
            Json j = run_header(seed);
            j["boxdim"] = ak::io::boxdim_json(res);
            ak::io::atomic_write_text(out_dir + "/boxdim.json", j.dump(2) + "\n");
            std::cout << out_dir << "/boxdim.json\n";
            return 0;
        }
        if (rep_cmd->parsed()) return run_report(in_path, out_dir);
    } catch (const ak::UsageError& e) {
        std::cerr << e.what() << "\n";
        return 64;
    } catch (const ak::HypothesisError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const ak::NumericError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "NUMERIC_UNEXPECTED: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
