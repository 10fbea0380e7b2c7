#include "attractorkit/io.hpp"

#include <unistd.h>

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace attractorkit::io {

const char* kToolkitVersion = "0.1.0";

namespace {

const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key))
        throw UsageError("USAGE_SCHEMA", "missing field " + path + key);
    return j.at(key);
}

double require_number(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_number()) throw UsageError("USAGE_SCHEMA", "field " + path + key + " must be a number");
    return v.get<double>();
}

dde::Nonlinearity parse_nonlinearity(const Json& j, const std::string& path) {
    const Json& nl = require(j, "nonlinearity", path);
    const std::string name = require(nl, "name", path + "nonlinearity.").get<std::string>();
    double gain = 0.0, cap = 0.0;
    if (nl.contains("params")) {
        const Json& p = nl.at("params");
        if (p.contains("k")) gain = p.at("k").get<double>();
        if (p.contains("cap")) cap = p.at("cap").get<double>();
    }
    return dde::nonlinearity_from_name(name, gain, cap);
}

}  // namespace

LoadedModel parse_model(const Json& j) {
    const std::string kind = require(j, "kind", "").get<std::string>();
    LoadedModel out;
    if (kind == "rfde") {
        out.kind = LoadedModel::Kind::Rfde;
        auto& m = out.rfde;
        m.dim = static_cast<int>(require_number(j, "n", ""));
        const Json& a = require(j, "A", "");
        if (!a.is_array() || a.size() != static_cast<size_t>(m.dim) * m.dim)
            throw UsageError("USAGE_SCHEMA", "field A must be a row-major n*n array");
        m.A = a.get<std::vector<double>>();
        const Json& b = require(j, "b", "");
        if (b.is_number()) {
            m.b.is_scalar = true;
            m.b.scalar = b.get<double>();
        } else if (b.is_array()) {
            m.b.is_scalar = false;
            m.b.matrix = b.get<std::vector<double>>();
            if (m.b.matrix.size() != static_cast<size_t>(m.dim) * m.dim)
                throw UsageError("USAGE_SCHEMA", "field b must be scalar or a row-major n*n array");
        } else {
            throw UsageError("USAGE_SCHEMA", "field b must be scalar or array");
        }
        m.tau = require_number(j, "tau", "");
        m.f = parse_nonlinearity(j, "");
        m.lipschitz = j.contains("lipschitz") ? j.at("lipschitz").get<double>()
                                              : m.f.catalog_lipschitz();
        m.f0_norm = j.contains("c1") ? j.at("c1").get<double>() : 0.0;
        m.validate();
    } else if (kind == "rrd") {
        out.kind = LoadedModel::Kind::Rrd;
        auto& m = out.rrd;
        m.a = require_number(j, "a", "");
        m.b = require_number(j, "b", "");
        m.r = require_number(j, "r", "");
        m.f = parse_nonlinearity(j, "");
        m.lipschitz = j.contains("lipschitz") ? j.at("lipschitz").get<double>()
                                              : m.f.catalog_lipschitz();
        m.f0_norm = j.contains("c1") ? j.at("c1").get<double>() : 0.0;
        m.n_modes = j.contains("n_modes") ? j.at("n_modes").get<int>() : 16;
        m.validate();
    } else {
        throw UsageError("USAGE_SCHEMA", "field kind must be rfde|rrd");
    }
    return out;
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("USAGE_PATH", "cannot open model file " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw UsageError("USAGE_SCHEMA", std::string("model file is not valid JSON: ") + e.what());
    }
    return parse_model(j);
}

Json model_echo(const LoadedModel& model) {
    Json j;
    if (model.kind == LoadedModel::Kind::Rfde) {
        const auto& m = model.rfde;
        j["kind"] = "rfde";
        j["n"] = m.dim;
        j["A"] = m.A;
        if (m.b.is_scalar) {
            j["b"] = m.b.scalar;
            j["b_form"] = "scalar_times_identity";
        } else {
            j["b"] = m.b.matrix;
            j["b_form"] = "matrix";
        }
        j["tau"] = m.tau;
        j["nonlinearity"] = {{"name", m.f.name()}, {"params", {{"k", m.f.gain}, {"cap", m.f.cap}}}};
        j["lipschitz"] = m.lipschitz;
        j["c1"] = m.f0_norm;
    } else {
        const auto& m = model.rrd;
        j["kind"] = "rrd";
        j["a"] = m.a;
        j["b"] = m.b;
        j["r"] = m.r;
        j["nonlinearity"] = {{"name", m.f.name()}, {"params", {{"k", m.f.gain}, {"cap", m.f.cap}}}};
        j["lipschitz"] = m.lipschitz;
        j["c1"] = m.f0_norm;
        j["n_modes"] = m.n_modes;
    }
    return j;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("USAGE_PATH", "cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

std::string timestamp() {
    std::time_t t;
    if (const char* epoch = std::getenv("ATTRACTORKIT_EPOCH"))
        t = static_cast<std::time_t>(std::atoll(epoch));
    else
        t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json roots_report(const std::vector<spectral::CharacteristicRoot>& roots) {
    Json arr = Json::array();
    for (const auto& r : roots) {
        Json e;
        e["re"] = r.lambda.real();
        e["im"] = r.lambda.imag();
        e["multiplicity"] = r.multiplicity;
        e["residual"] = r.residual;
        if (r.mode >= 0) e["mode"] = r.mode;
        arr.push_back(e);
    }
    return arr;
}

std::string roots_csv(const std::vector<spectral::CharacteristicRoot>& roots) {
    std::ostringstream os;
    os << "re,im,multiplicity,residual,mode\n";
    char buf[128];
    for (const auto& r : roots) {
        snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g,%d", r.lambda.real(), r.lambda.imag(),
                 r.multiplicity, r.residual, r.mode);
        os << buf << "\n";
    }
    return os.str();
}

Json decomposition_report(const spectral::SpectralDecomposition& decomp,
                          const spectral::DecayEstimate& est_squeeze,
                          const spectral::DecayEstimate& est_decay) {
    Json j;
    Json rhos = Json::array(), mults = Json::array();
    for (const auto& lvl : decomp.levels) {
        rhos.push_back(lvl.rho);
        mults.push_back(lvl.multiplicity);
    }
    j["rhos"] = rhos;
    j["multiplicities"] = mults;
    j["cut_m"] = decomp.cut_m;
    j["k_m"] = decomp.k_m;
    j["K"] = est_squeeze.K;
    j["K0"] = est_decay.K0;
    j["gamma"] = est_decay.gamma;
    j["quadrature_nodes"] = decomp.quadrature_nodes;
    j["safety_factor"] = est_decay.safety;
    j["gamma_fraction"] = est_decay.gamma_fraction;
    j["t_grid_squeeze"] = est_squeeze.t_grid;
    j["t_grid_decay"] = est_decay.t_grid;
    j["sample_count"] = est_decay.sample_count;
    j["seed"] = est_decay.seed;
    j["provenance"] = {{"rhos", "analytic"},
                       {"K", "sampled-estimate"},
                       {"K0", "sampled-estimate"},
                       {"gamma", "analytic-fraction"}};
    return j;
}

Json certificate_json(const bounds::SqueezingCertificate& cert) {
    Json j;
    j["Lambda"] = cert.Lambda;
    j["M1_literal"] = cert.M1_literal;
    j["M1_conservative"] = cert.M1_conservative;
    j["M2"] = cert.M2;
    j["M3"] = cert.M3;
    j["lambda0"] = cert.lambda0;
    j["lambda1"] = cert.lambda1;
    j["alpha"] = cert.alpha;
    j["zeta"] = cert.zeta;
    j["admissible"] = cert.admissible;
    j["formula"] = cert.formula;
    j["provenance"] = {{"M1_literal", "paper-literal"},
                       {"M1_conservative", "sampled-estimate"},
                       {"M2", "sampled-estimate"},
                       {"M3", "sampled-estimate"},
                       {"lambda0", "sampled-estimate"},
                       {"lambda1", "analytic"}};
    return j;
}

Json bound_report_json(const bounds::DimensionBoundReport& rep) {
    Json j;
    j["bound"] = rep.bound;
    j["Lambda"] = rep.Lambda;
    j["M1"] = rep.M1;
    j["alpha"] = rep.alpha;
    j["zeta"] = rep.zeta;
    j["formula"] = rep.formula;
    return j;
}

Json squeeze_report_json(const bounds::SqueezeReport& rep) {
    Json j;
    j["pairs"] = rep.pairs;
    j["slack"] = rep.slack;
    j["resamples"] = rep.resamples;
    j["pass_rate"] = rep.pass_rate;
    j["worst_margin"] = rep.worst_margin;
    j["pass"] = rep.pass;
    Json rows = Json::array();
    for (const auto& r : rep.rows) {
        rows.push_back({{"pair", r.pair},
                        {"t", r.t},
                        {"lhs_p", r.lhs_p},
                        {"rhs_p", r.rhs_p},
                        {"lhs_q", r.lhs_q},
                        {"rhs_q", r.rhs_q},
                        {"pass", r.pass}});
    }
    j["rows"] = rows;
    return j;
}

Json tree_json(const covering::CoveringTree& tree) {
    Json j;
    j["zeta"] = tree.zeta;
    j["R_B"] = tree.R_B;
    j["per_level_bound"] = tree.per_level_bound;
    Json levels = Json::array();
    for (const auto& lvl : tree.levels) {
        Json e;
        e["radius"] = lvl.radius;
        e["cardinality"] = lvl.centers.size();
        e["centers"] = lvl.centers;
        levels.push_back(e);
    }
    j["levels"] = levels;
    Json esizes = Json::array();
    for (const auto& e : tree.E) esizes.push_back(e.size());
    j["E_cardinalities"] = esizes;
    return j;
}

std::string attraction_csv(const covering::AttractionReport& rep) {
    std::ostringstream os;
    os << "n,semidistance,bound\n";
    char buf[80];
    for (const auto& row : rep.rows) {
        snprintf(buf, sizeof(buf), "%d,%.17g,%.17g", row.n, row.semidist, row.bound);
        os << buf << "\n";
    }
    return os.str();
}

Json boxdim_json(const covering::BoxCountResult& res) {
    Json j;
    j["estimate"] = res.estimate;
    j["eps"] = res.eps;
    j["counts"] = res.counts;
    j["skipped_leading"] = res.skipped_leading;
    return j;
}

}  // namespace attractorkit::io
