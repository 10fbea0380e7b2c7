#pragma once

#include <string>

#include "json.hpp"

#include "attractorkit/bounds.hpp"
#include "attractorkit/covering.hpp"
#include "attractorkit/dde.hpp"
#include "attractorkit/rds.hpp"
#include "attractorkit/spectral.hpp"

namespace attractorkit::io {

using Json = nlohmann::ordered_json;

struct LoadedModel {
    enum class Kind { Rfde, Rrd } kind = Kind::Rfde;
    dde::DelayModel rfde;
    rds::RdModel rrd;
};

/// Parse a model config file; schema errors carry the offending field path.
LoadedModel load_model(const std::string& path);
LoadedModel parse_model(const Json& j);
Json model_echo(const LoadedModel& model);

/// Write-to-temp-then-rename so readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

/// ISO timestamp; honors ATTRACTORKIT_EPOCH (seconds) for reproducible output.
std::string timestamp();

extern const char* kToolkitVersion;
constexpr int kSchemaVersion = 1;

Json roots_report(const std::vector<spectral::CharacteristicRoot>& roots);
std::string roots_csv(const std::vector<spectral::CharacteristicRoot>& roots);

Json decomposition_report(const spectral::SpectralDecomposition& decomp,
                          const spectral::DecayEstimate& est_squeeze,
                          const spectral::DecayEstimate& est_decay);

Json certificate_json(const bounds::SqueezingCertificate& cert);
Json bound_report_json(const bounds::DimensionBoundReport& rep);

Json squeeze_report_json(const bounds::SqueezeReport& rep);
Json tree_json(const covering::CoveringTree& tree);
std::string attraction_csv(const covering::AttractionReport& rep);
Json boxdim_json(const covering::BoxCountResult& res);

}  // namespace attractorkit::io
