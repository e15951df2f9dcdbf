#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cvcon/bounds.hpp"
#include "cvcon/harness.hpp"

namespace cvcon {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form used in every CSV cell.
std::string format_double(double x);

Json to_json(const StabilityProfile& p);
StabilityProfile profile_from_json(const Json& j);

/// {"profiles": [...]}
Json profiles_bundle(const std::vector<StabilityProfile>& profiles);
std::vector<StabilityProfile> read_profiles_bundle(const std::string& path);

Json to_json(const MomentEnvelope& e);
Json to_json(const SubGammaParams& p);
Json to_json(const BoundInputs& inp);
Json to_json(const BoundResult& r);

Json to_json(const CoverageReport& r);
Json to_json(const DecompositionReport& r);
Json to_json(const ScalingReport& r);
Json to_json(const EfronSteinReport& r);

std::string stability_csv(const std::vector<StabilityProfile>& profiles);
std::string bound_csv(const std::vector<BoundResult>& results);
std::string coverage_csv(const CoverageReport& r);
std::string decomposition_csv(const DecompositionReport& r);
std::string scaling_csv(const ScalingReport& r);
std::string efron_stein_csv(const EfronSteinReport& r);

/// Writes text to path, creating parent directories.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace cvcon
