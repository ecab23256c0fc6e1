#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "imdev/bounds.hpp"
#include "imdev/config.hpp"
#include "imdev/functional.hpp"
#include "imdev/monte_carlo.hpp"
#include "imdev/oracle.hpp"
#include "imdev/process.hpp"

namespace imdev {

using Json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex_digest(std::uint64_t d);
// 17 significant digits; reads back bit-exact.
std::string format_double(double v);

Json to_json(const InnovationLaw& law);
Json to_json(const LagLaw& law);
Json to_json(const ProcessSpec& spec);
Json to_json(const FunctionalSpec& f);
Json to_json(const DominatingSpec& d);
Json to_json(const TailBound& b);
Json to_json(const EmpiricalEstimate& e);
Json to_json(const VerificationReport& r);
Json to_json(const DecompositionReport& r, bool include_paths = true);
Json to_json(const FiniteInstance& inst);
Json to_json(const XGridSpec& g);
Json to_json(const DominatingRequest& r);
Json to_json(const ExperimentConfig& c);

// Strict readers: unknown fields and wrong types raise ConfigError.
InnovationLaw innovation_from_json(const Json& j);
LagLaw lag_law_from_json(const Json& j);
ProcessSpec process_spec_from_json(const Json& j);
FunctionalSpec functional_from_json(const Json& j);
DominatingSpec dominating_from_json(const Json& j);
VerificationReport verification_report_from_json(const Json& j);
FiniteInstance finite_instance_from_json(const Json& j);
XGridSpec x_grid_from_json(const Json& j);
DominatingRequest dominating_request_from_json(const Json& j);
ExperimentConfig experiment_config_from_json(const Json& j);

// FNV-1a over the canonical JSON of the spec.
std::uint64_t spec_digest(const ProcessSpec& spec);
std::uint64_t config_digest(const ExperimentConfig& config);

Json parse_json_text(const std::string& text, const std::string& origin);
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file in the same directory followed by rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string csv_join(const std::vector<std::string>& cells);

}  // namespace imdev
