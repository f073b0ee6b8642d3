#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcfusn/inference.hpp"
#include "lcfusn/model_selection.hpp"
#include "lcfusn/summary.hpp"

namespace lcfusn {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// Reads one observation per row. A first row that does not parse as numbers
/// is taken as a header. expected_n = 0 accepts whatever width the first data
/// row has. Row numbers in errors are 1-based file lines.
DataMatrix read_csv(const std::string& path, Index expected_n = 0);
DataMatrix parse_csv(std::istream& in, Index expected_n = 0, const std::string& source = "<input>");

/// %.17g, so the text round-trips to the same double.
std::string format_number(double x);

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values);

/// Columns mu_1..mu_n, sigma_i_j, delta, iteration.
void write_chain_csv(const std::string& path, const Chain& chain, Index n);
Chain read_chain_csv(const std::string& path, Index n);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text) noexcept;

/// Hash of the canonical (sorted-key, compact) dump of a config.
std::string config_hash(const Json& config);

/// Prior from JSON: {"mu0", "v", "alpha", "beta"} for the univariate form or
/// {"mu0", "sigma_mu", "d", "D"}. Missing keys take vague defaults.
PriorSpec prior_from_json(const Json& j, Index n);
Json prior_to_json(const PriorSpec& prior);

ChainConfig chain_config_from_json(const Json& j);
Json chain_config_to_json(const ChainConfig& c);

Json to_json(const ParameterSummary& s);
Json to_json(const ComparisonReport& r);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// {seed, config_hash, version, timestamp}; the timestamp is the only field
/// that changes between identical runs.
Json provenance(std::uint64_t seed, const Json& config);

/// Writes `text` atomically enough for our purposes (truncate + write).
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace lcfusn
