#pragma once

#include <string>

#include <json.hpp>

#include "sl/core.hpp"

namespace sl {

using json = nlohmann::ordered_json;

// JSON document layouts. All floats round-trip exactly (shortest
// representation that parses back to the same double). Complex vectors are
// stored as parallel "re"/"im" arrays.
json problem_to_json(const Problem& problem);
Problem problem_from_json(const json& j);

json spectral_data_to_json(const SpectralData& data);
SpectralData spectral_data_from_json(const json& j);

json cauchy_data_to_json(const CauchyData& cd);
CauchyData cauchy_data_from_json(const json& j);

json diagnostics_to_json(const Diagnostics& diag);
Diagnostics diagnostics_from_json(const json& j);

json reconstruction_to_json(const ReconstructionResult& result);
ReconstructionResult reconstruction_from_json(const json& j);

// Throws Error(Io) on filesystem failures and Error(Parse) on malformed or
// structurally invalid documents.
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
void write_text_file(const std::string& path, const std::string& text);

// "%.17g" — deterministic and round-trip exact, for CSV cells.
std::string format_double(double v);

// Per-x conditioning table plus the per-run scalars as trailing rows.
std::string diagnostics_csv(const Diagnostics& diag, const std::vector<double>& x_grid);

}  // namespace sl
