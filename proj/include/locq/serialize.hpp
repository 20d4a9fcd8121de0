#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "locq/channels.hpp"
#include "locq/density.hpp"

// JSON wire formats. Complex entries are [re, im] pairs in row-major order.
//   DensityMatrix:     {"dim": n, "entries": [[re, im], ...]}
//   LocalChannelPoint: {"dims": [N_A, N_B], "s_a": [[re, im], ...], "s_b": [...]}
//   KrausSet:          {"dim": N, "operators": [[[re, im], ...], ...]}

namespace locq {

nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& entries, Index rows, Index cols);

nlohmann::json density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const nlohmann::json& j);

nlohmann::json channel_to_json(const LocalChannelPoint& c);
LocalChannelPoint channel_from_json(const nlohmann::json& j);

nlohmann::json kraus_to_json(const KrausSet& k);
KrausSet kraus_from_json(const nlohmann::json& j);

DensityMatrix load_density(const std::string& path);
void save_json(const nlohmann::json& j, const std::string& path);

} // namespace locq
