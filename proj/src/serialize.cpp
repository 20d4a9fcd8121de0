#include "locq/serialize.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace locq {

nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      entries.push_back({m(r, c).real(), m(r, c).imag()});
  return entries;
}

CMatrix matrix_from_json(const nlohmann::json& entries, Index rows, Index cols) {
  if (!entries.is_array() || static_cast<Index>(entries.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: entry count mismatch");
  CMatrix m(rows, cols);
  Index k = 0;
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("matrix_from_json: entries must be [re, im] pairs");
    m(k / cols, k % cols) = Complex(e[0].get<double>(), e[1].get<double>());
    ++k;
  }
  return m;
}

nlohmann::json density_to_json(const DensityMatrix& rho) {
  return {{"dim", rho.dim()}, {"entries", matrix_to_json(rho.matrix())}};
}

DensityMatrix density_from_json(const nlohmann::json& j) {
  const Index dim = j.at("dim").get<Index>();
  return DensityMatrix(matrix_from_json(j.at("entries"), dim, dim));
}

nlohmann::json channel_to_json(const LocalChannelPoint& c) {
  return {{"dims", {c.dim_a(), c.dim_b()}},
          {"s_a", matrix_to_json(c.s_a().matrix())},
          {"s_b", matrix_to_json(c.s_b().matrix())}};
}

LocalChannelPoint channel_from_json(const nlohmann::json& j) {
  const auto dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 2)
    throw std::invalid_argument("channel_from_json: dims must be [N_A, N_B]");
  const Index na = dims[0].get<Index>();
  const Index nb = dims[1].get<Index>();
  StiefelPoint sa(matrix_from_json(j.at("s_a"), na * na * na, na));
  StiefelPoint sb(matrix_from_json(j.at("s_b"), nb * nb * nb, nb));
  return LocalChannelPoint(std::move(sa), std::move(sb));
}

nlohmann::json kraus_to_json(const KrausSet& k) {
  nlohmann::json ops = nlohmann::json::array();
  for (const CMatrix& op : k.operators) ops.push_back(matrix_to_json(op));
  return {{"dim", k.dim}, {"operators", ops}};
}

KrausSet kraus_from_json(const nlohmann::json& j) {
  const Index dim = j.at("dim").get<Index>();
  std::vector<CMatrix> ops;
  for (const auto& op : j.at("operators")) ops.push_back(matrix_from_json(op, dim, dim));
  return KrausSet(dim, std::move(ops));
}

DensityMatrix load_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_density: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return density_from_json(j);
}

void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

} // namespace locq
