#include "polydec/io.hpp"

#include <fstream>
#include <sstream>

namespace polydec::io {

namespace {

template <typename T>
T get(const Json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw FormatError(what + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(what + ": bad value for '" + key + "': " + e.what());
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != cols)
      throw FormatError(what + ": row " + std::to_string(i) + " has " +
                        std::to_string(row.is_array() ? row.size() : 0) + " entries, expected " +
                        std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw FormatError(what + ": non-numeric entry in row " + std::to_string(i));
      m(static_cast<Index>(i), static_cast<Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

Json poly_to_json(const PolyMap& f) {
  return Json{{"m", f.num_inputs()}, {"d", f.degree()}, {"n", f.num_outputs()}, {"coeffs", matrix_to_json(f.coeffs())}};
}

PolyMap poly_from_json(const Json& j) {
  const int m = get<int>(j, "m", "polynomial");
  const int d = get<int>(j, "d", "polynomial");
  const int n = get<int>(j, "n", "polynomial");
  const MonomialBasis basis = basis_enumerate(m, d);
  if (!j.contains("coeffs") || !j["coeffs"].is_array()) throw FormatError("polynomial: missing 'coeffs' array");
  const Json& rows = j["coeffs"];
  if (rows.size() != static_cast<std::size_t>(n))
    throw FormatError("polynomial: 'coeffs' has " + std::to_string(rows.size()) + " rows, n = " + std::to_string(n));
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(basis.size()))
      throw FormatError("polynomial: row " + std::to_string(i) + " has " +
                        std::to_string(rows[i].is_array() ? rows[i].size() : 0) + " coefficients, expected " +
                        std::to_string(basis.size()) + " (m=" + std::to_string(m) + ", d=" + std::to_string(d) + ")");
  return PolyMap(basis, matrix_from_json(rows, "polynomial coeffs"));
}

Json covariance_to_json(const CoeffCovariance& c) {
  return Json{{"order", "coeffvector"}, {"dim", c.size()}, {"matrix", matrix_to_json(c.matrix())}};
}

CoeffCovariance covariance_from_json(const Json& j, const MonomialBasis& basis, int n, bool psd_project) {
  if (j.contains("order") && j["order"] != "coeffvector")
    throw FormatError("covariance: unsupported order '" + j["order"].dump() + "'");
  const Matrix m = matrix_from_json(j.contains("matrix") ? j["matrix"] : Json(), "covariance matrix");
  const Index expected = (basis.size() - 1) * n;
  if (j.contains("dim") && j["dim"].get<Index>() != m.rows())
    throw FormatError("covariance: 'dim' is " + j["dim"].dump() + " but the matrix has " + std::to_string(m.rows()) +
                      " rows");
  if (m.rows() != expected || m.cols() != expected)
    throw FormatError("covariance is " + detail::shape(m.rows(), m.cols()) + ", the polynomial (m=" +
                      std::to_string(basis.num_vars()) + ", d=" + std::to_string(basis.max_degree()) +
                      ", n=" + std::to_string(n) + ") needs " + detail::shape(expected, expected));
  try {
    return CoeffCovariance(psd_project ? project_psd(m) : m);
  } catch (const DomainError& e) {
    throw FormatError(std::string("covariance: ") + e.what());
  }
}

Json config_to_json(const AlsConfig& c) {
  return Json{{"r", c.r},
              {"n_points", c.n_points},
              {"tol", c.tol_rel_step},
              {"max_iters", c.max_iters},
              {"restarts", c.restarts},
              {"seed", c.seed},
              {"weight", to_string(c.weight)},
              {"sampling", to_string(c.sampling)},
              {"nullspace_scale", c.nullspace_scale},
              {"rank_threshold", c.rank_threshold},
              {"strict_weight", c.strict_weight}};
}

AlsConfig config_from_json(const Json& j, AlsConfig c) {
  if (!j.is_object()) throw FormatError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "r") c.r = value.get<int>();
      else if (key == "n_points") c.n_points = value.get<int>();
      else if (key == "tol") c.tol_rel_step = value.get<double>();
      else if (key == "max_iters") c.max_iters = value.get<int>();
      else if (key == "restarts") c.restarts = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "weight") c.weight = parse_weight_kind(value.get<std::string>());
      else if (key == "sampling") c.sampling = parse_sampling(value.get<std::string>());
      else if (key == "nullspace_scale") c.nullspace_scale = value.get<double>();
      else if (key == "rank_threshold") c.rank_threshold = value.get<double>();
      else if (key == "strict_weight") c.strict_weight = value.get<bool>();
      else throw FormatError("config: unknown key '" + key + "'");
    } catch (const Json::exception& e) {
      throw FormatError("config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

Json report_to_json(const FitReport& r) {
  return Json{{"iterations", r.iterations},
              {"final_cost", r.final_cost},
              {"rel_step", r.rel_step},
              {"exit_reason", to_string(r.exit_reason)},
              {"best_restart", r.best_restart},
              {"restart_costs", r.restart_costs},
              {"cost_trace", r.cost_trace},
              {"rank_deficient_solve", r.rank_deficient_solve},
              {"warnings", r.warnings},
              {"unweighted_residual", optional_number(r.unweighted_residual)},
              {"coeff_rel_error", optional_number(r.coeff_rel_error)},
              {"constant_abs_error", optional_number(r.constant_abs_error)},
              {"weighted_coeff_error", optional_number(r.weighted_coeff_error)},
              {"config", config_to_json(r.config)}};
}

Json model_to_json(const DecoupledModel& model) {
  Json g = Json::array();
  for (const Vector& gj : model.g) g.push_back(std::vector<double>(gj.data(), gj.data() + gj.size()));
  return Json{{"W", matrix_to_json(model.W)}, {"V", matrix_to_json(model.V)}, {"g", g}, {"degree", model.degree}};
}

Json model_to_json(const DecoupledModel& model, const FitReport& report) {
  Json j = model_to_json(model);
  j["report"] = report_to_json(report);
  return j;
}

DecoupledModel model_from_json(const Json& j) {
  DecoupledModel model;
  model.W = matrix_from_json(j.contains("W") ? j["W"] : Json(), "model W");
  model.V = matrix_from_json(j.contains("V") ? j["V"] : Json(), "model V");
  if (!j.contains("g") || !j["g"].is_array()) throw FormatError("model: missing 'g' array");
  int max_len = 0;
  for (const Json& gj : j["g"]) {
    const auto c = gj.get<std::vector<double>>();
    model.g.push_back(Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size())));
    max_len = std::max(max_len, static_cast<int>(c.size()));
  }
  model.degree = j.contains("degree") ? j["degree"].get<int>() : max_len - 1;
  try {
    model.validate();
  } catch (const DimensionError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  return model;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

}  // namespace polydec::io
