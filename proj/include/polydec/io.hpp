#pragma once

// JSON file formats.
//
//   polynomial  {"m":2,"d":2,"n":2,"coeffs":[[l numbers], ...]}        basis order
//   covariance  {"order":"coeffvector","dim":K,"matrix":[[K numbers], ...]}
//   model       {"W":[[...]],"V":[[...]],"g":[[ascending]...],"degree":d,"report":{...}}
//
// Matrices are written as arrays of rows.

#include "polydec/decouple.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace polydec::io {

using Json = nlohmann::json;

/// Malformed or inconsistent file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);

Json poly_to_json(const PolyMap& f);
PolyMap poly_from_json(const Json& j);

Json covariance_to_json(const CoeffCovariance& c);
/// Checks the size against the polynomial the covariance belongs to. With
/// `psd_project` the matrix is symmetrized and clipped to the PSD cone first.
CoeffCovariance covariance_from_json(const Json& j, const MonomialBasis& basis, int n, bool psd_project = false);

Json config_to_json(const AlsConfig& c);
/// Overlays keys present in `j` onto `base`.
AlsConfig config_from_json(const Json& j, AlsConfig base = {});

Json report_to_json(const FitReport& r);
Json model_to_json(const DecoupledModel& model);
Json model_to_json(const DecoupledModel& model, const FitReport& report);
DecoupledModel model_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace polydec::io
