#pragma once

// JSON model files.
//
//   {
//     "name": "...",                       optional
//     "sensor_names": ["...", ...],        optional, N_y entries
//     "plant": { "A": [[...], ...], "B_u": ..., "B_d": ..., "C_y": ...,
//                "C_z": ..., "D_u": ..., "D_d": ..., "S_d": ... },
//     "weights": { "W_u": ..., "W_w": ..., "W_z": ... },   optional
//     "trim": { ... }                      optional, kept verbatim
//   }
//
// A matrix is either a row-major array of rows or {"diag": [...]}.
// S_d defaults to the identity. Any other top-level key is ignored.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "sparseobs/model.hpp"

namespace sparseobs {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelFile {
  std::string name;
  LtiPlant plant;  // as stored, before weighting
  std::optional<NormWeights> weights;
  std::string trim_json;  // "trim" re-serialised, empty if absent

  /// Weighted plant (or the raw plant without weights), checked for
  /// detectability.
  LtiPlant normalized() const;
};

/// Throws ModelFormatError for malformed text or missing/mis-shaped entries.
ModelFile parse_model(const std::string& text);
/// Also throws ModelFormatError when the file cannot be read.
ModelFile read_model_file(const std::filesystem::path& path);

/// read_model_file(path).normalized()
LtiPlant load_model(const std::filesystem::path& path);

std::string to_json(const ModelFile& m);

}  // namespace sparseobs
