#include "sparseobs/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sparseobs {

namespace {

using nlohmann::json;

Matrix read_matrix(const json& j, const std::string& what) {
  if (j.is_object()) {
    if (!j.contains("diag") || j.size() != 1) {
      throw ModelFormatError(what + ": matrix object must be {\"diag\": [...]}");
    }
    const json& d = j.at("diag");
    if (!d.is_array()) throw ModelFormatError(what + ": diag must be an array");
    Vector v(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d[i].is_number()) throw ModelFormatError(what + ": non-numeric entry");
      v(static_cast<Eigen::Index>(i)) = d[i].get<double>();
    }
    return v.asDiagonal();
  }
  if (!j.is_array()) throw ModelFormatError(what + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw ModelFormatError(what + ": row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ModelFormatError(what + ": ragged rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& x = row[static_cast<std::size_t>(k)];
      if (!x.is_number()) throw ModelFormatError(what + ": non-numeric entry");
      m(i, k) = x.get<double>();
    }
  }
  return m;
}

Matrix required(const json& obj, const char* key, const std::string& scope) {
  if (!obj.contains(key)) throw ModelFormatError(scope + ": missing \"" + key + "\"");
  return read_matrix(obj.at(key), scope + "." + key);
}

json write_matrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

LtiPlant ModelFile::normalized() const {
  LtiPlant p = weights ? apply_weights(plant, *weights) : plant;
  check_plant(p);
  return p;
}

ModelFile parse_model(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(std::string("model file: ") + e.what());
  }
  if (!root.is_object()) throw ModelFormatError("model file: top level must be an object");
  if (!root.contains("plant") || !root.at("plant").is_object()) {
    throw ModelFormatError("model file: missing \"plant\" object");
  }

  ModelFile m;
  if (root.contains("name")) {
    if (!root.at("name").is_string()) throw ModelFormatError("model file: name must be a string");
    m.name = root.at("name").get<std::string>();
  }

  const json& pj = root.at("plant");
  LtiPlant& p = m.plant;
  p.A = required(pj, "A", "plant");
  p.B_u = required(pj, "B_u", "plant");
  p.B_d = required(pj, "B_d", "plant");
  p.C_y = required(pj, "C_y", "plant");
  p.C_z = required(pj, "C_z", "plant");
  p.D_u = required(pj, "D_u", "plant");
  p.D_d = required(pj, "D_d", "plant");
  p.S_d = pj.contains("S_d") ? read_matrix(pj.at("S_d"), "plant.S_d") : Matrix::Identity(p.B_d.cols(), p.B_d.cols());

  if (root.contains("sensor_names")) {
    const json& names = root.at("sensor_names");
    if (!names.is_array()) throw ModelFormatError("model file: sensor_names must be an array");
    for (const json& n : names) {
      if (!n.is_string()) throw ModelFormatError("model file: sensor names must be strings");
      p.sensor_names.push_back(n.get<std::string>());
    }
  }

  if (root.contains("weights")) {
    const json& wj = root.at("weights");
    if (!wj.is_object()) throw ModelFormatError("model file: weights must be an object");
    NormWeights w;
    w.W_u = required(wj, "W_u", "weights");
    w.W_w = required(wj, "W_w", "weights");
    w.W_z = required(wj, "W_z", "weights");
    m.weights = std::move(w);
  }
  if (root.contains("trim")) m.trim_json = root.at("trim").dump();

  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("model file: ") + e.what());
  }
  return m;
}

ModelFile read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ModelFormatError("cannot read model file " + path.string());
  return parse_model(ss.str());
}

LtiPlant load_model(const std::filesystem::path& path) { return read_model_file(path).normalized(); }

std::string to_json(const ModelFile& m) {
  json root;
  if (!m.name.empty()) root["name"] = m.name;
  if (!m.plant.sensor_names.empty()) root["sensor_names"] = m.plant.sensor_names;
  json& pj = root["plant"];
  pj["A"] = write_matrix(m.plant.A);
  pj["B_u"] = write_matrix(m.plant.B_u);
  pj["B_d"] = write_matrix(m.plant.B_d);
  pj["C_y"] = write_matrix(m.plant.C_y);
  pj["C_z"] = write_matrix(m.plant.C_z);
  pj["D_u"] = write_matrix(m.plant.D_u);
  pj["D_d"] = write_matrix(m.plant.D_d);
  pj["S_d"] = write_matrix(m.plant.S_d);
  if (m.weights) {
    root["weights"]["W_u"] = write_matrix(m.weights->W_u);
    root["weights"]["W_w"] = write_matrix(m.weights->W_w);
    root["weights"]["W_z"] = write_matrix(m.weights->W_z);
  }
  if (!m.trim_json.empty()) root["trim"] = json::parse(m.trim_json);
  return root.dump(2);
}

}  // namespace sparseobs
