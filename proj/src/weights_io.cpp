#include "scnctl/weights_io.hpp"

#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"

namespace scnctl {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "scn-weights";
constexpr int kVersion = 1;

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j, const std::string& name) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("weights file: field '" + name +
                                "' has inconsistent size");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = data[k++].get<double>();
  }
  return m;
}

// Field table shared by the writer and the reader.
std::vector<std::pair<const char*, Matrix ScnWeights::*>> matrix_fields() {
  return {
      {"Omega_f_x", &ScnWeights::Omega_f_x}, {"Omega_f_z", &ScnWeights::Omega_f_z},
      {"Omega_s", &ScnWeights::Omega_s},     {"Omega_k", &ScnWeights::Omega_k},
      {"Omega_c", &ScnWeights::Omega_c},     {"Omega_z", &ScnWeights::Omega_z},
      {"F_x", &ScnWeights::F_x},             {"F_k", &ScnWeights::F_k},
      {"F_i", &ScnWeights::F_i},             {"F_z", &ScnWeights::F_z},
      {"D_u", &ScnWeights::D_u},
  };
}

}  // namespace

std::string weights_to_json(const ScnWeights& w, int indent) {
  json fields = json::object();
  fields["D_x"] = matrix_to_json(w.D_x.values);
  if (w.D_z) fields["D_z"] = matrix_to_json(w.D_z->values);
  for (const auto& [name, member] : matrix_fields()) {
    const Matrix& m = w.*member;
    if (m.size() > 0) fields[name] = matrix_to_json(m);
  }
  fields["T"] = matrix_to_json(Matrix(w.T));
  json doc = {{"format", kFormat},
              {"version", kVersion},
              {"mode", std::string(to_string(w.mode))},
              {"neurons", w.neurons()},
              {"state_dim", w.state_dim()},
              {"lambda", w.lambda},
              {"gamma_x", w.D_x.column_norm},
              {"fields", fields}};
  if (w.D_z) doc["gamma_z"] = w.D_z->column_norm;
  return doc.dump(indent);
}

ScnWeights weights_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("weights file: ") + e.what());
  }
  if (doc.value("format", "") != kFormat) {
    throw std::invalid_argument("weights file: not an scn-weights document");
  }
  if (doc.value("version", 0) != kVersion) {
    throw std::invalid_argument("weights file: unsupported version");
  }
  try {
    ScnWeights w;
    w.mode = network_mode_from_string(doc.at("mode").get<std::string>());
    w.lambda = doc.at("lambda").get<double>();
    const json& fields = doc.at("fields");
    w.D_x = DecoderMatrix{matrix_from_json(fields.at("D_x"), "D_x"),
                          doc.at("gamma_x").get<double>()};
    if (fields.contains("D_z")) {
      w.D_z = DecoderMatrix{matrix_from_json(fields.at("D_z"), "D_z"),
                            doc.at("gamma_z").get<double>()};
    }
    for (const auto& [name, member] : matrix_fields()) {
      if (fields.contains(name)) w.*member = matrix_from_json(fields.at(name), name);
    }
    w.T = matrix_from_json(fields.at("T"), "T").col(0);
    return w;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("weights file: ") + e.what());
  }
}

void export_weights(const ScnWeights& w, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << weights_to_json(w) << '\n';
}

ScnWeights import_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return weights_from_json(ss.str());
}

}  // namespace scnctl
