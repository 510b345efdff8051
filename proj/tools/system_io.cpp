#include "system_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "negimag/errors.hpp"

namespace negimag::io {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Matrix parse_matrix(const json& value, const std::string& field) {
  if (!value.is_array()) throw ParseError("field '" + field + "': expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const json& row = value[i];
    if (!row.is_array()) throw ParseError("field '" + field + "[" + std::to_string(i) + "]': expected an array");
    std::vector<double> r;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) {
        throw ParseError("field '" + field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]': expected a number");
      }
      r.push_back(row[j].get<double>());
    }
    rows.push_back(std::move(r));
  }
  try {
    return matrix_from_rows(rows);
  } catch (const Error& e) {
    throw ParseError("field '" + field + "': " + e.what());
  }
}

namespace {

const json& require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

double require_number(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw ParseError("missing field '" + where + "." + key + "'");
  const json& v = doc.at(key);
  if (!v.is_number()) throw ParseError("field '" + where + "." + key + "': expected a number");
  return v.get<double>();
}

LoadedSystem parse_modal(const json& doc) {
  OutputKind kind = OutputKind::Position;
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    if (o == "position") {
      kind = OutputKind::Position;
    } else if (o == "velocity") {
      kind = OutputKind::Velocity;
    } else {
      throw ParseError("field 'output': expected \"position\" or \"velocity\"");
    }
  }
  const json& modes = require(doc, "modes");
  if (!modes.is_array() || modes.empty()) throw ParseError("field 'modes': expected a non-empty array");
  std::vector<Mode> list;
  Index channels = -1;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string where = "modes[" + std::to_string(i) + "]";
    Mode m;
    m.omega = require_number(modes[i], "omega", where);
    m.kappa = require_number(modes[i], "kappa", where);
    if (!modes[i].contains("psi")) throw ParseError("missing field '" + where + ".psi'");
    const json& psi = modes[i].at("psi");
    if (psi.is_number()) {
      m.psi = Vector::Constant(1, psi.get<double>());
    } else if (psi.is_array() && !psi.empty()) {
      m.psi = Vector(static_cast<Index>(psi.size()));
      for (std::size_t j = 0; j < psi.size(); ++j) {
        if (!psi[j].is_number()) throw ParseError("field '" + where + ".psi': expected numbers");
        m.psi(static_cast<Index>(j)) = psi[j].get<double>();
      }
    } else {
      throw ParseError("field '" + where + ".psi': expected a number or a non-empty array");
    }
    if (channels >= 0 && m.psi.size() != channels) throw ParseError("field '" + where + ".psi': length differs from mode 0");
    channels = m.psi.size();
    list.push_back(std::move(m));
  }
  try {
    ModalModel model(channels, std::move(list), kind);
    StateSpace sys = modal_to_ss(model);
    return LoadedSystem{std::move(sys), std::move(model)};
  } catch (const Error& e) {
    throw ParseError(std::string("modal model: ") + e.what());
  }
}

LoadedSystem parse_ss(const json& doc) {
  const Matrix d = parse_matrix(require(doc, "D"), "D");
  Matrix a = parse_matrix(require(doc, "A"), "A");
  Matrix b = parse_matrix(require(doc, "B"), "B");
  Matrix c = parse_matrix(require(doc, "C"), "C");
  if (a.size() == 0) {
    a = Matrix(0, 0);
    b = Matrix(0, d.cols());
    c = Matrix(d.rows(), 0);
  }
  try {
    return LoadedSystem{StateSpace(a, b, c, d), std::nullopt};
  } catch (const Error& e) {
    throw ParseError(std::string("state-space system: ") + e.what());
  }
}

}  // namespace

LoadedSystem parse_system(const json& doc) {
  if (!doc.is_object()) throw ParseError("system file: expected a JSON object");
  const json& kind = require(doc, "kind");
  if (kind == "ss") return parse_ss(doc);
  if (kind == "modal") return parse_modal(doc);
  throw ParseError("field 'kind': expected \"ss\" or \"modal\"");
}

LoadedSystem load_system(const std::string& path) {
  try {
    return parse_system(read_json_file(path));
  } catch (const ParseError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ParseError(path + ": " + what);
  }
}

UncertainPlant parse_uncertain_plant(const json& doc) {
  if (!doc.is_object()) throw ParseError("plant file: expected a JSON object");
  if (require(doc, "kind") != "uncertain_plant") throw ParseError("field 'kind': expected \"uncertain_plant\"");
  UncertainPlant p;
  p.A = parse_matrix(require(doc, "A"), "A");
  p.B1 = parse_matrix(require(doc, "B1"), "B1");
  p.B2 = parse_matrix(require(doc, "B2"), "B2");
  p.C1 = parse_matrix(require(doc, "C1"), "C1");
  try {
    p.validate();
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return p;
}

UncertainPlant load_uncertain_plant(const std::string& path) {
  try {
    return parse_uncertain_plant(read_json_file(path));
  } catch (const ParseError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ParseError(path + ": " + what);
  }
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json complex_to_json(const Complex& z) { return json::array({number(z.real()), number(z.imag())}); }

json complex_list_to_json(const ComplexVector& v) {
  json out = json::array();
  for (const Complex& z : v) out.push_back(complex_to_json(z));
  return out;
}

json system_to_json(const StateSpace& sys) {
  return json{{"kind", "ss"},
              {"A", matrix_to_json(sys.A())},
              {"B", matrix_to_json(sys.B())},
              {"C", matrix_to_json(sys.C())},
              {"D", matrix_to_json(sys.D())}};
}

}  // namespace negimag::io
