#pragma once

// JSON system files.
//
//   {"kind": "ss", "A": [[..]], "B": [[..]], "C": [[..]], "D": [[..]]}
//   {"kind": "modal", "output": "position" | "velocity",
//    "modes": [{"omega": w, "kappa": k, "psi": [..]}, ...]}
//   {"kind": "uncertain_plant", "A": .., "B1": .., "B2": .., "C1": ..}
//
// Matrices are arrays of rows. A static gain uses "A": [] with B and C
// empty as well.

#include <optional>
#include <string>

#include <json.hpp>

#include "negimag/state_space.hpp"
#include "negimag/synthesis.hpp"

namespace negimag::io {

struct LoadedSystem {
  StateSpace sys;
  std::optional<ModalModel> modal;
};

nlohmann::json read_json_file(const std::string& path);

LoadedSystem parse_system(const nlohmann::json& doc);
LoadedSystem load_system(const std::string& path);

UncertainPlant parse_uncertain_plant(const nlohmann::json& doc);
UncertainPlant load_uncertain_plant(const std::string& path);

Matrix parse_matrix(const nlohmann::json& value, const std::string& field);
nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json complex_to_json(const Complex& z);
nlohmann::json complex_list_to_json(const ComplexVector& v);
/// Non-finite doubles become null.
nlohmann::json number(double v);

nlohmann::json system_to_json(const StateSpace& sys);

}  // namespace negimag::io
