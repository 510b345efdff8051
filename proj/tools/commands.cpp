#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "negimag/controllers.hpp"
#include "negimag/errors.hpp"
#include "negimag/ni_analysis.hpp"
#include "negimag/robust_stability.hpp"
#include "negimag/synthesis.hpp"
#include "system_io.hpp"

namespace negimag::cli {

using nlohmann::json;
using io::complex_list_to_json;
using io::complex_to_json;
using io::matrix_to_json;
using io::number;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t expected_inputs(const std::string& command) { return command == "stability" ? 2 : 1; }

FrequencyGrid make_grid(const RunConfig& cfg, const StateSpace& sys) {
  if (cfg.grid_min || cfg.grid_max) {
    const FrequencyGrid fallback = default_grid(sys, cfg.points_per_decade);
    const double lo = cfg.grid_min.value_or(fallback.points.front());
    const double hi = cfg.grid_max.value_or(fallback.points.back());
    if (!(lo < hi)) throw InvalidArgument("--grid-min must be below --grid-max");
    return log_grid(lo, hi, cfg.points_per_decade, true);
  }
  return default_grid(sys, cfg.points_per_decade);
}

/// Frequencies in output order, with 0 first when the grid includes it.
std::vector<double> grid_frequencies(const FrequencyGrid& grid) {
  std::vector<double> w;
  if (grid.include_zero) w.push_back(0.0);
  w.insert(w.end(), grid.points.begin(), grid.points.end());
  return w;
}

SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions s;
  if (cfg.tol) s.tol = *cfg.tol;
  return s;
}

json verdict_json(const FreqVerdict& v) {
  json j{{"holds", v.holds},
         {"worst_frequency", number(v.worst_frequency)},
         {"worst_margin", number(v.worst_margin)},
         {"points_evaluated", v.grid.size()},
         {"reason", v.reason}};
  if (v.epsilon_shift > 0.0) j["epsilon_shift"] = v.epsilon_shift;
  return j;
}

std::string pole_location_name(PoleLocation p) {
  switch (p) {
    case PoleLocation::OpenLeft: return "open_left";
    case PoleLocation::ImaginaryAxis: return "imaginary_axis";
    case PoleLocation::OpenRight: return "open_right";
  }
  return "unknown";
}

json grid_json(const FrequencyGrid& grid) {
  return json{{"wmin", grid.points.front()},
              {"wmax", grid.points.back()},
              {"points", grid.points.size()},
              {"include_zero", grid.include_zero}};
}

json checks_json(const std::vector<ConstraintCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    out.push_back(json{{"name", c.name},
                       {"value", number(c.value)},
                       {"scale", number(c.scale)},
                       {"threshold", number(c.threshold)},
                       {"passed", c.passed}});
  }
  return out;
}

json verification_json(const VerificationReport& r) {
  return json{{"passed", r.passed},
              {"min_relative_margin", number(r.min_relative_margin)},
              {"max_relative_residual", number(r.max_relative_residual)},
              {"cones", checks_json(r.cones)},
              {"equalities", checks_json(r.equalities)}};
}

json certificate_json(const std::optional<LmiCertificate>& cert) {
  if (!cert) return nullptr;
  json values = json::array();
  for (const Matrix& m : cert->values.all()) values.push_back(matrix_to_json(m));
  return json{{"values", values},
              {"margin", number(cert->margin)},
              {"equality_residual", number(cert->equality_residual)}};
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

std::string blank_row(double omega, std::size_t cells) {
  std::vector<std::string> row{csv_number(omega)};
  row.resize(cells + 1);
  return join_row(row);
}

std::string pole_warning(double omega) {
  return "pole on the frequency grid at omega=" + csv_number(omega) + "; row left blank";
}

io::LoadedSystem load_square(const std::string& path) {
  io::LoadedSystem s = io::load_system(path);
  if (!s.sys.is_square()) throw DimensionError(path + ": system must be square");
  return s;
}

// Frequency data for nyquist/bode. `cell` maps one entry to two numbers.
template <class Cell>
CommandResult frequency_table(const RunConfig& cfg, const char* first, const char* second, Cell cell) {
  const io::LoadedSystem loaded = io::load_system(cfg.inputs.at(0));
  const StateSpace& sys = loaded.sys;
  const std::vector<double> w = grid_frequencies(make_grid(cfg, sys));
  const Index p = sys.num_outputs();
  const Index m = sys.num_inputs();
  CommandResult res;

  std::vector<std::string> header{"omega"};
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < m; ++j) {
      const std::string suffix = "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
      header.push_back(first + suffix);
      header.push_back(second + suffix);
    }
  }
  std::string csv = join_row(header);
  json channels = json::array();
  std::vector<std::vector<json>> columns(static_cast<std::size_t>(2 * p * m));

  for (double omega : w) {
    ComplexMatrix g;
    try {
      g = eval(sys, Complex(0.0, omega));
    } catch (const PoleProximityError&) {
      res.warnings.push_back(pole_warning(omega));
      csv += blank_row(omega, header.size() - 1);
      for (auto& c : columns) c.push_back(nullptr);
      continue;
    }
    std::vector<std::string> row{csv_number(omega)};
    std::size_t k = 0;
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < m; ++j) {
        const auto [a, b] = cell(g(i, j));
        row.push_back(csv_number(a));
        row.push_back(csv_number(b));
        columns[k++].push_back(number(a));
        columns[k++].push_back(number(b));
      }
    }
    csv += join_row(row);
  }

  if (cfg.format == OutputFormat::Csv) {
    res.output = csv;
    return res;
  }
  std::size_t k = 0;
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < m; ++j) {
      json ch{{"output", i + 1}, {"input", j + 1}};
      ch[first] = columns[k++];
      ch[second] = columns[k++];
      channels.push_back(std::move(ch));
    }
  }
  json doc{{"omega", w}, {"channels", channels}, {"warnings", res.warnings}};
  res.output = doc.dump(2) + "\n";
  return res;
}

CommandResult nyquist(const RunConfig& cfg) {
  return frequency_table(cfg, "re", "im", [](Complex z) { return std::pair{z.real(), z.imag()}; });
}

CommandResult bode(const RunConfig& cfg) {
  return frequency_table(cfg, "mag_db", "phase_deg", [](Complex z) {
    const double mag = std::abs(z);
    const double db = mag > 0.0 ? 20.0 * std::log10(mag) : kNaN;
    return std::pair{db, std::arg(z) * 180.0 / M_PI};
  });
}

std::string analyze_csv(const RunConfig& cfg, const StateSpace& sys, std::vector<std::string>& warnings) {
  std::string csv = "omega,lambda_min_ni,lambda_min_pr\n";
  for (double omega : grid_frequencies(make_grid(cfg, sys))) {
    ComplexMatrix g;
    try {
      g = eval(sys, Complex(0.0, omega));
    } catch (const PoleProximityError&) {
      warnings.push_back(pole_warning(omega));
      csv += blank_row(omega, 2);
      continue;
    }
    const ComplexMatrix gh = g.adjoint();
    const ComplexMatrix h = Complex(0.0, 1.0) * (g - gh);
    const ComplexMatrix pr = g + gh;
    csv += join_row({csv_number(omega), csv_number(eig_hermitian(0.5 * (h + h.adjoint())).minCoeff()),
                     csv_number(eig_hermitian(0.5 * (pr + pr.adjoint())).minCoeff())});
  }
  return csv;
}

}  // namespace

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"analyze", "nyquist", "bode", "stability", "design-irc", "synth-sf"};
  return names;
}

void validate(const RunConfig& cfg) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), cfg.command) == names.end()) {
    throw InvalidArgument("unknown command '" + cfg.command + "'");
  }
  const std::size_t want = expected_inputs(cfg.command);
  if (cfg.inputs.size() != want) {
    throw InvalidArgument(cfg.command + " expects " + std::to_string(want) + " input file(s), got " +
                          std::to_string(cfg.inputs.size()));
  }
  if (cfg.points_per_decade < 1) throw InvalidArgument("--ppd must be at least 1");
  if (cfg.grid_min && !(*cfg.grid_min > 0.0 && std::isfinite(*cfg.grid_min))) {
    throw InvalidArgument("--grid-min must be positive");
  }
  if (cfg.grid_max && !(*cfg.grid_max > 0.0 && std::isfinite(*cfg.grid_max))) {
    throw InvalidArgument("--grid-max must be positive");
  }
  if (cfg.grid_min && cfg.grid_max && !(*cfg.grid_min < *cfg.grid_max)) {
    throw InvalidArgument("--grid-min must be below --grid-max");
  }
  if (cfg.tol && !(*cfg.tol >= 0.0 && std::isfinite(*cfg.tol))) throw InvalidArgument("--tol must be non-negative");
  if (!(cfg.margin > 0.0 && std::isfinite(cfg.margin))) throw InvalidArgument("--margin must be positive");
  if (!(cfg.gamma_min > 0.0 && cfg.gamma_min < cfg.gamma_max && std::isfinite(cfg.gamma_max))) {
    throw InvalidArgument("--gamma-min and --gamma-max must satisfy 0 < min < max");
  }
  if (!(cfg.eps > 0.0 && std::isfinite(cfg.eps))) throw InvalidArgument("--eps must be positive");
}

json analyze_report(const RunConfig& cfg, int* exit_code) {
  const io::LoadedSystem loaded = load_square(cfg.inputs.at(0));
  const StateSpace& sys = loaded.sys;
  const FrequencyGrid grid = make_grid(cfg, sys);
  const SweepOptions opts = sweep_options(cfg);

  const FreqVerdict ni = check_ni_sweep(sys, grid, opts);
  const FreqVerdict sni_sweep = check_sni_sweep(sys, grid, opts);
  const FreqVerdict pr = check_positive_real(sys, grid, opts);
  const FreqVerdict spr = check_strictly_positive_real(sys, grid, opts);

  json sni_zeros = nullptr;
  bool sni = false;
  if (ni.holds) {
    const SniZerosResult z = check_sni_zeros(sys);
    sni = z.is_sni;
    json axis = json::array();
    for (const Complex& c : z.axis_zeros) axis.push_back(complex_to_json(c));
    sni_zeros = json{{"is_sni", z.is_sni},
                     {"degenerate", z.degenerate},
                     {"zeros", complex_list_to_json(z.zeros)},
                     {"axis_zeros", axis},
                     {"reason", z.reason}};
  }

  const NiLmiResult lmi = check_ni_lmi(sys);
  json lmi_json{{"is_ni", lmi.is_ni},
                {"status", to_string(lmi.status)},
                {"minimal", lmi.minimal},
                {"warnings", lmi.warnings},
                {"reason", lmi.reason},
                {"certificate", certificate_json(lmi.certificate)}};
  if (loaded.modal && loaded.modal->output() == OutputKind::Position) {
    lmi_json["modal_certificate"] = matrix_to_json(modal_ni_certificate(*loaded.modal));
  }

  json report{
      {"command", "analyze"},
      {"input", cfg.inputs.at(0)},
      {"system",
       {{"states", sys.num_states()},
        {"inputs", sys.num_inputs()},
        {"outputs", sys.num_outputs()},
        {"minimal", is_minimal(sys)},
        {"poles", complex_list_to_json(poles(sys))},
        {"pole_location", pole_location_name(classify_poles(sys))}}},
      {"grid", grid_json(grid)},
      {"verdict", {{"NI", ni.holds}, {"SNI", ni.holds && sni}, {"PR", pr.holds}, {"SPR", spr.holds}}},
      {"ni", verdict_json(ni)},
      {"ni_lmi", lmi_json},
      {"sni", {{"sweep", verdict_json(sni_sweep)}, {"zeros", sni_zeros}}},
      {"pr", verdict_json(pr)},
      {"spr", verdict_json(spr)},
  };
  if (exit_code) *exit_code = ni.holds ? kExitOk : kExitPropertyFalse;
  return report;
}

json stability_report(const RunConfig& cfg, int* exit_code) {
  const StateSpace m = load_square(cfg.inputs.at(0)).sys;
  const StateSpace n = load_square(cfg.inputs.at(1)).sys;
  Theorem5Options opts;
  opts.sweep = sweep_options(cfg);
  const StabilityReport r = theorem5_verdict(m, n, opts);
  if (exit_code) *exit_code = r.internally_stable ? kExitOk : kExitPropertyFalse;
  return json{{"command", "stability"},
              {"inputs", cfg.inputs},
              {"m_is_ni", r.m_is_ni},
              {"n_is_sni", r.n_is_sni},
              {"boundary_product_zero", r.boundary_product_zero},
              {"n_inf_psd", r.n_inf_psd},
              {"hypotheses_hold", r.hypotheses_hold},
              {"m_reason", r.m_reason},
              {"n_reason", r.n_reason},
              {"lambda_max_dc", number(r.lambda_max_dc)},
              {"dc_imag_residual", number(r.dc_imag_residual)},
              {"dc_eigs_real", r.dc_eigs_real},
              {"dc_verdict", to_string(r.dc_verdict)},
              {"theorem_applies", r.theorem_applies},
              {"pole_test_stable", r.pole_test_stable},
              {"internally_stable", r.internally_stable},
              {"closed_loop_poles", complex_list_to_json(r.closed_loop_poles)},
              {"summary", r.summary}};
}

namespace {

IrcDesign run_design(const RunConfig& cfg, const StateSpace& plant, double& phi) {
  if (plant.num_inputs() != 1 || plant.num_outputs() != 1) {
    throw DimensionError("design-irc: plant must be single-input single-output");
  }
  phi = choose_phi(plant, cfg.margin)(0, 0);
  IrcDesignOptions opts;
  opts.gamma_min = cfg.gamma_min;
  opts.gamma_max = cfg.gamma_max;
  opts.points_per_decade = cfg.points_per_decade;
  return design_irc_gamma(plant, phi, opts);
}

std::string locus_csv(const IrcDesign& d) {
  std::string csv = "gamma,pole_index,re,im,zeta\n";
  for (const LocusPoint& pt : d.locus) {
    for (Index i = 0; i < pt.poles.size(); ++i) {
      const Complex p = pt.poles[i];
      const double mag = std::abs(p);
      const double zeta = mag > 0.0 ? -p.real() / mag : 1.0;
      csv += join_row({csv_number(pt.gamma), std::to_string(i), csv_number(p.real()), csv_number(p.imag()),
                       csv_number(zeta)});
    }
  }
  return csv;
}

json design_json(const RunConfig& cfg, const IrcDesign& d, double phi) {
  std::size_t stable = 0;
  for (const auto& pt : d.locus) stable += pt.stable ? 1 : 0;
  return json{{"command", "design-irc"},
              {"input", cfg.inputs.at(0)},
              {"margin", cfg.margin},
              {"phi", phi},
              {"gamma_min", cfg.gamma_min},
              {"gamma_max", cfg.gamma_max},
              {"points_per_decade", cfg.points_per_decade},
              {"measure", "decay_rate"},
              {"gamma_star", d.gamma_star},
              {"tracked_index", d.tracked_index},
              {"tracked_pole", complex_to_json(d.tracked_pole)},
              {"zeta_star", d.zeta_star},
              {"decay_star", d.decay_star},
              {"open_loop_zeta", d.open_loop_zeta},
              {"locus_points", d.locus.size()},
              {"stable_locus_points", stable},
              {"controller", io::system_to_json(irc(d.gamma_star, phi))}};
}

}  // namespace

json design_irc_report(const RunConfig& cfg) {
  const StateSpace plant = io::load_system(cfg.inputs.at(0)).sys;
  double phi = 0.0;
  const IrcDesign d = run_design(cfg, plant, phi);
  return design_json(cfg, d, phi);
}

json synth_sf_report(const RunConfig& cfg, int* exit_code) {
  const UncertainPlant plant = io::load_uncertain_plant(cfg.inputs.at(0));
  SynthesisOptions opts;
  const SynthesisResult r = synthesize_state_feedback(plant, cfg.eps, opts);
  const ClosedLoopReport& v = r.verification;
  json verification{{"hurwitz", v.hurwitz},
                    {"closed_loop_poles", complex_list_to_json(v.closed_loop_poles)},
                    {"ni_lmi", v.ni_lmi},
                    {"ni_lmi_reason", v.ni_lmi_reason},
                    {"ni_sweep", v.ni_sweep},
                    {"phase_in_range", v.phase_in_range},
                    {"gcl0", matrix_to_json(v.gcl0)},
                    {"sigma_max_gcl0", number(v.sigma_max_gcl0)},
                    {"small_dc_gain", v.small_dc_gain},
                    {"gcl0_psd", v.gcl0_psd},
                    {"identity_error", v.identity_error ? number(*v.identity_error) : json(nullptr)},
                    {"identity_ok", v.identity_ok},
                    {"robust", v.robust},
                    {"passed", v.passed},
                    {"notes", v.notes}};
  json report{{"command", "synth-sf"},
              {"input", cfg.inputs.at(0)},
              {"feasible", r.feasible},
              {"eps", r.feasible ? json(r.eps) : json(nullptr)},
              {"eps_tried", r.eps_tried},
              {"message", r.message},
              {"K", r.feasible ? matrix_to_json(r.K) : json(nullptr)},
              {"certificate",
               r.feasible ? json{{"Y", matrix_to_json(r.Y)}, {"M", matrix_to_json(r.M)}} : json(nullptr)},
              {"lmi",
               {{"status", to_string(r.lmi.status)},
                {"newton_iterations", r.lmi.newton_iterations},
                {"message", r.lmi.message},
                {"verification", verification_json(r.lmi.verification)}}},
              {"verification", r.feasible ? verification : json(nullptr)}};
  if (exit_code) *exit_code = r.feasible && v.passed ? kExitOk : kExitPropertyFalse;
  return report;
}

CommandResult run_command(const RunConfig& cfg) {
  CommandResult res;
  try {
    validate(cfg);
    if (cfg.command == "nyquist") return nyquist(cfg);
    if (cfg.command == "bode") return bode(cfg);
    if (cfg.command == "analyze") {
      const json report = analyze_report(cfg, &res.exit_code);
      if (cfg.format == OutputFormat::Csv) {
        const io::LoadedSystem loaded = load_square(cfg.inputs.at(0));
        res.output = analyze_csv(cfg, loaded.sys, res.warnings);
      } else {
        res.output = report.dump(2) + "\n";
      }
      return res;
    }
    if (cfg.command == "stability") {
      if (cfg.format == OutputFormat::Csv) throw InvalidArgument("stability has no CSV output");
      res.output = stability_report(cfg, &res.exit_code).dump(2) + "\n";
      return res;
    }
    if (cfg.command == "design-irc") {
      const StateSpace plant = io::load_system(cfg.inputs.at(0)).sys;
      double phi = 0.0;
      const IrcDesign d = run_design(cfg, plant, phi);
      res.output = cfg.format == OutputFormat::Csv ? locus_csv(d) : design_json(cfg, d, phi).dump(2) + "\n";
      return res;
    }
    if (cfg.format == OutputFormat::Csv) throw InvalidArgument("synth-sf has no CSV output");
    res.output = synth_sf_report(cfg, &res.exit_code).dump(2) + "\n";
    return res;
  } catch (const std::exception& e) {
    CommandResult err;
    err.exit_code = kExitError;
    err.error = e.what();
    return err;
  }
}

}  // namespace negimag::cli
