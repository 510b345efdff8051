#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using negimag::cli::OutputFormat;
using negimag::cli::RunConfig;

const char* kFooter = R"(CSV columns (floating point printed with 17 significant digits):
  analyze --format csv     omega, lambda_min_ni, lambda_min_pr
  nyquist                  omega, re_i_j, im_i_j for each output i and input j
  bode                     omega, mag_db_i_j, phase_deg_i_j for each output i and input j
  design-irc --format csv  gamma, pole_index, re, im, zeta
Rows at a pole on the frequency grid are left blank after omega.

Exit codes: 0 ran and the property holds, 2 ran and the property is false
(analyze: not NI; stability: not internally stable; synth-sf: infeasible or
failed verification), 1 error.)";

void add_grid_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--grid-min", cfg.grid_min, "Lowest frequency of the sweep (rad/s)");
  sub->add_option("--grid-max", cfg.grid_max, "Highest frequency of the sweep (rad/s)");
  sub->add_option("--ppd", cfg.points_per_decade, "Grid points per decade")->capture_default_str();
}

void add_output_flags(CLI::App* sub, RunConfig& cfg) {
  const std::map<std::string, OutputFormat> formats{{"json", OutputFormat::Json}, {"csv", OutputFormat::Csv}};
  sub->add_option("--format", cfg.format, "Output format: json or csv")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  sub->add_option("--out", cfg.out, "Write output to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Negative-imaginary systems analysis and controller design", "negimag"};
  app.require_subcommand(1);
  app.footer(kFooter);

  auto* analyze = app.add_subcommand("analyze", "NI / SNI / PR / SPR classification of a system file");
  analyze->add_option("system", cfg.inputs, "System JSON file")->required()->expected(1);
  add_grid_flags(analyze, cfg);
  analyze->add_option("--tol", cfg.tol, "Tolerance of the non-strict sweep checks");
  add_output_flags(analyze, cfg);

  auto* nyquist = app.add_subcommand("nyquist", "Frequency response as real and imaginary parts");
  nyquist->add_option("system", cfg.inputs, "System JSON file")->required()->expected(1);
  add_grid_flags(nyquist, cfg);
  add_output_flags(nyquist, cfg);

  auto* bode = app.add_subcommand("bode", "Frequency response as magnitude (dB) and phase (deg)");
  bode->add_option("system", cfg.inputs, "System JSON file")->required()->expected(1);
  add_grid_flags(bode, cfg);
  add_output_flags(bode, cfg);

  auto* stability = app.add_subcommand("stability", "DC-gain stability test of the positive-feedback loop of M and N");
  stability->add_option("systems", cfg.inputs, "M and N system JSON files")->required()->expected(2);
  stability->add_option("--tol", cfg.tol, "Tolerance of the non-strict sweep checks");
  add_output_flags(stability, cfg);

  auto* design = app.add_subcommand("design-irc", "Tune the integral resonant gain on a SISO plant");
  design->add_option("plant", cfg.inputs, "Plant system JSON file")->required()->expected(1);
  design->add_option("--margin", cfg.margin, "Phi = margin * P(0)")->capture_default_str();
  design->add_option("--gamma-min", cfg.gamma_min, "Smallest gain of the sweep")->capture_default_str();
  design->add_option("--gamma-max", cfg.gamma_max, "Largest gain of the sweep")->capture_default_str();
  design->add_option("--ppd", cfg.points_per_decade, "Gain points per decade")->capture_default_str();
  add_output_flags(design, cfg);

  auto* synth = app.add_subcommand("synth-sf", "State-feedback synthesis for an uncertain plant");
  synth->add_option("plant", cfg.inputs, "Uncertain plant JSON file")->required()->expected(1);
  synth->add_option("--eps", cfg.eps, "Strictness parameter of the synthesis LMIs")->capture_default_str();
  add_output_flags(synth, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every flag error maps to the error code.
    return app.exit(e) == 0 ? 0 : negimag::cli::kExitError;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  const negimag::cli::CommandResult res = negimag::cli::run_command(cfg);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  if (res.exit_code == negimag::cli::kExitError) {
    std::cerr << "error: " << res.error << '\n';
    return res.exit_code;
  }
  if (cfg.out) {
    std::ofstream f(*cfg.out);
    if (!f || !(f << res.output)) {
      std::cerr << "error: cannot write " << *cfg.out << '\n';
      return negimag::cli::kExitError;
    }
  } else {
    std::cout << res.output;
  }
  return res.exit_code;
}
