#include "cli.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mobgap/errors.hpp"
#include "mobgap/experiment.hpp"

namespace mobgap {

namespace {

using Runner = std::function<Report(const ExperimentConfig&)>;

const std::vector<std::pair<std::string, std::pair<std::string, Runner>>>& subcommands() {
  static const std::vector<std::pair<std::string, std::pair<std::string, Runner>>> table = {
      {"metric", {"local distance between H and H + tV for every t in t_grid", run_metric}},
      {"spectrum", {"eigenvalues of the model Hamiltonian", run_spectrum}},
      {"contour-check", {"contour-integral projection against the spectral one", run_contour_check}},
      {"chern", {"real-space Chern number at fermi_energy for every seed", run_chern}},
      {"chern-scan", {"Chern number over scan_points energies in [scan_lower, scan_upper]", run_chern_scan}},
      {"certify", {"insulator certificate on [window_lower, window_upper]", run_certify}},
      {"fmm-ensemble", {"disorder-averaged Green's function moments and B1 decay", run_fmm_ensemble}},
      {"sule", {"eigenvector centers and decay inside the window", run_sule}},
      {"continuity", {"certificate and Chern number along H + tV", run_continuity_experiment}},
      {"scan", {"Fermi-energy or disorder-strength scan", run_scan}},
  };
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

BlockOperator read_operator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open operator dump '" + path + "'");
  try {
    return read_operator(in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mobility-gap insulator toolkit: local distance, real-space Chern numbers and "
               "localization diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed_override;
  app.add_option("--config", config_path, "Experiment config (key = value lines)")->required();
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--jobs", jobs, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--seed-override", seed_override, "Run only this disorder seed");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));

  std::map<std::string, CLI::App*> parsers;
  for (const auto& [name, entry] : subcommands()) parsers[name] = app.add_subcommand(name, entry.first);

  std::string lhs_path;
  std::string rhs_path;
  auto* lhs = parsers["metric"]->add_option("--lhs", lhs_path, "Operator dump A (replaces the t_grid sweep)");
  auto* rhs = parsers["metric"]->add_option("--rhs", rhs_path, "Operator dump B");
  lhs->needs(rhs);
  rhs->needs(lhs);

  std::optional<double> fermi_energy;
  std::optional<std::string> switch_name;
  std::optional<int> side;
  parsers["chern"]->add_option("--fermi-energy", fermi_energy, "Overrides fermi_energy");
  parsers["chern"]->add_option("--switch", switch_name, "Overrides switch (sharp|tanh)");
  parsers["chern"]->add_option("--L", side, "Overrides the box side L");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ExperimentConfig cfg = parse_config(read_file(config_path));
    if (jobs) cfg.jobs = *jobs;
    if (seed_override) {
      cfg.model.seed = *seed_override;
      cfg.seeds = {*seed_override};
    }
    if (!out_path.empty()) cfg.output = out_path;
    if (fermi_energy) cfg.fermi_energy = *fermi_energy;
    if (switch_name) cfg.switch_name = *switch_name;
    if (side) cfg.model.side = *side;
    cfg.validate();

    Report report;
    if (!lhs_path.empty()) {
      report = run_metric_operators(read_operator_file(lhs_path), read_operator_file(rhs_path));
    } else {
      for (const auto& [name, entry] : subcommands()) {
        if (parsers[name]->parsed()) report = entry.second(cfg);
      }
    }
    const std::string text =
        emit_report(report, format == "json" ? ReportFormat::json : ReportFormat::csv);
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.output, std::ios::binary);
      if (!file) throw ConfigError("cannot write output file '" + cfg.output + "'");
      file << text;
    }
    if (report.falsified) {
      err << "FALSIFICATION: certified runs disagree on the Chern number\n";
      return kExitFalsification;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace mobgap
