#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mobgap/errors.hpp"
#include "mobgap/experiment.hpp"
#include "mobgap/quadrature.hpp"
#include "mobgap/rng.hpp"

namespace mobgap {

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::random_onsite: return "random_onsite";
    case PerturbationKind::staggered: return "staggered";
    case PerturbationKind::uniform: return "uniform";
  }
  return "random_onsite";
}

PerturbationKind perturbation_kind_from_string(const std::string& text) {
  if (text == "random_onsite") return PerturbationKind::random_onsite;
  if (text == "staggered") return PerturbationKind::staggered;
  if (text == "uniform") return PerturbationKind::uniform;
  throw std::invalid_argument("unknown perturbation kind '" + text + "'");
}

BlockOperator build_perturbation(const LatticeBox& box, int orbitals, const PerturbationSpec& spec) {
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(box.size()) * orbitals,
                          static_cast<Eigen::Index>(box.size()) * orbitals);
  for (std::size_t s = 0; s < box.size(); ++s) {
    const Site& x = box.site(s);
    for (int o = 0; o < orbitals; ++o) {
      const auto i = static_cast<Eigen::Index>(s) * orbitals + o;
      switch (spec.kind) {
        case PerturbationKind::random_onsite:
          v(i, i) = rng::centered(spec.seed, rng::kPerturbationStream,
                                  s * static_cast<std::size_t>(orbitals) + static_cast<std::size_t>(o), 2.0);
          break;
        case PerturbationKind::staggered:
          v(i, i) = (x[0] + x[1]) % 2 == 0 ? 1.0 : -1.0;
          break;
        case PerturbationKind::uniform:
          v(i, i) = 1.0;
          break;
      }
    }
  }
  return BlockOperator(box, orbitals, std::move(v), true);
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  if (trim(s).empty()) return parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': cannot read '" + text + "' as a number");
  }
  return value;
}

int parse_int(const std::string& key, const std::string& text) { return parse_number<int>(key, text); }
long parse_long(const std::string& key, const std::string& text) { return parse_number<long>(key, text); }
double parse_double(const std::string& key, const std::string& text) {
  return parse_number<double>(key, text);
}
std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  return parse_number<std::uint64_t>(key, text);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& part : split(text, ',')) out.push_back(parse_double(key, part));
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& part : split(text, ',')) out.push_back(parse_u64(key, part));
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format(values[i]);
  }
  return out;
}

Hopping parse_hopping(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 6) {
    throw ConfigError("key 'hopping': expected dx,dy,from,to,re,im, got '" + text + "'");
  }
  Hopping h;
  h.displacement = {parse_int("hopping", parts[0]), parse_int("hopping", parts[1])};
  h.from_orbital = parse_int("hopping", parts[2]);
  h.to_orbital = parse_int("hopping", parts[3]);
  h.amplitude = {parse_double("hopping", parts[4]), parse_double("hopping", parts[5])};
  return h;
}

std::string emit_hopping(const Hopping& h) {
  return std::to_string(h.displacement[0]) + "," + std::to_string(h.displacement[1]) + "," +
         std::to_string(h.from_orbital) + "," + std::to_string(h.to_orbital) + "," +
         format_double(h.amplitude.real()) + "," + format_double(h.amplitude.imag());
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define MOBGAP_DOUBLE(name, member)                                                       \
  Field {                                                                                 \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(name, v); }, \
        [](const ExperimentConfig& c) { return format_double(c.member); }                  \
  }
#define MOBGAP_INT(name, member)                                                       \
  Field {                                                                              \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = parse_int(name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }              \
  }
#define MOBGAP_STRING(name, member)                                          \
  Field {                                                                    \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = v; }, \
        [](const ExperimentConfig& c) { return c.member; }                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"kind",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.model.kind = model_kind_from_string(v);
         } catch (const std::invalid_argument&) {
           throw ConfigError("key 'kind': unknown model kind '" + v + "'");
         }
       },
       [](const ExperimentConfig& c) { return to_string(c.model.kind); }},
      MOBGAP_INT("d", model.dim),
      MOBGAP_INT("L", model.side),
      MOBGAP_INT("N", model.orbitals),
      {"flux_p", [](ExperimentConfig& c, const std::string& v) { c.model.flux_p = parse_long("flux_p", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.model.flux_p); }},
      {"flux_q", [](ExperimentConfig& c, const std::string& v) { c.model.flux_q = parse_long("flux_q", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.model.flux_q); }},
      MOBGAP_STRING("disorder_kind", model.disorder_kind),
      MOBGAP_DOUBLE("disorder_w", model.disorder_width),
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.model.seed = parse_u64("seed", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.model.seed); }},
      MOBGAP_DOUBLE("energy_shift", model.energy_shift),
      {"seeds", [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_u64_list("seeds", v); },
       [](const ExperimentConfig& c) {
         return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
       }},
      {"perturbation",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.perturbation.kind = perturbation_kind_from_string(v);
         } catch (const std::invalid_argument&) {
           throw ConfigError("key 'perturbation': unknown kind '" + v + "'");
         }
       },
       [](const ExperimentConfig& c) { return to_string(c.perturbation.kind); }},
      {"perturbation_seed",
       [](ExperimentConfig& c, const std::string& v) {
         c.perturbation.seed = parse_u64("perturbation_seed", v);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.perturbation.seed); }},
      {"t_grid", [](ExperimentConfig& c, const std::string& v) { c.t_grid = parse_double_list("t_grid", v); },
       [](const ExperimentConfig& c) { return join(c.t_grid, format_double); }},
      MOBGAP_DOUBLE("fermi_energy", fermi_energy),
      MOBGAP_DOUBLE("window_lower", window_lower),
      MOBGAP_DOUBLE("window_upper", window_upper),
      MOBGAP_STRING("switch", switch_name),
      MOBGAP_INT("trace_radius", trace_radius),
      MOBGAP_DOUBLE("chern_tolerance", chern_tolerance),
      MOBGAP_DOUBLE("cert_min_width", thresholds.min_width),
      MOBGAP_DOUBLE("cert_max_amplitude", thresholds.max_amplitude),
      MOBGAP_DOUBLE("cert_min_rate", thresholds.min_rate),
      MOBGAP_DOUBLE("cert_max_weight_norm", thresholds.max_weight_norm),
      MOBGAP_INT("cert_max_degeneracy", thresholds.max_degeneracy),
      MOBGAP_DOUBLE("cert_min_greens_power", thresholds.min_greens_power),
      MOBGAP_INT("cert_probe_radius", certificate.probe_radius),
      {"cert_weighted",
       [](ExperimentConfig& c, const std::string& v) { c.certificate.weighted = parse_bool("cert_weighted", v); },
       [](const ExperimentConfig& c) { return std::string(c.certificate.weighted ? "true" : "false"); }},
      MOBGAP_DOUBLE("cert_s", certificate.s),
      MOBGAP_INT("cert_quad_nodes", certificate.quad_nodes),
      MOBGAP_INT("cert_eta_points", certificate.eta_points),
      MOBGAP_DOUBLE("cert_relative_floor", certificate.relative_floor),
      MOBGAP_DOUBLE("falsification_distance", falsification_distance),
      MOBGAP_STRING("scan_kind", scan_kind),
      MOBGAP_DOUBLE("scan_lower", scan_lower),
      MOBGAP_DOUBLE("scan_upper", scan_upper),
      MOBGAP_INT("scan_points", scan_points),
      MOBGAP_DOUBLE("fm_s", fm_s),
      MOBGAP_INT("fm_samples", fm_samples),
      MOBGAP_DOUBLE("fm_eta_min", fm_eta_min),
      MOBGAP_DOUBLE("fm_eta_max", fm_eta_max),
      MOBGAP_INT("fm_eta_points", fm_eta_points),
      MOBGAP_INT("contour_nodes", contour_nodes),
      MOBGAP_STRING("output", output),
      MOBGAP_INT("jobs", jobs),
  };
  return table;
}

#undef MOBGAP_DOUBLE
#undef MOBGAP_INT
#undef MOBGAP_STRING

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "': " + what);
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  return seeds.empty() ? std::vector<std::uint64_t>{model.seed} : seeds;
}

FractionalMomentConfig ExperimentConfig::fractional_moment() const {
  FractionalMomentConfig fm;
  fm.s = fm_s;
  fm.window = window();
  fm.quad_nodes = certificate.quad_nodes;
  fm.eta_grid = log_grid(fm_eta_min, fm_eta_max, fm_eta_points);
  return fm;
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  require(!t_grid.empty(), "t_grid", "must not be empty");
  require(t_grid.front() == 0.0, "t_grid", "must start at 0");
  require(std::is_sorted(t_grid.begin(), t_grid.end()), "t_grid", "must be sorted");
  require(window_lower < window_upper, "window_lower", "must be below window_upper");
  require(switch_name == "sharp" || switch_name == "tanh", "switch", "must be sharp or tanh");
  require(trace_radius >= -1, "trace_radius", "must be -1 (default) or >= 0");
  require(chern_tolerance > 0.0 && chern_tolerance < 0.5, "chern_tolerance", "must lie in (0, 0.5)");
  require(thresholds.max_degeneracy >= 0, "cert_max_degeneracy", "must be >= 0");
  require(certificate.probe_radius >= 0, "cert_probe_radius", "must be >= 0");
  require(certificate.s > 0.0 && certificate.s < 1.0, "cert_s", "must lie in (0, 1)");
  require(certificate.quad_nodes >= 1, "cert_quad_nodes", "must be >= 1");
  require(certificate.eta_points >= 1, "cert_eta_points", "must be >= 1");
  require(certificate.relative_floor >= 0.0 && certificate.relative_floor < 1.0, "cert_relative_floor",
          "must lie in [0, 1)");
  require(falsification_distance > 0.0, "falsification_distance", "must be positive");
  require(scan_kind == "fermi" || scan_kind == "disorder", "scan_kind", "must be fermi or disorder");
  require(scan_points >= 0, "scan_points", "must be >= 0");
  require(scan_points == 0 || scan_lower < scan_upper, "scan_lower", "must be below scan_upper");
  require(fm_s > 0.0 && fm_s < 1.0, "fm_s", "must lie in (0, 1)");
  require(fm_samples >= 1, "fm_samples", "must be >= 1");
  require(fm_eta_min > 0.0 && fm_eta_min <= fm_eta_max, "fm_eta_min", "must lie in (0, fm_eta_max]");
  require(fm_eta_points >= 1, "fm_eta_points", "must be >= 1");
  require(contour_nodes >= 1, "contour_nodes", "must be >= 1");
  require(jobs >= 1, "jobs", "must be >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, const Field*> by_key;
  for (const Field& f : fields()) by_key[f.key] = &f;

  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "hopping") {
      cfg.model.hoppings.push_back(parse_hopping(value));
      continue;
    }
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError("unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    it->second->set(cfg, value);
  }
  for (const char* key : {"kind", "L"}) {
    if (!seen.count(key)) throw ConfigError("missing required key '" + std::string(key) + "'");
  }
  cfg.validate();
  return cfg;
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) {
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    if (std::string(f.key) == "energy_shift") {
      for (const Hopping& h : cfg.model.hoppings) out += "hopping = " + emit_hopping(h) + "\n";
    }
  }
  return out;
}

namespace {

std::string csv_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char c : v) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
          return quoted + "\"";
        }
      },
      cell);
}

nlohmann::ordered_json json_cell(const Cell& cell) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, cell);
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json doc;
    doc["schema"] = "mobgap-" + report.kind + "/1";
    doc["columns"] = report.columns;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
      nlohmann::ordered_json r = nlohmann::ordered_json::array();
      for (const Cell& c : row) r.push_back(json_cell(c));
      doc["rows"].push_back(std::move(r));
    }
    doc["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.metadata) doc["metadata"][key] = json_cell(value);
    return doc.dump(2) + "\n";
  }
  std::string out = "# schema: mobgap-" + report.kind + "/1\n";
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    out += (i ? "," : "") + report.columns[i];
  }
  out += "\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  for (const auto& [key, value] : report.metadata) out += "# " + key + " = " + csv_cell(value) + "\n";
  return out;
}

}  // namespace mobgap
