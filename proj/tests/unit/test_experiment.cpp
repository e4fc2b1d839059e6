#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mobgap/experiment.hpp"
#include "mobgap/localization.hpp"

using namespace mobgap;

namespace {

/// Two orbitals at on-site energies +-3 with hopping 0.5 inside each orbital and 0.3 between
/// them. The spectrum keeps a gap around (-1.15, 1.15); the inter-orbital term makes P nonlocal
/// so B has a finite decay rate.
const char* kGapped =
    "kind = custom\nd = 2\nL = 9\nN = 2\n"
    "hopping = 0,0,0,0,3,0\nhopping = 0,0,1,1,-3,0\n"
    "hopping = 1,0,0,0,0.5,0\nhopping = 0,1,0,0,0.5,0\n"
    "hopping = 1,0,1,1,0.5,0\nhopping = 0,1,1,1,0.5,0\n"
    "hopping = 1,0,0,1,0.3,0\nhopping = 0,1,0,1,0.3,0\n"
    "window_lower = -0.5\nwindow_upper = 0.5\nfermi_energy = 0\n";

ExperimentConfig gapped(const std::string& extra = "") { return parse_config(std::string(kGapped) + extra); }

template <typename T>
T cell(const Report& r, std::size_t row, const std::string& column) {
  for (std::size_t c = 0; c < r.columns.size(); ++c)
    if (r.columns[c] == column) return std::get<T>(r.rows.at(row).at(c));
  FAIL("no column " << column);
  return T{};
}

template <typename T>
T meta(const Report& r, const std::string& key) {
  for (const auto& [k, v] : r.metadata)
    if (k == key) return std::get<T>(v);
  FAIL("no metadata " << key);
  return T{};
}

}  // namespace

TEST_CASE("gapped custom model passes the certificate with C0 >= 1", "[experiment][certificate]") {
  const ExperimentConfig cfg = gapped();
  const SpectralDecomposition dec = diagonalize(build_hamiltonian(cfg.model));
  REQUIRE(dec.count_below(0.0) == dec.size() / 2);
  REQUIRE(dec.distance_to_spectrum(0.0) >= 1.0 - 1e-12);
  const InsulatorCertificate cert = insulator_certificate(dec, cfg.window(), cfg.thresholds, cfg.certificate);
  REQUIRE(cert.pass);
  REQUIRE(cert.degeneracy == 0);
  REQUIRE(cert.b1_fit.rate > 1.0);
  // B(x,x) counts the full diagonal of one of the two projections, so C cannot be below 1.
  REQUIRE(cert.b1_envelope_amplitude >= 1.0 - 1e-12);
  REQUIRE(cert.inner_window == EnergyWindow(-0.25, 0.25));
  for (const CertificateClause& c : cert.clauses) REQUIRE(c.pass);
}

TEST_CASE("clean metal fails the decay clause", "[experiment][certificate]") {
  ModelSpec metal;
  metal.side = 15;
  const InsulatorCertificate cert =
      insulator_certificate(build_hamiltonian(metal), EnergyWindow(-0.5, 0.5), CertificateThresholds{});
  REQUIRE_FALSE(cert.pass);
  bool rate_failed = false;
  for (const CertificateClause& c : cert.clauses)
    if (c.name == "rate") rate_failed = !c.pass;
  REQUIRE(rate_failed);
}

TEST_CASE("strongly disordered chain passes the certificate", "[experiment][certificate]") {
  ModelSpec spec;
  spec.dim = 1;
  spec.side = 101;
  spec.disorder_width = 8.0;
  spec.seed = 3;
  const InsulatorCertificate cert =
      insulator_certificate(build_hamiltonian(spec), EnergyWindow(-0.5, 0.5), CertificateThresholds{});
  REQUIRE(cert.pass);
  CertificateOptions weighted;
  weighted.weighted = true;
  const InsulatorCertificate wcert = insulator_certificate(build_hamiltonian(spec), EnergyWindow(-0.5, 0.5),
                                                           CertificateThresholds{}, weighted);
  double l1 = 0.0;
  for (double a : wcert.b1_fit.weights) l1 += std::abs(a);
  REQUIRE(l1 == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("continuity with t_grid {0} gives one undeformed row per seed", "[experiment][continuity]") {
  const ExperimentConfig cfg = gapped("seeds = 1,2\n");
  const Report r = run_continuity_experiment(cfg);
  REQUIRE(r.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(cell<double>(r, i, "t") == 0.0);
    REQUIRE(cell<double>(r, i, "d_ell") == 0.0);
  }
  REQUIRE(meta<long long>(r, "falsifications") == 0);
  REQUIRE_FALSE(r.falsified);
}

TEST_CASE("continuity on a gapped model keeps one Chern number", "[experiment][continuity]") {
  const ExperimentConfig cfg = gapped("t_grid = 0, 0.1, 0.2, 0.3\nperturbation = random_onsite\n");
  const Report r = run_continuity_experiment(cfg);
  REQUIRE(r.rows.size() == 4);
  double previous = -1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(cell<bool>(r, i, "cert_pass"));
    REQUIRE(cell<bool>(r, i, "decided"));
    REQUIRE(cell<long long>(r, i, "chern_rounded") == 0);
    const double d = cell<double>(r, i, "d_ell");
    REQUIRE(d > previous);
    previous = d;
  }
  REQUIRE(meta<long long>(r, "falsifications") == 0);
  REQUIRE(meta<long long>(r, "certified_rows") == 4);
  REQUIRE(meta<std::string>(r, "common_chern") == "0");
  REQUIRE(meta<double>(r, "empirical_proxy_largest_certified_t_unchanged_chern") == 0.3);
}

TEST_CASE("continuity reports a falsification for a forced Chern jump", "[experiment][continuity]") {
  // Loose thresholds certify everything; a uniform shift by 3 moves E_F = 1.5 from the upper to
  // the lower Hofstadter gap.
  const ExperimentConfig cfg = parse_config(
      "kind = hofstadter\nL = 11\nflux_p = 1\nflux_q = 3\nfermi_energy = 1.5\n"
      "window_lower = 1.3\nwindow_upper = 1.7\nt_grid = 0, 3\nperturbation = uniform\n"
      "chern_tolerance = 0.45\nfalsification_distance = 5\n"
      "cert_min_width = 0\ncert_max_amplitude = 1e12\ncert_min_rate = -1e9\n"
      "cert_max_degeneracy = 1000\ncert_min_greens_power = -1e9\n");
  const Report r = run_continuity_experiment(cfg);
  REQUIRE(cell<long long>(r, 0, "chern_rounded") == -cell<long long>(r, 1, "chern_rounded"));
  REQUIRE(cell<long long>(r, 0, "chern_rounded") != 0);
  REQUIRE(meta<long long>(r, "falsifications") == 1);
  REQUIRE(r.falsified);
}

TEST_CASE("scan with no grid points is empty", "[experiment][scan]") {
  const Report fermi = run_scan(gapped());
  REQUIRE(fermi.rows.empty());
  REQUIRE_FALSE(fermi.columns.empty());
  const Report disorder = run_scan(gapped("scan_kind = disorder\n"));
  REQUIRE(disorder.rows.empty());
}

TEST_CASE("fermi scan inside a certified gap is constant", "[experiment][scan]") {
  const Report r = run_scan(gapped("scan_points = 5\nscan_lower = -0.4\nscan_upper = 0.4\n"));
  REQUIRE(r.rows.size() == 5);
  REQUIRE(meta<bool>(r, "rounded_constant_in_certified_window"));
  REQUIRE(meta<double>(r, "raw_spread") < 1e-9);
  REQUIRE_FALSE(r.falsified);
}

TEST_CASE("disorder scan visits every strength", "[experiment][scan]") {
  const Report r = run_scan(gapped("scan_kind = disorder\nscan_points = 3\nscan_lower = 0\nscan_upper = 1\n"));
  REQUIRE(r.rows.size() == 3);
  REQUIRE(cell<double>(r, 2, "disorder_w") == 1.0);
}

TEST_CASE("metric sweep respects the envelope and the norm bound", "[experiment][metric]") {
  const Report r = run_metric(gapped("t_grid = 0, 0.05, 0.5, 2\n"));
  REQUIRE(r.rows.size() == 4);
  REQUIRE(cell<double>(r, 0, "d_ell") == 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(cell<bool>(r, i, "envelope_ok"));
    REQUIRE(cell<double>(r, i, "opnorm_diff") <= cell<double>(r, i, "opnorm_bound") * (1 + 1e-12));
  }
  // On-site |V| <= 1, so d_ell(H, H + tV) = t while t >= 1/50.
  REQUIRE(cell<double>(r, 2, "d_ell") <= 0.5 + 1e-9);
}

TEST_CASE("spectrum and contour-check reports", "[experiment]") {
  const ExperimentConfig cfg = gapped("contour_nodes = 25\n");
  const Report s = run_spectrum(cfg);
  REQUIRE(s.rows.size() == 162);
  for (std::size_t i = 1; i < s.rows.size(); ++i)
    REQUIRE(cell<double>(s, i, "eigenvalue") >= cell<double>(s, i - 1, "eigenvalue"));
  REQUIRE(meta<long long>(s, "count_below_fermi_energy") == 81);

  const Report c = run_contour_check(cfg);
  REQUIRE(c.rows.size() == 3);
  REQUIRE(meta<bool>(c, "monotone"));
  REQUIRE(cell<double>(c, 2, "max_error") < 1e-6);
}

TEST_CASE("certify, chern and chern-scan reports", "[experiment]") {
  const ExperimentConfig cfg = gapped("scan_points = 3\nscan_lower = -0.3\nscan_upper = 0.3\n");
  const Report cert = run_certify(cfg);
  REQUIRE(meta<long long>(cert, "certified_seeds") == 1);
  const Report chern = run_chern(cfg);
  REQUIRE(chern.rows.size() == 1);
  REQUIRE(cell<long long>(chern, 0, "chern_rounded") == 0);
  const Report scan = run_chern_scan(cfg);
  REQUIRE(scan.rows.size() == 3);
}

TEST_CASE("sule report on a disordered chain", "[experiment]") {
  const ExperimentConfig cfg = parse_config("kind = anderson\nd = 1\nL = 201\ndisorder_w = 5\nseed = 4\n");
  const Report r = run_sule(cfg);
  REQUIRE(r.rows.size() >= 5);
  REQUIRE(meta<double>(r, "median_rate") > 0.1);
}

TEST_CASE("fmm-ensemble report carries three fits and the Jensen check", "[experiment]") {
  const ExperimentConfig cfg = parse_config(
      "kind = anderson\nd = 1\nL = 41\ndisorder_w = 8\nseed = 5\nfm_s = 0.3\nfm_samples = 20\n"
      "fm_eta_points = 4\njobs = 2\n");
  const Report r = run_fmm_ensemble(cfg);
  REQUIRE(r.rows.size() == 41);
  REQUIRE(meta<double>(r, "fm_fit_rate") > 0.0);
  REQUIRE(meta<double>(r, "second_fit_rate") > 0.0);
  REQUIRE(meta<double>(r, "b1_fit_rate") > 0.0);
  REQUIRE(meta<long long>(r, "jensen_violations") == 0);
}

TEST_CASE("reports do not depend on the worker count", "[experiment][determinism]") {
  const std::string extra = "seeds = 1,2,3\nt_grid = 0, 0.1\nscan_points = 3\nscan_lower = -0.3\nscan_upper = 0.3\n";
  ExperimentConfig one = gapped(extra);
  ExperimentConfig many = gapped(extra);
  many.jobs = 4;
  for (auto runner : {run_continuity_experiment, run_scan, run_metric, run_chern, run_certify}) {
    REQUIRE(emit_report(runner(one), ReportFormat::csv) == emit_report(runner(many), ReportFormat::csv));
  }
}
