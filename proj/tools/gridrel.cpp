// Command-line front end: scenario runs, the 4x4 adoption sweep, the
// perceived-vs-experienced illustration, and single-residence studies.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gridrel/gridrel.hpp"

namespace fs = std::filesystem;
using gridrel::g6;
using ordered_json = nlohmann::ordered_json;

namespace {

// All floats in machine-readable outputs carry six significant digits.
double j6(double x) { return std::stod(g6(x)); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gridrel::io_error("cannot open \"" + path.string() + "\" for writing");
  out << content;
  if (!out) throw gridrel::io_error("write failed for \"" + path.string() + "\"");
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw gridrel::io_error("cannot create output directory \"" + dir + "\": " + ec.message());
  return fs::path(dir);
}

std::string scenario_code(const gridrel::AdoptionScenario& sc) {
  return std::string(gridrel::kind_code(sc.pv_kind)) + "_" + gridrel::kind_code(sc.es_kind);
}

std::string summary_json(const gridrel::ScenarioResult& r, bool timings) {
  ordered_json j;
  j["scenario"] = scenario_code(r.scenario);
  j["n_samples"] = r.stats.n_samples;
  j["saifi_mean"] = j6(r.stats.saifi_mean);
  j["saifi_half"] = j6(r.stats.saifi_half);
  j["saidi_mean"] = j6(r.stats.saidi_mean);
  j["saidi_half"] = j6(r.stats.saidi_half);
  j["converged"] = r.stats.converged;
  j["runtime_seconds"] = timings ? j6(r.stats.runtime_seconds) : 0.0;
  return j.dump(2) + "\n";
}

std::string hist_csv(const gridrel::AifHistogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (const auto& [bin, count] : h.counts) {
    const double lo = static_cast<double>(bin) * h.bin_width;
    out += g6(lo) + "," + g6(lo + h.bin_width) + "," + std::to_string(count) + "\n";
  }
  return out;
}

std::string trace_csv(const std::vector<gridrel::BatchTraceRow>& trace) {
  std::string out = "n,saifi_mean,saifi_half,saidi_mean,saidi_half\n";
  for (const auto& row : trace) {
    out += std::to_string(row.n) + "," + g6(row.saifi_mean) + "," + g6(row.saifi_half) + "," +
           g6(row.saidi_mean) + "," + g6(row.saidi_half) + "\n";
  }
  return out;
}

void write_scenario_outputs(const fs::path& dir, const gridrel::ScenarioResult& r, bool timings) {
  write_file(dir / "summary.json", summary_json(r, timings));
  write_file(dir / "aif_hist.csv", hist_csv(r.stats.aif_histogram));
  write_file(dir / "convergence.csv", trace_csv(r.stats.trace));
}

void print_scenario(const gridrel::ScenarioResult& r) {
  const auto& s = r.stats;
  std::printf("scenario %s: %s after %zu samples (%.2f s)\n", scenario_code(r.scenario).c_str(),
              s.converged ? "converged" : "sample cap reached", s.n_samples, s.runtime_seconds);
  std::printf("  SAIFI %s +/- %s f/yr\n", g6(s.saifi_mean).c_str(), g6(s.saifi_half).c_str());
  std::printf("  SAIDI %s +/- %s h/yr\n", g6(s.saidi_mean).c_str(), g6(s.saidi_half).c_str());
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t workers = 1;
  bool timings = false;
};

gridrel::RunConfig resolve_config(const CommonArgs& args) {
  gridrel::RunConfig cfg;
  if (!args.config_path.empty()) cfg = gridrel::load_config(args.config_path);
  if (args.seed_set) cfg.mc.master_seed = args.seed;
  if (!args.out_dir.empty()) cfg.io.out_dir = args.out_dir;
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--out", args.out_dir, "output directory (overrides config io.out_dir)");
  cmd->add_option("--seed", args.seed, "master seed (overrides config mc.master_seed)")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--workers", args.workers, "worker threads; results are identical for any value")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--timings", args.timings,
                "record measured wall time in summary.json (off keeps outputs byte-stable)");
}

int cmd_example(const CommonArgs& args) {
  const auto rep = gridrel::compare_example();
  ordered_json j;
  j["saifi_p"] = j6(rep.saifi_p);
  j["saidi_p"] = j6(rep.saidi_p);
  j["saifi_e_case1"] = j6(rep.saifi_e_case1);
  j["saidi_e_case1"] = j6(rep.saidi_e_case1);
  j["saifi_e_case2"] = j6(rep.saifi_e_case2);
  j["saidi_e_case2"] = j6(rep.saidi_e_case2);
  const std::string text = j.dump(2) + "\n";
  const fs::path dir = ensure_dir(args.out_dir.empty() ? "out" : args.out_dir);
  write_file(dir / "example.json", text);
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_run(const CommonArgs& args, const std::string& pv_code, const std::string& es_code) {
  const auto cfg = resolve_config(args);
  const auto scenario = gridrel::make_scenario(
      gridrel::parse_kind(pv_code), gridrel::parse_kind(es_code), cfg.adoption.pv_ratio_max,
      cfg.adoption.es_ratio_max, cfg.adoption.zero_threshold);
  const auto spec = gridrel::build_modified_rbts(cfg.rbts_params());
  const auto result = gridrel::run_adaptive(spec, scenario, cfg.mc, args.workers);
  const fs::path dir = ensure_dir(cfg.io.out_dir);
  write_scenario_outputs(dir, result, args.timings);
  print_scenario(result);
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto spec = gridrel::build_modified_rbts(cfg.rbts_params());
  const auto sweep = gridrel::run_sweep(spec, cfg.mc, args.workers, cfg.adoption.zero_threshold);

  const fs::path dir = ensure_dir(cfg.io.out_dir);
  write_file(dir / "saifi_matrix.csv", gridrel::matrix_csv(sweep, gridrel::SweepMetric::Saifi));
  write_file(dir / "saidi_matrix.csv", gridrel::matrix_csv(sweep, gridrel::SweepMetric::Saidi));
  write_file(dir / "convergence.csv", gridrel::sweep_convergence_csv(sweep));

  bool any_failed = false;
  for (const auto& row : sweep.cells) {
    for (const auto& cell : row) {
      if (!cell.ok) {
        any_failed = true;
        std::fprintf(stderr, "cell failed: %s\n", cell.error.c_str());
        continue;
      }
      const fs::path cell_dir = ensure_dir((dir / "cells" / scenario_code(cell.result.scenario)).string());
      write_scenario_outputs(cell_dir, cell.result, args.timings);
      print_scenario(cell.result);
    }
  }
  return any_failed ? 4 : 0;
}

int cmd_residence(const CommonArgs& args, double x, double y, long long years) {
  const auto cfg = resolve_config(args);
  if (!(x >= 0.0 && x <= cfg.adoption.pv_ratio_max)) {
    throw gridrel::validation_error("residence: x must be in [0, " + g6(cfg.adoption.pv_ratio_max) + "]");
  }
  if (!(y >= 0.0 && y <= cfg.adoption.es_ratio_max)) {
    throw gridrel::validation_error("residence: y must be in [0, " + g6(cfg.adoption.es_ratio_max) + "]");
  }
  if (years < 1) throw gridrel::validation_error("residence: years must be >= 1");

  gridrel::ResidenceSpec res = cfg.residence_template();
  res.x = x;
  res.y = y;
  const auto profiles = cfg.load_profiles();
  const gridrel::LoadPointParams lp{cfg.system.lambda_per_year, cfg.system.outage_hours_per_year, 1};
  const double horizon_hours = static_cast<double>(years) * gridrel::kHoursPerYear;

  const std::uint64_t master = cfg.mc.master_seed;
  gridrel::SplitMix64 lp_rng(
      gridrel::derive_seed(master, gridrel::stream::kResidenceCmd, 0));
  gridrel::SplitMix64 comp_rng(
      gridrel::derive_seed(master, gridrel::stream::kResidenceCmd, 1));
  const auto supply = gridrel::synth_history(lp, horizon_hours, cfg.system.timestep_hours, lp_rng);
  const auto metrics = gridrel::simulate_residence(res, profiles, supply, comp_rng);

  ordered_json j;
  j["x"] = j6(x);
  j["y"] = j6(y);
  j["years"] = years;
  j["aif"] = j6(metrics.aif);
  j["aid_hours"] = j6(metrics.aid_hours);
  j["aens_kwh"] = j6(metrics.aens_kwh);
  j["events"] = metrics.events;
  const std::string text = j.dump(2) + "\n";
  const fs::path dir = ensure_dir(cfg.io.out_dir);
  write_file(dir / "residence.json", text);
  std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution-grid reliability simulator with behind-the-meter PV and storage"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string pv_code, es_code;
  double res_x = 0.0, res_y = 0.0;
  long long res_years = 10;

  auto* example = app.add_subcommand("example", "perceived vs experienced indices on a two-feeder illustration");
  example->add_option("--out", args.out_dir, "output directory");

  auto* run = app.add_subcommand("run", "adaptive estimate for one adoption scenario");
  add_common(run, args);
  run->add_option("--pv", pv_code, "PV adoption kind: L, V, MF, HC")->required();
  run->add_option("--es", es_code, "storage adoption kind: L, V, MF, HC")->required();

  auto* sweep = app.add_subcommand("sweep", "all 16 adoption scenarios, matrix outputs");
  add_common(sweep, args);

  auto* residence = app.add_subcommand("residence", "simulate a single residence");
  add_common(residence, args);
  residence->add_option("--x", res_x, "PV capacity ratio (kW per kW peak)")->required();
  residence->add_option("--y", res_y, "storage ratio (kWh per kW peak)")->required();
  residence->add_option("--years", res_years, "simulated horizon in years");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(example)) return cmd_example(args);
    if (app.got_subcommand(run)) return cmd_run(args, pv_code, es_code);
    if (app.got_subcommand(sweep)) return cmd_sweep(args);
    if (app.got_subcommand(residence)) return cmd_residence(args, res_x, res_y, res_years);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const gridrel::validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const gridrel::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
}
