#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "gridrel/errors.hpp"
#include "gridrel/mcengine.hpp"
#include "gridrel/rbts.hpp"
#include "gridrel/residential.hpp"
#include "gridrel/timeseries.hpp"

#include <nlohmann/json.hpp>

namespace gridrel {

// Declarative run configuration. Every field has a default matching the
// modified-RBTS desk-scale study; a JSON config file overrides any subset.
struct RunConfig {
  struct System {
    std::size_t n_loadpoints = 22;
    std::size_t total_customers = 4700;
    double lambda_per_year = 0.30;
    double outage_hours_per_year = 3.47;
    std::size_t sample_customers = 200;
    double horizon_years = 10.0;
    double timestep_hours = 1.0;
    bool shared_lp_history = true;
    std::size_t commercial_customers = 0;
  } system;

  struct Residential {
    double peak_load_kw = 4.0;
    double derating = 0.8;
    double eta_charge = 0.95;
    double eta_discharge = 0.95;
    double soc_min = 0.0;
    double soc_max = 1.0;
    double soc_init = 0.5;
    double charge_c_per_hour = 0.5;
    double discharge_c_per_hour = 0.5;
    double pv_lambda_per_year = 0.10;
    double pv_mttr_hours = 168.0;
    double es_lambda_per_year = 0.05;
    double es_mttr_hours = 168.0;
  } residential;

  struct Adoption {
    double pv_ratio_max = kPvRatioMax;
    double es_ratio_max = kEsRatioMax;
    double zero_threshold = 0.0;
  } adoption;

  MCConfig mc;

  struct Io {
    std::string load_profile_csv;   // empty: synthesize
    std::string ghi_profile_csv;    // empty: synthesize
    std::string load_column = "load";
    std::string ghi_column = "ghi";
    std::uint64_t profile_seed = 7;
    std::string out_dir = "out";
  } io;

  ResidenceSpec residence_template() const {
    ResidenceSpec r;
    r.peak_load_kw = residential.peak_load_kw;
    r.derating = residential.derating;
    r.eta_charge = residential.eta_charge;
    r.eta_discharge = residential.eta_discharge;
    r.soc_min = residential.soc_min;
    r.soc_max = residential.soc_max;
    r.soc_init = residential.soc_init;
    r.charge_c_per_hour = residential.charge_c_per_hour;
    r.discharge_c_per_hour = residential.discharge_c_per_hour;
    r.pv_comp = {residential.pv_lambda_per_year, residential.pv_mttr_hours};
    r.es_comp = {residential.es_lambda_per_year, residential.es_mttr_hours};
    r.x = 0.0;
    r.y = 0.0;
    return r;
  }

  ProfilePair load_profiles() const {
    if (io.load_profile_csv.empty() != io.ghi_profile_csv.empty()) {
      throw validation_error("io: provide both profile CSVs or neither");
    }
    if (io.load_profile_csv.empty()) {
      return synth_profiles(io.profile_seed, 8760, system.timestep_hours);
    }
    ProfilePair p;
    p.load_shape = normalize_to_peak(
        import_csv_series(io.load_profile_csv, io.load_column, system.timestep_hours));
    p.ghi_shape = normalize_to_peak(
        import_csv_series(io.ghi_profile_csv, io.ghi_column, system.timestep_hours));
    return p;
  }

  RbtsParams rbts_params() const {
    RbtsParams p;
    p.n_loadpoints = system.n_loadpoints;
    p.total_customers = system.total_customers;
    p.lambda_per_year = system.lambda_per_year;
    p.outage_hours_per_year = system.outage_hours_per_year;
    p.sample_customers = system.sample_customers;
    p.horizon_years = system.horizon_years;
    p.timestep_hours = system.timestep_hours;
    p.shared_lp_history = system.shared_lp_history;
    p.commercial_customers = system.commercial_customers;
    p.residence = residence_template();
    p.profiles = load_profiles();
    return p;
  }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : known) {
      if (it.key() == k) found = true;
    }
    if (!found) throw validation_error("config: unknown key \"" + where + it.key() + "\"");
  }
}

template <typename T>
void take(const json& obj, const char* key, T& into, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw validation_error("config: bad value for \"" + where + key + "\": " + e.what());
  }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  RunConfig cfg;
  json root;
  try {
    root = json::parse(text);
  } catch (const detail::json::exception& e) {
    throw validation_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw validation_error("config: top level must be an object");
  detail::reject_unknown(root, {"system", "residential", "adoption", "mc", "io"}, "");

  if (root.contains("system")) {
    const auto& s = root.at("system");
    detail::reject_unknown(s,
                           {"n_loadpoints", "total_customers", "lambda_per_year",
                            "outage_hours_per_year", "sample_customers", "horizon_years",
                            "timestep_hours", "shared_lp_history", "commercial_customers"},
                           "system.");
    detail::take(s, "n_loadpoints", cfg.system.n_loadpoints, "system.");
    detail::take(s, "total_customers", cfg.system.total_customers, "system.");
    detail::take(s, "lambda_per_year", cfg.system.lambda_per_year, "system.");
    detail::take(s, "outage_hours_per_year", cfg.system.outage_hours_per_year, "system.");
    detail::take(s, "sample_customers", cfg.system.sample_customers, "system.");
    detail::take(s, "horizon_years", cfg.system.horizon_years, "system.");
    detail::take(s, "timestep_hours", cfg.system.timestep_hours, "system.");
    detail::take(s, "shared_lp_history", cfg.system.shared_lp_history, "system.");
    detail::take(s, "commercial_customers", cfg.system.commercial_customers, "system.");
  }

  if (root.contains("residential")) {
    const auto& r = root.at("residential");
    detail::reject_unknown(
        r,
        {"peak_load_kw", "derating", "eta_charge", "eta_discharge", "soc_min", "soc_max",
         "soc_init", "charge_c_per_hour", "discharge_c_per_hour", "pv_lambda_per_year",
         "pv_mttr_hours", "es_lambda_per_year", "es_mttr_hours"},
        "residential.");
    detail::take(r, "peak_load_kw", cfg.residential.peak_load_kw, "residential.");
    detail::take(r, "derating", cfg.residential.derating, "residential.");
    detail::take(r, "eta_charge", cfg.residential.eta_charge, "residential.");
    detail::take(r, "eta_discharge", cfg.residential.eta_discharge, "residential.");
    detail::take(r, "soc_min", cfg.residential.soc_min, "residential.");
    detail::take(r, "soc_max", cfg.residential.soc_max, "residential.");
    detail::take(r, "soc_init", cfg.residential.soc_init, "residential.");
    detail::take(r, "charge_c_per_hour", cfg.residential.charge_c_per_hour, "residential.");
    detail::take(r, "discharge_c_per_hour", cfg.residential.discharge_c_per_hour, "residential.");
    detail::take(r, "pv_lambda_per_year", cfg.residential.pv_lambda_per_year, "residential.");
    detail::take(r, "pv_mttr_hours", cfg.residential.pv_mttr_hours, "residential.");
    detail::take(r, "es_lambda_per_year", cfg.residential.es_lambda_per_year, "residential.");
    detail::take(r, "es_mttr_hours", cfg.residential.es_mttr_hours, "residential.");
  }

  if (root.contains("adoption")) {
    const auto& a = root.at("adoption");
    detail::reject_unknown(a, {"pv_ratio_max", "es_ratio_max", "zero_threshold"}, "adoption.");
    detail::take(a, "pv_ratio_max", cfg.adoption.pv_ratio_max, "adoption.");
    detail::take(a, "es_ratio_max", cfg.adoption.es_ratio_max, "adoption.");
    detail::take(a, "zero_threshold", cfg.adoption.zero_threshold, "adoption.");
  }

  if (root.contains("mc")) {
    const auto& m = root.at("mc");
    detail::reject_unknown(m,
                           {"alpha", "batch_size", "min_samples", "max_samples", "eps_saifi",
                            "eps_saidi", "master_seed"},
                           "mc.");
    detail::take(m, "alpha", cfg.mc.alpha, "mc.");
    detail::take(m, "batch_size", cfg.mc.batch_size, "mc.");
    detail::take(m, "min_samples", cfg.mc.min_samples, "mc.");
    detail::take(m, "max_samples", cfg.mc.max_samples, "mc.");
    detail::take(m, "eps_saifi", cfg.mc.eps_saifi, "mc.");
    detail::take(m, "eps_saidi", cfg.mc.eps_saidi, "mc.");
    detail::take(m, "master_seed", cfg.mc.master_seed, "mc.");
  }

  if (root.contains("io")) {
    const auto& o = root.at("io");
    detail::reject_unknown(o,
                           {"load_profile_csv", "ghi_profile_csv", "load_column", "ghi_column",
                            "profile_seed", "out_dir"},
                           "io.");
    detail::take(o, "load_profile_csv", cfg.io.load_profile_csv, "io.");
    detail::take(o, "ghi_profile_csv", cfg.io.ghi_profile_csv, "io.");
    detail::take(o, "load_column", cfg.io.load_column, "io.");
    detail::take(o, "ghi_column", cfg.io.ghi_column, "io.");
    detail::take(o, "profile_seed", cfg.io.profile_seed, "io.");
    detail::take(o, "out_dir", cfg.io.out_dir, "io.");
  }

  cfg.mc.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("config: cannot open \"" + path + "\"");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

}  // namespace gridrel
