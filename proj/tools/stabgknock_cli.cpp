// Command-line front end. Links only the extern-C library surface; all
// numeric work happens behind the opaque handles.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "stabgknock.h"

namespace {

struct CommonFlags {
  std::string data_path;
  std::string response = "y";
  std::string covariate = "u";
  std::string config_path;
  std::string out_path;
  std::optional<double> q;
  std::optional<std::string> mode;
  std::optional<std::string> statistic;
  std::optional<int> L;
  std::optional<int> k;
  std::optional<int> n1;
  std::optional<long long> seed;
  std::optional<int> threads;
  std::optional<std::string> screen_method;
  bool force_two_stage = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool needs_data) {
  if (needs_data) {
    cmd->add_option("--data", f.data_path, "input CSV (header row)")->required();
    cmd->add_option("--response", f.response, "response column name (default y)");
    cmd->add_option("--covariate", f.covariate, "nonparametric covariate column (default u)");
  }
  cmd->add_option("--q", f.q, "nominal FDR level (default 0.1)");
  cmd->add_option("--mode", f.mode, "knockoff or knockoff+ (default knockoff+)");
  cmd->add_option("--statistic", f.statistic, "spd, lsm or lcd (default spd)");
  cmd->add_option("--L", f.L, "subsampling replications (default 100)");
  cmd->add_option("--k", f.k, "screening sparsity (default floor(n/log n))");
  cmd->add_option("--n1", f.n1, "screening split size (default floor(n/2))");
  cmd->add_option("--seed", f.seed, "random seed (required for select/simulate)");
  cmd->add_option("--threads", f.threads, "cap on worker threads (default: all cores)");
  cmd->add_option("--config", f.config_path, "key=value file; entries override flags");
  cmd->add_option("--out", f.out_path, "output path (default: result JSON to stdout)");
}

using ConfigPtr = std::unique_ptr<sgk_config, decltype(&sgk_config_free)>;
using DatasetPtr = std::unique_ptr<sgk_dataset, decltype(&sgk_dataset_free)>;
using ResultPtr = std::unique_ptr<sgk_result, decltype(&sgk_result_free)>;

int fail(int code) {
  std::cerr << "error: " << sgk_last_error() << "\n";
  return code;
}

ConfigPtr build_config(const CommonFlags& f, bool seed_required, int* status) {
  sgk_config* raw = nullptr;
  sgk_config_create(&raw);
  ConfigPtr cfg(raw, sgk_config_free);

  auto set = [&](const char* key, const std::string& value) {
    sgk_config_set(cfg.get(), key, value.c_str());
  };
  if (f.q) set("q", std::to_string(*f.q));
  if (f.mode) set("mode", *f.mode);
  if (f.statistic) set("statistic", *f.statistic);
  if (f.L) set("L", std::to_string(*f.L));
  if (f.k) set("k", std::to_string(*f.k));
  if (f.n1) set("n1", std::to_string(*f.n1));
  if (f.seed) set("seed", std::to_string(*f.seed));
  if (f.screen_method) set("screen.method", *f.screen_method);
  if (f.force_two_stage) set("force_two_stage", "true");

  // Per the interface contract, config-file entries override flags.
  if (!f.config_path.empty()) {
    if (int rc = sgk_config_load_file(cfg.get(), f.config_path.c_str()); rc != SGK_OK) {
      *status = rc;
      return ConfigPtr(nullptr, sgk_config_free);
    }
  }
  if (seed_required && !f.seed && f.config_path.empty()) {
    std::cerr << "error: --seed is required (subsampling is randomized; runs must be "
                 "reproducible)\n";
    *status = SGK_ERR_VALIDATION;
    return ConfigPtr(nullptr, sgk_config_free);
  }
  *status = SGK_OK;
  return cfg;
}

int write_outputs(const sgk_result* result, const std::string& out_path) {
  const char* json = sgk_result_json(result);
  const char* manifest = sgk_result_manifest_json(result);
  const char* csv = sgk_result_csv(result);

  if (out_path.empty()) {
    std::cout << json << "\n";
    std::cerr << manifest << "\n";
    return 0;
  }
  {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return SGK_ERR_VALIDATION;
    }
    out << (csv ? csv : json);
    if (!csv) out << "\n";
  }
  if (csv) {
    std::ofstream summary(out_path + ".summary.json");
    summary << json << "\n";
  }
  std::ofstream mf(out_path + ".manifest.json");
  mf << manifest << "\n";
  return 0;
}

int run_command(const CommonFlags& f, bool needs_data, bool seed_required,
                int (*command)(const sgk_dataset*, const sgk_config*, sgk_result**)) {
  int status = SGK_OK;
  ConfigPtr cfg = build_config(f, seed_required, &status);
  if (!cfg) return status;
  if (f.threads) sgk_config_set(cfg.get(), "threads", std::to_string(*f.threads).c_str());

  DatasetPtr data(nullptr, sgk_dataset_free);
  if (needs_data) {
    sgk_dataset* raw = nullptr;
    if (int rc = sgk_dataset_load_csv(f.data_path.c_str(), f.response.c_str(),
                                      f.covariate.c_str(), &raw);
        rc != SGK_OK)
      return fail(rc);
    data.reset(raw);
  }

  sgk_result* raw_result = nullptr;
  int rc = needs_data ? command(data.get(), cfg.get(), &raw_result)
                      : command(nullptr, cfg.get(), &raw_result);
  if (rc != SGK_OK) return fail(rc);
  ResultPtr result(raw_result, sgk_result_free);
  return write_outputs(result.get(), f.out_path);
}

int simulate_adapter(const sgk_dataset*, const sgk_config* cfg, sgk_result** out) {
  return sgk_simulate(cfg, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled variable selection for partially linear models "
               "(generalized knockoffs with stability statistics)"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonFlags select_flags, screen_flags, sim_flags, check_flags;

  CLI::App* select_cmd =
      app.add_subcommand("select", "run the knockoff selection pipeline (auto one/two stage)");
  add_common_flags(select_cmd, select_flags, true);
  select_cmd->add_flag("--force-two-stage", select_flags.force_two_stage,
                       "always screen first, even when p < n/2");

  CLI::App* screen_cmd = app.add_subcommand("screen", "run the screening stage only");
  add_common_flags(screen_cmd, screen_flags, true);
  screen_cmd->add_option("--method", screen_flags.screen_method, "spls (default), sis or rrcs");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "run scenario sweeps from a config file");
  add_common_flags(sim_cmd, sim_flags, false);

  CLI::App* check_cmd = app.add_subcommand(
      "knockoff-check", "construct knockoffs and report identity residuals and swap deviation");
  add_common_flags(check_cmd, check_flags, true);

  CLI11_PARSE(app, argc, argv);

  if (select_cmd->parsed()) return run_command(select_flags, true, true, sgk_select);
  if (screen_cmd->parsed()) return run_command(screen_flags, true, false, sgk_screen);
  if (check_cmd->parsed()) return run_command(check_flags, true, false, sgk_knockoff_check);
  if (sim_cmd->parsed()) return run_command(sim_flags, false, true, simulate_adapter);
  return 1;
}
