#include "stabgknock/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stabgknock/parallel.hpp"
#include "stabgknock/pipeline.hpp"
#include "stabgknock/simulate.hpp"

namespace sgk {

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t a = item.find_first_not_of(" \t");
    size_t b = item.find_last_not_of(" \t");
    if (a != std::string::npos) items.push_back(item.substr(a, b - a + 1));
  }
  return items;
}

std::vector<double> double_list(const ConfigMap& cfg, const std::string& key,
                                const std::string& fallback) {
  std::vector<double> values;
  for (const std::string& s : split_list(config_string(cfg, key, fallback))) {
    try {
      values.push_back(std::stod(s));
    } catch (const std::exception&) {
      fail_validation("BadConfig", "cannot parse list entry '" + s + "' of '" + key + "'");
    }
  }
  if (values.empty()) fail_validation("BadConfig", "list '" + key + "' is empty");
  return values;
}

void apply_thread_cap(const ConfigMap& cfg) { set_max_threads(config_int(cfg, "threads", 0)); }

Scenario scenario_from(const ConfigMap& cfg, double amplitude, double rho) {
  Scenario sc;
  sc.n = config_int(cfg, "sim.n", 300);
  sc.p = config_int(cfg, "sim.p", 60);
  sc.p1 = config_int(cfg, "sim.p1", 10);
  sc.amplitude = amplitude;
  sc.rho = rho;
  const std::string cov = config_string(cfg, "sim.cov", "ar1");
  if (cov == "ar1")
    sc.cov_kind = CovKind::Ar1;
  else if (cov == "compound")
    sc.cov_kind = CovKind::Compound;
  else
    fail_validation("BadConfig", "'sim.cov' must be ar1 or compound");
  const std::string dist = config_string(cfg, "sim.dist", "gaussian");
  if (dist == "gaussian")
    sc.design_dist = DesignDist::Gaussian;
  else if (dist == "t3")
    sc.design_dist = DesignDist::StudentT3;
  else
    fail_validation("BadConfig", "'sim.dist' must be gaussian or t3");
  sc.noise_sd = config_double(cfg, "sim.noise_sd", 1.0);
  sc.seed = static_cast<uint64_t>(config_double(cfg, "seed", 0));
  sc.validate();
  return sc;
}

// Selection methods available to the simulate sweep. Each returns the final
// selected index set for one generated dataset.
SelectMethod make_method(const std::string& name, const ConfigMap& cfg, bool two_stage) {
  PipelineConfig base = pipeline_config_from(cfg);

  auto pipeline_method = [base, two_stage](StatKind stat, ThresholdMode mode) {
    return [base, two_stage, stat, mode](const DesignTriple& d, uint64_t seed) {
      PipelineConfig pc = base;
      pc.statistic = stat;
      pc.mode = mode;
      pc.seed = seed;
      PipelineResult res = two_stage ? spls_stab_gknock(d, pc) : stab_gknock(d, pc);
      return res.outcome.selected;
    };
  };

  if (name == "stab-gknock") return pipeline_method(StatKind::Spd, ThresholdMode::Knockoff);
  if (name == "stab-gknock+") return pipeline_method(StatKind::Spd, ThresholdMode::KnockoffPlus);
  if (name == "knock-lsm+") return pipeline_method(StatKind::Lsm, ThresholdMode::KnockoffPlus);
  if (name == "knock-lcd+") return pipeline_method(StatKind::Lcd, ThresholdMode::KnockoffPlus);
  if (name == "bh") {
    return [base](const DesignTriple& d, uint64_t) {
      SplineSpec spec = resolve_spline_spec(base.spline, d.n());
      ProjectedData pd = project_data(d, spec);
      return bh_select(univariate_pvalues(pd.x_star, pd.y_star), base.q);
    };
  }
  fail_validation("BadConfig", "unknown simulate method '" + name + "'");
}

json rows_to_json(const std::vector<ResultRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row;
    row["scenario_id"] = r.scenario_id;
    row["method"] = r.method;
    row["metric"] = r.metric;
    row["value"] = r.value;
    row["stderr"] = r.stderr_value;
    arr.push_back(row);
  }
  return arr;
}

}  // namespace

CommandResult command_select(const DesignTriple& data, const ConfigMap& cfg,
                             const std::string& input_digest) {
  apply_thread_cap(cfg);
  PipelineConfig pc = pipeline_config_from(cfg);
  if (!cfg.count("seed"))
    fail_validation("BadConfig", "select requires an explicit seed for reproducibility");
  bool force_two_stage = config_bool(cfg, "force_two_stage", false);
  PipelineResult res = auto_select(data, pc, force_two_stage);

  CommandResult out;
  out.result_json = select_result_json(res, data, cfg);
  out.manifest = manifest_json("select", cfg, pc.seed, input_digest, "");
  return out;
}

CommandResult command_screen(const DesignTriple& data, const ConfigMap& cfg,
                             const std::string& input_digest) {
  apply_thread_cap(cfg);
  PipelineConfig pc = pipeline_config_from(cfg);
  SplineSpec spec = resolve_spline_spec(pc.spline, data.n());
  ProjectedData pd = project_data(data, spec);

  int k = pc.screen_k;
  if (k <= 0) k = std::max(1, static_cast<int>(data.n() / std::log(double(data.n()))));
  k = std::min(k, data.p());

  const std::string method = config_string(cfg, "screen.method", "spls");
  IndexSet kept;
  std::vector<int> ranking;
  double objective = 0;
  std::vector<double> beta_on_support;

  if (method == "spls") {
    ScreenOptions opt;
    opt.multistarts = pc.multistarts;
    Rng rng(derive_seed(pc.seed, "screen"));
    ScreenResult res = spls_screen(pd.x_star, pd.y_star, k, opt, rng);
    kept = res.kept;
    ranking = spls_ranking(res, pd.x_star, pd.y_star);
    objective = res.objective;
    for (int j : kept) beta_on_support.push_back(res.beta_k[j]);
  } else if (method == "sis") {
    ranking = sis_ranking(pd.x_star, pd.y_star);
    kept = sis_screen(pd.x_star, pd.y_star, k);
  } else if (method == "rrcs") {
    ranking = rrcs_ranking(pd.x_star, pd.y_star);
    kept = rrcs_screen(pd.x_star, pd.y_star, k);
  } else {
    fail_validation("BadConfig", "'screen.method' must be spls, sis or rrcs");
  }

  json doc;
  doc["schema_version"] = 1;
  doc["command"] = "screen";
  doc["method"] = method;
  doc["config"] = cfg;
  doc["config_digest"] = config_digest(cfg);
  doc["seed"] = pc.seed;
  doc["n"] = data.n();
  doc["p"] = data.p();
  doc["k"] = k;
  json kept_json = json::array();
  for (int j : kept) {
    json item;
    item["index"] = j + 1;
    if (!data.col_names.empty()) item["name"] = data.col_names[j];
    kept_json.push_back(item);
  }
  doc["kept"] = kept_json;
  json rank_json = json::array();
  for (int j : ranking) rank_json.push_back(j + 1);
  doc["ranking"] = rank_json;
  if (method == "spls") {
    doc["objective"] = objective;
    doc["beta_on_support"] = beta_on_support;
  }

  CommandResult out;
  out.result_json = doc.dump(2);
  out.manifest = manifest_json("screen", cfg, pc.seed, input_digest, "");
  return out;
}

CommandResult command_knockoff_check(const DesignTriple& data, const ConfigMap& cfg,
                                     const std::string& input_digest) {
  apply_thread_cap(cfg);
  PipelineConfig pc = pipeline_config_from(cfg);
  SplineSpec spec = resolve_spline_spec(pc.spline, data.n());
  Projector projector(Eigen::MatrixXd::Identity(1, 1));
  ProjectedData pd = project_data(data, spec, &projector);

  if (pd.n() < 2 * pd.p()) {
    if (!pc.allow_row_augment || pd.n() <= pd.p())
      fail_validation("DimensionError", "knockoff-check needs n >= 2p (or row augmentation)");
    Rng sigma_rng(derive_seed(pc.seed, "sigma2"));
    double sigma2 = estimate_noise_variance(pd.x_star, pd.y_star, sigma_rng);
    Rng aug_rng(derive_seed(pc.seed, "row-augment"));
    pd = row_augment(pd, sigma2, aug_rng);
    projector = projector.padded(pd.augmented_rows);
  }

  Eigen::MatrixXd sigma = gram_matrix(pd.x_star);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  Eigen::VectorXd s = equicorrelated_s(sigma);
  AugmentedDesign aug = construct_gknockoff(pd.x_star, s, pc.knockoff, &projector);

  const int swap_sets = 20;
  double max_swap_dev = 0;
  Rng rng(derive_seed(pc.seed, "swap-check"));
  for (int t = 0; t < swap_sets; ++t) {
    int size = 1 + rng.uniform_int(aug.p());
    IndexSet swap = rng.sample_without_replacement(aug.p(), size);
    max_swap_dev = std::max(max_swap_dev, verify_exchangeability(aug, swap));
  }

  json doc;
  doc["schema_version"] = 1;
  doc["command"] = "knockoff-check";
  doc["config"] = cfg;
  doc["config_digest"] = config_digest(cfg);
  doc["seed"] = pc.seed;
  doc["n"] = pd.n();
  doc["p"] = pd.p();
  doc["lambda_min_gram"] = es.eigenvalues().minCoeff();
  doc["s_value"] = s[0];
  doc["residual_gram"] = aug.residual_gram;
  doc["residual_cross"] = aug.residual_cross;
  doc["u_orthogonality"] = aug.u_orthogonality;
  doc["max_swap_deviation"] = max_swap_dev;
  doc["swap_sets"] = swap_sets;
  doc["augmented_rows"] = pd.augmented_rows;
  doc["cholesky_degraded"] = aug.cholesky_degraded;
  doc["u_projected"] = aug.u_projected;

  CommandResult out;
  out.result_json = doc.dump(2);
  out.manifest = manifest_json("knockoff-check", cfg, pc.seed, input_digest, "");
  return out;
}

CommandResult command_simulate(const ConfigMap& cfg) {
  apply_thread_cap(cfg);
  if (!cfg.count("seed"))
    fail_validation("BadConfig", "simulate requires an explicit seed for reproducibility");
  PipelineConfig pc = pipeline_config_from(cfg);
  const std::string experiment = config_string(cfg, "sim.experiment", "selection");
  const int replications = config_int(cfg, "sim.R", 200);
  std::vector<double> amplitudes = double_list(cfg, "sim.A", "1.0");
  std::vector<double> rhos = double_list(cfg, "sim.rho", "0.2");

  std::vector<ResultRow> rows;

  if (experiment == "selection" || experiment == "two_stage") {
    const bool two_stage = experiment == "two_stage";
    std::vector<std::string> methods =
        split_list(config_string(cfg, "sim.methods", "stab-gknock+"));
    for (double rho : rhos) {
      for (double a : amplitudes) {
        Scenario sc = scenario_from(cfg, a, rho);
        for (const std::string& name : methods) {
          MetricReport report = run_experiment(sc, make_method(name, cfg, two_stage), replications);
          auto method_rows = report_rows(report, sc, name, pc.q);
          rows.insert(rows.end(), method_rows.begin(), method_rows.end());
        }
      }
    }
  } else if (experiment == "screening") {
    std::vector<std::string> methods = split_list(config_string(cfg, "sim.methods", "spls,sis,rrcs"));
    for (double rho : rhos) {
      for (double a : amplitudes) {
        Scenario sc = scenario_from(cfg, a, rho);
        std::map<std::string, std::vector<IndexSet>> kept;
        std::map<std::string, std::vector<std::vector<int>>> rankings;
        std::vector<IndexSet> supports(replications);
        for (const auto& m : methods) {
          kept[m].resize(replications);
          rankings[m].resize(replications);
        }
        parallel_for(replications, [&](int r) {
          Scenario sr = sc;
          sr.seed = derive_seed(sc.seed, "replicate", r);
          GeneratedInstance inst = generate(sr);
          supports[r] = inst.support;
          ProjectedData pd = project_data(inst.data, resolve_spline_spec(pc.spline, sr.n));
          int k = pc.screen_k > 0 ? pc.screen_k
                                  : std::max(1, int(sr.n / std::log(double(sr.n))));
          for (const auto& m : methods) {
            if (m == "spls") {
              ScreenOptions opt;
              opt.multistarts = pc.multistarts;
              Rng rng(derive_seed(sr.seed, "screen"));
              ScreenResult res = spls_screen(pd.x_star, pd.y_star, k, opt, rng);
              kept[m][r] = res.kept;
              rankings[m][r] = spls_ranking(res, pd.x_star, pd.y_star);
            } else if (m == "sis") {
              rankings[m][r] = sis_ranking(pd.x_star, pd.y_star);
              kept[m][r] = sis_screen(pd.x_star, pd.y_star, k);
            } else if (m == "rrcs") {
              rankings[m][r] = rrcs_ranking(pd.x_star, pd.y_star);
              kept[m][r] = rrcs_screen(pd.x_star, pd.y_star, k);
            } else {
              fail_validation("BadConfig", "unknown screening method '" + m + "'");
            }
          }
        });
        for (const auto& m : methods) {
          MetricReport report = screening_metrics(kept[m], supports, rankings[m]);
          auto method_rows = report_rows(report, sc, m, pc.q);
          rows.insert(rows.end(), method_rows.begin(), method_rows.end());
        }
      }
    }
  } else {
    fail_validation("BadConfig", "'sim.experiment' must be selection, screening or two_stage");
  }

  json doc;
  doc["schema_version"] = 1;
  doc["command"] = "simulate";
  doc["config"] = cfg;
  doc["config_digest"] = config_digest(cfg);
  doc["seed"] = pc.seed;
  doc["rows"] = rows_to_json(rows);

  CommandResult out;
  out.result_json = doc.dump(2);
  out.manifest = manifest_json("simulate", cfg, pc.seed, "", "");

  std::ostringstream csv;
  csv << "scenario_id,method,q,A,rho,n,p,p1,metric,value,stderr,seed\n";
  for (const auto& r : rows) {
    char qb[64], ab[64], rb[64], vb[64], sb[64];
    std::snprintf(qb, sizeof(qb), "%.17g", r.q);
    std::snprintf(ab, sizeof(ab), "%.17g", r.amplitude);
    std::snprintf(rb, sizeof(rb), "%.17g", r.rho);
    std::snprintf(vb, sizeof(vb), "%.17g", r.value);
    std::snprintf(sb, sizeof(sb), "%.17g", r.stderr_value);
    csv << r.scenario_id << ',' << r.method << ',' << qb << ',' << ab << ',' << rb << ',' << r.n
        << ',' << r.p << ',' << r.p1 << ',' << r.metric << ',' << vb << ',' << sb << ',' << r.seed
        << '\n';
  }
  out.csv = csv.str();
  return out;
}

}  // namespace sgk
