#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stabgknock/common.hpp"
#include "stabgknock/types.hpp"

namespace sgk {

enum class CovKind { Ar1, Compound };
enum class DesignDist { Gaussian, StudentT3 };

// One simulated design: rows i.i.d. from the chosen distribution with
// covariance Σ (AR(1) ρ^|i-j| or compound symmetry), p1 coefficients of ±A at
// uniformly random positions, response Xβ + sin(2πU) + ε.
struct Scenario {
  int n = 0;
  int p = 0;
  int p1 = 0;
  double amplitude = 0;  // A
  double rho = 0;
  CovKind cov_kind = CovKind::Ar1;
  DesignDist design_dist = DesignDist::Gaussian;
  double noise_sd = 1.0;
  uint64_t seed = 0;

  std::string id() const;
  void validate() const;
};

struct GeneratedInstance {
  DesignTriple data;
  Eigen::VectorXd beta;
  IndexSet support;
};

GeneratedInstance generate(const Scenario& sc);

struct ReplicateRecord {
  int replicate = 0;
  uint64_t seed = 0;
  int selected_count = 0;
  int true_positives = 0;
  double fdp = 0;
  double tpp = 0;
  bool failed = false;
  std::string error;
};

struct MetricReport {
  bool has_selection = false;
  double fdr_hat = 0, fdr_se = 0;
  double power_hat = 0, power_se = 0;
  std::vector<ReplicateRecord> replicates;

  bool has_screening = false;
  double screen_fdr = 0, screen_fdr_se = 0;
  double prr = 0, prr_se = 0;
  double ssr = 0, ssr_se = 0;
  std::map<int, double> mms_quantiles;  // percent -> value
};

using SelectMethod = std::function<IndexSet(const DesignTriple&, uint64_t)>;

// Runs the method on R generated replicates (per-replicate seeds derived from
// the scenario seed); FDR/power means with sample-sd/sqrt(R) standard errors.
// Individual failures are recorded; more than 10% failing is an error.
MetricReport run_experiment(const Scenario& sc, const SelectMethod& method, int replications);

// FDR / PRR / SSR over kept sets and, when rankings are provided, the
// 5/25/50/75/95% quantiles of the minimum model size covering all signals.
MetricReport screening_metrics(const std::vector<IndexSet>& kept_sets,
                               const std::vector<IndexSet>& supports,
                               const std::vector<std::vector<int>>& rankings);

struct ResultRow {
  std::string scenario_id;
  std::string method;
  double q = 0;
  double amplitude = 0;
  double rho = 0;
  int n = 0, p = 0, p1 = 0;
  std::string metric;
  double value = 0;
  double stderr_value = 0;
  uint64_t seed = 0;

  bool operator==(const ResultRow&) const = default;
};

std::vector<ResultRow> report_rows(const MetricReport& report, const Scenario& sc,
                                   const std::string& method, double q);

void export_results(const std::vector<ResultRow>& rows, const std::string& path,
                    const std::string& manifest_json);
std::vector<ResultRow> read_results(const std::string& path);

}  // namespace sgk
