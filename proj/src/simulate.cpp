#include "stabgknock/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stabgknock/parallel.hpp"
#include "stabgknock/rng.hpp"

namespace sgk {

namespace {

double sample_sd(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  if (n < 2) return 0;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

double mean_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  return v.empty() ? 0 : m / v.size();
}

// Nearest-rank (lower) empirical quantile.
double quantile_nearest(std::vector<double> v, double prob) {
  std::sort(v.begin(), v.end());
  int idx = static_cast<int>(std::ceil(prob * v.size())) - 1;
  idx = std::clamp(idx, 0, static_cast<int>(v.size()) - 1);
  return v[idx];
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string Scenario::id() const {
  std::ostringstream os;
  os << (cov_kind == CovKind::Ar1 ? "ar1" : "cs") << "_"
     << (design_dist == DesignDist::Gaussian ? "gauss" : "t3") << "_n" << n << "_p" << p << "_s"
     << p1 << "_A" << amplitude << "_rho" << rho;
  return os.str();
}

void Scenario::validate() const {
  if (n < 1 || p < 1) fail_validation("BadScenario", "n and p must be positive");
  if (p1 < 0 || p1 > p) fail_validation("BadScenario", "need 0 <= p1 <= p");
  if (!(rho >= 0 && rho < 1)) fail_validation("BadScenario", "rho must lie in [0,1)");
  if (amplitude < 0) fail_validation("BadScenario", "amplitude must be nonnegative");
  if (!(noise_sd > 0)) fail_validation("BadScenario", "noise sd must be positive");
}

GeneratedInstance generate(const Scenario& sc) {
  sc.validate();
  GeneratedInstance out;

  // Independent streams so each piece replays individually.
  Rng rng_x(derive_seed(sc.seed, "design"));
  Rng rng_u(derive_seed(sc.seed, "covariate"));
  Rng rng_eps(derive_seed(sc.seed, "noise"));
  Rng rng_beta(derive_seed(sc.seed, "signal"));

  out.data.X.resize(sc.n, sc.p);
  const double ar_scale = std::sqrt(1.0 - sc.rho * sc.rho);
  for (int i = 0; i < sc.n; ++i) {
    if (sc.cov_kind == CovKind::Ar1) {
      double prev = rng_x.normal();
      out.data.X(i, 0) = prev;
      for (int j = 1; j < sc.p; ++j) {
        prev = sc.rho * prev + ar_scale * rng_x.normal();
        out.data.X(i, j) = prev;
      }
    } else {
      const double shared = std::sqrt(sc.rho) * rng_x.normal();
      const double local = std::sqrt(1.0 - sc.rho);
      for (int j = 0; j < sc.p; ++j) out.data.X(i, j) = shared + local * rng_x.normal();
    }
    if (sc.design_dist == DesignDist::StudentT3) {
      // Gaussian row scaled by sqrt(nu / chi2_nu); Σ is the scale matrix.
      double w = rng_x.chi_squared(3);
      w = std::max(w, 1e-12);
      out.data.X.row(i) *= std::sqrt(3.0 / w);
    }
  }

  out.data.U.resize(sc.n);
  for (int i = 0; i < sc.n; ++i) out.data.U[i] = rng_u.uniform();

  out.beta = Eigen::VectorXd::Zero(sc.p);
  out.support = rng_beta.sample_without_replacement(sc.p, sc.p1);
  for (int j : out.support)
    out.beta[j] = rng_beta.uniform() < 0.5 ? sc.amplitude : -sc.amplitude;

  out.data.Y.resize(sc.n);
  for (int i = 0; i < sc.n; ++i) {
    const double g = std::sin(2.0 * std::numbers::pi * out.data.U[i]);
    out.data.Y[i] = out.data.X.row(i).dot(out.beta) + g + rng_eps.normal(0.0, sc.noise_sd);
  }
  return out;
}

MetricReport run_experiment(const Scenario& sc, const SelectMethod& method, int replications) {
  if (replications < 1) fail_validation("BadReplications", "need at least one replication");

  std::vector<ReplicateRecord> records(replications);
  parallel_for(replications, [&](int r) {
    ReplicateRecord& rec = records[r];
    rec.replicate = r;
    rec.seed = derive_seed(sc.seed, "replicate", r);
    Scenario sr = sc;
    sr.seed = rec.seed;
    try {
      GeneratedInstance inst = generate(sr);
      IndexSet selected = method(inst.data, derive_seed(rec.seed, "method"));
      IndexSet truth = inst.support;
      IndexSet hits = intersect_sets(selected, truth);
      rec.selected_count = static_cast<int>(selected.size());
      rec.true_positives = static_cast<int>(hits.size());
      rec.fdp = (rec.selected_count - rec.true_positives) /
                std::max<double>(rec.selected_count, 1.0);
      rec.tpp = truth.empty() ? 0.0 : double(rec.true_positives) / truth.size();
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  int failures = 0;
  std::vector<double> fdps, tpps;
  for (const auto& rec : records) {
    if (rec.failed) {
      ++failures;
      continue;
    }
    fdps.push_back(rec.fdp);
    tpps.push_back(rec.tpp);
  }
  if (failures * 10 > replications)
    fail_numeric("TooManyFailures", std::to_string(failures) + " of " +
                 std::to_string(replications) + " replicates failed");

  MetricReport report;
  report.has_selection = true;
  report.replicates = std::move(records);
  report.fdr_hat = mean_of(fdps);
  report.power_hat = mean_of(tpps);
  const double root = std::sqrt(std::max<double>(1.0, fdps.size()));
  report.fdr_se = sample_sd(fdps) / root;
  report.power_se = sample_sd(tpps) / root;
  return report;
}

MetricReport screening_metrics(const std::vector<IndexSet>& kept_sets,
                               const std::vector<IndexSet>& supports,
                               const std::vector<std::vector<int>>& rankings) {
  const int R = static_cast<int>(kept_sets.size());
  if (R == 0 || supports.size() != kept_sets.size())
    fail_validation("DimensionError", "kept sets and supports must align");

  std::vector<double> fdr, prr, ssr, mms;
  for (int r = 0; r < R; ++r) {
    const IndexSet& kept = kept_sets[r];
    const IndexSet& truth = supports[r];
    IndexSet hits = intersect_sets(kept, truth);
    fdr.push_back((kept.size() - hits.size()) / std::max<double>(kept.size(), 1.0));
    prr.push_back(truth.empty() ? 1.0 : double(hits.size()) / truth.size());
    ssr.push_back(hits.size() == truth.size() ? 1.0 : 0.0);
  }

  MetricReport report;
  report.has_screening = true;
  report.screen_fdr = mean_of(fdr);
  report.prr = mean_of(prr);
  report.ssr = mean_of(ssr);
  const double root = std::sqrt(double(R));
  report.screen_fdr_se = sample_sd(fdr) / root;
  report.prr_se = sample_sd(prr) / root;
  report.ssr_se = sample_sd(ssr) / root;

  if (!rankings.empty()) {
    if (rankings.size() != kept_sets.size())
      fail_validation("MissingRanking", "need one complete ranking per replicate");
    for (int r = 0; r < R; ++r) {
      const IndexSet& truth = supports[r];
      std::vector<char> is_signal(rankings[r].size(), 0);
      for (int j : truth) is_signal[j] = 1;
      int found = 0, depth = 0;
      for (int j : rankings[r]) {
        ++depth;
        if (is_signal[j]) ++found;
        if (found == static_cast<int>(truth.size())) break;
      }
      if (found < static_cast<int>(truth.size()))
        fail_validation("MissingRanking", "ranking does not cover all signals");
      mms.push_back(depth);
    }
    for (int pct : {5, 25, 50, 75, 95})
      report.mms_quantiles[pct] = quantile_nearest(mms, pct / 100.0);
  }
  return report;
}

std::vector<ResultRow> report_rows(const MetricReport& report, const Scenario& sc,
                                   const std::string& method, double q) {
  std::vector<ResultRow> rows;
  ResultRow base;
  base.scenario_id = sc.id();
  base.method = method;
  base.q = q;
  base.amplitude = sc.amplitude;
  base.rho = sc.rho;
  base.n = sc.n;
  base.p = sc.p;
  base.p1 = sc.p1;
  base.seed = sc.seed;

  auto push = [&](const std::string& metric, double value, double se) {
    ResultRow row = base;
    row.metric = metric;
    row.value = value;
    row.stderr_value = se;
    rows.push_back(std::move(row));
  };

  if (report.has_selection) {
    push("fdr", report.fdr_hat, report.fdr_se);
    push("power", report.power_hat, report.power_se);
  }
  if (report.has_screening) {
    push("screen_fdr", report.screen_fdr, report.screen_fdr_se);
    push("prr", report.prr, report.prr_se);
    push("ssr", report.ssr, report.ssr_se);
    for (const auto& [pct, value] : report.mms_quantiles)
      push("mms_q" + std::to_string(pct), value, 0.0);
  }
  return rows;
}

void export_results(const std::vector<ResultRow>& rows, const std::string& path,
                    const std::string& manifest_json) {
  std::ofstream out(path);
  if (!out) fail_io("IoError", "cannot open " + path + " for writing");
  out << "scenario_id,method,q,A,rho,n,p,p1,metric,value,stderr,seed\n";
  for (const auto& r : rows) {
    out << r.scenario_id << ',' << r.method << ',' << format_double(r.q) << ','
        << format_double(r.amplitude) << ',' << format_double(r.rho) << ',' << r.n << ',' << r.p
        << ',' << r.p1 << ',' << r.metric << ',' << format_double(r.value) << ','
        << format_double(r.stderr_value) << ',' << r.seed << '\n';
  }
  if (!out) fail_io("IoError", "failed while writing " + path);
  out.close();

  std::ofstream manifest(path + ".manifest.json");
  if (!manifest) fail_io("IoError", "cannot open manifest sidecar for " + path);
  manifest << manifest_json << '\n';
}

std::vector<ResultRow> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("IoError", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail_io("IoError", "empty results file " + path);
  if (line != "scenario_id,method,q,A,rho,n,p,p1,metric,value,stderr,seed")
    fail_io("IoError", "unexpected results header in " + path);

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) fail_io("IoError", "malformed results row: " + line);
    ResultRow r;
    r.scenario_id = cells[0];
    r.method = cells[1];
    r.q = std::stod(cells[2]);
    r.amplitude = std::stod(cells[3]);
    r.rho = std::stod(cells[4]);
    r.n = std::stoi(cells[5]);
    r.p = std::stoi(cells[6]);
    r.p1 = std::stoi(cells[7]);
    r.metric = cells[8];
    r.value = std::stod(cells[9]);
    r.stderr_value = std::stod(cells[10]);
    r.seed = std::stoull(cells[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sgk
