#include "stabgknock/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace sgk {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& s, double* out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  size_t pos = 0;
  try {
    *out = std::stod(t, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == t.size();
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "q",          "mode",        "statistic",   "L",           "seed",
      "spline.order", "spline.knots", "spline.rule", "spline.bic",
      "lambda.rule",  "cv.folds",     "grid.size",   "k",          "n1",
      "row_augment",  "force_two_stage", "threads",  "multistarts",
      "screen.method"};
  return keys;
}

}  // namespace

DesignTriple load_dataset(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) fail_io("IoError", "cannot open dataset " + path);

  std::string line;
  if (!std::getline(in, line)) fail_io("IoError", "dataset has no header row: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  int y_col = -1, u_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == schema.response) y_col = static_cast<int>(c);
    if (header[c] == schema.covariate) u_col = static_cast<int>(c);
  }
  if (y_col < 0) fail_validation("MissingColumn", "response column '" + schema.response +
                                 "' not found in " + path);
  if (u_col < 0) fail_validation("MissingColumn", "covariate column '" + schema.covariate +
                                 "' not found in " + path);
  if (y_col == u_col) fail_validation("MissingColumn", "response and covariate must differ");

  std::vector<int> x_cols;
  std::vector<std::string> x_names;
  for (size_t c = 0; c < header.size(); ++c) {
    if (static_cast<int>(c) == y_col || static_cast<int>(c) == u_col) continue;
    x_cols.push_back(static_cast<int>(c));
    x_names.push_back(header[c]);
  }
  if (x_cols.empty()) fail_validation("MissingColumn", "no feature columns in " + path);

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail_validation("NonNumericCell", "row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    std::vector<double> parsed(header.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty())
        fail_validation("MissingValue", "empty cell at row " + std::to_string(line_no) +
                        ", column '" + header[c] + "'");
      if (!parse_double(cell, &parsed[c]))
        fail_validation("NonNumericCell", "cannot parse '" + cell + "' at row " +
                        std::to_string(line_no) + ", column '" + header[c] + "'");
    }
    rows.push_back(std::move(parsed));
  }
  if (rows.empty()) fail_validation("MissingValue", "dataset has no data rows: " + path);

  DesignTriple d;
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(x_cols.size());
  d.X.resize(n, p);
  d.U.resize(n);
  d.Y.resize(n);
  d.col_names = x_names;
  for (int i = 0; i < n; ++i) {
    d.Y[i] = rows[i][y_col];
    d.U[i] = rows[i][u_col];
    for (int j = 0; j < p; ++j) d.X(i, j) = rows[i][x_cols[j]];
  }
  d.validate();
  return d;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("IoError", "cannot open config " + path);
  ConfigMap cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    size_t hash = t.find('#');
    if (hash != std::string::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail_validation("BadConfig", "config line " + std::to_string(line_no) +
                      " is not key=value: " + line);
    cfg[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return cfg;
}

std::string canonical_config(const ConfigMap& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : cfg) os << k << '=' << v << '\n';
  return os.str();
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const ConfigMap& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

double config_double(const ConfigMap& cfg, const std::string& key, double fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  double v;
  if (!parse_double(it->second, &v))
    fail_validation("BadConfig", "value of '" + key + "' is not numeric: " + it->second);
  return v;
}

int config_int(const ConfigMap& cfg, const std::string& key, int fallback) {
  double v = config_double(cfg, key, fallback);
  if (v != std::floor(v))
    fail_validation("BadConfig", "value of '" + key + "' is not an integer");
  return static_cast<int>(v);
}

bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail_validation("BadConfig", "value of '" + key + "' is not a boolean: " + it->second);
}

std::string config_string(const ConfigMap& cfg, const std::string& key,
                          const std::string& fallback) {
  auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

PipelineConfig pipeline_config_from(const ConfigMap& cfg) {
  for (const auto& [k, v] : cfg) {
    if (k.rfind("sim.", 0) == 0 || k.rfind("data.", 0) == 0) continue;
    if (!known_keys().count(k))
      fail_validation("BadConfig", "unknown configuration key '" + k + "'");
  }

  PipelineConfig pc;
  pc.q = config_double(cfg, "q", 0.1);
  if (!(pc.q > 0 && pc.q < 1)) fail_validation("BadLevel", "flag/config 'q' must lie in (0,1)");

  const std::string mode = config_string(cfg, "mode", "knockoff+");
  if (mode == "knockoff")
    pc.mode = ThresholdMode::Knockoff;
  else if (mode == "knockoff+")
    pc.mode = ThresholdMode::KnockoffPlus;
  else
    fail_validation("BadConfig", "'mode' must be knockoff or knockoff+, got " + mode);

  const std::string stat = config_string(cfg, "statistic", "spd");
  if (stat == "spd")
    pc.statistic = StatKind::Spd;
  else if (stat == "lsm")
    pc.statistic = StatKind::Lsm;
  else if (stat == "lcd")
    pc.statistic = StatKind::Lcd;
  else
    fail_validation("BadConfig", "'statistic' must be spd, lsm or lcd, got " + stat);

  pc.subsample_replications = config_int(cfg, "L", 100);
  pc.seed = static_cast<uint64_t>(config_double(cfg, "seed", 0));
  pc.spline.order = config_int(cfg, "spline.order", 3);
  pc.spline.interior_knots = config_int(cfg, "spline.knots", -1);
  const std::string rule = config_string(cfg, "spline.rule", "quantile");
  if (rule == "quantile")
    pc.spline.knot_rule = KnotRule::Quantile;
  else if (rule == "uniform")
    pc.spline.knot_rule = KnotRule::Uniform;
  else
    fail_validation("BadConfig", "'spline.rule' must be quantile or uniform");
  pc.spline_bic = config_bool(cfg, "spline.bic", false);

  const std::string lrule = config_string(cfg, "lambda.rule", "global_cv");
  if (lrule == "global_cv")
    pc.lambda_rule = LambdaRule::GlobalCv;
  else if (lrule == "per_replicate_cv")
    pc.lambda_rule = LambdaRule::PerReplicateCv;
  else
    fail_validation("BadConfig", "'lambda.rule' must be global_cv or per_replicate_cv");

  pc.cv_folds = config_int(cfg, "cv.folds", 10);
  pc.grid_size = config_int(cfg, "grid.size", 100);
  pc.screen_k = config_int(cfg, "k", -1);
  pc.split_n1 = config_int(cfg, "n1", -1);
  pc.allow_row_augment = config_bool(cfg, "row_augment", true);
  pc.multistarts = config_int(cfg, "multistarts", 10);
  pc.digest = config_digest(cfg);
  pc.validate();
  return pc;
}

std::string select_result_json(const PipelineResult& res, const DesignTriple& data,
                               const ConfigMap& cfg) {
  json doc;
  doc["schema_version"] = 1;
  doc["command"] = "select";
  doc["algorithm"] = res.algorithm;
  doc["config"] = cfg;
  doc["config_digest"] = config_digest(cfg);
  doc["seed"] = res.outcome.seed;
  doc["n"] = data.n();
  doc["p"] = data.p();
  doc["q"] = res.outcome.q;
  doc["mode"] = res.outcome.mode == ThresholdMode::KnockoffPlus ? "knockoff+" : "knockoff";
  if (std::isfinite(res.outcome.threshold))
    doc["threshold"] = res.outcome.threshold;
  else
    doc["threshold"] = nullptr;
  doc["fdp_hat"] = res.outcome.fdp_hat;
  doc["lambda_used"] = res.lambda_used;

  json selected = json::array();
  for (int j : res.outcome.selected) {
    json item;
    item["index"] = j + 1;  // 1-based original column position
    if (!data.col_names.empty()) item["name"] = data.col_names[j];
    selected.push_back(item);
  }
  doc["selected"] = selected;

  json wcols = json::array();
  for (int j : res.w_columns) wcols.push_back(j + 1);
  doc["W_columns"] = wcols;
  doc["W"] = std::vector<double>(res.w.data(), res.w.data() + res.w.size());
  if (!res.screened.empty()) {
    json screened = json::array();
    for (int j : res.screened) screened.push_back(j + 1);
    doc["screened"] = screened;
    doc["screen_k"] = res.screen_k;
  }
  doc["col_scales"] =
      std::vector<double>(res.col_scales.data(), res.col_scales.data() + res.col_scales.size());

  json diag;
  diag["construction_residual_gram"] = res.construction_residual_gram;
  diag["construction_residual_cross"] = res.construction_residual_cross;
  diag["augmented_rows"] = res.augmented_rows;
  diag["basis_dim"] = res.basis_dim;
  diag["cholesky_degraded"] = res.cholesky_degraded;
  diag["u_projected"] = res.u_projected;
  doc["diagnostics"] = diag;
  return doc.dump(2);
}

std::string manifest_json(const std::string& command, const ConfigMap& cfg, uint64_t seed,
                          const std::string& input_digest, const std::string& output_path) {
  json doc;
  doc["schema_version"] = 1;
  doc["command"] = command;
  doc["config"] = cfg;
  doc["config_digest"] = config_digest(cfg);
  doc["seed"] = seed;
  doc["library_version"] = kVersion;
  doc["input_digest"] = input_digest;
  doc["output"] = output_path;
  doc["created_at"] = iso8601_now();
  return doc.dump(2);
}

void validate_result_schema(const std::string& json_text) {
  json doc = json::parse(json_text);
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
    fail_validation("BadSchema", "result document lacks an integer schema_version");
  if (doc["schema_version"].get<int>() != 1)
    fail_validation("BadSchema", "unsupported result schema version " +
                    doc["schema_version"].dump());
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("IoError", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv64:%016llx",
                static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

}  // namespace sgk
