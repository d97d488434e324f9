#include "stabgknock.h"

#include <memory>
#include <string>

#include "stabgknock/commands.hpp"
#include "stabgknock/common.hpp"
#include "stabgknock/io.hpp"
#include "stabgknock/types.hpp"

struct sgk_dataset {
  sgk::DesignTriple data;
  std::string input_digest;
};

struct sgk_config {
  sgk::ConfigMap map;
};

struct sgk_result {
  sgk::CommandResult res;
};

namespace {

thread_local std::string g_last_error;

int code_of(const sgk::Error& e) {
  return e.kind() == sgk::ErrKind::Numeric ? SGK_ERR_NUMERIC : SGK_ERR_VALIDATION;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return SGK_OK;
  } catch (const sgk::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SGK_ERR_NUMERIC;
  }
}

}  // namespace

extern "C" {

const char* sgk_version(void) { return sgk::kVersion; }

const char* sgk_last_error(void) { return g_last_error.c_str(); }

int sgk_dataset_load_csv(const char* path, const char* response, const char* covariate,
                         sgk_dataset** out) {
  if (!path || !response || !covariate || !out) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  return guarded([&] {
    auto d = std::make_unique<sgk_dataset>();
    d->data = sgk::load_dataset(path, {response, covariate});
    d->input_digest = sgk::file_digest(path);
    *out = d.release();
  });
}

int sgk_dataset_create(int n, int p, const double* x, const double* u, const double* y,
                       sgk_dataset** out) {
  if (!x || !u || !y || !out) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  return guarded([&] {
    auto d = std::make_unique<sgk_dataset>();
    d->data.X.resize(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) d->data.X(i, j) = x[static_cast<size_t>(i) * p + j];
    d->data.U = Eigen::Map<const Eigen::VectorXd>(u, n);
    d->data.Y = Eigen::Map<const Eigen::VectorXd>(y, n);
    d->data.validate();
    d->input_digest = "inline";
    *out = d.release();
  });
}

int sgk_dataset_dims(const sgk_dataset* d, int* n, int* p) {
  if (!d) {
    g_last_error = "null dataset";
    return SGK_ERR_VALIDATION;
  }
  if (n) *n = d->data.n();
  if (p) *p = d->data.p();
  return SGK_OK;
}

void sgk_dataset_free(sgk_dataset* d) { delete d; }

int sgk_config_create(sgk_config** out) {
  if (!out) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  *out = new sgk_config();
  return SGK_OK;
}

int sgk_config_set(sgk_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  cfg->map[key] = value;
  return SGK_OK;
}

int sgk_config_load_file(sgk_config* cfg, const char* path) {
  if (!cfg || !path) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  return guarded([&] {
    for (const auto& [k, v] : sgk::load_config_file(path)) cfg->map[k] = v;
  });
}

void sgk_config_free(sgk_config* cfg) { delete cfg; }

int sgk_select(const sgk_dataset* d, const sgk_config* cfg, sgk_result** out) {
  if (!d || !cfg || !out) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  return guarded([&] {
    auto r = std::make_unique<sgk_result>();
    r->res = sgk::command_select(d->data, cfg->map, d->input_digest);
    *out = r.release();
  });
}

int sgk_screen(const sgk_dataset* d, const sgk_config* cfg, sgk_result** out) {
  if (!d || !cfg || !out) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  return guarded([&] {
    auto r = std::make_unique<sgk_result>();
    r->res = sgk::command_screen(d->data, cfg->map, d->input_digest);
    *out = r.release();
  });
}

int sgk_knockoff_check(const sgk_dataset* d, const sgk_config* cfg, sgk_result** out) {
  if (!d || !cfg || !out) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  return guarded([&] {
    auto r = std::make_unique<sgk_result>();
    r->res = sgk::command_knockoff_check(d->data, cfg->map, d->input_digest);
    *out = r.release();
  });
}

int sgk_simulate(const sgk_config* cfg, sgk_result** out) {
  if (!cfg || !out) {
    g_last_error = "null argument";
    return SGK_ERR_VALIDATION;
  }
  return guarded([&] {
    auto r = std::make_unique<sgk_result>();
    r->res = sgk::command_simulate(cfg->map);
    *out = r.release();
  });
}

const char* sgk_result_json(const sgk_result* r) { return r ? r->res.result_json.c_str() : nullptr; }

const char* sgk_result_manifest_json(const sgk_result* r) {
  return r ? r->res.manifest.c_str() : nullptr;
}

const char* sgk_result_csv(const sgk_result* r) {
  if (!r || r->res.csv.empty()) return nullptr;
  return r->res.csv.c_str();
}

void sgk_result_free(sgk_result* r) { delete r; }

}  // extern "C"
