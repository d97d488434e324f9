#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "stabgknock/common.hpp"
#include "stabgknock/pipeline.hpp"
#include "stabgknock/types.hpp"

namespace sgk {

// CSV schema: header row names the columns; `response` and `covariate` pick
// Y and U, every other column is a feature. Missing or non-numeric cells are
// rejected with their coordinates.
struct CsvSchema {
  std::string response;
  std::string covariate;
};

DesignTriple load_dataset(const std::string& path, const CsvSchema& schema);

// Flat key=value configuration ('#' starts a comment). Later assignments win.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap load_config_file(const std::string& path);
std::string canonical_config(const ConfigMap& cfg);
uint64_t fnv1a64(const std::string& data);
std::string config_digest(const ConfigMap& cfg);

// Typed accessors with validation; errors name the key.
double config_double(const ConfigMap& cfg, const std::string& key, double fallback);
int config_int(const ConfigMap& cfg, const std::string& key, int fallback);
bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback);
std::string config_string(const ConfigMap& cfg, const std::string& key,
                          const std::string& fallback);

// PipelineConfig from the flat map; unknown keys outside the sim.* namespace
// are rejected so typos fail loudly.
PipelineConfig pipeline_config_from(const ConfigMap& cfg);

// Result documents (versioned JSON). Serialization keeps full double
// precision so a reload is bit-faithful.
std::string select_result_json(const PipelineResult& res, const DesignTriple& data,
                               const ConfigMap& cfg);
std::string manifest_json(const std::string& command, const ConfigMap& cfg, uint64_t seed,
                          const std::string& input_digest, const std::string& output_path);

// Parses a result document, rejecting unknown schema versions.
void validate_result_schema(const std::string& json_text);

std::string file_digest(const std::string& path);

}  // namespace sgk
