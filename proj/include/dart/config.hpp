#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dart/hyper.hpp"
#include "dart/sampler.hpp"
#include "dart/simulate.hpp"
#include "dart/state.hpp"

namespace dart {

// FNV-1a over raw bytes; recorded in run manifests so a fit can be traced
// back to the exact configuration that produced it.
std::uint64_t fnv1a64(const std::string& bytes);

// Parsed "key = value" configuration grouped into sections. Unknown
// sections or keys are rejected at parse time; values stay strings until a
// typed getter pulls them out.
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::uint64_t content_hash = 0;
  std::string path;

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
};

ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::string& path);

ModelKind model_kind_from_name(const std::string& name);
const char* model_kind_name(ModelKind kind);

// Overlay [model] / [sampler] / [simulate] settings onto defaults. The
// model overlay starts from the named preset when one is given.
void apply_model_config(const ConfigFile& config, ModelKind* kind, int* n_factors,
                        Hyperparameters* hyper, ModelOptions* options);
void apply_sampler_config(const ConfigFile& config, SamplerConfig* sampler);
void apply_simulate_config(const ConfigFile& config, SimulationConfig* sim);

}  // namespace dart
