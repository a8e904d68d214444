#include "dart/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dart/csv.hpp"

namespace dart {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

struct SectionSpec {
  const char* name;
  std::vector<const char*> keys;
};

const std::vector<SectionSpec>& known_sections() {
  static const std::vector<SectionSpec> specs = {
      {"model",
       {"kind", "preset", "factors", "length_scale", "mgp_a1", "mgp_b1", "mgp_a2", "mgp_b2",
        "tau0_prior", "tau0_a", "tau0_b", "sigma_phi", "sigma_beta", "sigma_eta", "sigma_w",
        "sigma_theta", "alpha_noise_mean", "alpha_noise_sd", "beta_noise_mean", "beta_noise_sd",
        "tau_gamma_scale", "unit_local_scales", "kernel_jitter"}},
      {"sampler",
       {"chains", "warmup", "samples", "thin", "target_accept", "max_tree_depth", "init_scale",
        "seed", "threads"}},
      {"data", {"observations", "covariates_w", "covariates_z", "pca_components", "exposure"}},
      {"simulate",
       {"chems", "genes", "doses", "factors", "replicates", "n_w", "n_z", "pi_miss",
        "z_prevalence", "kind", "seed"}},
      {"crossval", {"scheme", "folds", "fraction", "seed"}},
      {"benchmark", {"kinds", "folds"}},
      {"report", {"top"}},
  };
  return specs;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + what);
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto sec = sections.find(section);
  return sec != sections.end() && sec->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const auto sec = sections.find(section);
  if (sec == sections.end()) return fallback;
  const auto it = sec->second.find(key);
  return it == sec->second.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get_string(section, key, "");
  try {
    return csv::parse_double(raw, section + "." + key);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + section + "." + key + " is not a number: " + raw);
  }
}

long ConfigFile::get_long(const std::string& section, const std::string& key,
                          long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get_string(section, key, "");
  try {
    return csv::parse_long(raw, section + "." + key);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + section + "." + key + " is not an integer: " + raw);
  }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string raw = get_string(section, key, "");
  std::transform(raw.begin(), raw.end(), raw.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (raw == "true" || raw == "yes" || raw == "1") return true;
  if (raw == "false" || raw == "no" || raw == "0") return false;
  throw std::invalid_argument("config: " + section + "." + key + " is not a boolean: " + raw);
}

ConfigFile parse_config_text(const std::string& text) {
  ConfigFile config;
  config.content_hash = fnv1a64(text);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const SectionSpec* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      current = nullptr;
      for (const auto& spec : known_sections())
        if (name == spec.name) current = &spec;
      if (!current) fail(lineno, "unknown section [" + name + "]");
      config.sections[name];  // empty sections are legal
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    if (!current) fail(lineno, "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");
    if (std::find_if(current->keys.begin(), current->keys.end(),
                     [&](const char* k) { return key == k; }) == current->keys.end())
      fail(lineno, "unknown key '" + key + "' in section [" + current->name + "]");
    auto& section = config.sections[current->name];
    if (!section.emplace(key, value).second)
      fail(lineno, "duplicate key '" + key + "' in section [" + std::string(current->name) + "]");
  }
  return config;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  ConfigFile config = parse_config_text(buf.str());
  config.path = path;
  return config;
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "dart") return ModelKind::kDart;
  if (name == "dart-nc") return ModelKind::kDartNc;
  throw std::invalid_argument("unknown model kind: " + name);
}

const char* model_kind_name(ModelKind kind) {
  return kind == ModelKind::kDart ? "dart" : "dart-nc";
}

void apply_model_config(const ConfigFile& config, ModelKind* kind, int* n_factors,
                        Hyperparameters* hyper, ModelOptions* options) {
  const std::string preset = config.get_string("model", "preset", "default");
  if (preset == "pfas")
    *hyper = pfas_preset();
  else if (preset == "default")
    *hyper = Hyperparameters{};
  else
    throw std::invalid_argument("unknown model preset: " + preset);

  *kind = model_kind_from_name(config.get_string("model", "kind", model_kind_name(*kind)));
  *n_factors = static_cast<int>(config.get_long("model", "factors", *n_factors));

  hyper->length_scale = config.get_double("model", "length_scale", hyper->length_scale);
  hyper->mgp_a1 = config.get_double("model", "mgp_a1", hyper->mgp_a1);
  hyper->mgp_b1 = config.get_double("model", "mgp_b1", hyper->mgp_b1);
  hyper->mgp_a2 = config.get_double("model", "mgp_a2", hyper->mgp_a2);
  hyper->mgp_b2 = config.get_double("model", "mgp_b2", hyper->mgp_b2);
  const std::string tau0 = config.get_string(
      "model", "tau0_prior", hyper->tau0_prior == Tau0Prior::kGamma ? "gamma" : "inverse-gamma");
  if (tau0 == "gamma")
    hyper->tau0_prior = Tau0Prior::kGamma;
  else if (tau0 == "inverse-gamma")
    hyper->tau0_prior = Tau0Prior::kInverseGamma;
  else
    throw std::invalid_argument("model.tau0_prior must be gamma or inverse-gamma");
  hyper->tau0_a = config.get_double("model", "tau0_a", hyper->tau0_a);
  hyper->tau0_b = config.get_double("model", "tau0_b", hyper->tau0_b);
  hyper->sigma_phi = config.get_double("model", "sigma_phi", hyper->sigma_phi);
  hyper->sigma_beta = config.get_double("model", "sigma_beta", hyper->sigma_beta);
  hyper->sigma_eta = config.get_double("model", "sigma_eta", hyper->sigma_eta);
  hyper->sigma_w = config.get_double("model", "sigma_w", hyper->sigma_w);
  hyper->sigma_theta = config.get_double("model", "sigma_theta", hyper->sigma_theta);
  hyper->alpha_noise_mean = config.get_double("model", "alpha_noise_mean", hyper->alpha_noise_mean);
  hyper->alpha_noise_sd = config.get_double("model", "alpha_noise_sd", hyper->alpha_noise_sd);
  hyper->beta_noise_mean = config.get_double("model", "beta_noise_mean", hyper->beta_noise_mean);
  hyper->beta_noise_sd = config.get_double("model", "beta_noise_sd", hyper->beta_noise_sd);
  hyper->tau_gamma_scale = config.get_double("model", "tau_gamma_scale", hyper->tau_gamma_scale);
  hyper->validate();

  options->unit_local_scales =
      config.get_bool("model", "unit_local_scales", options->unit_local_scales);
  options->kernel_jitter = config.get_double("model", "kernel_jitter", options->kernel_jitter);
}

void apply_sampler_config(const ConfigFile& config, SamplerConfig* sampler) {
  sampler->chains = static_cast<int>(config.get_long("sampler", "chains", sampler->chains));
  sampler->warmup = static_cast<int>(config.get_long("sampler", "warmup", sampler->warmup));
  sampler->samples = static_cast<int>(config.get_long("sampler", "samples", sampler->samples));
  sampler->thin = static_cast<int>(config.get_long("sampler", "thin", sampler->thin));
  sampler->target_accept = config.get_double("sampler", "target_accept", sampler->target_accept);
  sampler->max_tree_depth =
      static_cast<int>(config.get_long("sampler", "max_tree_depth", sampler->max_tree_depth));
  sampler->init_scale = config.get_double("sampler", "init_scale", sampler->init_scale);
  sampler->seed =
      static_cast<std::uint64_t>(config.get_long("sampler", "seed", static_cast<long>(sampler->seed)));
  sampler->threads = static_cast<int>(config.get_long("sampler", "threads", sampler->threads));
}

void apply_simulate_config(const ConfigFile& config, SimulationConfig* sim) {
  sim->n_chems = static_cast<int>(config.get_long("simulate", "chems", sim->n_chems));
  sim->n_genes = static_cast<int>(config.get_long("simulate", "genes", sim->n_genes));
  sim->n_doses = static_cast<int>(config.get_long("simulate", "doses", sim->n_doses));
  sim->n_factors = static_cast<int>(config.get_long("simulate", "factors", sim->n_factors));
  sim->replicates = static_cast<int>(config.get_long("simulate", "replicates", sim->replicates));
  sim->n_w = static_cast<int>(config.get_long("simulate", "n_w", sim->n_w));
  sim->n_z = static_cast<int>(config.get_long("simulate", "n_z", sim->n_z));
  sim->pi_miss = config.get_double("simulate", "pi_miss", sim->pi_miss);
  sim->z_prevalence = config.get_double("simulate", "z_prevalence", sim->z_prevalence);
  sim->kind = model_kind_from_name(config.get_string("simulate", "kind", model_kind_name(sim->kind)));
  sim->seed = static_cast<std::uint64_t>(config.get_long("simulate", "seed", static_cast<long>(sim->seed)));
}

}  // namespace dart
