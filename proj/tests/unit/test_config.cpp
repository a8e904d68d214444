#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dart/config.hpp"

using namespace dart;

TEST_CASE("fnv1a64 reproduces the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("config text parses sections, comments and typed values") {
  const std::string text =
      "# top-level comment\n"
      "[model]\n"
      "kind = dart\n"
      "factors = 7   # inline comment\n"
      "length_scale = 2.5\n"
      "unit_local_scales = yes\n"
      "\n"
      "[sampler]\n"
      "seed = 42\n"
      "\n"
      "[report]\n";
  const ConfigFile config = parse_config_text(text);

  CHECK(config.content_hash == fnv1a64(text));
  CHECK(config.has("model", "kind"));
  CHECK_FALSE(config.has("model", "mgp_a1"));
  CHECK(config.get_string("model", "kind", "x") == "dart");
  CHECK(config.get_long("model", "factors", 0) == 7);
  CHECK(config.get_double("model", "length_scale", 0.0) == 2.5);
  CHECK(config.get_bool("model", "unit_local_scales", false));
  CHECK(config.get_long("sampler", "seed", 0) == 42);
  // Fallbacks when the key or the whole section is missing.
  CHECK(config.get_double("model", "mgp_a1", 1.25) == 1.25);
  CHECK(config.get_string("crossval", "scheme", "pairs") == "pairs");
  // The empty [report] section still registers.
  CHECK(config.sections.count("report") == 1);
  CHECK(config.sections.at("report").empty());
}

TEST_CASE("boolean values accept the usual spellings and nothing else") {
  ConfigFile c = parse_config_text("[model]\nunit_local_scales = TRUE\n");
  CHECK(c.get_bool("model", "unit_local_scales", false));
  c = parse_config_text("[model]\nunit_local_scales = 0\n");
  CHECK_FALSE(c.get_bool("model", "unit_local_scales", true));
  c = parse_config_text("[model]\nunit_local_scales = maybe\n");
  CHECK_THROWS_AS(c.get_bool("model", "unit_local_scales", true), std::invalid_argument);
}

TEST_CASE("malformed config lines fail with their line number") {
  CHECK_THROWS_WITH_AS(parse_config_text("[nonsense]\n"),
                       doctest::Contains("config line 1"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("[model]\nwibble = 3\n"),
                       doctest::Contains("unknown key 'wibble'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("[model]\nkind = dart\nkind = dart-nc\n"),
                       doctest::Contains("duplicate key"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("kind = dart\n"),
                       doctest::Contains("key outside any section"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("[model\n"),
                       doctest::Contains("unterminated section header"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("[model]\nno equals sign\n"),
                       doctest::Contains("expected key = value"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[sampler]\nseed = pi\n").get_long("sampler", "seed", 0),
                  std::invalid_argument);
}

TEST_CASE("model kind names round-trip") {
  CHECK(model_kind_from_name("dart") == ModelKind::kDart);
  CHECK(model_kind_from_name("dart-nc") == ModelKind::kDartNc);
  CHECK(model_kind_name(ModelKind::kDart) == std::string("dart"));
  CHECK(model_kind_name(ModelKind::kDartNc) == std::string("dart-nc"));
  CHECK_THROWS_AS(model_kind_from_name("dartboard"), std::invalid_argument);
}

TEST_CASE("the model overlay starts from the preset and applies explicit keys on top") {
  const ConfigFile config = parse_config_text(
      "[model]\n"
      "preset = pfas\n"
      "kind = dart\n"
      "factors = 9\n"
      "mgp_a1 = 11\n"
      "tau0_prior = inverse-gamma\n"
      "kernel_jitter = 1e-6\n"
      "unit_local_scales = true\n");
  ModelKind kind = ModelKind::kDartNc;
  int n_factors = 5;
  Hyperparameters hyper;
  ModelOptions options;
  apply_model_config(config, &kind, &n_factors, &hyper, &options);

  CHECK(kind == ModelKind::kDart);
  CHECK(n_factors == 9);
  CHECK(hyper.mgp_a1 == 11.0);            // explicit key wins
  CHECK(hyper.mgp_b1 == 2.0);             // from the pfas preset
  CHECK(hyper.sigma_phi == 0.15);         // from the pfas preset
  CHECK(hyper.tau0_a == 3.0);
  CHECK(hyper.tau0_prior == Tau0Prior::kInverseGamma);
  CHECK(options.unit_local_scales);
  CHECK(options.kernel_jitter == 1e-6);

  // An empty config leaves everything at the defaults.
  ModelKind kind2 = ModelKind::kDartNc;
  int n2 = 5;
  Hyperparameters h2;
  ModelOptions o2;
  apply_model_config(parse_config_text(""), &kind2, &n2, &h2, &o2);
  CHECK(kind2 == ModelKind::kDartNc);
  CHECK(n2 == 5);
  CHECK(h2.sigma_phi == 0.25);
  CHECK_FALSE(o2.unit_local_scales);
}

TEST_CASE("bad model settings are rejected") {
  ModelKind kind = ModelKind::kDartNc;
  int n_factors = 5;
  Hyperparameters hyper;
  ModelOptions options;
  CHECK_THROWS_AS(apply_model_config(parse_config_text("[model]\npreset = fancy\n"), &kind,
                                     &n_factors, &hyper, &options),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_model_config(parse_config_text("[model]\ntau0_prior = flat\n"), &kind,
                                     &n_factors, &hyper, &options),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_model_config(parse_config_text("[model]\nlength_scale = -1\n"), &kind,
                                     &n_factors, &hyper, &options),
                  std::invalid_argument);
}

TEST_CASE("sampler and simulation overlays touch only the configured keys") {
  SamplerConfig sampler;
  apply_sampler_config(parse_config_text("[sampler]\nchains = 3\nseed = 99\nthin = 2\n"),
                       &sampler);
  CHECK(sampler.chains == 3);
  CHECK(sampler.seed == 99);
  CHECK(sampler.thin == 2);
  CHECK(sampler.warmup == 1000);        // untouched default
  CHECK(sampler.target_accept == 0.8);  // untouched default

  SimulationConfig sim;
  apply_simulate_config(
      parse_config_text("[simulate]\nchems = 12\ngenes = 8\npi_miss = 0.4\nkind = dart\n"),
      &sim);
  CHECK(sim.n_chems == 12);
  CHECK(sim.n_genes == 8);
  CHECK(sim.pi_miss == 0.4);
  CHECK(sim.kind == ModelKind::kDart);
}

TEST_CASE("config files load from disk with their hash and path recorded") {
  const auto path = std::filesystem::temp_directory_path() / "dart_config_test.cfg";
  const std::string text = "[sampler]\nseed = 5\n";
  {
    std::ofstream out(path);
    out << text;
  }
  const ConfigFile config = load_config(path.string());
  CHECK(config.path == path.string());
  CHECK(config.content_hash == fnv1a64(text));
  CHECK(config.get_long("sampler", "seed", 0) == 5);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_config((path.parent_path() / "missing_dart.cfg").string()),
                  std::runtime_error);
}
