#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dart/draws_io.hpp"
#include "dart/rng.hpp"

using namespace dart;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "dart_draws_io_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path path = test_dir() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

PosteriorDraws fake_draws(const ParamLayout& layout, int n_chains, int per_chain,
                          std::uint64_t seed) {
  Rng rng(seed);
  PosteriorDraws draws;
  draws.dim = layout.size;
  for (int c = 0; c < n_chains; ++c) {
    for (int s = 0; s < per_chain; ++s) {
      Eigen::VectorXd x(layout.size);
      for (int i = 0; i < layout.size; ++i) x[i] = rng.normal();
      draws.draws.push_back(std::move(x));
      draws.log_post.push_back(-100.0 + rng.normal());
      draws.divergent.push_back(s == 1 && c == 0);
      draws.chain.push_back(c);
    }
    ChainStats st;
    st.seed = seed + c;
    st.step_size = 0.0123456789012345 + c;
    st.mean_accept = 0.87;
    st.divergences = c;
    st.max_depth_hits = 2 * c;
    draws.chain_stats.push_back(st);
  }
  return draws;
}

}  // namespace

TEST_CASE("draws round-trip bit-exactly with layout, grid and chain stats") {
  const ParamLayout layout = make_layout(ModelKind::kDart, 2, 2, 3, 2, 1, 1);
  const DoseGrid grid = simulation_dose_grid(3);
  const PosteriorDraws draws = fake_draws(layout, 2, 2, 5);
  const auto path = (test_dir() / "roundtrip.csv").string();
  write_draws(path, draws, layout, grid);

  const DrawsFile file = read_draws(path);
  CHECK(file.layout.kind == ModelKind::kDart);
  CHECK(file.layout.n_chems == 2);
  CHECK(file.layout.n_genes == 2);
  CHECK(file.layout.n_doses == 3);
  CHECK(file.layout.n_factors == 2);
  CHECK(file.layout.n_w == 1);
  CHECK(file.layout.n_z == 1);
  CHECK(file.layout.has_phi);
  CHECK(file.layout.size == layout.size);
  CHECK(file.grid.coords == grid.coords);

  REQUIRE(file.draws.size() == draws.size());
  for (std::size_t s = 0; s < draws.size(); ++s) {
    CHECK(file.draws.draws[s] == draws.draws[s]);  // %.17g parses back exactly
    CHECK(file.draws.log_post[s] == draws.log_post[s]);
    CHECK(file.draws.divergent[s] == draws.divergent[s]);
    CHECK(file.draws.chain[s] == draws.chain[s]);
  }
  REQUIRE(file.draws.chain_stats.size() == 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(file.draws.chain_stats[c].seed == draws.chain_stats[c].seed);
    CHECK(file.draws.chain_stats[c].step_size == draws.chain_stats[c].step_size);
    CHECK(file.draws.chain_stats[c].mean_accept == draws.chain_stats[c].mean_accept);
    CHECK(file.draws.chain_stats[c].divergences == draws.chain_stats[c].divergences);
    CHECK(file.draws.chain_stats[c].max_depth_hits == draws.chain_stats[c].max_depth_hits);
  }
}

TEST_CASE("the no-covariate and unit-scale layouts survive the round trip") {
  const DoseGrid grid = simulation_dose_grid(4);

  const ParamLayout nc = make_layout(ModelKind::kDartNc, 3, 2, 4, 2, 0, 0);
  const auto nc_path = (test_dir() / "nc.csv").string();
  write_draws(nc_path, fake_draws(nc, 1, 2, 7), nc, grid);
  const DrawsFile nc_file = read_draws(nc_path);
  CHECK(nc_file.layout.kind == ModelKind::kDartNc);
  CHECK_FALSE(nc_file.layout.has_phi);
  CHECK(nc_file.layout.size == nc.size);

  // A dart layout with unit local scales has no phi block; the reader infers
  // that from has_phi=0 and rebuilds the same (smaller) layout.
  const ParamLayout unit = make_layout(ModelKind::kDart, 3, 2, 4, 2, 1, 0, true);
  REQUIRE_FALSE(unit.has_phi);
  const auto unit_path = (test_dir() / "unit.csv").string();
  write_draws(unit_path, fake_draws(unit, 1, 2, 9), unit, grid);
  const DrawsFile unit_file = read_draws(unit_path);
  CHECK(unit_file.layout.kind == ModelKind::kDart);
  CHECK_FALSE(unit_file.layout.has_phi);
  CHECK(unit_file.layout.size == unit.size);
}

TEST_CASE("writing rejects a dimension mismatch") {
  const ParamLayout layout = make_layout(ModelKind::kDartNc, 2, 2, 3, 2, 0, 0);
  PosteriorDraws draws = fake_draws(layout, 1, 1, 3);
  draws.dim = layout.size + 1;
  CHECK_THROWS_AS(write_draws((test_dir() / "bad_dim.csv").string(), draws, layout,
                              simulation_dose_grid(3)),
                  std::invalid_argument);
}

TEST_CASE("corrupted draws files are rejected with a specific reason") {
  const std::string layout_line =
      "# layout kind=dart-nc chems=1 genes=1 doses=2 factors=1 n_w=0 n_z=0 has_phi=0\n";
  const std::string grid_line = "# grid -4,-2\n";
  const ParamLayout tiny = make_layout(ModelKind::kDartNc, 1, 1, 2, 1, 0, 0);
  std::string header = "chain,iteration,lp,divergent";
  for (int i = 0; i < tiny.size; ++i) header += ",x" + std::to_string(i);
  header += "\n";

  CHECK_THROWS_WITH_AS(read_draws(write_file("bad_magic.csv", "# not-draws\n")),
                       doctest::Contains("format header"), std::runtime_error);
  CHECK_THROWS_WITH_AS(read_draws(write_file("no_layout.csv",
                                             "# dart-draws v1\n" + grid_line + header)),
                       doctest::Contains("missing layout or grid"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      read_draws(write_file("missing_key.csv",
                            "# dart-draws v1\n# layout kind=dart-nc chems=1\n" + grid_line)),
      doctest::Contains("layout is missing"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      read_draws(write_file("grid_mismatch.csv",
                            "# dart-draws v1\n" + layout_line + "# grid -4\n" + header)),
      doctest::Contains("grid length disagrees"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      read_draws(write_file("bogus_header.csv",
                            "# dart-draws v1\n" + layout_line + grid_line + "# bogus x=1\n")),
      doctest::Contains("unknown header line"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      read_draws(write_file("bad_columns.csv", "# dart-draws v1\n" + layout_line + grid_line +
                                                   "chain,iteration,logp,divergent\n")),
      doctest::Contains("unexpected column header"), std::runtime_error);
  std::string short_row = "0,0,-1,0";
  for (int i = 0; i < tiny.size - 1; ++i) short_row += ",0";
  CHECK_THROWS_WITH_AS(
      read_draws(write_file("bad_row.csv", "# dart-draws v1\n" + layout_line + grid_line +
                                               header + short_row + "\n")),
      doctest::Contains("wrong field count"), std::runtime_error);
}
