#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dart/ingest.hpp"
#include "dart/rng.hpp"

using namespace dart;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "dart_ingest_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path path = test_dir() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

long drop_count(const IngestReport& report, const std::string& reason_part) {
  for (const auto& d : report.drops)
    if (d.reason.find(reason_part) != std::string::npos) return d.count;
  return 0;
}

}  // namespace

TEST_CASE("every bin boundary concentration maps to its own bin") {
  const BinTable bins = BinTable::standard();
  bins.validate();
  const std::pair<double, double> cases[] = {
      {0.01, -4.0}, {0.04, -4.0}, {0.05, -2.0}, {0.3, -2.0},
      {0.4, 0.0},   {2.5, 0.0},   {3.0, 2.0},   {20.0, 2.0},
      {25.0, 4.0},  {100.0, 4.0}, {200.0, 6.0}, {300.0, 6.0},
  };
  for (const auto& [dose, label] : cases) {
    const auto got = bins.discretize(dose);
    REQUIRE_MESSAGE(got.has_value(), "dose " << dose);
    CHECK_MESSAGE(*got == label, "dose " << dose);
  }
  // Gaps between ranges still resolve to the nearest label in log space:
  // exp(3) ~ 20.09 uM sits halfway between the 2 and 4 labels.
  CHECK(bins.discretize(0.045).value() == -4.0);
  CHECK(bins.discretize(20.05).value() == 2.0);
  CHECK(bins.discretize(22.0).value() == 4.0);
}

TEST_CASE("doses outside the table are rejected") {
  const BinTable bins = BinTable::standard();
  CHECK_FALSE(bins.discretize(0.005).has_value());
  CHECK_FALSE(bins.discretize(301.0).has_value());
  CHECK_FALSE(bins.discretize(0.0).has_value());
  CHECK_FALSE(bins.discretize(-1.0).has_value());
  CHECK_FALSE(bins.discretize(std::numeric_limits<double>::infinity()).has_value());
  CHECK_FALSE(bins.discretize(std::numeric_limits<double>::quiet_NaN()).has_value());
}

TEST_CASE("a log-distance tie keeps the lower label") {
  BinTable t;
  t.bins = {{-1.0, 0.2, 0.9}, {1.0, 1.5, 5.0}};
  t.validate();
  // log(1) = 0 sits exactly between the labels.
  CHECK(t.discretize(1.0).value() == -1.0);
}

TEST_CASE("representative concentrations anchor at exp(label) when possible") {
  const BinTable bins = BinTable::standard();
  for (const double label : {-4.0, -2.0, 0.0, 2.0, 4.0})
    CHECK(bins.representative(label) == doctest::Approx(std::exp(label)).epsilon(1e-15));
  // exp(6) ~ 403 exceeds the top range, so the geometric midpoint is used.
  CHECK(bins.representative(6.0) ==
        doctest::Approx(std::sqrt(200.0 * 300.0)).epsilon(1e-15));
  CHECK(bins.representative(10.0) == doctest::Approx(std::exp(10.0)).epsilon(1e-15));
}

TEST_CASE("bin table validation rejects malformed tables") {
  BinTable t;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // empty
  t.bins = {{0.0, 1.0, 0.5}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // lo >= hi
  t.bins = {{0.0, 0.4, 2.5}, {0.0, 3.0, 20.0}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // labels not increasing
  t.bins = {{0.0, 0.4, 2.5}, {2.0, 2.0, 20.0}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // overlapping ranges
}

TEST_CASE("pca reduces two identical columns to one full-variance component") {
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 1.0,
      -1.0, -1.0;
  const PcaResult pca = pca_reduce(x, 1);
  CHECK(pca.explained[0] == doctest::Approx(1.0).epsilon(1e-12));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(pca.loadings(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(pca.loadings(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(pca.scores(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pca.scores(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pca components are orthonormal, sign-fixed and variance-ordered") {
  Rng rng(61);
  Eigen::MatrixXd x(6, 3);
  for (int i = 0; i < x.rows(); ++i)
    for (int c = 0; c < x.cols(); ++c) x(i, c) = rng.normal() + 0.5 * c;
  const PcaResult pca = pca_reduce(x, 3);

  CHECK((pca.loadings.transpose() * pca.loadings - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK(pca.explained.sum() == doctest::Approx(1.0).epsilon(1e-10));
  for (int c = 0; c + 1 < 3; ++c) CHECK(pca.explained[c] >= pca.explained[c + 1]);
  for (int c = 0; c < 3; ++c) {
    Eigen::Index imax = 0;
    pca.loadings.col(c).cwiseAbs().maxCoeff(&imax);
    CHECK(pca.loadings(imax, c) > 0.0);
    for (int b = 0; b < c; ++b)
      CHECK(std::abs(pca.scores.col(b).dot(pca.scores.col(c))) < 1e-8);
  }
}

TEST_CASE("pca rejects degenerate inputs") {
  Eigen::MatrixXd x(3, 2);
  x << 1.0, 5.0,
       2.0, 5.0,
       3.0, 5.0;
  CHECK_THROWS_AS(pca_reduce(x, 1), std::invalid_argument);  // constant column
  Eigen::MatrixXd ok(3, 2);
  ok << 1.0, 5.0, 2.0, 4.0, 3.0, 6.0;
  CHECK_THROWS_AS(pca_reduce(ok, 0), std::invalid_argument);
  CHECK_THROWS_AS(pca_reduce(ok, 3), std::invalid_argument);
  CHECK_THROWS_AS(pca_reduce(ok.topRows(1), 1), std::invalid_argument);
}

TEST_CASE("harmonization keeps log2 rows and reports the rest per type") {
  std::vector<ObservationRecord> rows(3);
  rows[0].response_type = "log2";
  rows[1].response_type = "viability";
  rows[1].line = 12;
  rows[2].response_type = "raw";
  IngestReport report;
  const auto kept = harmonize_responses(rows, report);
  CHECK(kept.size() == 1);
  CHECK(drop_count(report, "'viability'") == 1);
  CHECK(drop_count(report, "'raw'") == 1);
  CHECK(report.to_text().find("line 12") != std::string::npos);
}

TEST_CASE("observation csv reader enforces its header and field counts") {
  const auto good = write_file("read_ok.csv",
                               "chemical_id,gene_id,dose_um,replicate,response\n"
                               "c1,g1,3,1,0.5\n"
                               "\n"
                               "c1,g1,3,2,0.25\n");
  const auto rows = read_observation_csv(good);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].response_type == "log2");  // default when the column is absent
  CHECK(rows[1].line == 4);                // blank lines keep their numbering
  CHECK(rows[1].replicate == 2);

  const auto bad_header =
      write_file("read_bad_header.csv", "chemical_id,gene,dose_um,replicate,response\n");
  CHECK_THROWS_AS(read_observation_csv(bad_header), std::runtime_error);
  const auto bad_fields = write_file("read_bad_fields.csv",
                                     "chemical_id,gene_id,dose_um,replicate,response\n"
                                     "c1,g1,3,1\n");
  CHECK_THROWS_AS(read_observation_csv(bad_fields), std::runtime_error);
  const auto bad_id = write_file("read_bad_id.csv",
                                 "chemical_id,gene_id,dose_um,replicate,response\n"
                                 ",g1,3,1,0.5\n");
  CHECK_THROWS_AS(read_observation_csv(bad_id), std::runtime_error);
}

TEST_CASE("ingestion indexes ids, bins doses and reports every drop") {
  const auto obs = write_file(
      "full_obs.csv",
      "chemical_id,gene_id,dose_um,replicate,response,response_type\n"
      "b-chem,g2,0.01,1,0.5,log2\n"
      "b-chem,g2,0.01,2,0.6,log2\n"
      "a-chem,g1,3,1,1.0,log2\n"
      "a-chem,g1,5,1,1.2,log2\n"    // same bin and replicate as the 3 uM row
      "a-chem,g1,400,1,0.9,log2\n"  // beyond the top bin
      "a-chem,g1,2.5,1,-0.3,log2\n"
      "c-chem,g1,1,1,0.2,log2\n"  // no descriptor row
      "a-chem,g2,1,0,0.4,log2\n"  // replicate index 0
      "a-chem,g1,1,2,nan,log2\n"
      "a-chem,g1,0.3,1,0.8,viability\n");
  const auto cov_w = write_file("full_w.csv",
                                "chemical_id,w1,w2\n"
                                "a-chem,0.5,1.0\n"
                                "b-chem,-0.25,2.0\n"
                                "d-chem,9,9\n");  // unused entries are fine

  const IngestResult r = load_and_validate({obs, cov_w, ""});
  CHECK(r.report.rows_in == 10);
  CHECK(r.report.rows_kept == 4);
  CHECK(r.report.rows_dropped() == 6);
  CHECK(drop_count(r.report, "not on the log2 scale") == 1);
  CHECK(drop_count(r.report, "non-finite response") == 1);
  CHECK(drop_count(r.report, "replicate index < 1") == 1);
  CHECK(drop_count(r.report, "missing from descriptor table") == 1);
  CHECK(drop_count(r.report, "outside the bin table range") == 1);
  CHECK(drop_count(r.report, "replicate numbering inconsistent") == 1);

  CHECK(r.data.chem_ids == std::vector<std::string>{"a-chem", "b-chem"});
  CHECK(r.data.gene_ids == std::vector<std::string>{"g1", "g2"});
  CHECK(r.data.grid.coords == std::vector<double>{-4.0, 0.0, 2.0});

  const ObservationCell* low = r.data.find(0, 0, 1);
  REQUIRE(low != nullptr);
  CHECK(low->responses == std::vector<double>{-0.3});
  const ObservationCell* mid = r.data.find(0, 0, 2);
  REQUIRE(mid != nullptr);
  CHECK(mid->responses == std::vector<double>{1.0});  // the 5 uM row was dropped
  const ObservationCell* pair = r.data.find(1, 1, 0);
  REQUIRE(pair != nullptr);
  CHECK(pair->responses == std::vector<double>{0.5, 0.6});

  CHECK(r.data.total_responses() == 4);
  CHECK(r.covariates.w.rows() == 2);
  CHECK(r.covariates.w(0, 0) == doctest::Approx(0.5));
  CHECK(r.covariates.w_names == std::vector<std::string>{"w1", "w2"});
  CHECK(r.pca_explained.size() == 0);
}

TEST_CASE("an exact duplicate observation row is a hard error") {
  const auto obs = write_file("dup_obs.csv",
                              "chemical_id,gene_id,dose_um,replicate,response\n"
                              "c1,g1,3,1,0.5\n"
                              "c1,g1,3,1,0.5\n");
  CHECK_THROWS_WITH_AS(load_and_validate({obs, "", ""}),
                       doctest::Contains("duplicate observation row"), std::runtime_error);
}

TEST_CASE("descriptor PCA standardizes the scores and names the components") {
  const auto obs = write_file("pca_obs.csv",
                              "chemical_id,gene_id,dose_um,replicate,response\n"
                              "a-chem,g1,3,1,0.5\n"
                              "b-chem,g1,3,1,0.25\n");
  const auto cov_w = write_file("pca_w.csv",
                                "chemical_id,w1,w2\n"
                                "a-chem,1,2\n"
                                "b-chem,-1,-2\n");
  IngestOptions opt;
  opt.pca_components = 1;
  const IngestResult r = load_and_validate({obs, cov_w, ""}, opt);
  CHECK(r.covariates.w_names == std::vector<std::string>{"pc1"});
  REQUIRE(r.covariates.w.rows() == 2);
  CHECK(r.covariates.w(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.covariates.w(1, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(r.pca_explained.size() == 1);
  CHECK(r.pca_explained[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gene annotations default to zero rows and must be binary") {
  const auto obs = write_file("z_obs.csv",
                              "chemical_id,gene_id,dose_um,replicate,response\n"
                              "c1,g1,3,1,0.5\n"
                              "c1,g2,3,1,0.25\n");
  const auto cov_z = write_file("z_good.csv",
                                "gene_id,pathway_a,pathway_b\n"
                                "g2,1,0\n");  // g1 has no annotation row
  const IngestResult r = load_and_validate({obs, "", cov_z});
  CHECK(r.covariates.z_names == std::vector<std::string>{"pathway_a", "pathway_b"});
  CHECK(r.covariates.z.row(0).isZero());
  CHECK(r.covariates.z(1, 0) == 1.0);

  const auto bad_z = write_file("z_bad.csv",
                                "gene_id,pathway_a\n"
                                "g1,0.5\n");
  CHECK_THROWS_AS(load_and_validate({obs, "", bad_z}), std::invalid_argument);
}

TEST_CASE("written observation and covariate tables load back unchanged") {
  const auto obs = write_file(
      "rt_obs.csv",
      "chemical_id,gene_id,dose_um,replicate,response\n"
      "a-chem,g1,3,1,0.567890123456789\n"
      "a-chem,g1,3,2,-0.25\n"
      "a-chem,g2,250,1,1.5\n"
      "b-chem,g1,0.02,1,0.125\n");
  const IngestResult first = load_and_validate({obs, "", ""});

  const BinTable bins = BinTable::standard();
  const auto obs_out = (test_dir() / "rt_obs_out.csv").string();
  write_observation_csv(first.data, bins, obs_out);
  const IngestResult second = load_and_validate({obs_out, "", ""});

  CHECK(second.data.chem_ids == first.data.chem_ids);
  CHECK(second.data.gene_ids == first.data.gene_ids);
  CHECK(second.data.grid.coords == first.data.grid.coords);
  REQUIRE(second.data.cells.size() == first.data.cells.size());
  for (std::size_t c = 0; c < first.data.cells.size(); ++c) {
    CHECK(second.data.cells[c].chem == first.data.cells[c].chem);
    CHECK(second.data.cells[c].gene == first.data.cells[c].gene);
    CHECK(second.data.cells[c].dose == first.data.cells[c].dose);
    CHECK(second.data.cells[c].responses == first.data.cells[c].responses);
  }

  CovariateSet cov;
  cov.w.resize(2, 2);
  cov.w << 0.5, 1.0, -0.25, 2.0;
  cov.w_names = {"w1", "w2"};
  cov.z.resize(2, 2);
  cov.z << 1, 0, 0, 1;
  cov.z_names = {"za", "zb"};
  const auto w_out = (test_dir() / "rt_w.csv").string();
  const auto z_out = (test_dir() / "rt_z.csv").string();
  write_covariates_w_csv(cov, first.data.chem_ids, w_out);
  write_covariates_z_csv(cov, first.data.gene_ids, z_out);
  const IngestResult third = load_and_validate({obs_out, w_out, z_out});
  CHECK(third.covariates.w == cov.w);
  CHECK(third.covariates.z == cov.z);
  CHECK(third.covariates.w_names == cov.w_names);
  CHECK(third.covariates.z_names == cov.z_names);
}
