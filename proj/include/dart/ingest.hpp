#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dart/data.hpp"

namespace dart {

// One dose bin: grid label (natural-log micromolar anchor) and the raw
// concentration range it covers.
struct DoseBin {
  double label;
  double lo_um;
  double hi_um;
};

// Concentration discretization table. Assignment is nearest label by
// log(dose); ties go to the lower label; doses outside [lo of first bin,
// hi of last bin] are rejected.
struct BinTable {
  std::vector<DoseBin> bins;

  static BinTable standard();
  void validate() const;
  std::optional<double> discretize(double dose_um) const;
  // Representative raw concentration for a label: exp(label) when that lies
  // inside the bin's range, otherwise the range's geometric midpoint. For a
  // label outside the table, exp(label).
  double representative(double label) const;
};

// Raw long-format response row.
struct ObservationRecord {
  std::string chem_id;
  std::string gene_id;
  double dose_um = 0.0;
  int replicate = 0;
  double response = 0.0;               // log2 fold change
  std::string response_type = "log2";  // rows with other types are dropped
  long line = 0;                       // 1-based source line for reporting
};

struct DropCount {
  std::string reason;
  long count = 0;
  std::vector<long> lines;  // up to a few example source lines
};

struct IngestReport {
  long rows_in = 0;
  long rows_kept = 0;
  std::vector<DropCount> drops;

  long rows_dropped() const;
  void add_drop(const std::string& reason, long line);
  std::string to_text() const;
};

// Keeps log2 fold-change rows, drops rows of any other response type
// (counted per type in the report).
std::vector<ObservationRecord> harmonize_responses(
    const std::vector<ObservationRecord>& rows, IngestReport& report);

// Principal components of the column-standardized matrix (eigendecomposition
// of the correlation matrix). Scores are x_std * V; explained[i] is the
// fraction of total variance. Component signs are fixed by making the
// largest-magnitude loading positive. Zero-variance columns are an error.
struct PcaResult {
  Eigen::MatrixXd scores;
  Eigen::MatrixXd loadings;
  Eigen::VectorXd explained;
};
PcaResult pca_reduce(const Eigen::MatrixXd& x, int n_components);

struct IngestPaths {
  std::string observations;
  std::string covariates_w;  // optional ("" = absent)
  std::string covariates_z;  // optional
};

struct IngestOptions {
  BinTable bins;   // empty -> standard()
  int pca_components = 0;  // 0 = keep descriptors as-is
};

struct IngestResult {
  ObservationSet data;
  CovariateSet covariates;
  IngestReport report;
  Eigen::VectorXd pca_explained;  // empty unless PCA applied
};

std::vector<ObservationRecord> read_observation_csv(const std::string& path);

// Full ingestion: parse, harmonize, discretize doses, drop chemicals without
// descriptor rows (when W is given), index chemicals/genes by sorted id, and
// assemble the response tensor. Exact duplicate rows are a hard error;
// rows whose (chem, gene, bin, replicate) collides with a different raw dose
// are dropped as inconsistent replicate numbering.
IngestResult load_and_validate(const IngestPaths& paths, const IngestOptions& options = {});

void write_observation_csv(const ObservationSet& data, const BinTable& bins,
                           const std::string& path);
void write_covariates_w_csv(const CovariateSet& cov,
                            const std::vector<std::string>& chem_ids,
                            const std::string& path);
void write_covariates_z_csv(const CovariateSet& cov,
                            const std::vector<std::string>& gene_ids,
                            const std::string& path);

}  // namespace dart
