#include "dart/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dart/csv.hpp"

namespace dart {

BinTable BinTable::standard() {
  BinTable t;
  t.bins = {
      {-4.0, 0.01, 0.04}, {-2.0, 0.05, 0.3}, {0.0, 0.4, 2.5},
      {2.0, 3.0, 20.0},   {4.0, 25.0, 100.0}, {6.0, 200.0, 300.0},
  };
  return t;
}

void BinTable::validate() const {
  if (bins.empty()) throw std::invalid_argument("BinTable: no bins");
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const auto& bin = bins[b];
    if (!(bin.lo_um > 0.0) || !(bin.hi_um > bin.lo_um))
      throw std::invalid_argument("BinTable: need 0 < lo < hi");
    if (b > 0) {
      if (bin.label <= bins[b - 1].label)
        throw std::invalid_argument("BinTable: labels must be strictly increasing");
      if (bin.lo_um <= bins[b - 1].hi_um)
        throw std::invalid_argument("BinTable: ranges must not overlap");
    }
  }
}

std::optional<double> BinTable::discretize(double dose_um) const {
  if (!(dose_um > 0.0) || !std::isfinite(dose_um)) return std::nullopt;
  if (dose_um < bins.front().lo_um || dose_um > bins.back().hi_um) return std::nullopt;
  const double ld = std::log(dose_um);
  double best_label = bins.front().label;
  double best_dist = std::abs(ld - best_label);
  for (std::size_t b = 1; b < bins.size(); ++b) {
    const double dist = std::abs(ld - bins[b].label);
    if (dist < best_dist) {  // strict: ties keep the lower label
      best_dist = dist;
      best_label = bins[b].label;
    }
  }
  return best_label;
}

double BinTable::representative(double label) const {
  for (const auto& bin : bins) {
    if (bin.label == label) {
      const double anchor = std::exp(label);
      if (anchor >= bin.lo_um && anchor <= bin.hi_um) return anchor;
      return std::sqrt(bin.lo_um * bin.hi_um);
    }
  }
  return std::exp(label);
}

long IngestReport::rows_dropped() const {
  long n = 0;
  for (const auto& d : drops) n += d.count;
  return n;
}

void IngestReport::add_drop(const std::string& reason, long line) {
  for (auto& d : drops) {
    if (d.reason == reason) {
      ++d.count;
      if (d.lines.size() < 5) d.lines.push_back(line);
      return;
    }
  }
  drops.push_back({reason, 1, {line}});
}

std::string IngestReport::to_text() const {
  std::ostringstream os;
  os << "rows read:    " << rows_in << "\n";
  os << "rows kept:    " << rows_kept << "\n";
  os << "rows dropped: " << rows_dropped() << "\n";
  for (const auto& d : drops) {
    os << "  - " << d.reason << ": " << d.count << " (e.g. line";
    for (std::size_t i = 0; i < d.lines.size(); ++i) os << (i ? ", " : " ") << d.lines[i];
    os << ")\n";
  }
  return os.str();
}

std::vector<ObservationRecord> harmonize_responses(
    const std::vector<ObservationRecord>& rows, IngestReport& report) {
  std::vector<ObservationRecord> kept;
  kept.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.response_type == "log2") {
      kept.push_back(r);
    } else {
      report.add_drop("response type '" + r.response_type + "' not on the log2 scale",
                      r.line);
    }
  }
  return kept;
}

PcaResult pca_reduce(const Eigen::MatrixXd& x, int n_components) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n < 2) throw std::invalid_argument("pca_reduce: need at least two rows");
  if (n_components < 1 || n_components > p)
    throw std::invalid_argument("pca_reduce: n_components out of range");

  Eigen::MatrixXd xs = x;
  for (Eigen::Index c = 0; c < p; ++c) {
    const double mean = xs.col(c).mean();
    xs.col(c).array() -= mean;
    const double sd = std::sqrt(xs.col(c).squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 0.0))
      throw std::invalid_argument("pca_reduce: zero-variance column " + std::to_string(c));
    xs.col(c) /= sd;
  }
  const Eigen::MatrixXd corr = (xs.transpose() * xs) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("pca_reduce: eigendecomposition failed");

  // SelfAdjointEigenSolver sorts ascending; take the top components.
  PcaResult out;
  out.loadings.resize(p, n_components);
  out.explained.resize(n_components);
  for (int c = 0; c < n_components; ++c) {
    const Eigen::Index src = p - 1 - c;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    out.loadings.col(c) = v;
    out.explained[c] = std::max(0.0, eig.eigenvalues()[src]) / static_cast<double>(p);
  }
  out.scores = xs * out.loadings;
  return out;
}

std::vector<ObservationRecord> read_observation_csv(const std::string& path) {
  auto f = csv::open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("observation csv is empty: " + path);
  auto header = csv::split(line);
  const std::vector<std::string> want = {"chemical_id", "gene_id", "dose_um",
                                         "replicate", "response"};
  if (header.size() < want.size() || header.size() > want.size() + 1)
    throw std::runtime_error("observation csv: unexpected column count in " + path);
  for (std::size_t c = 0; c < want.size(); ++c)
    if (header[c] != want[c])
      throw std::runtime_error("observation csv: expected column '" + want[c] +
                               "', found '" + header[c] + "'");
  const bool has_type = header.size() == want.size() + 1;
  if (has_type && header.back() != "response_type")
    throw std::runtime_error("observation csv: sixth column must be response_type");

  std::vector<ObservationRecord> rows;
  long line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = csv::split(line);
    if (parts.size() != header.size())
      throw std::runtime_error("observation csv: wrong field count at line " +
                               std::to_string(line_no));
    ObservationRecord r;
    r.chem_id = parts[0];
    r.gene_id = parts[1];
    r.dose_um = csv::parse_double(parts[2], "dose_um at line " + std::to_string(line_no));
    r.replicate = static_cast<int>(
        csv::parse_long(parts[3], "replicate at line " + std::to_string(line_no)));
    r.response =
        csv::parse_double(parts[4], "response at line " + std::to_string(line_no));
    if (has_type) r.response_type = parts[5];
    r.line = line_no;
    if (r.chem_id.empty() || r.gene_id.empty())
      throw std::runtime_error("observation csv: empty id at line " +
                               std::to_string(line_no));
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

// Descriptor table keyed by chemical id; first column is the id.
std::pair<std::vector<std::string>, std::map<std::string, Eigen::VectorXd>>
read_covariate_csv(const std::string& path, const std::string& id_column) {
  auto f = csv::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("covariate csv is empty: " + path);
  auto header = csv::split(line);
  if (header.size() < 2 || header[0] != id_column)
    throw std::runtime_error("covariate csv: first column must be " + id_column);
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::map<std::string, Eigen::VectorXd> rows;
  long line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = csv::split(line);
    if (parts.size() != header.size())
      throw std::runtime_error("covariate csv: wrong field count at line " +
                               std::to_string(line_no));
    Eigen::VectorXd v(static_cast<Eigen::Index>(names.size()));
    for (std::size_t c = 1; c < parts.size(); ++c)
      v[static_cast<Eigen::Index>(c - 1)] =
          csv::parse_double(parts[c], "covariate at line " + std::to_string(line_no));
    if (!rows.emplace(parts[0], std::move(v)).second)
      throw std::runtime_error("covariate csv: duplicate id '" + parts[0] + "' at line " +
                               std::to_string(line_no));
  }
  return {std::move(names), std::move(rows)};
}

}  // namespace

IngestResult load_and_validate(const IngestPaths& paths, const IngestOptions& options) {
  BinTable bins = options.bins.bins.empty() ? BinTable::standard() : options.bins;
  bins.validate();

  IngestResult out;
  auto rows = read_observation_csv(paths.observations);
  out.report.rows_in = static_cast<long>(rows.size());
  rows = harmonize_responses(rows, out.report);

  // Descriptors first: chemicals without a descriptor row cannot enter the
  // model, so their responses are dropped (and reported) up front.
  std::vector<std::string> w_names;
  std::map<std::string, Eigen::VectorXd> w_rows;
  if (!paths.covariates_w.empty())
    std::tie(w_names, w_rows) = read_covariate_csv(paths.covariates_w, "chemical_id");
  std::vector<std::string> z_names;
  std::map<std::string, Eigen::VectorXd> z_rows;
  if (!paths.covariates_z.empty())
    std::tie(z_names, z_rows) = read_covariate_csv(paths.covariates_z, "gene_id");

  struct Keyed {
    std::string chem, gene;
    double label;
    int replicate;
    double dose_um;
    double response;
    long line;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(rows.size());
  for (const auto& r : rows) {
    if (!std::isfinite(r.response)) {
      out.report.add_drop("non-finite response", r.line);
      continue;
    }
    if (r.replicate < 1) {
      out.report.add_drop("replicate index < 1", r.line);
      continue;
    }
    if (!w_rows.empty() && w_rows.find(r.chem_id) == w_rows.end()) {
      out.report.add_drop("chemical missing from descriptor table", r.line);
      continue;
    }
    const auto label = bins.discretize(r.dose_um);
    if (!label) {
      out.report.add_drop("dose outside the bin table range", r.line);
      continue;
    }
    keyed.push_back({r.chem_id, r.gene_id, *label, r.replicate, r.dose_um, r.response, r.line});
  }

  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.chem, a.gene, a.label, a.replicate, a.line) <
           std::tie(b.chem, b.gene, b.label, b.replicate, b.line);
  });
  // Same key from the same raw dose is an unrecoverable duplicate; the same
  // key from a different raw dose means replicate numbering is inconsistent
  // with the bin resolution, so the later row is dropped.
  std::vector<Keyed> unique_rows;
  for (const Keyed& cur : keyed) {
    if (!unique_rows.empty()) {
      const Keyed& prev = unique_rows.back();
      if (prev.chem == cur.chem && prev.gene == cur.gene && prev.label == cur.label &&
          prev.replicate == cur.replicate) {
        if (prev.dose_um == cur.dose_um)
          throw std::runtime_error(
              "duplicate observation row (chemical " + cur.chem + ", gene " + cur.gene +
              ", dose " + csv::format(cur.dose_um) + ", replicate " +
              std::to_string(cur.replicate) + ") at line " + std::to_string(cur.line));
        out.report.add_drop("replicate numbering inconsistent within dose bin", cur.line);
        continue;
      }
    }
    unique_rows.push_back(cur);
  }
  out.report.rows_kept = static_cast<long>(unique_rows.size());
  if (unique_rows.empty()) throw std::runtime_error("ingest: no usable observation rows");

  std::set<std::string> chem_set, gene_set;
  std::set<double> label_set;
  for (const auto& r : unique_rows) {
    chem_set.insert(r.chem);
    gene_set.insert(r.gene);
    label_set.insert(r.label);
  }
  std::vector<std::string> chem_ids(chem_set.begin(), chem_set.end());
  std::vector<std::string> gene_ids(gene_set.begin(), gene_set.end());
  std::map<std::string, int> chem_index, gene_index;
  for (std::size_t i = 0; i < chem_ids.size(); ++i) chem_index[chem_ids[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < gene_ids.size(); ++j) gene_index[gene_ids[j]] = static_cast<int>(j);

  ObservationSet data;
  data.n_chems = static_cast<int>(chem_ids.size());
  data.n_genes = static_cast<int>(gene_ids.size());
  data.chem_ids = chem_ids;
  data.gene_ids = gene_ids;
  data.grid.coords.assign(label_set.begin(), label_set.end());
  std::map<double, int> dose_index;
  for (int d = 0; d < data.grid.size(); ++d) dose_index[data.grid.coords[d]] = d;

  ObservationCell cell;
  bool open = false;
  auto flush = [&]() {
    if (open) data.cells.push_back(cell);
    open = false;
  };
  for (const auto& r : unique_rows) {
    const int i = chem_index[r.chem], j = gene_index[r.gene], d = dose_index[r.label];
    if (!open || cell.chem != i || cell.gene != j || cell.dose != d) {
      flush();
      cell = ObservationCell{i, j, d, {}};
      open = true;
    }
    cell.responses.push_back(r.response);
  }
  flush();
  data.finalize();
  out.data = std::move(data);

  if (!w_rows.empty()) {
    Eigen::MatrixXd w(out.data.n_chems, static_cast<Eigen::Index>(w_names.size()));
    for (int i = 0; i < out.data.n_chems; ++i)
      w.row(i) = w_rows.at(out.data.chem_ids[i]).transpose();
    if (options.pca_components > 0) {
      PcaResult pca = pca_reduce(w, options.pca_components);
      // Standardize scores so descriptor columns are on a common scale.
      for (Eigen::Index c = 0; c < pca.scores.cols(); ++c) {
        const double mean = pca.scores.col(c).mean();
        pca.scores.col(c).array() -= mean;
        const double sd = std::sqrt(pca.scores.col(c).squaredNorm() /
                                    static_cast<double>(pca.scores.rows() - 1));
        if (sd > 0.0) pca.scores.col(c) /= sd;
      }
      out.covariates.w = pca.scores;
      out.covariates.w_names.clear();
      for (int c = 0; c < options.pca_components; ++c)
        out.covariates.w_names.push_back("pc" + std::to_string(c + 1));
      out.pca_explained = pca.explained;
    } else {
      out.covariates.w = std::move(w);
      out.covariates.w_names = w_names;
    }
  }
  if (!z_rows.empty()) {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(out.data.n_genes,
                                              static_cast<Eigen::Index>(z_names.size()));
    for (int j = 0; j < out.data.n_genes; ++j) {
      auto it = z_rows.find(out.data.gene_ids[j]);
      if (it != z_rows.end()) z.row(j) = it->second.transpose();
    }
    out.covariates.z = std::move(z);
    out.covariates.z_names = z_names;
  }
  out.covariates.validate(out.data.n_chems, out.data.n_genes);
  return out;
}

void write_observation_csv(const ObservationSet& data, const BinTable& bins,
                           const std::string& path) {
  auto f = csv::open_out(path);
  f << "chemical_id,gene_id,dose_um,replicate,response\n";
  for (const auto& c : data.cells) {
    const std::string chem =
        data.chem_ids.empty() ? "chem" + std::to_string(c.chem) : data.chem_ids[c.chem];
    const std::string gene =
        data.gene_ids.empty() ? "gene" + std::to_string(c.gene) : data.gene_ids[c.gene];
    const double um = bins.representative(data.grid.coords[c.dose]);
    for (std::size_t r = 0; r < c.responses.size(); ++r)
      f << chem << ',' << gene << ',' << csv::format(um) << ',' << (r + 1) << ','
        << csv::format(c.responses[r]) << '\n';
  }
}

void write_covariates_w_csv(const CovariateSet& cov, const std::vector<std::string>& chem_ids,
                            const std::string& path) {
  auto f = csv::open_out(path);
  f << "chemical_id";
  for (Eigen::Index c = 0; c < cov.w.cols(); ++c)
    f << ',' << (c < static_cast<Eigen::Index>(cov.w_names.size()) ? cov.w_names[c]
                                                                   : "w" + std::to_string(c + 1));
  f << '\n';
  for (Eigen::Index i = 0; i < cov.w.rows(); ++i) {
    f << chem_ids[i];
    for (Eigen::Index c = 0; c < cov.w.cols(); ++c) f << ',' << csv::format(cov.w(i, c));
    f << '\n';
  }
}

void write_covariates_z_csv(const CovariateSet& cov, const std::vector<std::string>& gene_ids,
                            const std::string& path) {
  auto f = csv::open_out(path);
  f << "gene_id";
  for (Eigen::Index c = 0; c < cov.z.cols(); ++c)
    f << ',' << (c < static_cast<Eigen::Index>(cov.z_names.size()) ? cov.z_names[c]
                                                                   : "z" + std::to_string(c + 1));
  f << '\n';
  for (Eigen::Index j = 0; j < cov.z.rows(); ++j) {
    f << gene_ids[j];
    for (Eigen::Index c = 0; c < cov.z.cols(); ++c)
      f << ',' << static_cast<int>(cov.z(j, c));
    f << '\n';
  }
}

}  // namespace dart
