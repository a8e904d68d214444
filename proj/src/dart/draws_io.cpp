#include "dart/draws_io.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "dart/csv.hpp"

namespace dart {

namespace {

constexpr const char* kMagic = "# dart-draws v1";

std::map<std::string, std::string> parse_kv_line(const std::string& body) {
  std::map<std::string, std::string> out;
  std::istringstream in(body);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("draws file: malformed header token '" + token + "'");
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

}  // namespace

void write_draws(const std::string& path, const PosteriorDraws& draws,
                 const ParamLayout& layout, const DoseGrid& grid) {
  if (draws.dim != layout.size)
    throw std::invalid_argument("write_draws: draws/layout dimension mismatch");
  auto out = csv::open_out(path);
  out << kMagic << '\n';
  out << "# layout kind=" << (layout.kind == ModelKind::kDart ? "dart" : "dart-nc")
      << " chems=" << layout.n_chems << " genes=" << layout.n_genes
      << " doses=" << layout.n_doses << " factors=" << layout.n_factors << " n_w=" << layout.n_w
      << " n_z=" << layout.n_z << " has_phi=" << (layout.has_phi ? 1 : 0) << '\n';
  out << "# grid";
  for (int d = 0; d < grid.size(); ++d)
    out << (d == 0 ? ' ' : ',') << csv::format(grid.coords[d]);
  out << '\n';
  for (std::size_t c = 0; c < draws.chain_stats.size(); ++c) {
    const ChainStats& st = draws.chain_stats[c];
    out << "# chain id=" << c << " seed=" << st.seed << " step_size=" << csv::format(st.step_size)
        << " mean_accept=" << csv::format(st.mean_accept) << " divergences=" << st.divergences
        << " max_depth_hits=" << st.max_depth_hits << '\n';
  }
  out << "chain,iteration,lp,divergent";
  for (int i = 0; i < draws.dim; ++i) out << ",x" << i;
  out << '\n';
  int iter = 0;
  int prev_chain = -1;
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const int chain = draws.chain[s];
    iter = chain == prev_chain ? iter + 1 : 0;
    prev_chain = chain;
    out << chain << ',' << iter << ',' << csv::format(draws.log_post[s]) << ','
        << int(draws.divergent[s]);
    const Eigen::VectorXd& x = draws.draws[s];
    for (int i = 0; i < draws.dim; ++i) out << ',' << csv::format(x[i]);
    out << '\n';
  }
}

DrawsFile read_draws(const std::string& path) {
  auto in = csv::open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw std::runtime_error("draws file: bad or missing format header in " + path);

  DrawsFile file;
  bool have_layout = false, have_grid = false;
  std::vector<ChainStats> stats;
  while (in.peek() == '#') {
    std::getline(in, line);
    std::istringstream ls(line);
    std::string hash, tag;
    ls >> hash >> tag;
    std::string body;
    std::getline(ls, body);
    if (tag == "layout") {
      const auto kv = parse_kv_line(body);
      auto need = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end())
          throw std::runtime_error(std::string("draws file: layout is missing ") + key);
        return it->second;
      };
      const std::string kind = need("kind");
      if (kind != "dart" && kind != "dart-nc")
        throw std::runtime_error("draws file: unknown model kind " + kind);
      const bool has_phi = csv::parse_long(need("has_phi"), "has_phi") != 0;
      file.layout = make_layout(kind == "dart" ? ModelKind::kDart : ModelKind::kDartNc,
                                static_cast<int>(csv::parse_long(need("chems"), "chems")),
                                static_cast<int>(csv::parse_long(need("genes"), "genes")),
                                static_cast<int>(csv::parse_long(need("doses"), "doses")),
                                static_cast<int>(csv::parse_long(need("factors"), "factors")),
                                static_cast<int>(csv::parse_long(need("n_w"), "n_w")),
                                static_cast<int>(csv::parse_long(need("n_z"), "n_z")),
                                /*unit_local_scales=*/kind == "dart" && !has_phi);
      have_layout = true;
    } else if (tag == "grid") {
      for (const auto& field : csv::split(body.substr(body.find_first_not_of(' '))))
        file.grid.coords.push_back(csv::parse_double(field, "grid coordinate"));
      file.grid.validate();
      have_grid = true;
    } else if (tag == "chain") {
      const auto kv = parse_kv_line(body);
      ChainStats st;
      if (kv.count("seed")) st.seed = std::stoull(kv.at("seed"));
      if (kv.count("step_size")) st.step_size = csv::parse_double(kv.at("step_size"), "step_size");
      if (kv.count("mean_accept"))
        st.mean_accept = csv::parse_double(kv.at("mean_accept"), "mean_accept");
      if (kv.count("divergences"))
        st.divergences = static_cast<int>(csv::parse_long(kv.at("divergences"), "divergences"));
      if (kv.count("max_depth_hits"))
        st.max_depth_hits =
            static_cast<int>(csv::parse_long(kv.at("max_depth_hits"), "max_depth_hits"));
      stats.push_back(st);
    } else {
      throw std::runtime_error("draws file: unknown header line: " + line);
    }
  }
  if (!have_layout || !have_grid)
    throw std::runtime_error("draws file: missing layout or grid header in " + path);
  if (file.layout.n_doses != file.grid.size())
    throw std::runtime_error("draws file: grid length disagrees with layout");

  if (!std::getline(in, line)) throw std::runtime_error("draws file: missing column header");
  const auto header = csv::split(line);
  if (header.size() != static_cast<std::size_t>(file.layout.size) + 4 || header[0] != "chain" ||
      header[1] != "iteration" || header[2] != "lp" || header[3] != "divergent")
    throw std::runtime_error("draws file: unexpected column header");

  PosteriorDraws& draws = file.draws;
  draws.dim = file.layout.size;
  draws.chain_stats = std::move(stats);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != static_cast<std::size_t>(draws.dim) + 4)
      throw std::runtime_error("draws file: row has wrong field count");
    draws.chain.push_back(static_cast<int>(csv::parse_long(fields[0], "chain")));
    draws.log_post.push_back(csv::parse_double(fields[2], "lp"));
    draws.divergent.push_back(csv::parse_long(fields[3], "divergent") != 0);
    Eigen::VectorXd x(draws.dim);
    for (int i = 0; i < draws.dim; ++i) x[i] = csv::parse_double(fields[4 + i], "draw value");
    draws.draws.push_back(std::move(x));
  }
  return file;
}

}  // namespace dart
