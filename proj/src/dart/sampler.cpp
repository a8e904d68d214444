#include "dart/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace dart {

int PosteriorDraws::n_divergent() const {
  int n = 0;
  for (auto d : divergent) n += d != 0;
  return n;
}

double PosteriorDraws::divergent_fraction() const {
  return divergent.empty() ? 0.0 : static_cast<double>(n_divergent()) / divergent.size();
}

namespace {

constexpr double kMaxEnergyDrop = 1000.0;

struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd grad;
  double lp = 0.0;
};

// Nesterov dual averaging on log step size (gamma/t0/kappa as in the
// original no-U-turn scheme).
class DualAverage {
 public:
  DualAverage(double eps0, double target)
      : mu_(std::log(10.0 * eps0)), target_(target), log_eps_(std::log(eps0)),
        log_eps_bar_(std::log(eps0)) {}

  void update(double accept) {
    ++count_;
    const double eta = 1.0 / (count_ + t0_);
    h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept);
    log_eps_ = mu_ - std::sqrt(static_cast<double>(count_)) / gamma_ * h_bar_;
    const double x = std::pow(static_cast<double>(count_), -kappa_);
    log_eps_bar_ = x * log_eps_ + (1.0 - x) * log_eps_bar_;
  }

  double eps() const { return std::exp(log_eps_); }
  double eps_bar() const { return std::exp(log_eps_bar_); }

 private:
  double mu_;
  double target_;
  double log_eps_;
  double log_eps_bar_;
  double h_bar_ = 0.0;
  long count_ = 0;
  static constexpr double gamma_ = 0.05;
  static constexpr double t0_ = 10.0;
  static constexpr double kappa_ = 0.75;
};

class WelfordVar {
 public:
  explicit WelfordVar(int dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}
  void add(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d.cwiseProduct(x - mean_);
  }
  long count() const { return n_; }
  // Regularized sample variance, shrunk toward 1e-3 for small counts.
  Eigen::VectorXd regularized_variance() const {
    const double n = static_cast<double>(n_);
    Eigen::VectorXd v = (n / (n + 5.0) / std::max(1.0, n - 1.0)) * m2_;
    v.array() += 1e-3 * (5.0 / (n + 5.0));
    return v;
  }
  void reset() {
    n_ = 0;
    mean_.setZero();
    m2_.setZero();
  }

 private:
  long n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

class NutsChain {
 public:
  NutsChain(const LogDensityModel& model, const SamplerConfig& cfg, std::uint64_t seed)
      : model_(model), cfg_(cfg), rng_(seed), inv_mass_(Eigen::VectorXd::Ones(model.dim())) {}

  void run(PosteriorDraws& out, int chain_label, std::uint64_t seed) {
    const int dim = model_.dim();
    PhasePoint cur;
    cur.q = init_position();
    cur.grad.resize(dim);
    cur.lp = model_.log_density_gradient(cur.q, &cur.grad);

    double eps = find_initial_step(cur);
    DualAverage da(eps, cfg_.target_accept);

    // Warmup: leading step-size buffer, doubling variance windows, trailing
    // step-size buffer.
    int init_buf = 0, term_buf = 0;
    std::vector<int> window_ends;
    plan_windows(cfg_.warmup, &init_buf, &term_buf, &window_ends);
    WelfordVar var(dim);
    std::size_t next_window = 0;

    for (int s = 0; s < cfg_.warmup; ++s) {
      const Transition t = transition(cur, eps);
      cur = t.next;
      da.update(t.accept);
      eps = da.eps();
      const bool in_window = s >= init_buf && s < cfg_.warmup - term_buf;
      if (in_window) var.add(cur.q);
      if (next_window < window_ends.size() && s + 1 == window_ends[next_window]) {
        if (var.count() >= 2) {
          inv_mass_ = var.regularized_variance();
          var.reset();
          eps = find_initial_step(cur);
          da = DualAverage(eps, cfg_.target_accept);
        }
        ++next_window;
      }
    }
    if (cfg_.warmup > 0) eps = da.eps_bar();

    ChainStats stats;
    stats.seed = seed;
    stats.step_size = eps;
    stats.inv_mass = inv_mass_;
    double accept_sum = 0.0;
    for (int s = 0; s < cfg_.samples; ++s) {
      const Transition t = transition(cur, eps);
      cur = t.next;
      accept_sum += t.accept;
      stats.divergences += t.divergent;
      stats.max_depth_hits += t.hit_max_depth;
      if (s % cfg_.thin == 0) {
        out.draws.push_back(cur.q);
        out.log_post.push_back(cur.lp);
        out.divergent.push_back(t.divergent ? 1 : 0);
        out.chain.push_back(chain_label);
      }
    }
    stats.mean_accept = cfg_.samples > 0 ? accept_sum / cfg_.samples : 0.0;
    out.chain_stats.push_back(stats);
  }

 private:
  struct Transition {
    PhasePoint next;
    double accept = 0.0;
    bool divergent = false;
    bool hit_max_depth = false;
  };

  struct Subtree {
    PhasePoint left;    // backward endpoint
    PhasePoint right;   // forward endpoint
    PhasePoint propose;
    double log_weight = -std::numeric_limits<double>::infinity();
    double alpha_sum = 0.0;
    long n_alpha = 0;
    bool diverged = false;
    bool turned = false;
  };

  Eigen::VectorXd init_position() {
    const int dim = model_.dim();
    for (int attempt = 0; attempt < 100; ++attempt) {
      Eigen::VectorXd q(dim);
      for (int i = 0; i < dim; ++i) q[i] = rng_.uniform(-cfg_.init_scale, cfg_.init_scale);
      Eigen::VectorXd grad(dim);
      const double lp = model_.log_density_gradient(q, &grad);
      if (std::isfinite(lp) && grad.allFinite()) return q;
    }
    throw std::runtime_error("run_chain: could not find a finite starting point");
  }

  double kinetic(const Eigen::VectorXd& p) const {
    return 0.5 * p.cwiseProduct(p).dot(inv_mass_);
  }

  Eigen::VectorXd sample_momentum() {
    Eigen::VectorXd p(inv_mass_.size());
    for (Eigen::Index i = 0; i < p.size(); ++i)
      p[i] = rng_.normal() / std::sqrt(inv_mass_[i]);
    return p;
  }

  void step(PhasePoint& z, double eps) const {
    z.p += 0.5 * eps * z.grad;
    z.q += eps * inv_mass_.cwiseProduct(z.p);
    z.lp = model_.log_density_gradient(z.q, &z.grad);
    z.p += 0.5 * eps * z.grad;
  }

  bool uturn(const PhasePoint& minus, const PhasePoint& plus) const {
    const Eigen::VectorXd dq = plus.q - minus.q;
    return dq.dot(inv_mass_.cwiseProduct(minus.p)) < 0.0 ||
           dq.dot(inv_mass_.cwiseProduct(plus.p)) < 0.0;
  }

  // One step from the current position; doubles until a reasonable
  // acceptance statistic brackets 0.5 (classic heuristic).
  double find_initial_step(const PhasePoint& from) {
    double eps = 1.0;
    PhasePoint z = from;
    z.p = sample_momentum();
    const double h0 = z.lp - kinetic(z.p);
    PhasePoint trial = z;
    step(trial, eps);
    double log_a = std::isfinite(trial.lp) ? trial.lp - kinetic(trial.p) - h0
                                           : -std::numeric_limits<double>::infinity();
    const double dir = log_a > std::log(0.5) ? 1.0 : -1.0;
    for (int iter = 0; iter < 100; ++iter) {
      if (dir * log_a <= -dir * std::log(2.0)) break;
      eps *= std::pow(2.0, dir);
      if (eps > 1e7 || eps < 1e-17) break;
      trial = z;
      step(trial, eps);
      log_a = std::isfinite(trial.lp) ? trial.lp - kinetic(trial.p) - h0
                                      : -std::numeric_limits<double>::infinity();
    }
    return eps;
  }

  Subtree build_tree(int depth, const PhasePoint& from, double dir, double eps, double h0) {
    if (depth == 0) {
      Subtree leaf;
      PhasePoint z = from;
      step(z, dir * eps);
      double h = std::isfinite(z.lp) ? z.lp - kinetic(z.p)
                                     : -std::numeric_limits<double>::infinity();
      if (!std::isfinite(h)) h = -std::numeric_limits<double>::infinity();
      leaf.diverged = h0 - h > kMaxEnergyDrop || h == -std::numeric_limits<double>::infinity();
      leaf.log_weight = h - h0;
      leaf.alpha_sum = std::isfinite(h) ? std::min(1.0, std::exp(h - h0)) : 0.0;
      leaf.n_alpha = 1;
      leaf.left = z;
      leaf.right = z;
      leaf.propose = std::move(z);
      return leaf;
    }
    Subtree inner = build_tree(depth - 1, from, dir, eps, h0);
    if (inner.diverged || inner.turned) return inner;
    const PhasePoint& edge = dir > 0 ? inner.right : inner.left;
    Subtree outer = build_tree(depth - 1, edge, dir, eps, h0);
    Subtree merged;
    merged.left = dir > 0 ? inner.left : outer.left;
    merged.right = dir > 0 ? outer.right : inner.right;
    merged.log_weight = log_sum_exp(inner.log_weight, outer.log_weight);
    merged.alpha_sum = inner.alpha_sum + outer.alpha_sum;
    merged.n_alpha = inner.n_alpha + outer.n_alpha;
    merged.diverged = outer.diverged;
    merged.turned = outer.turned || uturn(merged.left, merged.right);
    // Multinomial choice between the two halves' proposals.
    const double p_outer = std::exp(outer.log_weight - merged.log_weight);
    merged.propose = rng_.uniform() < p_outer ? std::move(outer.propose)
                                              : std::move(inner.propose);
    return merged;
  }

  Transition transition(const PhasePoint& from, double eps) {
    PhasePoint z = from;
    z.p = sample_momentum();
    const double h0 = z.lp - kinetic(z.p);

    Transition t;
    t.next = from;
    PhasePoint left = z, right = z;
    double log_weight = 0.0;  // weight of the initial point relative to h0
    double alpha_sum = 0.0;
    long n_alpha = 0;

    for (int depth = 0; depth < cfg_.max_tree_depth; ++depth) {
      const double dir = rng_.bernoulli(0.5) ? 1.0 : -1.0;
      Subtree sub = build_tree(depth, dir > 0 ? right : left, dir, eps, h0);
      alpha_sum += sub.alpha_sum;
      n_alpha += sub.n_alpha;
      if (sub.diverged) {
        t.divergent = true;
        break;
      }
      if (sub.turned) break;
      // Biased progressive sampling: prefer the fresh half of the trajectory.
      if (sub.log_weight > log_weight || rng_.uniform() < std::exp(sub.log_weight - log_weight)) {
        t.next = sub.propose;
      }
      log_weight = log_sum_exp(log_weight, sub.log_weight);
      if (dir > 0)
        right = std::move(sub.right);
      else
        left = std::move(sub.left);
      if (uturn(left, right)) break;
      if (depth == cfg_.max_tree_depth - 1) t.hit_max_depth = true;
    }
    t.accept = n_alpha > 0 ? alpha_sum / static_cast<double>(n_alpha) : 0.0;
    return t;
  }

  // Stan-style schedule: 15% leading buffer, doubling windows from 25, 10%
  // trailing buffer; proportional for short warmups.
  static void plan_windows(int warmup, int* init_buf, int* term_buf,
                           std::vector<int>* window_ends) {
    window_ends->clear();
    if (warmup <= 0) {
      *init_buf = *term_buf = 0;
      return;
    }
    int init = 75, term = 50, base = 25;
    if (warmup < init + term + base) {
      init = static_cast<int>(0.15 * warmup);
      term = static_cast<int>(0.10 * warmup);
      base = warmup - init - term;
      if (base <= 0) {
        *init_buf = warmup;
        *term_buf = 0;
        return;
      }
    }
    *init_buf = init;
    *term_buf = term;
    const int last = warmup - term;
    int start = init, width = base;
    while (start < last) {
      int end = start + width;
      // Absorb a too-small final window into this one.
      if (end + 2 * width > last) end = last;
      window_ends->push_back(std::min(end, last));
      start = end;
      width *= 2;
    }
  }

  const LogDensityModel& model_;
  const SamplerConfig& cfg_;
  Rng rng_;
  Eigen::VectorXd inv_mass_;
};

void validate_config(const SamplerConfig& cfg) {
  if (cfg.chains < 1) throw std::invalid_argument("sampler: chains must be >= 1");
  if (cfg.warmup < 0 || cfg.samples < 0)
    throw std::invalid_argument("sampler: iteration counts must be >= 0");
  if (cfg.thin < 1) throw std::invalid_argument("sampler: thin must be >= 1");
  if (!(cfg.target_accept > 0.0 && cfg.target_accept < 1.0))
    throw std::invalid_argument("sampler: target_accept must be in (0, 1)");
  if (cfg.max_tree_depth < 1 || cfg.max_tree_depth > 20)
    throw std::invalid_argument("sampler: max_tree_depth must be in [1, 20]");
  if (!(cfg.init_scale > 0.0))
    throw std::invalid_argument("sampler: init_scale must be > 0");
}

}  // namespace

PosteriorDraws run_chain(const LogDensityModel& model, const SamplerConfig& config) {
  validate_config(config);
  PosteriorDraws out;
  out.dim = model.dim();
  const std::uint64_t seed = split_seed(config.seed, 0);
  NutsChain chain(model, config, seed);
  chain.run(out, 0, seed);
  return out;
}

PosteriorDraws run_chains(const LogDensityModel& model, const SamplerConfig& config) {
  validate_config(config);
  std::vector<PosteriorDraws> per_chain(config.chains);
  const int workers = std::max(1, std::min(config.threads, config.chains));
  auto run_one = [&](int c) {
    per_chain[c].dim = model.dim();
    const std::uint64_t seed = split_seed(config.seed, static_cast<std::uint64_t>(c));
    NutsChain chain(model, config, seed);
    chain.run(per_chain[c], c, seed);
  };
  if (workers <= 1) {
    for (int c = 0; c < config.chains; ++c) run_one(c);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (int c = w; c < config.chains; c += workers) run_one(c);
      });
    for (auto& t : pool) t.join();
  }
  PosteriorDraws merged;
  merged.dim = model.dim();
  for (auto& pc : per_chain) {
    merged.draws.insert(merged.draws.end(), std::make_move_iterator(pc.draws.begin()),
                        std::make_move_iterator(pc.draws.end()));
    merged.log_post.insert(merged.log_post.end(), pc.log_post.begin(), pc.log_post.end());
    merged.divergent.insert(merged.divergent.end(), pc.divergent.begin(), pc.divergent.end());
    merged.chain.insert(merged.chain.end(), pc.chain.begin(), pc.chain.end());
    merged.chain_stats.insert(merged.chain_stats.end(), pc.chain_stats.begin(),
                              pc.chain_stats.end());
  }
  return merged;
}

}  // namespace dart
