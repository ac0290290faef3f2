#include "ttc/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace ttc {

namespace {

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

void check_obs_dims(const TTTensor& t, const SparseObservations& obs) {
  if (t.dims() != obs.dims()) throw ShapeError("observations and tensor have different dims");
}

bool all_finite(const TTTensor& t) {
  for (const Core& c : t.cores()) {
    for (double v : c.data()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double sum_squares(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

struct ErrorMeter {
  const Truth& truth;
  double truth_norm = 0.0;

  explicit ErrorMeter(const Truth& t) : truth(t) {
    if (const auto* tt = std::get_if<TTTensor>(&truth)) {
      truth_norm = tt_norm(*tt);
    } else if (const auto* d = std::get_if<DenseTensor>(&truth)) {
      truth_norm = fro_norm(*d);
    }
  }

  std::optional<double> operator()(const TTTensor& x) const {
    double dist = 0.0;
    if (const auto* tt = std::get_if<TTTensor>(&truth)) {
      dist = tt_distance(x, *tt);
    } else if (const auto* d = std::get_if<DenseTensor>(&truth)) {
      DenseTensor diff = to_dense(x);
      diff.vec() -= d->vec();
      dist = fro_norm(diff);
    } else {
      return std::nullopt;
    }
    return truth_norm > 0.0 ? dist / truth_norm : dist;
  }
};

void check_truth_dims(const Truth& truth, const std::vector<Index>& dims) {
  if (const auto* tt = std::get_if<TTTensor>(&truth)) {
    if (tt->dims() != dims) throw ShapeError("truth and observations have different dims");
  } else if (const auto* d = std::get_if<DenseTensor>(&truth)) {
    if (d->dims() != dims) throw ShapeError("truth and observations have different dims");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

StepRule StepRule::parse(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw DomainError("bad step value '" + s + "'");
    return v;
  };
  if (text == "adaptive") return adaptive();
  if (text == "theory") return theory();
  if (text.rfind("theory=", 0) == 0) return theory(number(text.substr(7)));
  if (text == "constant") return constant(1.0);
  if (text.rfind("constant=", 0) == 0) return constant(number(text.substr(9)));
  return constant(number(text));
}

std::string StepRule::to_string() const {
  switch (kind) {
    case Kind::kAdaptive:
      return "adaptive";
    case Kind::kTheory:
      return "theory=" + format_double(value);
    case Kind::kConstant:
      break;
  }
  return "constant=" + format_double(value);
}

void SolverConfig::validate(std::span<const Index> dims) const {
  if (max_iters < 0) throw DomainError("max_iters must be non-negative");
  if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
  if (!(iterate_change_tol > 0.0)) throw DomainError("iterate_change_tol must be positive");
  if (log_every < 1) throw DomainError("log_every must be at least 1");
  if (divergence_window < 1) throw DomainError("divergence_window must be at least 1");
  if (step.kind != StepRule::Kind::kAdaptive && !(step.value > 0.0 && std::isfinite(step.value))) {
    throw DomainError("step size must be positive");
  }
  if (trim_nu) {
    if (!(*trim_nu > 0.0)) throw DomainError("trimming parameter nu must be positive");
    if (product(dims) > kDenseRetractionLimit) {
      throw DomainError("trimming is only supported up to " + std::to_string(kDenseRetractionLimit) +
                        " entries");
    }
  }
  if (epsilon.rule != EpsilonRule::kVeeSquared && !(epsilon.value > 0.0)) {
    throw DomainError("epsilon value must be positive");
  }
}

// ---------------------------------------------------------------------------
// Iteration log

void IterationLog::write_csv(std::ostream& out) const {
  out << kHeader << '\n';
  for (const auto& r : records_) {
    out << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.residual_norm) << ',';
    if (r.rel_error) out << format_double(*r.rel_error);
    out << ',' << format_double(r.step) << ',' << format_double(r.elapsed_ms) << '\n';
  }
}

void IterationLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_csv(out);
  if (!out) throw IoError("write to " + path + " failed");
}

IterationLog IterationLog::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw IoError("iteration log: missing or bad header");
  IterationLog log;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw IoError("iteration log line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      IterationRecord r;
      r.iter = std::stoi(f[0]);
      r.objective = std::stod(f[1]);
      r.residual_norm = std::stod(f[2]);
      if (!f[3].empty()) r.rel_error = std::stod(f[3]);
      r.step = std::stod(f[4]);
      r.elapsed_ms = std::stod(f[5]);
      log.push(r);
    } catch (const std::logic_error&) {
      throw IoError("iteration log line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return log;
}

IterationLog IterationLog::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_csv(in);
}

bool IterationLog::same_trajectory(const IterationLog& other) const {
  if (records_.size() != other.records_.size()) return false;
  for (std::size_t k = 0; k < records_.size(); ++k) {
    const auto& a = records_[k];
    const auto& b = other.records_[k];
    if (a.iter != b.iter || a.objective != b.objective || a.residual_norm != b.residual_norm ||
        a.rel_error != b.rel_error || a.step != b.step) {
      return false;
    }
  }
  return true;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kStalled:
      return "stalled";
    case SolveStatus::kZeroGradient:
      return "zero_gradient";
    case SolveStatus::kMaxIterations:
      return "max_iterations";
    case SolveStatus::kDiverged:
      return "diverged";
    case SolveStatus::kNonFinite:
      return "non_finite";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Building blocks

SparseObservations residual(const TTTensor& t, const SparseObservations& obs) {
  check_obs_dims(t, obs);
  std::vector<double> values(as_size(obs.size()));
  for (Index e = 0; e < obs.size(); ++e) values[as_size(e)] = t.value_at(obs.index(e)) - obs.value(e);
  return obs.with_values(std::move(values));
}

double objective(const SparseObservations& residual) { return 0.5 * residual.squared_norm(); }

TTTensor spectral_init(const SparseObservations& obs, const RankVector& r,
                       std::vector<std::string>* warnings) {
  r.check_feasible(obs.dims());
  if (obs.empty()) {
    if (warnings != nullptr) warnings->push_back("no observations: initial point is the zero tensor");
    return TTTensor::zeros(obs.dims(), r);
  }
  DenseTensor x = obs.densify();
  x.vec() /= obs.sampling_fraction();
  return tt_svd(x, r);
}

std::optional<double> rgd_adaptive_step(const TangentVector& g_proj, const SparseObservations& obs) {
  const double num = std::pow(tangent_weighted_norm(g_proj), 2);
  const double den = sum_squares(tangent_values_at(g_proj, obs));
  if (!(num > 0.0) || !(den > 0.0)) return std::nullopt;
  return num / den;
}

std::optional<double> prgd_adaptive_step(const TangentVector& v, const ModeWeights& w,
                                         const SparseObservations& obs) {
  if (!(v.space().weights() == w)) {
    throw ContractViolation("adaptive step: tangent vector was built under different weights");
  }
  return rgd_adaptive_step(v, obs);
}

double theory_step(const ModeWeights& w, double p, double multiplier) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("sampling fraction must lie in (0, 1]");
  return multiplier * std::sqrt(w.epsilon()) / p;
}

double scheduled_step(const StepRule& rule, const ModeWeights& w, double p) {
  if (rule.kind == StepRule::Kind::kAdaptive) {
    throw DomainError("the adaptive step depends on the search direction");
  }
  if (rule.kind == StepRule::Kind::kTheory) return theory_step(w, p, rule.value);
  return rule.value * std::sqrt(w.epsilon());
}

DenseTensor trim(const DenseTensor& x, double zeta) {
  DenseTensor out = x;
  for (double& v : out.values()) {
    if (std::abs(v) >= zeta) v = std::copysign(zeta, v);
  }
  return out;
}

TTTensor trim(const TTTensor& x, double zeta) {
  const auto dims = x.dims();
  std::vector<Index> ranks;
  for (std::size_t i = 1; i < dims.size(); ++i) {
    ranks.push_back(std::min(product(dims, 0, i), product(dims, i, dims.size())));
  }
  return tt_svd(trim(to_dense(x, kDenseRetractionLimit), zeta), RankVector(std::move(ranks)));
}

double trim_threshold(const TTTensor& candidate, double nu) {
  const double n = static_cast<double>(candidate.full_size());
  return 10.0 * tt_norm(candidate) / (9.0 * std::sqrt(n)) * nu;
}

// ---------------------------------------------------------------------------
// Solver loop

SolveResult solve(const SparseObservations& obs, const RankVector& r, const SolverConfig& cfg,
                  const Truth& truth) {
  std::vector<std::string> warnings;
  if (obs.empty()) throw DomainError("solve needs at least one observation");
  TTTensor init = spectral_init(obs, r, &warnings);
  SolveResult result = solve_from(init, obs, r, cfg, truth);
  result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
  return result;
}

SolveResult solve_from(const TTTensor& init, const SparseObservations& obs, const RankVector& r,
                       const SolverConfig& cfg, const Truth& truth) {
  const auto dims = obs.dims();
  cfg.validate(dims);
  r.check_feasible(dims);
  if (obs.empty()) throw DomainError("solve needs at least one observation");
  if (init.dims() != dims) throw ShapeError("initial point and observations have different dims");
  check_truth_dims(truth, dims);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double, std::milli>(Clock::now() - start).count(); };

  const ErrorMeter meter(truth);
  const double p = obs.sampling_fraction();
  const bool adaptive = cfg.step.kind == StepRule::Kind::kAdaptive;

  SolveResult result;
  TTTensor t = init;
  SparseObservations g = residual(t, obs);
  double f = objective(g);
  const double f0 = f;
  std::optional<double> err = meter(t);
  result.log.push({0, f, std::sqrt(2.0 * f), err, 0.0, elapsed()});

  if (!std::isfinite(f) || !all_finite(t)) {
    result.status = SolveStatus::kNonFinite;
    result.message = "initial point is not finite";
    result.tensor = std::move(t);
    return result;
  }
  if (err && *err <= cfg.rel_tol) {
    result.status = SolveStatus::kConverged;
    result.tensor = std::move(t);
    return result;
  }

  int increases = 0;
  int error_increases = 0;
  double last_alpha = 0.0;
  std::optional<double> prev_err = err;
  result.status = SolveStatus::kMaxIterations;
  for (int l = 0; l < cfg.max_iters; ++l) {
    if (f == 0.0) {
      result.status = SolveStatus::kZeroGradient;
      break;
    }
    const ModeWeights w =
        cfg.algorithm == Algorithm::kPrgd ? build_weights(g, cfg.epsilon) : ModeWeights::identity(dims);
    auto space = std::make_shared<const TangentSpace>(t, w);
    const SparseObservations direction =
        cfg.algorithm == Algorithm::kPrgd ? apply_weight_power(g, w, -1.0) : g;
    const TangentVector v = project_tangent(space, direction);

    double alpha = 0.0;
    if (adaptive) {
      const auto a = prgd_adaptive_step(v, w, obs);
      if (!a) {
        result.status = SolveStatus::kZeroGradient;
        break;
      }
      alpha = *a;
    } else {
      alpha = scheduled_step(cfg.step, w, p);
    }

    TTTensor candidate = move_along(v, -alpha);
    TTTensor next;
    if (cfg.trim_nu) {
      const double zeta = trim_threshold(candidate, *cfg.trim_nu);
      next = tt_svd(trim(to_dense(candidate, kDenseRetractionLimit), zeta), r);
    } else {
      next = retract(candidate, r, cfg.retraction);
    }
    result.iterations = l + 1;
    last_alpha = alpha;

    if (!all_finite(next)) {
      result.status = SolveStatus::kNonFinite;
      result.message = "non-finite iterate at iteration " + std::to_string(l + 1);
      result.log.push({l + 1, std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN(), std::nullopt, alpha, elapsed()});
      break;
    }
    const double change = tt_distance(next, t);
    const double scale = std::max(1.0, tt_norm(t));
    t = std::move(next);
    g = residual(t, obs);
    const double f_new = objective(g);
    err = meter(t);

    const bool last = l + 1 == cfg.max_iters;
    IterationRecord rec{l + 1, f_new, std::sqrt(2.0 * f_new), err, alpha, elapsed()};

    SolveStatus stop = SolveStatus::kMaxIterations;
    bool stopping = last;
    if (!std::isfinite(f_new)) {
      stop = SolveStatus::kNonFinite;
      result.message = "non-finite objective at iteration " + std::to_string(l + 1);
      stopping = true;
    } else if (f_new > 1e20 * f0) {
      stop = SolveStatus::kDiverged;
      result.message = "objective exceeded 1e20 times its initial value at iteration " + std::to_string(l + 1);
      stopping = true;
    } else if (adaptive && (increases = f_new > f ? increases + 1 : 0) >= cfg.divergence_window) {
      stop = SolveStatus::kDiverged;
      result.message = "objective increased for " + std::to_string(increases) + " consecutive iterations";
      stopping = true;
    } else if (err && *err <= cfg.rel_tol) {
      stop = SolveStatus::kConverged;
      stopping = true;
    } else if (change <= cfg.iterate_change_tol * scale) {
      stop = SolveStatus::kStalled;
      stopping = true;
    }

    if (stopping || (l + 1) % cfg.log_every == 0) result.log.push(rec);
    if (err && prev_err && l + 1 > 10 && *err > *prev_err) ++error_increases;
    prev_err = err;
    f = f_new;
    if (stopping) {
      result.status = stop;
      break;
    }
  }
  if (result.log.back().iter != result.iterations) {
    result.log.push({result.iterations, f, std::sqrt(2.0 * f), err, last_alpha, elapsed()});
  }
  if (error_increases > 0) {
    result.warnings.push_back("relative error increased in " + std::to_string(error_increases) +
                              " iteration(s) after iteration 10");
  }
  result.tensor = std::move(t);
  return result;
}

}  // namespace ttc
