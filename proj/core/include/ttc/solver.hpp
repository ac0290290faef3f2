#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ttc/decomp.hpp"
#include "ttc/metric.hpp"
#include "ttc/observations.hpp"
#include "ttc/tangent.hpp"
#include "ttc/tensor.hpp"

namespace ttc {

enum class Algorithm { kRgd, kPrgd };

/// Step-size strategy. A constant step eta is applied as
/// alpha_l = eta * epsilon_l^{1/2}, which keeps the step invariant under the
/// overall scale of the weights; RGD has epsilon_l = 1, so alpha = eta there.
/// The theory step is multiplier * epsilon_l^{1/2} / p.
struct StepRule {
  enum class Kind { kAdaptive, kConstant, kTheory };
  Kind kind = Kind::kConstant;
  double value = 1.0;

  static StepRule adaptive() { return {Kind::kAdaptive, 0.0}; }
  static StepRule constant(double eta) { return {Kind::kConstant, eta}; }
  static StepRule theory(double multiplier = 1.001) { return {Kind::kTheory, multiplier}; }

  /// "adaptive", "theory", "theory=1.001", "constant=2" or a bare number.
  static StepRule parse(const std::string& text);
  std::string to_string() const;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::kPrgd;
  StepRule step = StepRule::constant(1.0);
  int max_iters = 500;
  double rel_tol = 1e-4;
  double iterate_change_tol = 1e-5;
  /// Spikiness parameter nu; trimming is off when empty.
  std::optional<double> trim_nu;
  EpsilonPolicy epsilon;
  std::uint64_t seed = 0;
  /// Record every k-th iteration (the first and last are always kept).
  int log_every = 1;
  RetractionPath retraction = RetractionPath::kStructured;
  /// Consecutive objective increases tolerated with the adaptive step.
  int divergence_window = 50;

  /// DomainError on non-positive tolerances, steps, nu or iteration counts,
  /// and when trimming is requested above the dense limit.
  void validate(std::span<const Index> dims) const;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double residual_norm = 0.0;
  std::optional<double> rel_error;
  /// Step that produced this iterate (0 for the initial point).
  double step = 0.0;
  double elapsed_ms = 0.0;
};

class IterationLog {
 public:
  static constexpr const char* kHeader = "iter,objective,residual_norm,rel_error,step,elapsed_ms";

  void push(IterationRecord r) { records_.push_back(r); }
  const std::vector<IterationRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  const IterationRecord& back() const { return records_.back(); }

  /// Values are written with %.17g so that they read back exactly.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
  static IterationLog read_csv(std::istream& in);
  static IterationLog read_csv(const std::string& path);

  /// Equal in every column except elapsed_ms.
  bool same_trajectory(const IterationLog& other) const;

 private:
  std::vector<IterationRecord> records_;
};

enum class SolveStatus {
  kConverged,       ///< relative error <= rel_tol
  kStalled,         ///< iterate change below tolerance
  kZeroGradient,    ///< projected gradient or its observed part vanished
  kMaxIterations,
  kDiverged,        ///< objective kept increasing or blew up
  kNonFinite,       ///< NaN or infinity encountered
};

const char* to_string(SolveStatus s);
inline bool is_failure(SolveStatus s) {
  return s == SolveStatus::kDiverged || s == SolveStatus::kNonFinite;
}

using Truth = std::variant<std::monostate, TTTensor, DenseTensor>;

struct SolveResult {
  TTTensor tensor;
  IterationLog log;
  SolveStatus status = SolveStatus::kMaxIterations;
  /// Number of updates performed.
  int iterations = 0;
  std::string message;
  std::vector<std::string> warnings;
};

/// t - obs on the observed entries (same index list as obs).
SparseObservations residual(const TTTensor& t, const SparseObservations& obs);
/// 1/2 sum of squared residuals.
double objective(const SparseObservations& residual);

/// tt_svd of the densified observations scaled by 1/p. An empty obs gives
/// the zero tensor and appends a warning when `warnings` is given.
TTTensor spectral_init(const SparseObservations& obs, const RankVector& r,
                       std::vector<std::string>* warnings = nullptr);

/// ||P_T G||_F^2 / ||P_Omega P_T G||_F^2 for the identity-metric projection
/// `g_proj`; nullopt when either factor is zero.
std::optional<double> rgd_adaptive_step(const TangentVector& g_proj, const SparseObservations& obs);
/// ||v||_W^2 / ||P_Omega v||_F^2.
std::optional<double> prgd_adaptive_step(const TangentVector& v, const ModeWeights& w,
                                         const SparseObservations& obs);
/// multiplier * epsilon^{1/2} / p; DomainError unless p in (0, 1].
double theory_step(const ModeWeights& w, double p, double multiplier = 1.001);
/// Step for a constant or theory rule; the adaptive rule is not handled here.
double scheduled_step(const StepRule& rule, const ModeWeights& w, double p);

/// Entrywise clipping to [-zeta, zeta].
DenseTensor trim(const DenseTensor& x, double zeta);
/// Dense clipping followed by TT-SVD at the maximal feasible rank, which
/// represents the trimmed tensor exactly.
TTTensor trim(const TTTensor& x, double zeta);
/// (10 ||w||_F / (9 sqrt(d*))) nu.
double trim_threshold(const TTTensor& candidate, double nu);

SolveResult solve(const SparseObservations& obs, const RankVector& r, const SolverConfig& cfg,
                  const Truth& truth = {});
/// As solve, starting from `init` instead of the spectral initialization.
SolveResult solve_from(const TTTensor& init, const SparseObservations& obs, const RankVector& r,
                       const SolverConfig& cfg, const Truth& truth = {});

}  // namespace ttc
