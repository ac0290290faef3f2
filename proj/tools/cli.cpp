#include "cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#ifdef TTC_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>

#include "manifest.hpp"
#include "ttc/error.hpp"
#include "ttc/io.hpp"
#include "ttc/problems.hpp"
#include "ttc/qst.hpp"
#include "ttc/solver.hpp"

namespace fs = std::filesystem;

namespace ttc::cli {

namespace {

using Values = std::map<std::string, std::string>;

struct OptSpec {
  const char* name;
  const char* def;
  const char* help;
  bool required = false;
};

const std::vector<OptSpec> kSolverOpts = {
    {"algo", "prgd", "rgd or prgd"},
    {"step", "constant=1", "adaptive, constant=<eta>, theory[=<mult>] or grid"},
    {"max-iters", "500", "iteration cap"},
    {"rel-tol", "1e-4", "stop when the relative error to the truth is below this"},
    {"tol", "1e-5", "stop when ||T_{l+1} - T_l|| <= tol * max(1, ||T_l||)"},
    {"trim-nu", "", "enable trimming with this spikiness parameter"},
    {"epsilon", "vee2", "vee2, fixed=<x> or floor=<x>"},
    {"log-every", "1", "record every k-th iteration"},
    {"retraction", "structured", "structured or dense"},
    {"sampling", "without", "without or with (replacement)"},
    {"seed", "0", "root seed"},
    {"out-dir", ".", "output directory"},
};

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

double parse_double(const std::string& name, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError("--" + name + ": not a number: '" + text + "'");
  return v;
}

std::int64_t parse_int(const std::string& name, const std::string& text) {
  std::int64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("--" + name + ": not an integer: '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& name, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("--" + name + ": not an unsigned integer: '" + text + "'");
  }
  return v;
}

std::int64_t parse_positive(const std::string& name, const std::string& text) {
  const std::int64_t v = parse_int(name, text);
  if (v <= 0) throw UsageError("--" + name + " must be positive");
  return v;
}

std::vector<Index> parse_list(const std::string& name, const std::string& text) {
  std::vector<Index> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_positive(name, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += sep;
    s += parts[i];
  }
  return s;
}

std::string join_list(const std::vector<Index>& v) {
  std::vector<std::string> parts;
  for (Index x : v) parts.push_back(std::to_string(x));
  return join(parts, ",");
}

/// A rank list of length m-1, or a single value broadcast to every bond.
RankVector parse_rank(const std::string& text, std::size_t order) {
  std::vector<Index> r = parse_list("rank", text);
  if (r.size() == 1 && order > 2) r.assign(order - 1, r[0]);
  if (r.size() + 1 != order) {
    throw UsageError(fmt::format("--rank needs {} values for a tensor of order {}", order - 1, order));
  }
  return RankVector(r);
}

struct SolveSetup {
  SolverConfig cfg;
  bool grid = false;
  SamplingMode sampling = SamplingMode::kWithoutReplacement;
  std::uint64_t seed = 0;
};

SolveSetup solver_setup(const Values& v) {
  SolveSetup s;
  const std::string& algo = v.at("algo");
  if (algo == "prgd") {
    s.cfg.algorithm = Algorithm::kPrgd;
  } else if (algo == "rgd") {
    s.cfg.algorithm = Algorithm::kRgd;
  } else {
    throw UsageError("--algo must be rgd or prgd");
  }
  const std::string& step = v.at("step");
  if (step == "grid") {
    s.grid = true;
  } else {
    try {
      s.cfg.step = StepRule::parse(step);
    } catch (const DomainError& e) {
      throw UsageError(std::string("--step: ") + e.what());
    }
  }
  s.cfg.max_iters = static_cast<int>(parse_positive("max-iters", v.at("max-iters")));
  s.cfg.rel_tol = parse_double("rel-tol", v.at("rel-tol"));
  s.cfg.iterate_change_tol = parse_double("tol", v.at("tol"));
  if (!v.at("trim-nu").empty()) s.cfg.trim_nu = parse_double("trim-nu", v.at("trim-nu"));

  const std::string& eps = v.at("epsilon");
  if (eps == "vee2") {
    s.cfg.epsilon = {EpsilonRule::kVeeSquared, 1e-30};
  } else if (eps.rfind("fixed=", 0) == 0) {
    s.cfg.epsilon = {EpsilonRule::kFixed, parse_double("epsilon", eps.substr(6))};
  } else if (eps.rfind("floor=", 0) == 0) {
    s.cfg.epsilon = {EpsilonRule::kFlooredVeeSquared, parse_double("epsilon", eps.substr(6))};
  } else if (eps == "floor") {
    s.cfg.epsilon = {EpsilonRule::kFlooredVeeSquared, 1e-30};
  } else {
    throw UsageError("--epsilon must be vee2, fixed=<x> or floor=<x>");
  }

  s.cfg.log_every = static_cast<int>(parse_positive("log-every", v.at("log-every")));
  const std::string& retr = v.at("retraction");
  if (retr == "structured") {
    s.cfg.retraction = RetractionPath::kStructured;
  } else if (retr == "dense") {
    s.cfg.retraction = RetractionPath::kDense;
  } else {
    throw UsageError("--retraction must be structured or dense");
  }
  const std::string& samp = v.at("sampling");
  if (samp == "without") {
    s.sampling = SamplingMode::kWithoutReplacement;
  } else if (samp == "with") {
    s.sampling = SamplingMode::kWithReplacement;
  } else {
    throw UsageError("--sampling must be with or without");
  }
  s.seed = parse_u64("seed", v.at("seed"));
  return s;
}

struct Solved {
  SolveResult result;
  double eta = std::numeric_limits<double>::quiet_NaN();
};

Solved run_solver(const SolveSetup& s, const SparseObservations& obs, const RankVector& r,
                  const SolverConfig& cfg, const Truth& truth) {
  if (!s.grid) return {solve(obs, r, cfg, truth)};
  GridSearchResult g = grid_search_constant_step(obs, r, cfg, truth);
  GridRun& best = g.runs[g.best];
  return {std::move(best.result), best.eta};
}

fs::path prepare_out_dir(const Values& v) {
  const fs::path dir = v.at("out-dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void open_csv(std::ofstream& f, const fs::path& path) {
  f.open(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
}

struct RunContext {
  std::string command;
  std::vector<std::string> args;
  Values values;
  Manifest manifest;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  void begin() {
    manifest.set("command", command);
    manifest.set("command_line", "ttc " + join(args, " "));
    manifest.set("build", build_id());
    manifest.set("seed", values.at("seed"));
    manifest.set("start", utc_timestamp());
    for (const auto& [k, val] : values) {
      if (!val.empty()) manifest.set("param." + k, val);
    }
  }
  void finish(const fs::path& dir) {
    manifest.set("end", utc_timestamp());
    manifest.write((dir / "manifest.txt").string());
  }
};

std::string eta_text(double eta) { return std::isnan(eta) ? "" : fmt_double(eta); }

std::string rel_error_text(const IterationLog& log) {
  const auto& e = log.back().rel_error;
  return e ? fmt_double(*e) : "";
}

void report_warnings(const SolveResult& r, std::ostream& err) {
  for (const auto& w : r.warnings) fmt::print(err, "warning: {}\n", w);
  if (is_failure(r.status)) fmt::print(err, "solver failure: {} {}\n", to_string(r.status), r.message);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Seed streams per trial.
enum Stream : std::uint64_t { kTensorStream = 0, kSampleStream = 1, kNoiseStream = 2, kSolverStream = 3 };

int cmd_synth(RunContext& ctx) {
  const Values& v = ctx.values;
  const std::vector<Index> dims = parse_list("dims", v.at("dims"));
  const RankVector r = parse_rank(v.at("rank"), dims.size());
  const double os = parse_double("os", v.at("os"));
  const int trials = static_cast<int>(parse_positive("trials", v.at("trials")));
  const double sigma = parse_double("noise-sigma", v.at("noise-sigma"));
  if (sigma < 0.0) throw UsageError("--noise-sigma must be non-negative");
  const SolveSetup setup = solver_setup(v);
  setup.cfg.validate(dims);
  const Index n = os_to_n(dims, r, os);
  const fs::path dir = prepare_out_dir(v);
  ctx.begin();

  std::ofstream summary;
  open_csv(summary, dir / "summary.csv");
  fmt::print(summary, "trial,seed,status,iterations,time_ms,final_rel_error,final_objective,eta\n");

  std::vector<double> iters, times, errors, objectives;
  bool failed = false;
  for (int k = 1; k <= trials; ++k) {
    const auto t = static_cast<std::uint64_t>(k);
    const std::uint64_t trial_seed = derive_seed(setup.seed, t, kTensorStream);
    const TTTensor truth = gen_synthetic_tt(dims, r, trial_seed);
    SparseObservations obs =
        sample_uniform(truth, n, derive_seed(setup.seed, t, kSampleStream), setup.sampling);
    if (sigma > 0.0) obs = add_noise(truth, obs, sigma, derive_seed(setup.seed, t, kNoiseStream)).obs;
    SolverConfig cfg = setup.cfg;
    cfg.seed = derive_seed(setup.seed, t, kSolverStream);
    const Solved s = run_solver(setup, obs, r, cfg, truth);
    report_warnings(s.result, *ctx.err);
    failed = failed || is_failure(s.result.status);

    const std::string name = fmt::format("trial_{}.csv", k);
    s.result.log.write_csv((dir / name).string());
    ctx.manifest.set(fmt::format("output.log.{}", k), name);

    const IterationRecord& last = s.result.log.back();
    const double rel = last.rel_error.value_or(std::numeric_limits<double>::quiet_NaN());
    iters.push_back(last.iter);
    times.push_back(last.elapsed_ms);
    errors.push_back(rel);
    objectives.push_back(last.objective);
    fmt::print(summary, "{},{},{},{},{},{},{},{}\n", k, trial_seed, to_string(s.result.status), last.iter,
               fmt_double(last.elapsed_ms), fmt_double(rel), fmt_double(last.objective),
               eta_text(s.eta));
    fmt::print(*ctx.out, "trial {}: {} after {} iterations, rel_error {}\n", k, to_string(s.result.status),
               last.iter, fmt_double(rel));
  }
  fmt::print(summary, "median,,,{},{},{},{},\n", fmt_double(median(iters)), fmt_double(median(times)),
             fmt_double(median(errors)), fmt_double(median(objectives)));
  fmt::print(summary, "mean,,,{},{},{},{},\n", fmt_double(mean(iters)), fmt_double(mean(times)),
             fmt_double(mean(errors)), fmt_double(mean(objectives)));
  summary.close();
  if (!summary) throw IoError("write to summary.csv failed");
  ctx.manifest.set("output.summary", "summary.csv");
  ctx.finish(dir);
  return failed ? kExitSolverFailure : kExitOk;
}


int cmd_qst(RunContext& ctx) {
  const Values& v = ctx.values;
  const int qubits = static_cast<int>(parse_positive("qubits", v.at("qubits")));
  const Index bond = parse_positive("bond", v.at("bond"));
  const double os = parse_double("os", v.at("os"));
  SolveSetup setup = solver_setup(v);

  const Mpo rho = qst_random_mpo(qubits, bond, derive_seed(setup.seed, 0, kTensorStream));
  const TTTensor y = pauli_tt(rho);
  const std::vector<Index> dims = y.dims();
  const RankVector r = y.ranks();
  setup.cfg.validate(dims);
  const Index n = os_to_n(dims, r, os);
  const SparseObservations obs = sample_uniform(y, n, derive_seed(setup.seed, 0, kSampleStream), setup.sampling);
  const fs::path dir = prepare_out_dir(v);
  ctx.begin();

  SolverConfig cfg = setup.cfg;
  cfg.seed = derive_seed(setup.seed, 0, kSolverStream);
  const Solved s = run_solver(setup, obs, r, cfg, y);
  report_warnings(s.result, *ctx.err);
  s.result.log.write_csv((dir / "log.csv").string());
  ctx.manifest.set("output.log", "log.csv");

  // The completed tensor is real, so the reconstruction is Hermitian up to
  // rounding; the deviation is reported before symmetrizing.
  const Mpo rec = reconstruct_density(s.result.tensor);
  const double herm = hermiticity_deviation(rec);
  double trace_before = 0.0;
  const Mpo fixed = normalize_trace(hermitian_part(rec), &trace_before);
  const double fidelity = fidelity_diag(rho, fixed);
  const double trace = mpo_trace(fixed).real();

  std::ofstream report;
  open_csv(report, dir / "report.csv");
  fmt::print(report,
             "qubits,bond,samples,sampling_ratio,status,iterations,rel_error,fidelity,trace_before,trace,"
             "hermiticity_deviation,eta\n");
  fmt::print(report, "{},{},{},{},{},{},{},{},{},{},{},{}\n", qubits, bond, n,
             fmt_double(obs.sampling_fraction()), to_string(s.result.status), s.result.log.back().iter,
             rel_error_text(s.result.log), fmt_double(fidelity), fmt_double(trace_before), fmt_double(trace),
             fmt_double(herm), eta_text(s.eta));
  report.close();
  if (!report) throw IoError("write to report.csv failed");
  ctx.manifest.set("output.report", "report.csv");

  fmt::print(*ctx.out, "{} after {} iterations: rel_error {}, fidelity {}, trace {}\n", to_string(s.result.status),
             s.result.log.back().iter, rel_error_text(s.result.log), fmt_double(fidelity), fmt_double(trace));
  ctx.finish(dir);
  return is_failure(s.result.status) ? kExitSolverFailure : kExitOk;
}

std::string absolute_or_empty(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

int cmd_complete(RunContext& ctx) {
  Values& v = ctx.values;
  for (const char* key : {"input", "mask", "out"}) v[key] = absolute_or_empty(v.at(key));
  const bool has_os = !v.at("os").empty();
  const bool has_mask = !v.at("mask").empty();
  if (has_os == has_mask) throw UsageError("exactly one of --os and --mask is required");
  SolveSetup setup = solver_setup(v);

  const DenseTensor x = read_dense(v.at("input"));
  const std::vector<Index> dims = x.dims();
  const RankVector r = parse_rank(v.at("rank"), dims.size());
  setup.cfg.validate(dims);
  const SparseObservations obs =
      has_mask ? read_observations(v.at("mask"), dims)
               : sample_uniform(x, os_to_n(dims, r, parse_double("os", v.at("os"))),
                                derive_seed(setup.seed, 0, kSampleStream), setup.sampling);
  const fs::path dir = prepare_out_dir(v);
  const fs::path out_path = v.at("out").empty() ? dir / "recovered.ttd" : fs::path(v.at("out"));
  ctx.begin();

  SolverConfig cfg = setup.cfg;
  cfg.seed = derive_seed(setup.seed, 0, kSolverStream);
  const Solved s = run_solver(setup, obs, r, cfg, x);
  report_warnings(s.result, *ctx.err);
  s.result.log.write_csv((dir / "log.csv").string());
  ctx.manifest.set("output.log", "log.csv");
  write_dense(out_path.string(), to_dense(s.result.tensor));
  ctx.manifest.set("output.tensor", out_path.string());

  const double quality = psnr(s.result.tensor, x);
  std::ofstream report;
  open_csv(report, dir / "report.csv");
  fmt::print(report, "samples,sampling_ratio,status,iterations,rel_error,psnr,eta\n");
  fmt::print(report, "{},{},{},{},{},{},{}\n", obs.size(), fmt_double(obs.sampling_fraction()),
             to_string(s.result.status), s.result.log.back().iter, rel_error_text(s.result.log),
             fmt_double(quality), eta_text(s.eta));
  report.close();
  if (!report) throw IoError("write to report.csv failed");
  ctx.manifest.set("output.report", "report.csv");

  fmt::print(*ctx.out, "{} after {} iterations: rel_error {}, psnr {} dB\n", to_string(s.result.status),
             s.result.log.back().iter, rel_error_text(s.result.log), fmt_double(quality));
  ctx.finish(dir);
  return is_failure(s.result.status) ? kExitSolverFailure : kExitOk;
}

int cmd_generate(const Values& v, std::ostream& out) {
  const std::vector<Index> dims = parse_list("dims", v.at("dims"));
  const std::uint64_t seed = parse_u64("seed", v.at("seed"));
  DenseTensor x;
  if (v.at("kind") == "smooth") {
    x = gen_smooth_tensor(dims, seed, static_cast<int>(parse_positive("terms", v.at("terms"))));
  } else if (v.at("kind") == "tt") {
    if (v.at("rank").empty()) throw UsageError("--kind tt needs --rank");
    x = to_dense(gen_synthetic_tt(dims, parse_rank(v.at("rank"), dims.size()), seed));
  } else {
    throw UsageError("--kind must be smooth or tt");
  }
  write_dense(v.at("out"), x);
  fmt::print(out, "wrote {} ({})\n", v.at("out"), join_list(dims));
  return kExitOk;
}

int cmd_replay(const Values& v, std::ostream& out, std::ostream& err) {
  const fs::path manifest_path = v.at("manifest");
  const Manifest m = Manifest::read(manifest_path.string());
  const std::string& command = m.get("command");
  if (command != "synth" && command != "qst" && command != "complete") {
    throw IoError("manifest names unknown command '" + command + "'");
  }
  const fs::path orig_dir = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
  const fs::path new_dir = v.at("out-dir");
  std::error_code ec;
  if (fs::exists(new_dir) && fs::equivalent(orig_dir, new_dir, ec)) {
    throw UsageError("--out-dir must differ from the manifest directory");
  }

  std::vector<std::string> args{command};
  for (const auto& [key, value] : m.with_prefix("param.")) {
    if (key == "out-dir") continue;
    args.push_back("--" + key);
    args.push_back(key == "out" ? (new_dir / fs::path(value).filename()).string() : value);
  }
  args.push_back("--out-dir");
  args.push_back(new_dir.string());

  const int code = run(args, out, err);
  if (code == kExitUsage) return code;

  int compared = 0;
  int mismatched = 0;
  for (const auto& [key, file] : m.with_prefix("output.log")) {
    const IterationLog a = IterationLog::read_csv((orig_dir / file).string());
    const IterationLog b = IterationLog::read_csv((new_dir / file).string());
    ++compared;
    if (!a.same_trajectory(b)) {
      ++mismatched;
      fmt::print(err, "replay mismatch: {}\n", file);
    }
  }
  if (mismatched) return kExitSolverFailure;
  fmt::print(out, "replay identical: {} log(s)\n", compared);
  return code;
}

/// Moves `--config <file>` out of the argument list and splices the file's
/// key=value pairs in right after the subcommand. Later flags override
/// earlier ones, so explicit flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_key_value_file(path)) {
    extra.push_back(key.rfind("--", 0) == 0 ? key : "--" + key);
    extra.push_back(value);
  }
  const std::size_t at = args.empty() || args[0].rfind("-", 0) == 0 ? 0 : 1;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
  return args;
}

CLI::App* add_command(CLI::App& app, const char* name, const char* help, std::vector<OptSpec> specs,
                      Values& values) {
  CLI::App* sub = app.add_subcommand(name, help);
  for (const OptSpec& s : specs) {
    values[s.name] = s.def;
    CLI::Option* o = sub->add_option(std::string("--") + s.name, values[s.name], s.help);
    o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    if (s.required) o->required();
    if (*s.def) o->default_str(s.def);
  }
  return sub;
}

std::vector<OptSpec> with_solver_opts(std::vector<OptSpec> specs) {
  specs.insert(specs.end(), kSolverOpts.begin(), kSolverOpts.end());
  return specs;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
  auto splitmix64 = [](std::uint64_t x) {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix64(splitmix64(splitmix64(root) ^ a) ^ b);
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> original = args;
  std::map<std::string, Values> values;
  CLI::App app{"Low-rank tensor-train completion (RGD and PRGD)", "ttc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  add_command(app, "synth", "Complete random synthetic TT tensors",
              with_solver_opts({{"dims", "", "mode sizes, e.g. 30,30,30", true},
                                {"rank", "", "TT rank, e.g. 3,3 (one value is broadcast)", true},
                                {"os", "10", "oversampling ratio"},
                                {"trials", "1", "number of random instances"},
                                {"noise-sigma", "0", "relative noise level"}}),
              values["synth"]);
  add_command(app, "qst", "Quantum state tomography on a random MPS density",
              with_solver_opts({{"qubits", "", "number of qubits", true},
                                {"bond", "2", "MPS bond dimension"},
                                {"os", "10", "oversampling ratio"}}),
              values["qst"]);
  add_command(app, "complete", "Complete a dense tensor file",
              with_solver_opts({{"input", "", "dense tensor file", true},
                                {"rank", "", "TT rank", true},
                                {"os", "", "oversampling ratio"},
                                {"mask", "", "observation file (1-based i1,..,im,value lines)"},
                                {"out", "", "recovered dense tensor (default <out-dir>/recovered.ttd)"}}),
              values["complete"]);
  add_command(app, "generate", "Write a test tensor",
              {{"kind", "smooth", "smooth or tt"},
               {"dims", "", "mode sizes", true},
               {"rank", "", "TT rank for --kind tt"},
               {"terms", "12", "number of bumps for --kind smooth"},
               {"seed", "0", "seed"},
               {"out", "", "dense tensor file", true}},
              values["generate"]);
  add_command(app, "replay", "Re-run a manifest and compare iteration logs",
              {{"manifest", "", "manifest.txt of an earlier run", true},
               {"out-dir", "", "directory for the new run", true}},
              values["replay"]);

  try {
    args = merge_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "generate") return cmd_generate(values[command], out);
    if (command == "replay") return cmd_replay(values[command], out, err);
    RunContext ctx{command, original, values[command], {}, &out, &err};
    if (command == "synth") return cmd_synth(ctx);
    if (command == "qst") return cmd_qst(ctx);
    return cmd_complete(ctx);
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    fmt::print(err, "I/O error: {}\n", e.what());
    return kExitUsage;
  } catch (const DomainError& e) {
    fmt::print(err, "invalid argument: {}\n", e.what());
    return kExitUsage;
  } catch (const ShapeError& e) {
    fmt::print(err, "invalid argument: {}\n", e.what());
    return kExitUsage;
  } catch (const CapacityError& e) {
    fmt::print(err, "too large: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitSolverFailure;
  }
}

}  // namespace ttc::cli
