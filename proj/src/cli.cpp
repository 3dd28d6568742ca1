#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "acmorse/cli.hpp"
#include "acmorse/flow.hpp"
#include "acmorse/homology.hpp"
#include "acmorse/io.hpp"
#include "acmorse/solver.hpp"

namespace acmorse {

namespace {

using nlohmann::ordered_json;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;  // empty: take output.dir from the config
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t v) { args.seed = v; },
      "random seed (overrides rng.seed)");
  cmd->add_option_function<int>(
      "--threads", [&args](int v) { args.threads = v; },
      "worker threads (overrides run.threads)");
}

struct RunContext {
  Config cfg;
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 1;
};

RunContext make_context(const CommonArgs& args) {
  RunContext ctx{Config::parse_file(args.config_path), "", 1, 1};
  ctx.cfg.apply_environment();
  ctx.out_dir = !args.out_dir.empty() ? args.out_dir : ctx.cfg.get_string("output.dir", "out");
  ctx.seed = args.seed ? *args.seed : ctx.cfg.get_seed("rng.seed", 1);
  ctx.threads = args.threads ? *args.threads
                             : static_cast<int>(ctx.cfg.get_int("run.threads", 1));
  if (ctx.threads < 1) throw std::invalid_argument("run.threads must be at least 1");
  std::filesystem::create_directories(ctx.out_dir);
  return ctx;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

NewtonOptions newton_from_config(const Config& cfg) {
  NewtonOptions opt;
  opt.tol = cfg.get_double("solve.tol", opt.tol);
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve.tol must be positive");
  return opt;
}

DeflationOptions deflation_from_config(const Config& cfg) {
  DeflationOptions opt;
  opt.max_mode = static_cast<int>(cfg.get_int("deflation.modes", opt.max_mode));
  opt.newton = newton_from_config(cfg);
  return opt;
}

ordered_json solution_json(const SolutionPoint& s) {
  ordered_json j;
  j["tag"] = s.tag;
  j["epsilon"] = s.epsilon;
  j["index"] = s.index;
  j["nullity"] = s.nullity;
  j["energy"] = s.energy;
  j["supnorm"] = s.u.sup_norm();
  j["residual"] = s.residual_norm;
  return j;
}

void write_json_file(const std::string& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Eigen::VectorXd diagram_sign_field(const Problem& prob) {
  // First nonconstant Laplacian eigenfield; ties the ordinate sign to a
  // geometry-determined reference independent of the solution set.
  const int m = static_cast<int>(std::min<Eigen::Index>(prob.grid()->node_count(), 2));
  const SpectrumResult spec = laplacian_spectrum(prob, m);
  Eigen::VectorXd phi = spec.eigenfields[m - 1].values;
  // Pin the overall sign so reruns are byte-identical.
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (std::abs(phi[i]) > 1e-12) {
      if (phi[i] < 0) phi = -phi;
      break;
    }
  }
  return phi;
}

int cmd_spectrum(const RunContext& ctx) {
  const Problem prob = problem_from_config(ctx.cfg);
  const Eigen::Index n = prob.grid()->node_count();
  const int m = static_cast<int>(
      std::min<Eigen::Index>(n, ctx.cfg.get_int("spectrum.count", 10)));
  if (m < 1) throw std::invalid_argument("spectrum.count must be at least 1");
  const SpectrumResult spec = laplacian_spectrum(prob, m);
  write_spectrum_csv(join_path(ctx.out_dir, "spectrum.csv"), spec);
  ordered_json j;
  j["epsilon"] = prob.epsilon();
  j["count"] = m;
  j["eigenvalues"] = std::vector<double>(spec.eigenvalues.data(), spec.eigenvalues.data() + m);
  write_json_file(join_path(ctx.out_dir, "spectrum.json"), j);
  std::cout << "wrote " << join_path(ctx.out_dir, "spectrum.csv") << "\n";
  return 0;
}

int cmd_solve(const RunContext& ctx) {
  const Problem prob = problem_from_config(ctx.cfg);
  const ScalarField u0 = initial_state_from_config(ctx.cfg, prob);
  const NewtonResult res = newton_solve(prob, u0, "solve", newton_from_config(ctx.cfg));
  ordered_json j;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["regularized"] = res.regularized;
  if (res.converged) {
    j["solution"] = solution_json(res.point);
    write_field_csv(join_path(ctx.out_dir, "solution.csv"), res.point.u);
  } else {
    j["failure"] = res.failure;
  }
  write_json_file(join_path(ctx.out_dir, "solve.json"), j);
  if (!res.converged) {
    std::cerr << "error: newton did not converge: " << res.failure << "\n";
    return 1;
  }
  std::cout << "converged in " << res.iterations << " iteration(s): index " << res.point.index
            << ", nullity " << res.point.nullity << ", energy " << format_full(res.point.energy)
            << "\n";
  return 0;
}

std::vector<SolutionPoint> sweep_from_config(const RunContext& ctx, const Problem& prob,
                                             const char* seeds_key, int seeds_default) {
  const int seeds = static_cast<int>(ctx.cfg.get_int(seeds_key, seeds_default));
  if (seeds < 0) throw std::invalid_argument(std::string(seeds_key) + " must be nonnegative");
  return solution_sweep(prob, seeds, ctx.seed, deflation_from_config(ctx.cfg));
}

int cmd_sweep(const RunContext& ctx) {
  const Problem prob = problem_from_config(ctx.cfg);
  const std::vector<SolutionPoint> sols =
      sweep_from_config(ctx, prob, "deflation.seeds", 8);
  ordered_json j;
  j["epsilon"] = prob.epsilon();
  j["count"] = sols.size();
  j["solutions"] = ordered_json::array();
  for (std::size_t i = 0; i < sols.size(); ++i) {
    ordered_json sj = solution_json(sols[i]);
    char name[64];
    std::snprintf(name, sizeof name, "solution_%03zu.csv", i);
    sj["file"] = name;
    write_field_csv(join_path(ctx.out_dir, name), sols[i].u);
    j["solutions"].push_back(sj);
  }
  write_json_file(join_path(ctx.out_dir, "sweep.json"), j);
  std::cout << "found " << sols.size() << " solution(s) at epsilon " << prob.epsilon() << "\n";
  return 0;
}

int cmd_continue(const RunContext& ctx) {
  const Problem prob = problem_from_config(ctx.cfg);
  const double lo = ctx.cfg.get_double("epsilon.lo");
  const double hi = ctx.cfg.get_double("epsilon.hi");
  const int direction =
      static_cast<int>(ctx.cfg.get_int("continuation.direction", -1)) >= 0 ? 1 : -1;
  StepControl ctrl;
  ctrl.ds0 = ctx.cfg.get_double("continuation.step", ctrl.ds0);
  ctrl.ds_min = ctx.cfg.get_double("continuation.minstep", ctrl.ds_min);
  ctrl.ds_max = ctx.cfg.get_double("continuation.maxstep", ctrl.ds_max);
  ctrl.max_steps = static_cast<int>(ctx.cfg.get_int("continuation.steps", ctrl.max_steps));
  ctrl.newton = newton_from_config(ctx.cfg);
  if (!(ctrl.ds0 > 0 && ctrl.ds_min > 0 && ctrl.ds_max > 0))
    throw std::invalid_argument("continuation step sizes must be positive");

  const ScalarField u0 = initial_state_from_config(ctx.cfg, prob);
  const NewtonResult start = newton_solve(prob, u0, "start", ctrl.newton);
  if (!start.converged)
    throw std::runtime_error("the continuation start did not converge: " + start.failure);
  const Branch branch = continue_branch(prob, start.point, direction, lo, hi, ctrl, "branch");

  write_branch_csv(join_path(ctx.out_dir, "branch.csv"), branch);
  ordered_json j;
  j["points"] = branch.points.size();
  j["window"] = {lo, hi};
  j["events"] = ordered_json::array();
  for (const BranchEvent& e : branch.events) {
    ordered_json ej;
    ej["kind"] = e.kind;
    ej["arclength"] = e.arclength;
    ej["epsilon.lo"] = e.eps_lo;
    ej["epsilon.hi"] = e.eps_hi;
    ej["index.before"] = e.index_before;
    ej["index.after"] = e.index_after;
    ej["note"] = e.note;
    j["events"].push_back(ej);
  }
  write_json_file(join_path(ctx.out_dir, "branch.json"), j);
  write_text_file(join_path(ctx.out_dir, "diagram.svg"),
                  branch_diagram_svg({branch}, diagram_sign_field(prob), prob.weights()));
  std::cout << "traced " << branch.points.size() << " point(s), " << branch.events.size()
            << " event(s)\n";
  return 0;
}

int cmd_flow(const RunContext& ctx) {
  const Problem prob = problem_from_config(ctx.cfg);
  FlowOptions fopt;
  fopt.dt0 = ctx.cfg.get_double("flow.dt", fopt.dt0);
  fopt.max_steps = ctx.cfg.get_int("flow.steps", fopt.max_steps);
  fopt.sample_stride = ctx.cfg.get_int("flow.stride", 10);
  if (!(fopt.dt0 > 0) || fopt.max_steps < 1 || fopt.sample_stride < 1)
    throw std::invalid_argument("flow.dt, flow.steps and flow.stride must be positive");

  // Classify endpoints against the constant solutions, which exist for
  // every admissible potential and cost nothing to produce.
  std::vector<SolutionPoint> known;
  for (const PotentialZero& z : prob.potential().zeros()) {
    char tag[64];
    std::snprintf(tag, sizeof tag, "constant %.6g", z.location);
    known.push_back(
        classify_solution(prob, ScalarField::constant(prob.grid(), z.location), tag));
  }

  const ScalarField u0 = initial_state_from_config(ctx.cfg, prob);
  const Trajectory tr = run_flow(prob, u0, fopt, known);
  write_trajectory_csv(join_path(ctx.out_dir, "trajectory.csv"), tr, known, prob.weights());
  ordered_json j;
  j["equilibrated"] = tr.equilibrated;
  j["steps"] = tr.steps_taken;
  j["final.time"] = tr.times.back();
  j["final.energy"] = tr.energies.back();
  j["max.energy.uptick"] = tr.max_energy_uptick;
  if (tr.limit_start) j["limit.start"] = tr.limit_start->tag;
  if (tr.limit_end) j["limit.end"] = tr.limit_end->tag;
  if (!tr.note.empty()) j["note"] = tr.note;
  write_json_file(join_path(ctx.out_dir, "flow.json"), j);
  std::cout << (tr.equilibrated ? "equilibrated" : "stopped") << " after " << tr.steps_taken
            << " step(s) at t = " << tr.times.back() << "\n";
  return 0;
}

int cmd_homology(const RunContext& ctx) {
  const Problem prob = problem_from_config(ctx.cfg);
  const std::vector<SolutionPoint> sols =
      sweep_from_config(ctx, prob, "homology.seeds", 8);
  const int samples = static_cast<int>(ctx.cfg.get_int("homology.samples", 0));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < sols.size(); ++i)
    for (std::size_t j = 0; j < sols.size(); ++j)
      if (sols[i].nullity == 0 && sols[j].nullity == 0 && sols[i].index >= 1 &&
          sols[j].index == sols[i].index - 1)
        pairs.emplace_back(i, j);

  std::vector<ConnectionCount> counts(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= pairs.size()) return;
      try {
        // Per-pair seed derived from the ordinal: thread scheduling cannot
        // change any result.
        counts[k] = connection_count_mod2(prob, sols, pairs[k].first, pairs[k].second, samples,
                                          ctx.seed + 1000003ULL * (k + 1));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int nthreads =
      std::max(1, std::min<int>(ctx.threads, static_cast<int>(pairs.size())));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ConnectionRecord> records;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (counts[k].reliable)
      records.push_back(
          ConnectionRecord{pairs[k].first, pairs[k].second, counts[k].parity, counts[k].exact});

  const ChainComplex cx = assemble_complex(sols, records);
  ordered_json j;
  j["epsilon"] = prob.epsilon();
  j["generators"] = ordered_json::array();
  for (std::size_t k = 0; k < cx.generators.size(); ++k) {
    ordered_json gj;
    gj["degree"] = k;
    gj["tags"] = ordered_json::array();
    for (const SolutionPoint& s : cx.generators[k]) gj["tags"].push_back(s.tag);
    j["generators"].push_back(gj);
  }
  j["boundaries"] = ordered_json::array();
  for (std::size_t k = 1; k < cx.boundaries.size(); ++k) {
    ordered_json bj;
    bj["degree"] = k;
    bj["reliability"] = cx.reliability[k];
    bj["matrix"] = ordered_json::array();
    for (std::size_t i = 0; i < cx.boundaries[k].rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (std::size_t c = 0; c < cx.boundaries[k].cols(); ++c)
        row.push_back(static_cast<int>(cx.boundaries[k](i, c)));
      bj["matrix"].push_back(row);
    }
    j["boundaries"].push_back(bj);
  }

  bool heuristic = false;
  for (const std::string& r : cx.reliability) heuristic = heuristic || r == "heuristic";
  std::vector<int> ranks;
  std::string refusal;
  try {
    ranks = homology_ranks(cx, heuristic);
    j["ranks"] = ranks;
    j["heuristic"] = heuristic;
  } catch (const std::invalid_argument& e) {
    refusal = e.what();
    j["refused"] = refusal;
  }

  const SpectrumResult spec = spectrum_for_verification(prob);
  const ParityReport parity =
      parity_report(sols, constant_index(prob, 0.0, spec).index, prob.weights());
  j["parity"] = ordered_json::object();
  j["parity"]["verdict"] = parity.verdict;
  j["parity"]["l"] = parity.l;
  j["parity"]["counts"] = parity.counts;
  j["parity"]["failures"] = parity.failures;
  write_json_file(join_path(ctx.out_dir, "homology.json"), j);
  std::cout << parity.to_text();
  if (!refusal.empty()) {
    std::cerr << "error: " << refusal << "\n";
    return 1;
  }
  std::cout << "homology ranks:";
  for (int r : ranks) std::cout << " " << r;
  std::cout << (heuristic ? "  (heuristic boundaries)" : "") << "\n";
  return parity.verdict == "PASS" ? 0 : 2;
}

int cmd_verify(const RunContext& ctx) {
  const Problem prob = problem_from_config(ctx.cfg);
  const std::vector<SolutionPoint> sols = sweep_from_config(ctx, prob, "verify.seeds", 12);
  const SpectrumResult spec = spectrum_for_verification(prob);
  const BifurcationReport rep = verify_bifurcation_theorem(prob, sols, spec);

  ordered_json j;
  j["verdict"] = rep.verdict;
  j["epsilon"] = rep.epsilon;
  j["l"] = rep.l;
  j["nearest.singular"] = rep.nearest_singular;
  j["tallies"] = ordered_json::array();
  for (const IndexTally& t : rep.tallies) {
    ordered_json tj;
    tj["k"] = t.k;
    tj["strict"] = t.strict_count;
    tj["orbit"] = t.orbit_support;
    tj["satisfied"] = t.satisfied;
    j["tallies"].push_back(tj);
  }
  j["orbits"] = ordered_json::array();
  for (const OrbitRecord& o : rep.orbits) {
    ordered_json oj;
    oj["robust.index"] = o.robust_index;
    oj["dim"] = o.dim;
    oj["members"] = o.members.size();
    oj["negation.closed"] = o.negation_closed;
    oj["energy"] = o.energy;
    j["orbits"].push_back(oj);
  }
  j["solutions"] = ordered_json::array();
  for (const SolutionPoint& s : sols) j["solutions"].push_back(solution_json(s));
  j["notes"] = rep.notes;
  j["failures"] = rep.failures;
  write_json_file(join_path(ctx.out_dir, "verify.json"), j);
  write_text_file(join_path(ctx.out_dir, "verify.txt"), rep.to_text());
  std::cout << rep.to_text();
  return rep.verdict == "PASS" ? 0 : 2;
}

}  // namespace

Problem problem_from_config(const Config& cfg) {
  const int dim = static_cast<int>(cfg.get_int("grid.dim"));
  const std::vector<double> lengths = cfg.get_doubles("grid.lengths");
  std::vector<int> sizes;
  for (std::int64_t s : cfg.get_ints("grid.sizes")) sizes.push_back(static_cast<int>(s));
  const GridPtr grid = TorusGrid::make(dim, lengths, sizes);

  const std::string mk = cfg.get_string("metric.kind", "euclidean");
  MetricPtr metric;
  if (mk == "euclidean") {
    metric = MetricField::euclidean(grid);
  } else if (mk == "conformal") {
    metric = MetricField::conformal(grid, read_field_csv(cfg.get_string("metric.file"), grid));
  } else if (mk == "tensor") {
    metric = read_tensor_metric_csv(cfg.get_string("metric.file"), grid);
  } else {
    throw std::invalid_argument("metric.kind must be euclidean, conformal or tensor, got '" +
                                mk + "'");
  }

  const std::string pk = cfg.get_string("potential.kind", "cubic");
  Potential pot = Potential::cubic();
  if (pk == "poly")
    pot = Potential::from_coefficients(cfg.get_doubles("potential.coeffs"));
  else if (pk != "cubic")
    throw std::invalid_argument("potential.kind must be cubic or poly, got '" + pk + "'");

  const double eps = cfg.get_double("epsilon");
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  return Problem::make(grid, metric, std::make_shared<Potential>(std::move(pot)), eps);
}

ScalarField initial_state_from_config(const Config& cfg, const Problem& prob) {
  const std::string kind = cfg.get_string("solve.initial.kind", "constant");
  if (kind == "constant")
    return ScalarField::constant(prob.grid(), cfg.get_double("solve.initial.value", 0.0));
  if (kind == "file") return read_field_csv(cfg.get_string("solve.initial.file"), prob.grid());
  if (kind == "mode") {
    const std::vector<std::int64_t> mode = cfg.get_ints("solve.initial.mode");
    if (static_cast<int>(mode.size()) != prob.grid()->dim())
      throw std::invalid_argument("solve.initial.mode needs one integer per grid axis");
    const double amp = cfg.get_double("solve.initial.amplitude", 0.1);
    const GridPtr& grid = prob.grid();
    std::array<double, 3> freq{};
    for (int a = 0; a < grid->dim(); ++a)
      freq[a] = 2.0 * M_PI * static_cast<double>(mode[a]) / grid->length(a);
    return ScalarField::from_function(grid, [&](const std::array<double, 3>& x) {
      double phase = 0.0;
      for (int a = 0; a < 3; ++a) phase += freq[a] * x[a];
      return amp * std::cos(phase);
    });
  }
  throw std::invalid_argument("solve.initial.kind must be constant, file or mode, got '" +
                              kind + "'");
}

int run_command(int argc, const char* const* argv) {
  CLI::App app{"stationary and parabolic analysis of a scalar phase-field equation on flat tori"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* c_spectrum = app.add_subcommand("spectrum", "weighted Laplacian eigenvalues");
  CLI::App* c_solve = app.add_subcommand("solve", "one Newton solve from the configured start");
  CLI::App* c_sweep = app.add_subcommand("sweep", "multi-solution deflated search");
  CLI::App* c_continue = app.add_subcommand("continue", "pseudo-arclength branch continuation");
  CLI::App* c_flow = app.add_subcommand("flow", "gradient-flow trajectory");
  CLI::App* c_homology = app.add_subcommand("homology", "mod-2 chain complex and its homology");
  CLI::App* c_verify = app.add_subcommand("verify", "bifurcation structure check");
  for (CLI::App* c : {c_spectrum, c_solve, c_sweep, c_continue, c_flow, c_homology, c_verify})
    add_common(c, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const RunContext ctx = make_context(args);
    if (c_spectrum->parsed()) return cmd_spectrum(ctx);
    if (c_solve->parsed()) return cmd_solve(ctx);
    if (c_sweep->parsed()) return cmd_sweep(ctx);
    if (c_continue->parsed()) return cmd_continue(ctx);
    if (c_flow->parsed()) return cmd_flow(ctx);
    if (c_homology->parsed()) return cmd_homology(ctx);
    if (c_verify->parsed()) return cmd_verify(ctx);
    throw std::logic_error("no subcommand dispatched");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace acmorse
