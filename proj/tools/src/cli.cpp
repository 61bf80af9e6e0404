#include "neuropt/cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "neuropt/cases/export.hpp"
#include "neuropt/cases/training.hpp"
#include "neuropt/codegen/emit.hpp"
#include "neuropt/codegen/lower.hpp"
#include "neuropt/error.hpp"
#include "neuropt/learned/mlp_io.hpp"
#include "neuropt/random.hpp"
#include "neuropt/symgraph/derivatives.hpp"

namespace neuropt::cli {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

// JSON has no inf/nan literals.
std::string json_num(double x) { return std::isfinite(x) ? num(x) : "null"; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot open '{}' for writing", path));
  f << text;
  f.close();
  if (!f) throw IoError(fmt::format("write to '{}' failed", path));
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string part = text.substr(pos, comma - pos);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size() || v < 1) {
      throw ValidationError(fmt::format("--hidden expects comma-separated positive widths, got '{}'", text));
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

struct FitArgs {
  std::string scenario;
  std::string out;
  int samples = 5000;
  std::uint64_t seed = 1;
  std::string hidden = "64,64";
  int epochs = TrainConfig{}.epochs;
  double lr = TrainConfig{}.learning_rate;
};

struct SolveArgs {
  std::string scenario;
  std::string model;
  bool analytic = false;
  std::string out;
  double tol = SolverOptions{}.tol;
  int max_iter = SolverOptions{}.max_iter;
  double mu_phase2 = cases::kPhase2Mu;
  bool verbose = false;
};

SolverOptions solver_options(const SolveArgs& a, std::ostream& err) {
  SolverOptions o;
  o.tol = a.tol;
  o.max_iter = a.max_iter;
  if (a.verbose) o.log = [&err](const std::string& line) { err << line << '\n'; };
  o.validate();
  return o;
}

cases::ModelFitOptions fit_options(const FitArgs& a) {
  cases::ModelFitOptions o;
  o.samples = a.samples;
  o.seed = a.seed;
  o.hidden = parse_hidden(a.hidden);
  o.train.epochs = a.epochs;
  o.train.learning_rate = a.lr;
  return o;
}

std::string fit_summary(const cases::FitReport& r) {
  return fmt::format("{{\"train_mse\":{},\"heldout_mse\":{},\"heldout_relative\":{}}}", json_num(r.train_mse),
                     json_num(r.heldout_mse), json_num(r.heldout_relative));
}

int fit_flow(const FitArgs& a, std::ostream& out) {
  const cases::FishScenario s = cases::load_fish_scenario(a.scenario);
  const cases::FitReport r = cases::fit_flow_model(s, fit_options(a));
  save_mlp(r.spec, a.out);
  out << fit_summary(r) << '\n';
  return kExitOk;
}

int fit_density(const FitArgs& a, std::ostream& out) {
  const cases::TrajScenario s = cases::load_traj_scenario(a.scenario);
  const cases::FitReport r = cases::fit_density_model(s, fit_options(a));
  save_mlp(r.spec, a.out);
  out << fit_summary(r) << '\n';
  return kExitOk;
}

int solve_fish(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const cases::FishScenario s = cases::load_fish_scenario(a.scenario);
  const cases::FlowModel flow = a.analytic ? cases::FlowModel(s.flow) : cases::FlowModel(load_mlp(a.model));
  const NlpProblem p = cases::build_fish_nlp(s.params, flow);
  const Solution sol = solve(p, solver_options(a, err));
  write_file(a.out, cases::fish_csv(s.params, cases::fish_trajectory(s.params, sol.x)));
  if (sol.status != SolveStatus::Converged) err << "solve-fish: " << sol.message << '\n';
  out << emit_solution_summary(sol) << '\n';
  return exit_code(sol.status);
}

int solve_traj(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const cases::TrajScenario s = cases::load_traj_scenario(a.scenario);
  const cases::DensityModel density =
      a.analytic ? cases::DensityModel(s.density) : cases::DensityModel(load_mlp(a.model));
  if (!(a.mu_phase2 > 0.0)) throw ValidationError("--mu-phase2 must be positive");
  cases::TwoPhaseResult r;
  try {
    r = cases::solve_two_phase(s.params, density, solver_options(a, err), a.mu_phase2);
  } catch (const cases::InfeasibleStartError& e) {
    err << "solve-traj: " << e.what() << '\n';
    return kExitInput;
  }
  if (!r.phase2) {
    err << "solve-traj: phase 1 failed: " << r.phase1.message << '\n';
    out << emit_solution_summary(r.phase1) << '\n';
    return exit_code(r.phase1.status);
  }
  write_file(a.out, cases::traj_csv(s.params, r.phase2->x, density));
  if (r.phase2->status != SolveStatus::Converged) err << "solve-traj: " << r.phase2->message << '\n';
  std::string summary = emit_solution_summary(*r.phase2);
  summary.pop_back();
  summary += fmt::format(",\"phase1_status\":\"{}\",\"phase1_iterations\":{}}}", status_name(r.phase1.status),
                         r.phase1.iterations);
  out << summary << '\n';
  return exit_code(r.phase2->status);
}

int check_grad(const std::string& mlp_path, int trials, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (trials < 1) throw ValidationError("--trials must be positive");
  const MlpSpec spec = load_mlp(mlp_path);
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", spec.in_features);
  const sym::ExprRef y = embed_mlp(spec, x);
  const sym::SymFunction f(sym::unique_function_name("check_grad"), {x}, {sym::jacobian(y, x)});

  Pcg32 rng(seed);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Vector xv(spec.in_features);
    for (int i = 0; i < spec.in_features; ++i) {
      const double u = rng.uniform(-1.0, 1.0);
      xv(i) = spec.input_scaling ? spec.input_scaling->offset(i) + u / spec.input_scaling->scale(i) : u;
    }
    const Matrix J = sym::evaluate(f, {Matrix(xv)})[0];
    Matrix fd(J.rows(), J.cols());
    for (int i = 0; i < spec.in_features; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(xv(i)));
      Vector xp = xv, xm = xv;
      xp(i) += h;
      xm(i) -= h;
      fd.col(i) = (eval_mlp(spec, xp) - eval_mlp(spec, xm)) / (xp(i) - xm(i));
    }
    const double rel = (J - fd).cwiseAbs().maxCoeff() / std::max(1.0, J.cwiseAbs().maxCoeff());
    worst = std::max(worst, rel);
    if (!(rel <= 1e-6)) ++failures;
  }
  if (failures) err << fmt::format("check-grad: {} of {} trials exceeded rel. 1e-6\n", failures, trials);
  out << fmt::format("{{\"trials\":{},\"failures\":{},\"max_rel_error\":{}}}\n", trials, failures, json_num(worst));
  return failures ? kExitNotConverged : kExitOk;
}

struct CodegenArgs {
  std::string mlp;
  int x_dim = 0;
  std::string out_ir;
  std::string out_src;
  std::string name = "neuropt_mlp";
};

int codegen_cmd(const CodegenArgs& a, std::ostream& out) {
  const MlpSpec spec = load_mlp(a.mlp);
  if (a.x_dim != spec.in_features) {
    throw ValidationError(fmt::format("--x-dim {} does not match the model's in_features {}", a.x_dim, spec.in_features));
  }
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", a.x_dim);
  const codegen::Tape t = codegen::lower(sym::SymFunction(sym::unique_function_name("codegen"), {x}, {embed_mlp(spec, x)}));
  // Validate the name before writing anything.
  const std::string src = a.out_src.empty() ? std::string() : codegen::emit_source(t, a.name);
  write_file(a.out_ir, codegen::emit_ir_text(t));
  if (!a.out_src.empty()) write_file(a.out_src, src);
  out << fmt::format("{{\"instructions\":{},\"registers\":{},\"slots\":{},\"constants\":{}}}\n", t.instructions.size(),
                     t.n_registers, t.n_slots, t.constants.size());
  return kExitOk;
}

}  // namespace

int exit_code(SolveStatus status) { return status == SolveStatus::Converged ? kExitOk : kExitNotConverged; }

std::string emit_solution_summary(const Solution& sol) {
  return fmt::format("{{\"status\":\"{}\",\"iterations\":{},\"objective\":{},\"kkt_error\":{}}}", status_name(sol.status),
                     sol.iterations, json_num(sol.objective_value), json_num(sol.kkt_error));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned models inside nonlinear programs: fitting, solving, derivative checks, code generation",
               "neuropt"};
  app.require_subcommand(1, 1);
  app.allow_windows_style_options(false);

  FitArgs flow_args, density_args;
  for (auto [name, fa, what] : {std::tuple{"fit-flow", &flow_args, "fish scenario"},
                                std::tuple{"fit-density", &density_args, "trajectory scenario"}}) {
    CLI::App* c = app.add_subcommand(name, fmt::format("Fit an MLP to the analytic field of a {}", what));
    c->add_option("--scenario", fa->scenario, "Scenario JSON")->required();
    c->add_option("--out", fa->out, "Weights file to write")->required();
    c->add_option("--samples", fa->samples, "Training samples")->capture_default_str();
    c->add_option("--seed", fa->seed, "Sampling and initialization seed")->capture_default_str();
    c->add_option("--hidden", fa->hidden, "Hidden layer widths")->capture_default_str();
    c->add_option("--epochs", fa->epochs, "Training epochs")->capture_default_str();
    c->add_option("--lr", fa->lr, "Learning rate")->capture_default_str();
  }

  SolveArgs fish_args, traj_args;
  CLI::App* fish = app.add_subcommand("solve-fish", "Solve the river-crossing problem");
  CLI::App* traj = app.add_subcommand("solve-traj", "Two-phase minimum-snap trajectory through a density field");
  for (auto [c, sa, model_flag] : {std::tuple{fish, &fish_args, "--flow"}, std::tuple{traj, &traj_args, "--density"}}) {
    c->add_option("--scenario", sa->scenario, "Scenario JSON")->required();
    auto* model = c->add_option(model_flag, sa->model, "Weights file of the learned field");
    auto* analytic = c->add_flag("--analytic", sa->analytic, "Use the scenario's analytic field");
    model->excludes(analytic);
    c->add_option("--out", sa->out, "CSV file to write")->required();
    c->add_option("--tol", sa->tol, "Solver tolerance")->capture_default_str();
    c->add_option("--max-iter", sa->max_iter, "Iteration limit")->capture_default_str();
    c->add_flag("--verbose", sa->verbose, "Iteration log on stderr");
  }
  traj->add_option("--mu-phase2", traj_args.mu_phase2, "Initial barrier parameter of phase 2")->capture_default_str();

  std::string grad_mlp;
  int trials = 0;
  std::uint64_t grad_seed = 1;
  CLI::App* grad = app.add_subcommand("check-grad", "Compare MLP Jacobians with central differences");
  grad->add_option("--mlp", grad_mlp, "Weights file")->required();
  grad->add_option("--trials", trials, "Random points")->required();
  grad->add_option("--seed", grad_seed, "Seed")->capture_default_str();

  CodegenArgs cg;
  CLI::App* gen = app.add_subcommand("codegen", "Lower an MLP to tape IR and C source");
  gen->add_option("--mlp", cg.mlp, "Weights file")->required();
  gen->add_option("--x-dim", cg.x_dim, "Input dimension")->required();
  gen->add_option("--out-ir", cg.out_ir, "Tape IR file to write")->required();
  gen->add_option("--out-src", cg.out_src, "C source file to write");
  gen->add_option("--name", cg.name, "C function name")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInput;
  }

  auto used_model = [&](const SolveArgs& a, const char* flag) {
    if (!a.analytic && a.model.empty()) throw ValidationError(fmt::format("one of {} or --analytic is required", flag));
  };

  try {
    const CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "fit-flow") return fit_flow(flow_args, out);
    if (name == "fit-density") return fit_density(density_args, out);
    if (name == "solve-fish") {
      used_model(fish_args, "--flow");
      return solve_fish(fish_args, out, err);
    }
    if (name == "solve-traj") {
      used_model(traj_args, "--density");
      return solve_traj(traj_args, out, err);
    }
    if (name == "check-grad") return check_grad(grad_mlp, trials, grad_seed, out, err);
    return codegen_cmd(cg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace neuropt::cli
