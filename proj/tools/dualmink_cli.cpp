// Command-line front end: solve, verify, sweep, plot, manufacture.
#include "dualmink/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace dualmink;
  CLI::App app{"Solver and verification suite for the even dual Minkowski problem on S^1 and S^2"};
  app.require_subcommand(1);

  std::string config, out;
  CommandOptions opt;
  const auto common = [&](CLI::App* cmd, const char* input_help) {
    cmd->add_option("--config", config, input_help)->required();
    cmd->add_option("--out", out, "Output path");
  };

  auto* solve = app.add_subcommand("solve", "Solve for h by homotopy continuation");
  common(solve, "Run configuration file");
  solve->add_flag("--override-q-range", opt.override_q_range, "Allow q outside (0, n]");

  auto* verify = app.add_subcommand("verify", "Check a converged result against the stability inequalities");
  common(verify, "Result file written by solve");

  auto* sweep = app.add_subcommand("sweep", "Run a matrix of q, epsilon and modes");
  common(sweep, "Sweep specification file");
  sweep->add_option("--workers", opt.workers, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_flag("--override-q-range", opt.override_q_range, "Allow q outside (0, n]");

  auto* plot = app.add_subcommand("plot", "Write an SVG figure of a result");
  common(plot, "Result file written by solve");

  auto* manufacture = app.add_subcommand("manufacture", "Emit f samples of an analytic body at index q");
  common(manufacture, "Run configuration with f = manufacture:<body>");

  for (auto* cmd : {solve, verify, sweep, manufacture}) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { opt.seed = s, opt.seed_set = true; }, "Random seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (solve->parsed()) return cmd_solve(config, out, opt, std::cerr);
  if (verify->parsed()) return cmd_verify(config, out, opt, std::cerr);
  if (sweep->parsed()) return cmd_sweep(config, out.empty() ? "sweep" : out, opt, std::cerr);
  if (plot->parsed()) return cmd_plot(config, out, std::cerr);
  if (manufacture->parsed()) return cmd_manufacture(config, out, opt, std::cerr);
  return kExitUsage;
}
