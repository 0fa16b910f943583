// Command-line front end: loads descriptor models, runs the low-rank
// Riccati solvers, and emits Matrix Market / CSV / JSON artifacts.
//
// Exit codes: 0 success, 1 input or configuration error, 2 numerical
// failure (including non-convergence; artifacts are still written).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riccati/errors.hpp"
#include "riccati/kn_adi.hpp"
#include "riccati/matrix_market.hpp"
#include "riccati/model.hpp"
#include "riccati/rksm.hpp"
#include "riccati/stabilization.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct SolveConfig {
  std::string model_path;
  std::string method = "rksm";
  double tol = 1e-10;
  int max_iter = 300;
  double trunc_tol = 1e-12;
  std::string k0_path;
  std::string out_dir = ".";
  unsigned seed = 0;
  int dense_cap = riccati::kDefaultDenseCap;
};

void add_solver_flags(CLI::App* cmd, SolveConfig& cfg, bool with_method) {
  cmd->add_option("--model", cfg.model_path, "model manifest path")
      ->required();
  if (with_method) {
    cmd->add_option("--method", cfg.method, "solver: rksm or kn-adi");
  }
  cmd->add_option("--tol", cfg.tol, "relative residual tolerance");
  cmd->add_option("--max-iter", cfg.max_iter,
                  "iteration cap (outer iterations for kn-adi)");
  cmd->add_option("--trunc-tol", cfg.trunc_tol,
                  "relative tail mass dropped when truncating Z");
  cmd->add_option("--k0", cfg.k0_path,
                  "Matrix Market file with an initial stabilizing feedback");
  cmd->add_option("--out-dir", cfg.out_dir, "directory for output artifacts");
  cmd->add_option("--seed", cfg.seed, "seed for the warm-up Arnoldi vector");
  cmd->add_option("--dense-cap", cfg.dense_cap,
                  "row cap for dense fallbacks and bootstraps");
}

// Returns empty on success, otherwise the message for stderr. Flag values
// the type system cannot rule out are checked here so they exit with the
// input-error code before any file is touched.
std::string validate_config(const SolveConfig& cfg, bool with_method) {
  if (with_method && cfg.method != "rksm" && cfg.method != "kn-adi") {
    return "unknown method '" + cfg.method + "' (expected rksm or kn-adi)";
  }
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) return "--tol must lie in (0, 1)";
  if (!(cfg.trunc_tol >= 0.0 && cfg.trunc_tol < 1.0)) {
    return "--trunc-tol must lie in [0, 1)";
  }
  if (cfg.max_iter < 1) return "--max-iter must be at least 1";
  if (cfg.dense_cap < 1) return "--dense-cap must be at least 1";
  return "";
}

std::string error_name(const riccati::Error& e) {
  using namespace riccati;
  if (dynamic_cast<const MissingFileError*>(&e)) return "MissingFile";
  if (dynamic_cast<const DimensionMismatchError*>(&e))
    return "DimensionMismatch";
  if (dynamic_cast<const SizeCapExceededError*>(&e)) return "SizeCapExceeded";
  if (dynamic_cast<const NotSymmetricError*>(&e)) return "NotSymmetric";
  if (dynamic_cast<const ImaginaryAxisEigenvalueError*>(&e))
    return "ImaginaryAxisEigenvalue";
  if (dynamic_cast<const NoStabilizingSolutionError*>(&e))
    return "NoStabilizingSolution";
  if (dynamic_cast<const UnstablePencilError*>(&e)) return "UnstablePencil";
  if (dynamic_cast<const SingularJ4Error*>(&e)) return "SingularJ4";
  if (dynamic_cast<const SingularPencilError*>(&e)) return "SingularPencil";
  if (dynamic_cast<const SingularMatrixError*>(&e)) return "SingularMatrix";
  if (dynamic_cast<const NonzeroFeedthroughError*>(&e))
    return "NonzeroFeedthrough";
  if (dynamic_cast<const ArnoldiBreakdownError*>(&e))
    return "ArnoldiBreakdown";
  if (dynamic_cast<const EmptySpectralDataError*>(&e))
    return "EmptySpectralData";
  if (dynamic_cast<const SingularShiftedSystemError*>(&e))
    return "SingularShiftedSystem";
  if (dynamic_cast<const IndefiniteProjectedSolutionError*>(&e))
    return "IndefiniteProjectedSolution";
  if (dynamic_cast<const DivergenceDetectedError*>(&e))
    return "DivergenceDetected";
  if (dynamic_cast<const UnstableClosedLoopError*>(&e))
    return "UnstableClosedLoop";
  if (dynamic_cast<const NotStabilizableError*>(&e)) return "NotStabilizable";
  if (dynamic_cast<const ZeroImaginaryShiftError*>(&e))
    return "ZeroImaginaryShift";
  return "Error";
}

// Input-class failures exit 1; everything else in the hierarchy is a
// numerical failure and exits 2.
int exit_code_for(const riccati::Error& e) {
  using namespace riccati;
  const bool input = dynamic_cast<const MissingFileError*>(&e) ||
                     dynamic_cast<const DimensionMismatchError*>(&e) ||
                     dynamic_cast<const SingularJ4Error*>(&e) ||
                     dynamic_cast<const SizeCapExceededError*>(&e) ||
                     dynamic_cast<const NonzeroFeedthroughError*>(&e);
  return input ? 1 : 2;
}

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct RunOutcome {
  riccati::Matrix z;
  riccati::Matrix k;
  ordered_json iterations;  // integer for rksm, {outer, inner_total} object
  long outer = 0;
  long inner_steps = -1;  // kn-adi only
  int rank = 0;
  double final_rel = 0.0;
  std::vector<double> history;
  bool converged = false;
  double wall_time_s = 0.0;
};

RunOutcome run_solver(const riccati::Index1Descriptor& model,
                      const std::optional<riccati::Matrix>& k0,
                      const SolveConfig& cfg) {
  RunOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.method == "rksm") {
    riccati::RksmOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    opts.tol_trunc = cfg.trunc_tol;
    opts.k0 = k0;
    opts.dense_cap = cfg.dense_cap;
    opts.seed = cfg.seed;
    riccati::RksmResult res = riccati::rksm_solve(model, opts);
    out.z = res.factor.z;
    out.k = res.k;
    out.iterations = res.report.iterations;
    out.outer = res.report.iterations;
    out.rank = res.report.rank;
    out.history = res.report.residual_history;
    out.converged = res.report.converged;
  } else {
    riccati::KnAdiOptions opts;
    opts.tol_outer = cfg.tol;
    opts.max_outer = cfg.max_iter;
    opts.tol_trunc = cfg.trunc_tol;
    opts.k0 = k0;
    opts.dense_cap = cfg.dense_cap;
    riccati::KnAdiResult res = riccati::kn_solve(model, opts);
    out.z = res.z;
    out.k = res.k;
    out.iterations = ordered_json{{"outer", res.report.outer_iterations},
                                  {"inner_total", res.report.inner_total}};
    out.outer = res.report.outer_iterations;
    out.inner_steps = res.report.inner_total;
    out.rank = res.report.rank;
    out.history = res.report.residual_history;
    out.converged = res.report.converged;
  }
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  out.final_rel = out.history.empty() ? 0.0 : out.history.back();
  return out;
}

void write_solver_artifacts(const fs::path& dir, const SolveConfig& cfg,
                            const RunOutcome& out) {
  fs::create_directories(dir);
  riccati::write_matrix_market_array(dir / "Z.mtx", out.z);
  riccati::write_matrix_market_array(dir / "K.mtx", out.k);

  ordered_json rep;
  rep["model"] = cfg.model_path;
  rep["method"] = cfg.method;
  rep["tolerance"] = cfg.tol;
  rep["max_iterations"] = cfg.max_iter;
  rep["truncation_tolerance"] = cfg.trunc_tol;
  rep["seed"] = cfg.seed;
  rep["iterations"] = out.iterations;
  rep["numerical_rank"] = out.rank;
  rep["final_relative_residual"] = out.final_rel;
  rep["residual_history"] = out.history;
  rep["converged"] = out.converged;
  rep["wall_time_s"] = out.wall_time_s;

  std::ofstream f(dir / "report.json", std::ios::binary);
  f << rep.dump(2) << "\n";
}

std::optional<riccati::Matrix> load_gain(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return riccati::read_matrix_market_dense(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

int cmd_solve(const SolveConfig& cfg) {
  std::optional<riccati::Index1Descriptor> model;
  std::optional<riccati::Matrix> k0;
  try {
    model.emplace(riccati::load_model(cfg.model_path));
    k0 = load_gain(cfg.k0_path);
  } catch (const riccati::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    const RunOutcome out = run_solver(*model, k0, cfg);
    write_solver_artifacts(cfg.out_dir, cfg, out);
    if (!out.converged) {
      std::cerr << "did not converge: relative residual "
                << fmt_short(out.final_rel) << " after " << out.outer
                << " iterations\n";
      return 2;
    }
    return 0;
  } catch (const riccati::Error& e) {
    std::cerr << "error [" << error_name(e) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_compare(const SolveConfig& base, const std::vector<std::string>& methods,
                std::vector<double> tols) {
  for (const std::string& m : methods) {
    if (m != "rksm" && m != "kn-adi") {
      std::cerr << "error: unknown method '" << m << "'\n";
      return 1;
    }
  }
  if (tols.empty()) tols.push_back(base.tol);
  for (double t : tols) {
    if (!(t > 0.0 && t < 1.0)) {
      std::cerr << "error: tolerance " << fmt_short(t)
                << " outside (0, 1)\n";
      return 1;
    }
  }

  std::optional<riccati::Index1Descriptor> model;
  std::optional<riccati::Matrix> k0;
  try {
    model.emplace(riccati::load_model(base.model_path));
    k0 = load_gain(base.k0_path);
  } catch (const riccati::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string model_name = fs::path(base.model_path).stem().string();
  std::string csv =
      "model,method,tolerance,iterations,inner_steps,numerical_rank,"
      "wall_time_s,status\n";
  bool any_failed = false;

  for (const std::string& method : methods) {
    for (double tol : tols) {
      SolveConfig cfg = base;
      cfg.method = method;
      cfg.tol = tol;
      std::string row = model_name + "," + method + "," + fmt17(tol) + ",";
      try {
        const RunOutcome out = run_solver(*model, k0, cfg);
        const fs::path run_dir = fs::path(base.out_dir) /
                                 (method + "_tol" + fmt_short(tol));
        write_solver_artifacts(run_dir, cfg, out);
        row += std::to_string(out.outer) + ",";
        row += (out.inner_steps >= 0 ? std::to_string(out.inner_steps)
                                     : std::string()) +
               ",";
        row += std::to_string(out.rank) + "," + fmt17(out.wall_time_s) + ",";
        row += out.converged ? "converged" : "MaxIterations";
        if (!out.converged) any_failed = true;
      } catch (const riccati::Error& e) {
        std::cerr << method << " tol " << fmt_short(tol) << " failed ["
                  << error_name(e) << "]: " << e.what() << "\n";
        row += ",,,," + error_name(e);
        any_failed = true;
      }
      csv += row + "\n";
    }
  }

  fs::create_directories(base.out_dir);
  write_text(fs::path(base.out_dir) / "compare.csv", csv);
  return any_failed ? 2 : 0;
}

int cmd_eigs(const SolveConfig& cfg) {
  std::optional<riccati::Index1Descriptor> model;
  std::optional<riccati::Matrix> k0;
  try {
    model.emplace(riccati::load_model(cfg.model_path));
    k0 = load_gain(cfg.k0_path);
  } catch (const riccati::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    const std::vector<riccati::Complex> open =
        riccati::closed_loop_spectrum(*model, riccati::Matrix(),
                                      cfg.dense_cap);
    std::string csv;
    if (!k0) {
      csv = "re,im\n";
      for (const riccati::Complex& v : open) {
        csv += fmt17(v.real()) + "," + fmt17(v.imag()) + "\n";
      }
    } else {
      const std::vector<riccati::Complex> closed =
          riccati::closed_loop_spectrum(*model, *k0, cfg.dense_cap);
      csv = "re_open,im_open,re_closed,im_closed\n";
      const size_t rows = std::max(open.size(), closed.size());
      for (size_t i = 0; i < rows; ++i) {
        if (i < open.size()) {
          csv += fmt17(open[i].real()) + "," + fmt17(open[i].imag());
        } else {
          csv += ",";
        }
        csv += ",";
        if (i < closed.size()) {
          csv += fmt17(closed[i].real()) + "," + fmt17(closed[i].imag());
        } else {
          csv += ",";
        }
        csv += "\n";
      }
    }
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "eigs.csv", csv);
    return 0;
  } catch (const riccati::Error& e) {
    std::cerr << "error [" << error_name(e) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_step(const SolveConfig& cfg, int input_idx, int output_idx,
             double t_final, double dt) {
  std::optional<riccati::Index1Descriptor> model;
  std::optional<riccati::Matrix> k0;
  try {
    model.emplace(riccati::load_model(cfg.model_path));
    k0 = load_gain(cfg.k0_path);
  } catch (const riccati::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    const riccati::TimeSeries series = riccati::step_response(
        *model, k0 ? *k0 : riccati::Matrix(), input_idx, output_idx, t_final,
        dt, cfg.dense_cap);
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "step.csv",
               riccati::time_series_csv(series));
    if (series.blew_up) {
      std::cerr << "response magnitude exceeded 1e12 at t = "
                << fmt_short(series.t(series.t.size() - 1))
                << "; series truncated\n";
      return 2;
    }
    return 0;
  } catch (const riccati::Error& e) {
    std::cerr << "error [" << error_name(e) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_stabilize(const SolveConfig& cfg) {
  std::optional<riccati::Index1Descriptor> model;
  std::optional<riccati::Matrix> k0;
  try {
    model.emplace(riccati::load_model(cfg.model_path));
    k0 = load_gain(cfg.k0_path);
  } catch (const riccati::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    const RunOutcome out = run_solver(*model, k0, cfg);
    const fs::path dir(cfg.out_dir);
    write_solver_artifacts(dir, cfg, out);

    const riccati::Index1Descriptor closed =
        riccati::assemble_closed_loop(*model, out.k);
    riccati::write_matrix_market_coordinate(dir / "E1.mtx", closed.e1);
    riccati::write_matrix_market_coordinate(dir / "J1.mtx", closed.j1);
    riccati::write_matrix_market_coordinate(dir / "J2.mtx", closed.j2);
    riccati::write_matrix_market_coordinate(dir / "J3.mtx", closed.j3);
    riccati::write_matrix_market_coordinate(dir / "J4.mtx", closed.j4);
    riccati::write_matrix_market_coordinate(dir / "B1.mtx", closed.b1);
    riccati::write_matrix_market_coordinate(dir / "B2.mtx", closed.b2);
    riccati::write_matrix_market_coordinate(dir / "C1.mtx", closed.c1);
    riccati::write_matrix_market_coordinate(dir / "C2.mtx", closed.c2);

    std::string manifest = "# closed-loop model: J1 <- J1 - B1 K, J3 <- J3 - B2 K\n";
    manifest += "n1 = " + std::to_string(closed.n1()) + "\n";
    manifest += "n2 = " + std::to_string(closed.n2()) + "\n";
    manifest += "p = " + std::to_string(closed.num_inputs()) + "\n";
    manifest += "m = " + std::to_string(closed.num_outputs()) + "\n";
    for (const char* name : {"E1", "J1", "J2", "J3", "J4", "B1", "B2", "C1",
                             "C2"}) {
      manifest += std::string(name) + " = " + name + ".mtx\n";
    }
    if (closed.d.size() != 0) {
      riccati::write_matrix_market_array(dir / "D.mtx", closed.d);
      manifest += "D = D.mtx\n";
    }
    write_text(dir / "closed_model.txt", manifest);

    if (closed.n1() <= cfg.dense_cap) {
      const std::vector<riccati::Complex> spec =
          riccati::closed_loop_spectrum(*model, out.k, cfg.dense_cap);
      std::string csv = "re,im\n";
      for (const riccati::Complex& v : spec) {
        csv += fmt17(v.real()) + "," + fmt17(v.imag()) + "\n";
      }
      write_text(dir / "closed_spectrum.csv", csv);
    }

    if (!out.converged) {
      std::cerr << "did not converge: relative residual "
                << fmt_short(out.final_rel)
                << "; the emitted gain may not stabilize\n";
      return 2;
    }
    return 0;
  } catch (const riccati::Error& e) {
    std::cerr << "error [" << error_name(e) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  // The solvers assume single-threaded BLAS; nested threading also ruins
  // the byte-for-byte determinism the artifact contract promises.
  setenv("OPENBLAS_NUM_THREADS", "1", 1);
  setenv("OMP_NUM_THREADS", "1", 1);

  CLI::App app{
      "Low-rank Riccati solvers for large sparse index-1 descriptor systems"};
  app.require_subcommand(1);

  SolveConfig solve_cfg;
  CLI::App* solve = app.add_subcommand(
      "solve", "run one solver; writes Z.mtx, K.mtx, report.json");
  add_solver_flags(solve, solve_cfg, true);

  SolveConfig cmp_cfg;
  std::vector<std::string> cmp_methods;
  std::vector<double> cmp_tols;
  CLI::App* compare = app.add_subcommand(
      "compare", "run a method/tolerance grid; writes compare.csv");
  add_solver_flags(compare, cmp_cfg, false);
  compare->add_option("--methods", cmp_methods, "solvers to run")->required();
  compare->add_option("--tols", cmp_tols,
                      "tolerances to run (default: the --tol value)");

  SolveConfig eigs_cfg;
  CLI::App* eigs = app.add_subcommand(
      "eigs", "write the finite spectrum as CSV (closed loop with --k0)");
  eigs->add_option("--model", eigs_cfg.model_path, "model manifest path")
      ->required();
  eigs->add_option("--k0", eigs_cfg.k0_path,
                   "feedback gain; adds closed-loop columns");
  eigs->add_option("--out-dir", eigs_cfg.out_dir, "output directory");
  eigs->add_option("--dense-cap", eigs_cfg.dense_cap,
                   "row cap for the dense reduction");

  SolveConfig step_cfg;
  int input_idx = 0;
  int output_idx = 0;
  double t_final = 20.0;
  double dt = 1e-2;
  CLI::App* step = app.add_subcommand(
      "step", "simulate a unit-step response; writes step.csv");
  step->add_option("--model", step_cfg.model_path, "model manifest path")
      ->required();
  step->add_option("--k0", step_cfg.k0_path,
                   "feedback gain applied before simulating");
  step->add_option("--input", input_idx, "input channel (0-based)");
  step->add_option("--output", output_idx, "output channel (0-based)");
  step->add_option("--t-final", t_final, "simulation horizon in seconds");
  step->add_option("--dt", dt, "time step in seconds");
  step->add_option("--out-dir", step_cfg.out_dir, "output directory");
  step->add_option("--dense-cap", step_cfg.dense_cap,
                   "row cap for the dense reduction");

  SolveConfig stab_cfg;
  CLI::App* stabilize = app.add_subcommand(
      "stabilize", "solve, then write the closed-loop model and spectrum");
  add_solver_flags(stabilize, stab_cfg, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) {
      const std::string msg = validate_config(solve_cfg, true);
      if (!msg.empty()) {
        std::cerr << "error: " << msg << "\n";
        return 1;
      }
      return cmd_solve(solve_cfg);
    }
    if (compare->parsed()) {
      const std::string msg = validate_config(cmp_cfg, false);
      if (!msg.empty()) {
        std::cerr << "error: " << msg << "\n";
        return 1;
      }
      return cmd_compare(cmp_cfg, cmp_methods, cmp_tols);
    }
    if (eigs->parsed()) return cmd_eigs(eigs_cfg);
    if (step->parsed()) {
      if (!(dt > 0.0) || !(t_final >= 0.0)) {
        std::cerr << "error: need --dt > 0 and --t-final >= 0\n";
        return 1;
      }
      return cmd_step(step_cfg, input_idx, output_idx, t_final, dt);
    }
    if (stabilize->parsed()) {
      const std::string msg = validate_config(stab_cfg, true);
      if (!msg.empty()) {
        std::cerr << "error: " << msg << "\n";
        return 1;
      }
      return cmd_stabilize(stab_cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
