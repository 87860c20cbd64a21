#include "mifb/experiments.hpp"

#include "mifb/errors.hpp"
#include "mifb/plot.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace mifb {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kDistTolerance = 1e-9;  // iterations-to-tolerance metric

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return out;
}

std::string csv_cell(double v) {
  return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string();
}

json schedule_json(const InertialSchedule& s) {
  return json{{"name", s.name},
              {"s", s.s()},
              {"a", std::vector<double>(s.a.data(), s.a.data() + s.a.size())},
              {"b", std::vector<double>(s.b.data(), s.b.data() + s.b.size())},
              {"gamma", s.gamma},
              {"rule", s.rule},
              {"online_cap", s.online_cap},
              {"cap_c", s.cap_c},
              {"cap_q", s.cap_q}};
}

json feasibility_json(const FeasibilityReport& r) {
  return json{{"mu", r.mu},
              {"nu", r.nu},
              {"beta_lower", r.beta_lower},
              {"alpha_bar", std::vector<double>(r.alpha_bar.data(),
                                                r.alpha_bar.data() + r.alpha_bar.size())},
              {"delta", r.delta},
              {"feasible", r.feasible},
              {"geometry", r.geometry}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << text;
}

std::vector<std::string> default_palette() {
  return {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
}

double dist_at(const RunTrace& trace, long k) {
  for (const auto& rec : trace.records) {
    if (rec.k == k) return rec.dist_to_ref;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void write_session_sidecar(const std::string& dir) {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  write_text(dir + "/session.json", json{{"written_at", buf}}.dump(2) + "\n");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }

  ExperimentConfig cfg;
  try {
    const json& p = j.at("problem");
    cfg.problem.kind = p.at("kind").get<std::string>();
    cfg.problem.seed = p.value("seed", cfg.problem.seed);
    cfg.problem.m = p.value("m", cfg.problem.m);
    cfg.problem.n = p.value("n", cfg.problem.n);
    cfg.problem.k = p.value("k", cfg.problem.k);
    cfg.problem.n1 = p.value("n1", cfg.problem.n1);
    cfg.problem.n2 = p.value("n2", cfg.problem.n2);
    cfg.problem.sparsity = p.value("sparsity", cfg.problem.sparsity);
    cfg.problem.rank = p.value("rank", cfg.problem.rank);
    cfg.problem.loss = p.value("loss", cfg.problem.loss);
    cfg.problem.noise_std = p.value("noise_std", cfg.problem.noise_std);
    cfg.problem.mu = p.value("mu", cfg.problem.mu);
    cfg.problem.mu1 = p.value("mu1", cfg.problem.mu1);
    cfg.problem.mu2 = p.value("mu2", cfg.problem.mu2);

    for (const json& s : j.at("schedules")) {
      ScheduleConfig sc;
      sc.name = s.at("name").get<std::string>();
      sc.s = s.value("s", 1);
      if (s.contains("a") && s["a"].is_array()) sc.a = s["a"].get<std::vector<double>>();
      if (s.contains("b") && s["b"].is_array()) sc.b = s["b"].get<std::vector<double>>();
      sc.gamma_frac = s.value("gamma_frac", sc.gamma_frac);
      sc.rule = s.value("rule", sc.rule);
      if (s.contains("online_cap")) sc.online_cap = s["online_cap"].get<bool>();
      sc.cap_c = s.value("cap_c", sc.cap_c);
      sc.cap_q = s.value("cap_q", sc.cap_q);
      cfg.schedules.push_back(std::move(sc));
    }

    if (j.contains("solver")) {
      const json& s = j["solver"];
      cfg.solver.tol_delta = s.value("tol_delta", cfg.solver.tol_delta);
      cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
      if (s.contains("monitors")) {
        cfg.solver.monitor_descent = s["monitors"].value("descent_A3", true);
        cfg.solver.monitor_residual = s["monitors"].value("residual_A2", true);
      }
    }
    if (j.contains("output")) {
      cfg.output.dir = j["output"].value("dir", cfg.output.dir);
      cfg.output.plot = j["output"].value("plot", cfg.output.plot);
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config schema violation: {}", e.what()));
  }

  if (cfg.schedules.empty()) throw ConfigError("config lists no schedules");
  for (const auto& s : cfg.schedules) {
    if (!(s.gamma_frac > 0 && s.gamma_frac < 1)) {
      throw ConfigError(fmt::format("schedule '{}': gamma_frac must lie in ]0, 1[", s.name));
    }
    if (s.rule != "theorem22" && s.rule != "bound24") {
      throw ConfigError(fmt::format("schedule '{}': unknown rule '{}'", s.name, s.rule));
    }
    if (s.s < 1) throw ConfigError(fmt::format("schedule '{}': s must be >= 1", s.name));
    if (!s.a.empty() && static_cast<int>(s.a.size()) != s.s) {
      throw ConfigError(fmt::format("schedule '{}': a has wrong length", s.name));
    }
    if (!s.b.empty() && s.b.size() != s.a.size()) {
      throw ConfigError(fmt::format("schedule '{}': b has wrong length", s.name));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

CompositeProblem build_problem(const ProblemConfig& cfg) {
  if (cfg.kind == "sparse_regression") {
    return make_sparse_regression(cfg.seed, cfg.m, cfg.n, cfg.k, cfg.noise_std, cfg.mu);
  }
  if (cfg.kind == "pcp") {
    return make_pcp(cfg.seed, cfg.n1, cfg.n2, cfg.sparsity, cfg.rank, cfg.noise_std, cfg.mu1,
                    cfg.mu2);
  }
  if (cfg.kind == "sparse_svm") {
    SvmLoss loss;
    if (cfg.loss == "squared_hinge") {
      loss = SvmLoss::SquaredHinge;
    } else if (cfg.loss == "logistic") {
      loss = SvmLoss::Logistic;
    } else {
      throw ConfigError("unknown svm loss: " + cfg.loss);
    }
    return make_sparse_svm(cfg.seed, cfg.m, cfg.n, loss, cfg.mu);
  }
  throw ConfigError("unknown problem kind: " + cfg.kind);
}

InertialSchedule materialize_schedule(const ScheduleConfig& cfg, double lipschitz) {
  InertialSchedule sched;
  sched.name = cfg.name;
  sched.gamma = cfg.gamma_frac / lipschitz;
  sched.rule = cfg.rule;
  sched.online_cap = cfg.online_cap.value_or(cfg.rule == "bound24");
  sched.cap_c = cfg.cap_c;
  sched.cap_q = cfg.cap_q;

  if (!cfg.a.empty()) {
    sched.a = Eigen::Map<const Vector>(cfg.a.data(), static_cast<Index>(cfg.a.size()));
  } else {
    // Default coefficients: equal split of 90% of the rule's admissible sum.
    double sum;
    if (cfg.rule == "bound24") {
      sum = 0.9 * empirical_bound(sched.gamma, lipschitz).hi;
    } else {
      sum = 0.9 * theorem22_sum_bound(sched.gamma, lipschitz);
    }
    sched.a = Vector::Constant(cfg.s, sum / cfg.s);
  }
  if (!cfg.b.empty()) {
    sched.b = Eigen::Map<const Vector>(cfg.b.data(), static_cast<Index>(cfg.b.size()));
  } else {
    sched.b = sched.a;
  }
  sched.validate(lipschitz);

  if (cfg.rule == "theorem22") {
    const FeasibilityReport report = check_theorem22(sched.a, sched.b, sched.gamma, lipschitz);
    if (!report.feasible && !sched.is_fb()) {
      throw ConfigError(fmt::format(
          "schedule '{}' fails the feasibility condition: delta = {:.6g} <= 0", cfg.name,
          report.delta));
    }
  } else {
    if (sched.a != sched.b) {
      throw ConfigError(fmt::format("schedule '{}': bound24 requires b = a", cfg.name));
    }
    const OpenInterval bound = empirical_bound(sched.gamma, lipschitz);
    if (!bound.contains(sched.a.sum())) {
      throw ConfigError(fmt::format(
          "schedule '{}': sum(a) = {:.6g} outside the empirical bound ]{:.3g}, {:.3g}[",
          cfg.name, sched.a.sum(), bound.lo, bound.hi));
    }
  }
  return sched;
}

ExperimentRun run_experiment(const ExperimentConfig& cfg) {
  ExperimentRun result;
  result.problem = build_problem(cfg.problem);
  const double lipschitz = result.problem.smooth.lipschitz;

  std::vector<InertialSchedule> schedules;
  schedules.reserve(cfg.schedules.size());
  for (const auto& sc : cfg.schedules) schedules.push_back(materialize_schedule(sc, lipschitz));

  const Vector x0 = Vector::Zero(result.problem.dimension);

  // Shared limit point from a plain FB run at the first configured step.
  InertialSchedule fb;
  fb.name = "_reference";
  fb.a = Vector::Zero(1);
  fb.b = Vector::Zero(1);
  fb.gamma = schedules.front().gamma;
  result.reference = reference_solution(result.problem, fb, x0);

  const auto run_one = [&](const InertialSchedule& sched) {
    ScheduleRun out;
    out.schedule = sched;
    const auto [mu_star, nu_star] = stationary_mu_nu(sched.a, sched.b, lipschitz);
    out.feasibility = delta_report(sched.gamma, sched.a, sched.b, mu_star, nu_star, lipschitz);

    SolveOptions opts;
    opts.tol_delta = cfg.solver.tol_delta;
    opts.max_iter = cfg.solver.max_iter;
    opts.monitor_descent = cfg.solver.monitor_descent;
    opts.monitor_residual = cfg.solver.monitor_residual;
    opts.enforce_residual = cfg.solver.monitor_residual;
    // The descent inequality is only a theorem for feasible schedules.
    opts.enforce_descent = cfg.solver.monitor_descent && sched.rule == "theorem22";
    opts.reference = result.reference.x_star;

    out.trace = mifb_solve(result.problem, sched, x0, opts);
    if (auto k = detect_identification(out.trace, result.reference.signature)) {
      out.identification_iter = *k;
    }
    for (const auto& rec : out.trace.records) {
      if (rec.dist_to_ref <= kDistTolerance) {
        out.iters_to_tol = rec.k;
        break;
      }
    }
    return out;
  };

  if (schedules.size() == 1) {
    result.runs.push_back(run_one(schedules[0]));
  } else {
    std::vector<std::future<ScheduleRun>> futures;
    futures.reserve(schedules.size());
    for (const auto& sched : schedules) {
      futures.push_back(std::async(std::launch::async, run_one, std::cref(sched)));
    }
    for (auto& f : futures) result.runs.push_back(f.get());
  }
  return result;
}

void write_trace_csv(const std::string& path, const RunTrace& trace, long identification_iter) {
  std::string csv = "k,phi,delta,resid,activity,dist_to_xstar,identified\n";
  for (const auto& rec : trace.records) {
    const bool identified = identification_iter >= 0 && rec.k >= identification_iter;
    csv += fmt::format("{},{},{},{},{},{},{}\n", rec.k, csv_cell(rec.phi), csv_cell(rec.delta),
                       csv_cell(rec.resid), rec.activity.key(), csv_cell(rec.dist_to_ref),
                       identified ? 1 : 0);
  }
  write_text(path, csv);
}

namespace {

ExperimentConfig prepare(const std::string& config_path, const CliOptions& cli) {
  ExperimentConfig cfg = load_config(config_path);
  if (!cli.out_dir.empty()) cfg.output.dir = cli.out_dir;
  if (cli.no_plot) cfg.output.plot = false;
  if (cli.seed_override) cfg.problem.seed = *cli.seed_override;
  return cfg;
}

json experiment_report(const ExperimentRun& run) {
  json out;
  out["problem"] = json::parse(run.problem.metadata);
  out["reference"] = json{{"residual_norm", run.reference.residual_norm},
                          {"signature", run.reference.signature.key()},
                          {"tol_delta", 1e-14}};
  out["seed"] = run.problem.seed;
  json runs = json::array();
  for (const auto& r : run.runs) {
    runs.push_back(json{{"schedule", schedule_json(r.schedule)},
                        {"feasibility", feasibility_json(r.feasibility)},
                        {"identification_iter", r.identification_iter},
                        {"iters_to_tol", r.iters_to_tol},
                        {"iterations", r.trace.records.back().k},
                        {"final_phi", r.trace.records.back().phi},
                        {"converged", r.trace.reason == StopReason::Converged}});
  }
  out["runs"] = runs;
  return out;
}

void emit_convergence_plot(const ExperimentRun& run, const std::string& path,
                           const std::string& title) {
  std::vector<PlotSeries> series;
  const auto palette = default_palette();
  for (std::size_t i = 0; i < run.runs.size(); ++i) {
    const auto& r = run.runs[i];
    PlotSeries s;
    s.label = r.schedule.name;
    s.color = palette[i % palette.size()];
    for (const auto& rec : r.trace.records) {
      s.points.emplace_back(static_cast<double>(rec.k), rec.dist_to_ref);
    }
    if (r.identification_iter >= 0) {
      s.marker_x = static_cast<double>(r.identification_iter);
      s.marker_y = dist_at(r.trace, r.identification_iter);
    }
    series.push_back(std::move(s));
  }
  PlotStyle style;
  style.title = title;
  style.y_label = "||x_k - x*||";
  render_plot(series, style, path);
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const DivergenceError& e) {
    fmt::print(stderr, "divergence: {}\n", e.what());
    return kExitDivergence;
  } catch (const MonitorFailureError& e) {
    fmt::print(stderr, "monitor failure: {}\n", e.what());
    return kExitMonitor;
  }
}

void print_feasibility(const ExperimentRun& run) {
  for (const auto& r : run.runs) {
    fmt::print("schedule {:12s} rule {:9s} s={} gamma={:.6g} sum_a={:.4g} delta={:+.6g}{}\n",
               r.schedule.name, r.schedule.rule, r.schedule.s(), r.schedule.gamma,
               r.schedule.a.sum(), r.feasibility.delta,
               r.feasibility.feasible ? "" : " (infeasible)");
  }
}

}  // namespace

int cmd_run(const std::string& config_path, const CliOptions& cli) {
  return guarded([&]() {
    const ExperimentConfig cfg = prepare(config_path, cli);
    const ExperimentRun run = run_experiment(cfg);
    print_feasibility(run);

    fs::create_directories(cfg.output.dir);
    for (const auto& r : run.runs) {
      write_trace_csv(fmt::format("{}/trace_{}.csv", cfg.output.dir, sanitize(r.schedule.name)),
                      r.trace, r.identification_iter);
    }
    write_text(cfg.output.dir + "/feasibility.json", experiment_report(run).dump(2) + "\n");
    write_session_sidecar(cfg.output.dir);
    if (cfg.output.plot) {
      emit_convergence_plot(run, cfg.output.dir + "/convergence.svg", "distance to x*");
    }
    for (const auto& r : run.runs) {
      fmt::print("ran {:12s}: {} iterations, K={}, final dist={:.3e}\n", r.schedule.name,
                 r.trace.records.back().k, r.identification_iter,
                 r.trace.records.back().dist_to_ref);
    }
    return kExitOk;
  });
}

int cmd_compare(const std::string& config_path, const CliOptions& cli) {
  return guarded([&]() {
    const ExperimentConfig cfg = prepare(config_path, cli);
    if (cfg.schedules.size() < 2) {
      throw ConfigError("compare requires at least two schedules");
    }
    const ExperimentRun run = run_experiment(cfg);
    print_feasibility(run);

    fs::create_directories(cfg.output.dir);
    std::string csv = "schedule,rule,s,gamma,sum_a,delta,iters_to_tol,identified_k\n";
    for (const auto& r : run.runs) {
      csv += fmt::format("{},{},{},{},{},{},{},{}\n", r.schedule.name, r.schedule.rule,
                         r.schedule.s(), csv_cell(r.schedule.gamma), csv_cell(r.schedule.a.sum()),
                         csv_cell(r.feasibility.delta), r.iters_to_tol, r.identification_iter);
    }
    write_text(cfg.output.dir + "/comparison.csv", csv);
    for (const auto& r : run.runs) {
      write_trace_csv(fmt::format("{}/trace_{}.csv", cfg.output.dir, sanitize(r.schedule.name)),
                      r.trace, r.identification_iter);
    }
    write_text(cfg.output.dir + "/feasibility.json", experiment_report(run).dump(2) + "\n");
    write_session_sidecar(cfg.output.dir);
    if (cfg.output.plot) {
      emit_convergence_plot(run, cfg.output.dir + "/comparison.svg", "schedule comparison");
    }
    for (const auto& r : run.runs) {
      fmt::print("{:12s}: iters to 1e-9 = {:6d}, K = {}\n", r.schedule.name, r.iters_to_tol,
                 r.identification_iter);
    }
    return kExitOk;
  });
}

int cmd_rates(const std::string& config_path, const CliOptions& cli) {
  return guarded([&]() {
    const ExperimentConfig cfg = prepare(config_path, cli);
    const ExperimentRun run = run_experiment(cfg);
    print_feasibility(run);
    fs::create_directories(cfg.output.dir);

    bool insufficient = false;
    std::string csv =
        "schedule,s,gamma,K,rho_M,rho_obs,tau,rho_star_s1,rho_star_s2,RI_ok,Q_psd_ok,"
        "opt_a,opt_rho\n";
    std::vector<PlotSeries> series;
    const auto palette = default_palette();

    std::vector<RateReport> reports;
    for (std::size_t i = 0; i < run.runs.size(); ++i) {
      const auto& r = run.runs[i];
      RateReport report = build_reduced_matrices(run.problem, run.reference.x_star,
                                                 r.schedule.gamma, r.schedule.a, r.schedule.b);
      report.identification_iter = r.identification_iter;
      try {
        const RateFit fit = fit_observed_rate(r.trace, r.identification_iter);
        report.observed_rate = fit.rho;
        report.fit_begin = fit.begin;
        report.fit_end = fit.end;
      } catch (const InsufficientDataError& e) {
        fmt::print(stderr, "rates[{}]: {}\n", r.schedule.name, e.what());
        insufficient = true;
      }

      std::string opt_a_cell, opt_rho_cell;
      if (r.schedule.s() == 2) {
        std::vector<double> grid;
        for (double v = -0.9; v <= 0.9001; v += 0.05) grid.push_back(v);
        const InertiaOpt opt = optimize_inertia(report.h_red, 2, grid);
        opt_a_cell = fmt::format("{:.6g};{:.6g}", opt.a[0], opt.a[1]);
        opt_rho_cell = fmt::format("{:.17g}", opt.rho);
      }

      csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.schedule.name,
                         r.schedule.s(), csv_cell(r.schedule.gamma), r.identification_iter,
                         csv_cell(report.rho_m), csv_cell(report.observed_rate),
                         csv_cell(report.tau), csv_cell(report.rho_star_s1),
                         csv_cell(report.rho_star_s2), report.ri_ok ? 1 : 0,
                         report.q_psd_ok ? 1 : 0, opt_a_cell, opt_rho_cell);

      PlotSeries observed;
      observed.label = r.schedule.name + " (P)";
      observed.color = palette[i % palette.size()];
      for (const auto& rec : r.trace.records) {
        observed.points.emplace_back(static_cast<double>(rec.k), rec.dist_to_ref);
      }
      if (r.identification_iter >= 0) {
        observed.marker_x = static_cast<double>(r.identification_iter);
        observed.marker_y = dist_at(r.trace, r.identification_iter);
      }
      series.push_back(std::move(observed));

      // Dashed theoretical decay anchored just after identification.
      if (std::isfinite(report.rho_m) && r.identification_iter >= 0) {
        const long anchor = r.identification_iter + 5;
        const double d0 = dist_at(r.trace, anchor);
        if (std::isfinite(d0) && d0 > 0) {
          PlotSeries predicted;
          predicted.label = r.schedule.name + " (T)";
          predicted.color = palette[i % palette.size()];
          predicted.dashed = true;
          const long end = r.trace.records.back().k;
          for (long k = anchor; k <= end; ++k) {
            const double v = d0 * std::pow(report.rho_m, static_cast<double>(k - anchor));
            if (v < 1e-13) break;
            predicted.points.emplace_back(static_cast<double>(k), v);
          }
          series.push_back(std::move(predicted));
        }
      }
      reports.push_back(std::move(report));
    }

    write_text(cfg.output.dir + "/rates.csv", csv);
    write_text(cfg.output.dir + "/feasibility.json", experiment_report(run).dump(2) + "\n");
    write_session_sidecar(cfg.output.dir);
    if (cfg.output.plot) {
      PlotStyle style;
      style.title = "predicted vs observed local rates";
      style.y_label = "||x_k - x*||";
      render_plot(series, style, cfg.output.dir + "/rates.svg");
    }
    for (std::size_t i = 0; i < run.runs.size(); ++i) {
      fmt::print("{:12s}: K={:5d} rho_M={:.5f} rho_obs={:.5f} tau={:.4g} RI={} Qpsd={}\n",
                 run.runs[i].schedule.name, reports[i].identification_iter, reports[i].rho_m,
                 reports[i].observed_rate, reports[i].tau, reports[i].ri_ok ? 1 : 0,
                 reports[i].q_psd_ok ? 1 : 0);
    }
    return insufficient ? kExitInsufficientData : kExitOk;
  });
}

}  // namespace mifb
