// Config-file driven entry points behind the CLI: parse one experiment
// config (JSON), run it, persist CSV/JSON outputs deterministically.
#ifndef TSGE_EXPERIMENTS_HPP_
#define TSGE_EXPERIMENTS_HPP_

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "tsge/harness.hpp"
#include "tsge/io.hpp"

namespace tsge {

using nlohmann::json;

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<std::string> output_dir;
    std::optional<int> threads;
};

namespace detail {

inline EnvConfig env_from_json(const json& j) {
    EnvConfig cfg;
    cfg.num_arms = j.value("num_arms", cfg.num_arms);
    cfg.sigma = j.value("sigma", cfg.sigma);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.episode_len = j.value("episode_len", cfg.episode_len);
    cfg.change_prob_per_slot = j.value("change_prob_per_slot", 0.0);
    cfg.change_min = j.value("change_min", cfg.change_min);
    cfg.change_max = j.value("change_max", cfg.change_max);
    cfg.reward_cap = j.value("reward_cap", cfg.reward_cap);
    cfg.enforce_assumption4 = j.value("enforce_assumption4", false);
    if (j.contains("initial_means"))
        cfg.initial_means = j["initial_means"].get<std::vector<double>>();
    if (j.contains("forced_changes")) {
        for (const auto& fc : j["forced_changes"]) {
            ForcedChange f;
            f.slot = fc.value("slot", static_cast<long long>(-1));
            f.episode = fc.value("episode", static_cast<long long>(-1));
            f.arm = fc.value("arm", -1);
            if (fc.contains("delta")) f.delta = fc["delta"].get<double>();
            cfg.forced_changes.push_back(f);
        }
    }
    return cfg;
}

inline TsgeConfig tsge_from_json(const json& j, long long horizon,
                                 int num_arms) {
    TsgeConfig cfg;
    cfg.horizon = horizon;
    cfg.num_arms = num_arms;
    cfg.delta = j.value("delta", cfg.delta);
    cfg.loc_fail_prob = j.value("loc_fail_prob", 1.0 / horizon);
    cfg.n_ge = j.value("n_ge", static_cast<long long>(0));
    cfg.bp_threshold = j.value("bp_threshold", 0.0);
    cfg.ge_threshold = j.value("ge_threshold", 0.0);
    return cfg;
}

inline MucbConfig mucb_from_json(const json& j, long long horizon,
                                 int num_arms, double sigma) {
    MucbConfig cfg;
    cfg.num_arms = num_arms;
    cfg.window = j.value("window", 100);
    const double gamma_scale = j.value("gamma_scale", 1.0);
    cfg.exploration_rate = j.value(
        "gamma", MucbConfig::default_gamma(num_arms, horizon, gamma_scale));
    cfg.threshold_b = j.value(
        "threshold_b", MucbConfig::default_threshold(num_arms, horizon,
                                                     cfg.window, sigma));
    return cfg;
}

inline std::string json_error(const std::string& code, const std::string& msg) {
    json j;
    j["error"] = code;
    j["message"] = msg;
    return j.dump();
}

}  // namespace detail

inline void write_race_outputs(const std::filesystem::path& dir,
                               const RaceResult& res, const RaceScenario& rs,
                               std::uint64_t base_seed) {
    {
        CsvWriter csv(dir / "regret_curves.csv", "regret_race mean curves",
                      {"slot", "algorithm", "mean_cumulative_regret"});
        for (const auto& algo : res.algos) {
            for (std::size_t i = 0; i < algo.mean_checkpoints.size(); ++i) {
                csv.write_row({fmt_double(static_cast<double>(
                                   (i + 1) * res.checkpoint_every)),
                               algo.name, fmt_double(algo.mean_checkpoints[i])});
            }
        }
    }
    json summary;
    summary["base_seed"] = base_seed;
    summary["checkpoint_every"] = res.checkpoint_every;
    summary["ordering_holds"] = res.ordering_holds;
    summary["ci_separated"] = res.ci_separated;
    for (const auto& algo : res.algos) {
        summary["final"][algo.name] = {{"mean", algo.mean_final},
                                       {"ci_half_width", algo.ci_half_width}};
    }
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");

    // Reference trace of replication 0 plus the environment change log.
    std::vector<TraceRow> trace;
    RunCurve ref = run_tsge_once(rs, base_seed, &trace);
    EnvConfig env_cfg = rs.env;
    env_cfg.rng_seed = mix_seed(base_seed, 100);
    GaussianBanditEnv env(env_cfg);
    {
        CsvWriter csv(dir / "trace_rep0.csv", "per-slot trace (tsge, rep 0)",
                      {"slot", "phase", "action", "reward"});
        for (const auto& row : trace) {
            csv.write_row({std::to_string(row.slot), phase_name(row.phase),
                           std::to_string(row.action), fmt_double(row.reward)});
        }
    }
    {
        CsvWriter csv(dir / "episodes_rep0.csv", "per-episode reports (tsge)",
                      {"episode", "detected", "identified_arm"});
        for (const auto& ep : ref.episodes) {
            csv.write_row({std::to_string(ep.episode),
                           ep.detected ? "1" : "0",
                           std::to_string(ep.identified_arm)});
        }
    }
}

inline void write_change_log_csv(const std::filesystem::path& path,
                                 std::span<const ChangeEvent> log) {
    CsvWriter csv(path, "environment change log",
                  {"slot", "arm", "old_mean", "new_mean"});
    for (const auto& ev : log) {
        csv.write_row({std::to_string(ev.slot), std::to_string(ev.arm),
                       fmt_double(ev.old_mean), fmt_double(ev.new_mean)});
    }
}

inline int run_bound_comparison_experiment(const json& cfg,
                                           const std::filesystem::path& dir) {
    const json a = cfg.value("analysis", json::object());
    const std::vector<int> arm_counts =
        a.value("arm_counts", std::vector<int>{100, 500, 1000});
    const double horizon = a.value("horizon", 1e5);
    const double num_changes = a.value("num_changes", 10.0);
    const int grid_points = a.value("grid_points", 200);

    json crossings = json::array();
    for (int k : arm_counts) {
        BoundParams p;
        p.num_arms = k;
        p.horizon = horizon;
        p.num_changes = num_changes;
        CsvWriter csv(dir / ("bounds_K" + std::to_string(k) + ".csv"),
                      "regret bound curves",
                      {"t", "tsge_bound", "competitor_bound"});
        for (int i = 0; i <= grid_points; ++i) {
            const double t =
                2.0 * std::pow(horizon / 2.0,
                               static_cast<double>(i) / grid_points);
            csv.write_numeric_row({t, regret_bound_tsge(p, t),
                                   regret_bound_competitor(p, t)});
        }
        const CrossingPoints cp = crossing_points(p, horizon);
        json record;
        record["num_arms"] = k;
        record["t1"] = cp.t1;
        if (cp.t2) record["t2"] = *cp.t2; else record["t2"] = nullptr;
        if (cp.t3) record["t3"] = *cp.t3; else record["t3"] = nullptr;
        crossings.push_back(record);
    }
    write_text_file(dir / "crossings.json", crossings.dump(2) + "\n");
    return 0;
}

inline int run_regret_race_experiment(const json& cfg,
                                      const std::filesystem::path& dir,
                                      std::uint64_t base_seed, int replications,
                                      int threads) {
    RaceScenario rs = default_race_scenario(
        cfg.value("env", json::object()).value("horizon",
                                               static_cast<long long>(100000)));
    if (cfg.contains("env")) rs.env = detail::env_from_json(cfg["env"]);
    if (cfg.contains("tsge"))
        rs.tsge = detail::tsge_from_json(cfg["tsge"], rs.env.horizon,
                                         rs.env.num_arms);
    if (cfg.contains("mucb"))
        rs.mucb = detail::mucb_from_json(cfg["mucb"], rs.env.horizon,
                                         rs.env.num_arms, rs.env.sigma);
    rs.checkpoint_every = cfg.value("checkpoint_every",
                                    static_cast<long long>(500));
    rs.env.validate();

    const RaceResult res = run_regret_race_core(rs, replications, base_seed,
                                                threads);
    write_race_outputs(dir, res, rs, base_seed);

    EnvConfig env_cfg = rs.env;
    env_cfg.rng_seed = mix_seed(base_seed, 100);
    GaussianBanditEnv env(env_cfg);
    env.begin_episodes();
    while (env.t() < env_cfg.horizon) env.advance_slot();
    write_change_log_csv(dir / "change_log_rep0.csv", env.change_log());
    return 0;
}

inline int run_validation_suite_experiment(const json& cfg,
                                           const std::filesystem::path& dir,
                                           std::uint64_t base_seed,
                                           int threads) {
    json report;
    bool all_pass = true;

    {
        const json j = cfg.value("lemma1", json::object());
        const Lemma1Result r = validate_lemma1(
            j.value("delta", 0.1), j.value("loc_fail_prob", 0.05),
            j.value("trials", static_cast<long long>(10000)),
            j.value("sigma", 0.5), base_seed);
        report["lemma1"] = {{"n_etc", r.n_etc},
                            {"observed_fail_rate", r.observed_fail_rate},
                            {"allowed", r.allowed},
                            {"pass", r.pass}};
        all_pass &= r.pass;
    }

    TsgeConfig agent_cfg;
    EnvConfig env_cfg;
    {
        const json j = cfg.value("detection", json::object());
        env_cfg.num_arms = j.value("num_arms", 8);
        env_cfg.sigma = j.value("sigma", 0.1);
        env_cfg.horizon = j.value("horizon", static_cast<long long>(100000));
        env_cfg.reward_cap = 1.0;
        env_cfg.initial_means.assign(env_cfg.num_arms, 0.5);
        for (int i = 0; i < env_cfg.num_arms; ++i)
            env_cfg.initial_means[i] = 0.35 + 0.03 * i;
        agent_cfg.num_arms = env_cfg.num_arms;
        agent_cfg.horizon = env_cfg.horizon;
        agent_cfg.delta = j.value("delta", 0.05);
        agent_cfg.loc_fail_prob =
            j.value("loc_fail_prob", 1.0 / env_cfg.horizon);
    }

    {
        const json j = cfg.value("false_alarm", json::object());
        const FalseAlarmResult r = validate_false_alarm(
            agent_cfg, env_cfg,
            j.value("episodes", static_cast<long long>(10000)), base_seed,
            threads);
        report["false_alarm"] = {{"episodes", r.episodes},
                                 {"false_alarms", r.false_alarms},
                                 {"observed_rate", r.observed_rate},
                                 {"mean_bound", r.mean_bound},
                                 {"pass", r.pass}};
        all_pass &= r.pass;
    }
    {
        const json j = cfg.value("ts_detection", json::object());
        const DetectionResult r = validate_ts_detection(
            agent_cfg, env_cfg,
            j.value("change_magnitude", 2.0 * env_cfg.sigma),
            j.value("plant_episode", static_cast<long long>(3)),
            j.value("runs", 1000), base_seed, threads);
        report["ts_detection"] = {{"runs", r.runs},
                                  {"detected", r.detected},
                                  {"observed_rate", r.observed_rate},
                                  {"closed_form_miss", r.closed_form_miss},
                                  {"pass", r.pass}};
        all_pass &= r.pass;
    }
    {
        const json j = cfg.value("bp_cases", json::object());
        const auto results = validate_bp_cases(
            agent_cfg, env_cfg, j.value("change_magnitude", 0.5),
            j.value("t_minus_early", static_cast<long long>(10)),
            j.value("t_minus_late", static_cast<long long>(90)),
            j.value("runs_per_case", 250), base_seed, threads);
        json arr = json::array();
        for (const auto& r : results) {
            arr.push_back({{"case", static_cast<int>(r.which)},
                           {"runs", r.runs},
                           {"observed_detection_rate", r.observed_rate},
                           {"closed_form_miss", r.closed_form_miss},
                           {"pass", r.pass}});
            all_pass &= r.pass;
        }
        report["bp_cases"] = arr;
    }
    {
        const Assumption4Result r = validate_assumption4(
            agent_cfg, cfg.value("bp_cases", json::object())
                           .value("change_magnitude", 0.5),
            cfg.value("assumption4_episodes", static_cast<long long>(20000)),
            base_seed);
        report["assumption4"] = {{"min_change_prob", r.min_change_prob},
                                 {"changes", r.changes},
                                 {"late_bp_changes", r.late_bp_changes},
                                 {"observed_rate", r.observed_rate},
                                 {"analytic_rate", r.analytic_rate},
                                 {"pass", r.pass}};
        all_pass &= r.pass;
    }

    report["all_pass"] = all_pass;
    write_text_file(dir / "validation.json", report.dump(2) + "\n");
    if (!all_pass) {
        std::cerr << detail::json_error("validation_failed",
                                        "see validation.json") << "\n";
        return 1;
    }
    return 0;
}

inline int run_case_study_experiment(const json& cfg,
                                     const std::filesystem::path& dir,
                                     std::uint64_t base_seed, int threads) {
    SwiptScenario scn;
    if (cfg.contains("swipt")) {
        const json& j = cfg["swipt"];
        scn.radius = j.value("radius", scn.radius);
        scn.tx_power = j.value("tx_power", scn.tx_power);
        scn.blockage_rate = j.value("blockage_rate", scn.blockage_rate);
        scn.pathloss_coeff = j.value("pathloss_coeff", scn.pathloss_coeff);
        scn.gamma_los = j.value("gamma_los", scn.gamma_los);
        scn.gamma_nlos = j.value("gamma_nlos", scn.gamma_nlos);
        scn.bandwidth = j.value("bandwidth", scn.bandwidth);
        scn.noise_power = j.value("noise_power", scn.noise_power);
        scn.harvest_eff = j.value("harvest_eff", scn.harvest_eff);
        scn.num_devices = j.value("num_devices", scn.num_devices);
        scn.slot_seconds = j.value("slot_seconds", scn.slot_seconds);
    }
    const long long horizon = cfg.value("horizon",
                                        static_cast<long long>(100000));
    const long long flip_interval =
        cfg.value("flip_interval", static_cast<long long>(3000));
    const std::vector<int> sweep =
        cfg.value("device_sweep", std::vector<int>{4, 8, 16, 32, 64});
    const int seeds = cfg.value("seeds_per_point", 3);

    CaseStudyAgentConfig agents;
    agents.tsge = detail::tsge_from_json(cfg.value("tsge", json::object()),
                                         horizon, sweep.front());
    agents.mucb = detail::mucb_from_json(cfg.value("mucb", json::object()),
                                         horizon, sweep.front(), 0.2);
    agents.mucb_gamma_scale =
        cfg.value("mucb", json::object()).value("gamma_scale", 1.0);

    const CaseStudyResult res = run_case_study_core(
        scn, sweep, horizon, flip_interval, agents, seeds, base_seed, threads);

    {
        CsvWriter csv(dir / "case_study.csv", "SWIPT case study sweep",
                      {"K_dev", "algorithm", "mean_throughput_bps",
                       "min_harvested_watts"});
        for (const auto& p : res.points) {
            csv.write_row({std::to_string(p.num_devices), p.algorithm,
                           fmt_double(p.mean_throughput_bps),
                           fmt_double(p.min_harvested_watts)});
        }
    }
    {
        CsvWriter csv(dir / "case_study_per_seed.csv",
                      "SWIPT case study, one row per (sweep point, seed, algo)",
                      {"K_dev", "algorithm", "throughput_bps",
                       "min_harvested_watts"});
        for (const auto& p : res.per_seed) {
            csv.write_row({std::to_string(p.num_devices), p.algorithm,
                           fmt_double(p.mean_throughput_bps),
                           fmt_double(p.min_harvested_watts)});
        }
    }

    // Geometry oracle cross-check on the base scenario.
    const json g = cfg.value("geometry_validation", json::object());
    const GeometryResult geo = validate_geometry(
        scn, g.value("realizations", static_cast<long long>(100000)),
        g.value("ccdf_grid", 20), base_seed);
    {
        CsvWriter csv(dir / "geometry_validation.csv",
                      "closed forms vs Monte Carlo",
                      {"x", "ccdf_los_closed", "ccdf_los_mc",
                       "ccdf_los_geometric_display", "ccdf_nlos_closed",
                       "ccdf_nlos_mc"});
        for (std::size_t i = 0; i < geo.ccdf_grid.size(); ++i) {
            csv.write_numeric_row({geo.ccdf_grid[i], geo.ccdf_los_closed[i],
                                   geo.ccdf_los_mc[i],
                                   geo.ccdf_los_geometric[i],
                                   geo.ccdf_nlos_closed[i],
                                   geo.ccdf_nlos_mc[i]});
        }
    }
    json summary;
    summary["oracle_rate_bps"] = res.oracle_rate_bps;
    summary["crossover"] = res.crossover;
    summary["tsge_energy_positive"] = res.tsge_energy_positive;
    summary["mucb_energy_zero_somewhere"] = res.mucb_energy_zero_somewhere;
    summary["geometry_all_pass"] = geo.all_pass;
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    return geo.all_pass ? 0 : 1;
}

/// Entry point used by the CLI: loads a config, applies overrides, runs the
/// experiment, returns the process exit code.
inline int run_experiment_file(const std::string& config_path,
                               const CliOverrides& overrides) {
    json cfg;
    try {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open " + config_path);
        in >> cfg;
    } catch (const std::exception& e) {
        std::cerr << detail::json_error("config_unreadable", e.what()) << "\n";
        return 2;
    }
    try {
        const std::string kind = cfg.value("experiment", "");
        std::uint64_t seed = cfg.value("base_seed",
                                       static_cast<std::uint64_t>(1));
        if (overrides.seed) seed = *overrides.seed;
        int replications = cfg.value("replications", 1);
        if (overrides.replications) replications = *overrides.replications;
        int threads = cfg.value("threads", 1);
        if (overrides.threads) threads = *overrides.threads;
        std::filesystem::path dir = cfg.value("output_dir", std::string("out"));
        if (overrides.output_dir) dir = *overrides.output_dir;
        std::filesystem::create_directories(dir);

        if (kind == "bound_comparison")
            return run_bound_comparison_experiment(cfg, dir);
        if (kind == "regret_race")
            return run_regret_race_experiment(cfg, dir, seed, replications,
                                              threads);
        if (kind == "validation_suite")
            return run_validation_suite_experiment(cfg, dir, seed, threads);
        if (kind == "case_study")
            return run_case_study_experiment(cfg, dir, seed, threads);
        std::cerr << detail::json_error("unknown_experiment", kind) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << detail::json_error("experiment_failed", e.what()) << "\n";
        return 1;
    }
}

}  // namespace tsge

#endif  // TSGE_EXPERIMENTS_HPP_
