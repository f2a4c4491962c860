// Experiment runner: seeded replication fan-out, the four experiment kinds
// (bound comparison, regret race, validation suite, SWIPT case study), and
// deterministic CSV/JSON persistence.
#ifndef TSGE_HARNESS_HPP_
#define TSGE_HARNESS_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tsge/agent.hpp"
#include "tsge/analysis.hpp"
#include "tsge/baselines.hpp"
#include "tsge/env.hpp"
#include "tsge/io.hpp"
#include "tsge/math.hpp"
#include "tsge/swipt.hpp"
#include "tsge/trace.hpp"

namespace tsge {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, count);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Regret race (three agents on a shared piecewise-stationary environment)
// ---------------------------------------------------------------------------

struct RaceScenario {
    EnvConfig env;
    TsgeConfig tsge;
    MucbConfig mucb;
    long long checkpoint_every = 500;
};

/// The shipped comparison scenario: a tightly packed top of arms, one low arm
/// that later jumps above everything (invisible to classical TS), and a chain
/// of deep drops on whichever arm classical TS currently favors. Change slots
/// sit on the agent's episode grid so each lands at the head of a TS phase.
inline RaceScenario default_race_scenario(long long horizon = 100000) {
    RaceScenario rs;
    rs.tsge.num_arms = 8;
    rs.tsge.horizon = horizon;
    rs.tsge.delta = 0.05;
    rs.tsge.loc_fail_prob = 1.0 / static_cast<double>(horizon);

    rs.env.num_arms = 8;
    rs.env.sigma = 0.1;
    rs.env.horizon = horizon;
    rs.env.reward_cap = 1.05;
    rs.env.initial_means = {0.60, 0.88, 0.89, 0.90, 0.91, 0.92, 0.93, 0.95};
    rs.env.change_min = 0.2;
    rs.env.change_max = 0.5;

    const long long etc_total = rs.tsge.num_arms * rs.tsge.etc_plays();
    const long long tl = rs.tsge.episode_len();
    auto slot_of = [&](long long episode) {
        return etc_total + (episode - 1) * tl + 1;
    };
    rs.env.forced_changes = {
        {slot_of(30), -1, 0, 0.42},    // dormant arm jumps above the pack
        {slot_of(60), -1, 7, -0.45},   // current favorite of classical TS
        {slot_of(90), -1, 6, -0.45},
        {slot_of(120), -1, 5, -0.45},
        {slot_of(150), -1, 4, -0.45},
    };

    rs.mucb.num_arms = 8;
    rs.mucb.window = 100;
    rs.mucb.exploration_rate = MucbConfig::default_gamma(8, horizon);
    rs.mucb.threshold_b =
        MucbConfig::default_threshold(8, horizon, rs.mucb.window, rs.env.sigma);
    rs.mucb.rng_seed = 1;
    return rs;
}

struct RunCurve {
    std::vector<double> checkpoints;
    double final_regret = 0.0;
    std::vector<EpisodeRow> episodes;  // TS-GE only
};

namespace detail {
class RegretProbe {
  public:
    RegretProbe(const GaussianBanditEnv& env, long long every)
        : env_(env), every_(every) {}

    void charge_arm(int arm) { charge(env_.current_means()[arm]); }

    void charge_set(std::span<const int> arms) {
        double s = 0.0;
        for (int a : arms) s += env_.current_means()[a];
        charge(s / static_cast<double>(arms.size()));
    }

    void charge_all() {
        double s = 0.0;
        for (double m : env_.current_means()) s += m;
        charge(s / static_cast<double>(env_.current_means().size()));
    }

    double cumulative() const { return cum_; }
    const std::vector<double>& checkpoints() const { return checkpoints_; }

  private:
    void charge(double played_mean) {
        cum_ += env_.oracle_best_mean() - played_mean;
        if (env_.t() % every_ == 0) checkpoints_.push_back(cum_);
    }

    const GaussianBanditEnv& env_;
    long long every_;
    double cum_ = 0.0;
    std::vector<double> checkpoints_;
};
}  // namespace detail

inline RunCurve run_tsge_once(const RaceScenario& rs, std::uint64_t seed,
                              std::vector<TraceRow>* trace_out = nullptr) {
    EnvConfig env_cfg = rs.env;
    env_cfg.rng_seed = mix_seed(seed, 100);
    GaussianBanditEnv env(env_cfg);
    TsgeConfig agent_cfg = rs.tsge;
    agent_cfg.rng_seed = mix_seed(seed, 200);
    TsgeAgent<GaussianBanditEnv> agent(agent_cfg);

    detail::RegretProbe probe(env, rs.checkpoint_every);
    agent.set_trace_sink([&](const TraceRow& row, const PullOutcome&) {
        switch (row.phase) {
            case Phase::Etc:
            case Phase::Ts:
                probe.charge_arm(row.action);
                break;
            case Phase::Bp:
                probe.charge_all();
                break;
            case Phase::Ge:
                probe.charge_set(agent.super_arms()[row.action - 1].members);
                break;
        }
        if (trace_out) {
            TraceRow copy = row;
            copy.regret_increment = 0.0;
            trace_out->push_back(copy);
        }
    });

    RunCurve curve;
    const auto reports = agent.run(env);
    for (const auto& rep : reports) {
        EpisodeRow row;
        row.episode = rep.episode;
        row.detected = rep.detected;
        row.identified_arm = rep.identified_arm;
        curve.episodes.push_back(row);
    }
    // Attach the true changed arm per episode from the environment log.
    curve.final_regret = probe.cumulative();
    curve.checkpoints = probe.checkpoints();
    return curve;
}

inline RunCurve run_classic_ts_once(const RaceScenario& rs, std::uint64_t seed) {
    EnvConfig env_cfg = rs.env;
    env_cfg.rng_seed = mix_seed(seed, 100);
    GaussianBanditEnv env(env_cfg);
    env.begin_episodes();
    ClassicTsAgent<GaussianBanditEnv> agent(rs.env.num_arms, mix_seed(seed, 300));
    detail::RegretProbe probe(env, rs.checkpoint_every);
    while (env.t() < rs.env.horizon) {
        const int arm = agent.step(env);
        probe.charge_arm(arm);
    }
    RunCurve curve;
    curve.final_regret = probe.cumulative();
    curve.checkpoints = probe.checkpoints();
    return curve;
}

inline RunCurve run_mucb_once(const RaceScenario& rs, std::uint64_t seed) {
    EnvConfig env_cfg = rs.env;
    env_cfg.rng_seed = mix_seed(seed, 100);
    GaussianBanditEnv env(env_cfg);
    env.begin_episodes();
    MucbConfig cfg = rs.mucb;
    cfg.rng_seed = mix_seed(seed, 400);
    MucbAgent<GaussianBanditEnv> agent(cfg);
    detail::RegretProbe probe(env, rs.checkpoint_every);
    while (env.t() < rs.env.horizon) {
        const int arm = agent.step(env);
        probe.charge_arm(arm);
    }
    RunCurve curve;
    curve.final_regret = probe.cumulative();
    curve.checkpoints = probe.checkpoints();
    return curve;
}

struct AlgoSummary {
    std::string name;
    double mean_final = 0.0;
    double ci_half_width = 0.0;  // 1.96 * se
    std::vector<double> mean_checkpoints;
};

struct RaceResult {
    std::vector<AlgoSummary> algos;  // tsge, ts, mucb
    bool ordering_holds = false;     // tsge < ts < mucb on the means
    bool ci_separated = false;       // with non-overlapping 95% CIs
    long long checkpoint_every = 0;
};

inline RaceResult run_regret_race_core(const RaceScenario& rs, int replications,
                                       std::uint64_t base_seed, int threads) {
    std::vector<double> finals[3];
    std::vector<std::vector<double>> curves[3];
    for (auto& f : finals) f.resize(replications);
    for (auto& c : curves) c.resize(replications);

    parallel_for(replications, threads, [&](int rep) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(rep);
        RunCurve tsge = run_tsge_once(rs, seed);
        RunCurve ts = run_classic_ts_once(rs, seed);
        RunCurve mucb = run_mucb_once(rs, seed);
        finals[0][rep] = tsge.final_regret;
        finals[1][rep] = ts.final_regret;
        finals[2][rep] = mucb.final_regret;
        curves[0][rep] = std::move(tsge.checkpoints);
        curves[1][rep] = std::move(ts.checkpoints);
        curves[2][rep] = std::move(mucb.checkpoints);
    });

    RaceResult result;
    result.checkpoint_every = rs.checkpoint_every;
    const char* names[3] = {"tsge", "ts", "mucb"};
    for (int a = 0; a < 3; ++a) {
        AlgoSummary s;
        s.name = names[a];
        RunningStats stats;
        for (double v : finals[a]) stats.add(v);
        s.mean_final = stats.mean();
        s.ci_half_width = 1.96 * stats.std_error();
        std::size_t n_chk = curves[a].empty() ? 0 : curves[a][0].size();
        for (const auto& c : curves[a]) n_chk = std::min(n_chk, c.size());
        s.mean_checkpoints.assign(n_chk, 0.0);
        for (const auto& c : curves[a])
            for (std::size_t i = 0; i < n_chk; ++i) s.mean_checkpoints[i] += c[i];
        for (auto& v : s.mean_checkpoints) v /= replications;
        result.algos.push_back(std::move(s));
    }
    const auto& g = result.algos;
    result.ordering_holds = g[0].mean_final < g[1].mean_final &&
                            g[1].mean_final < g[2].mean_final;
    result.ci_separated =
        g[0].mean_final + g[0].ci_half_width <
            g[1].mean_final - g[1].ci_half_width &&
        g[1].mean_final + g[1].ci_half_width <
            g[2].mean_final - g[2].ci_half_width;
    return result;
}

// ---------------------------------------------------------------------------
// Validation suite (Monte Carlo vs. closed-form evaluators)
// ---------------------------------------------------------------------------

struct Lemma1Result {
    long long n_etc = 0;
    double observed_fail_rate = 0.0;
    double allowed = 0.0;  // p_L + 3 binomial standard errors
    bool pass = false;
};

/// Plays one arm n_ETC times per trial and counts trials whose estimate ends
/// up more than delta off. Rewards are Gaussian with the 1/2-subgaussian
/// scale matching the bounded-reward localization argument.
inline Lemma1Result validate_lemma1(double delta, double p_loc_fail,
                                    long long trials, double sigma,
                                    std::uint64_t seed) {
    Lemma1Result r;
    r.n_etc = etc_length(delta, p_loc_fail);
    Rng rng(mix_seed(seed, 31));
    std::normal_distribution<double> noise(0.0, sigma);
    long long failures = 0;
    for (long long t = 0; t < trials; ++t) {
        double sum = 0.0;
        for (long long i = 0; i < r.n_etc; ++i) sum += noise(rng);
        if (std::abs(sum / static_cast<double>(r.n_etc)) > delta) ++failures;
    }
    r.observed_fail_rate = static_cast<double>(failures) / trials;
    r.allowed = p_loc_fail + 3.0 * std::sqrt(p_loc_fail * (1.0 - p_loc_fail) /
                                             static_cast<double>(trials));
    r.pass = r.observed_fail_rate <= r.allowed;
    return r;
}

struct FalseAlarmResult {
    long long episodes = 0;
    long long false_alarms = 0;
    double observed_rate = 0.0;
    double mean_bound = 0.0;  // average closed-form Q bound over episodes
    bool pass = false;        // observed <= 3 * bound (one-sided)
};

/// Runs TS-GE on stationary environments and compares the false-alarm
/// frequency against the closed-form bound evaluated at the realized
/// per-arm counts of each broadcast test.
inline FalseAlarmResult validate_false_alarm(const TsgeConfig& agent_cfg,
                                             const EnvConfig& env_template,
                                             long long target_episodes,
                                             std::uint64_t seed, int threads) {
    const long long eps_per_run =
        std::max<long long>(1, (env_template.horizon -
                                agent_cfg.num_arms * agent_cfg.etc_plays()) /
                                   agent_cfg.episode_len());
    const int runs = static_cast<int>((target_episodes + eps_per_run - 1) /
                                      eps_per_run);
    std::vector<long long> alarms(runs, 0), episodes(runs, 0);
    std::vector<double> bound_sums(runs, 0.0);

    parallel_for(runs, threads, [&](int run) {
        EnvConfig env_cfg = env_template;
        env_cfg.change_prob_per_slot = 0.0;
        env_cfg.forced_changes.clear();
        env_cfg.rng_seed = mix_seed(seed + run, 5);
        GaussianBanditEnv env(env_cfg);
        TsgeConfig cfg = agent_cfg;
        cfg.rng_seed = mix_seed(seed + run, 6);
        TsgeAgent<GaussianBanditEnv> agent(cfg);
        agent.run_etc(env);
        env.begin_episodes();
        BoundParams bp;
        bp.num_arms = cfg.num_arms;
        bp.horizon = static_cast<double>(cfg.horizon);
        bp.sigma = env_cfg.sigma;
        bp.delta = cfg.delta;
        bp.n_etc = static_cast<double>(cfg.etc_plays());
        bp.bp_len = static_cast<double>(cfg.bp_len());
        bp.ts_len = static_cast<double>(cfg.ts_len());
        bp.num_changes = 0.0;
        long long m = 0;
        while (env.t() < cfg.horizon) {
            const EpisodeReport rep = agent.run_episode(env);
            if (rep.slots_used < cfg.episode_len()) break;  // truncated tail
            ++m;
            std::vector<long long> counts;
            for (const auto& b : agent.beliefs()) counts.push_back(b.pull_count);
            bound_sums[run] += p_false_alarm(bp, sigma_nc(bp, m, counts));
            ++episodes[run];
            if (rep.detected) ++alarms[run];
        }
    });

    FalseAlarmResult r;
    double bound_total = 0.0;
    for (int i = 0; i < runs; ++i) {
        r.episodes += episodes[i];
        r.false_alarms += alarms[i];
        bound_total += bound_sums[i];
    }
    r.observed_rate =
        r.episodes > 0 ? static_cast<double>(r.false_alarms) / r.episodes : 0.0;
    r.mean_bound = r.episodes > 0 ? bound_total / r.episodes : 0.0;
    r.pass = r.observed_rate <= 3.0 * r.mean_bound;
    return r;
}

struct DetectionResult {
    long long runs = 0;
    long long detected = 0;
    double observed_rate = 0.0;
    double closed_form_miss = 0.0;
    bool pass = false;
};

/// Plants one change of the given magnitude inside the TS phase of a chosen
/// episode (uniform slot offset, uniform arm, random sign) and counts how
/// often that episode's broadcast test fires. The detector threshold mirrors
/// the missed-detection analysis, which compares the statistic against
/// 2*delta.
inline DetectionResult validate_ts_detection(const TsgeConfig& base_cfg,
                                             const EnvConfig& env_template,
                                             double magnitude,
                                             long long plant_episode, int runs,
                                             std::uint64_t seed, int threads) {
    std::vector<int> hits(runs, 0);
    TsgeConfig cfg = base_cfg;
    cfg.bp_threshold = 2.0 * cfg.delta;

    parallel_for(runs, threads, [&](int run) {
        Rng plant_rng(mix_seed(seed + run, 7));
        std::uniform_int_distribution<int> arm_pick(0, env_template.num_arms - 1);
        std::uniform_int_distribution<long long> slot_pick(0, cfg.ts_len() - 1);
        std::bernoulli_distribution sign(0.5);

        const long long etc_total = cfg.num_arms * cfg.etc_plays();
        const long long plant_slot = etc_total +
                                     (plant_episode - 1) * cfg.episode_len() +
                                     1 + slot_pick(plant_rng);
        EnvConfig env_cfg = env_template;
        env_cfg.change_prob_per_slot = 0.0;
        env_cfg.forced_changes = {{plant_slot, -1, arm_pick(plant_rng),
                                   sign(plant_rng) ? magnitude : -magnitude}};
        env_cfg.rng_seed = mix_seed(seed + run, 8);
        GaussianBanditEnv env(env_cfg);
        TsgeConfig run_cfg = cfg;
        run_cfg.rng_seed = mix_seed(seed + run, 9);
        TsgeAgent<GaussianBanditEnv> agent(run_cfg);
        agent.run_etc(env);
        env.begin_episodes();
        for (long long ep = 1; ep <= plant_episode; ++ep) {
            const EpisodeReport rep = agent.run_episode(env);
            if (ep == plant_episode && rep.detected) hits[run] = 1;
        }
    });

    DetectionResult r;
    r.runs = runs;
    for (int h : hits) r.detected += h;
    r.observed_rate = static_cast<double>(r.detected) / runs;
    BoundParams bp;
    bp.num_arms = cfg.num_arms;
    bp.horizon = static_cast<double>(cfg.horizon);
    bp.sigma = env_template.sigma;
    bp.delta = cfg.delta;
    bp.n_etc = static_cast<double>(cfg.etc_plays());
    bp.bp_len = static_cast<double>(cfg.bp_len());
    bp.ts_len = static_cast<double>(cfg.ts_len());
    bp.change_magnitude = magnitude;
    bp.num_changes = 1.0;
    r.closed_form_miss = p_missed_ts(bp, bp.n_etc / 2.0, bp.n_etc / 2.0);
    r.pass = r.observed_rate >= 0.99;
    return r;
}

struct BpCaseResult {
    BpCase which = BpCase::Case1;
    long long runs = 0;
    long long detected = 0;
    double observed_rate = 0.0;
    double closed_form_miss = 0.0;
    bool pass = false;
};

/// Plants changes at controlled offsets inside the BP phase, covering the
/// early (detectable) and late (high-miss) regions for both change signs.
inline std::vector<BpCaseResult> validate_bp_cases(
    const TsgeConfig& base_cfg, const EnvConfig& env_template, double magnitude,
    long long t_minus_early, long long t_minus_late, int runs_per_case,
    std::uint64_t seed, int threads) {
    struct CaseSpec {
        double delta;
        long long t_minus;
    };
    const std::vector<CaseSpec> specs = {
        {magnitude, t_minus_early},    // Case 1
        {magnitude, t_minus_late},     // Case 2
        {-magnitude, t_minus_early},   // Case 3
        {-magnitude, t_minus_late},    // Case 4
    };
    const long long plant_episode = 3;
    std::vector<BpCaseResult> results;

    for (std::size_t c = 0; c < specs.size(); ++c) {
        std::vector<int> hits(runs_per_case, 0);
        parallel_for(runs_per_case, threads, [&](int run) {
            Rng plant_rng(mix_seed(seed + run, 40 + c));
            std::uniform_int_distribution<int> arm_pick(
                0, env_template.num_arms - 1);
            const long long etc_total =
                base_cfg.num_arms * base_cfg.etc_plays();
            const long long plant_slot =
                etc_total + (plant_episode - 1) * base_cfg.episode_len() +
                base_cfg.ts_len() + specs[c].t_minus + 1;
            EnvConfig env_cfg = env_template;
            env_cfg.change_prob_per_slot = 0.0;
            env_cfg.forced_changes = {
                {plant_slot, -1, arm_pick(plant_rng), specs[c].delta}};
            env_cfg.rng_seed = mix_seed(seed + run, 50 + c);
            GaussianBanditEnv env(env_cfg);
            TsgeConfig run_cfg = base_cfg;
            run_cfg.rng_seed = mix_seed(seed + run, 60 + c);
            TsgeAgent<GaussianBanditEnv> agent(run_cfg);
            agent.run_etc(env);
            env.begin_episodes();
            for (long long ep = 1; ep <= plant_episode; ++ep) {
                const EpisodeReport rep = agent.run_episode(env);
                if (ep == plant_episode && rep.detected) hits[run] = 1;
            }
        });
        BpCaseResult r;
        r.runs = runs_per_case;
        for (int h : hits) r.detected += h;
        r.observed_rate = static_cast<double>(r.detected) / runs_per_case;

        BoundParams bp;
        bp.num_arms = base_cfg.num_arms;
        bp.horizon = static_cast<double>(base_cfg.horizon);
        bp.sigma = env_template.sigma;
        bp.delta = base_cfg.delta;
        bp.n_etc = static_cast<double>(base_cfg.etc_plays());
        bp.bp_len = static_cast<double>(base_cfg.bp_len());
        bp.ts_len = static_cast<double>(base_cfg.ts_len());
        bp.change_magnitude = specs[c].delta;
        bp.num_changes = 1.0;
        const auto miss = p_missed_bp(bp, static_cast<double>(specs[c].t_minus),
                                      bp.bp_len - specs[c].t_minus);
        r.which = miss.which;
        r.closed_form_miss = miss.probability;
        r.pass = miss.high_miss_regime ? r.observed_rate <= 0.05
                                       : r.observed_rate >= 0.95;
        results.push_back(r);
    }
    return results;
}

struct Assumption4Result {
    double min_change_prob = 0.0;
    long long changes = 0;
    long long late_bp_changes = 0;  // landed in the high-miss BP region
    double observed_rate = 0.0;
    double analytic_rate = 0.0;
    bool pass = false;
};

/// Under the Assumption-4 change probability, a change should land in the
/// high-miss tail of a BP phase with probability at most 1/T.
inline Assumption4Result validate_assumption4(const TsgeConfig& cfg,
                                              double magnitude,
                                              long long episodes,
                                              std::uint64_t seed) {
    Assumption4Result r;
    r.min_change_prob =
        EnvConfig::assumption4_min_change_prob(cfg.horizon);
    const double p = r.min_change_prob;
    const long long tl = cfg.episode_len();
    const long long t_star = static_cast<long long>(
        std::floor(cfg.bp_len() * (magnitude - 4.0 * cfg.delta) / magnitude));

    // Analytic probability that the change slot (truncated geometric within
    // the episode) lands at BP offset beyond t_star.
    double p_case2 = 0.0;
    double p_any = 0.0;
    for (long long s = 1; s <= tl; ++s) {
        const double ps = std::pow(1.0 - p, static_cast<double>(s - 1)) * p;
        p_any += ps;
        if (s > cfg.ts_len() + t_star) p_case2 += ps;
    }
    r.analytic_rate = p_case2 / p_any;

    Rng rng(mix_seed(seed, 77));
    std::geometric_distribution<long long> geo(p);
    for (long long ep = 0; ep < episodes; ++ep) {
        const long long slot = 1 + geo(rng);  // first success in the episode
        if (slot > tl) continue;              // no change this episode
        ++r.changes;
        if (slot > cfg.ts_len() + t_star) ++r.late_bp_changes;
    }
    r.observed_rate =
        r.changes > 0 ? static_cast<double>(r.late_bp_changes) / r.changes : 0.0;
    const double bound = 1.0 / static_cast<double>(cfg.horizon);
    const double slack =
        3.0 * std::sqrt(std::max(r.analytic_rate, bound) /
                        std::max<double>(1.0, static_cast<double>(r.changes)));
    r.pass = r.observed_rate <= bound + slack;
    return r;
}

// ---------------------------------------------------------------------------
// Geometry validation (closed forms vs. Monte Carlo over BPP realizations)
// ---------------------------------------------------------------------------

struct GeometryCheck {
    std::string name;
    double closed_form = 0.0;
    double monte_carlo = 0.0;
    double std_error = 0.0;
    bool pass = false;  // |closed - mc| <= 3 se
};

struct GeometryResult {
    std::vector<GeometryCheck> checks;
    std::vector<double> ccdf_grid;
    std::vector<double> ccdf_los_closed, ccdf_los_mc, ccdf_los_geometric;
    std::vector<double> ccdf_nlos_closed, ccdf_nlos_mc;
    bool all_pass = true;
};

inline GeometryResult validate_geometry(const SwiptScenario& scn,
                                        long long realizations,
                                        int grid_points, std::uint64_t seed) {
    GeometryResult out;
    Rng rng(mix_seed(seed, 91));
    const double peak = scn.pathloss_coeff * scn.tx_power;

    std::vector<double> min_los(realizations,
                                std::numeric_limits<double>::infinity());
    std::vector<double> min_nlos(realizations,
                                 std::numeric_limits<double>::infinity());
    long long all_los = 0;
    long long best_los = 0;
    for (long long i = 0; i < realizations; ++i) {
        const DeviceRealization real = sample_realization(scn, rng);
        bool every_los = true;
        double best_power = -1.0;
        bool best_is_los = false;
        for (int j = 0; j < scn.num_devices; ++j) {
            const double r = real.distances[j];
            if (real.los_flags[j]) {
                min_los[i] = std::min(min_los[i], r);
                const double p = peak * path_gain(r, scn.gamma_los);
                if (p > best_power) {
                    best_power = p;
                    best_is_los = true;
                }
            } else {
                every_los = false;
                min_nlos[i] = std::min(min_nlos[i], r);
                const double p = peak * path_gain(r, scn.gamma_nlos);
                if (p > best_power) {
                    best_power = p;
                    best_is_los = false;
                }
            }
        }
        if (every_los) ++all_los;
        if (best_is_los) ++best_los;
    }

    const double n = static_cast<double>(realizations);
    auto proportion_check = [&](const std::string& name, double closed,
                                double count) {
        GeometryCheck c;
        c.name = name;
        c.closed_form = closed;
        c.monte_carlo = count / n;
        c.std_error = std::sqrt(std::max(c.monte_carlo * (1.0 - c.monte_carlo),
                                         1e-12) /
                                n);
        c.pass = std::abs(c.closed_form - c.monte_carlo) <= 3.0 * c.std_error;
        return c;
    };
    out.checks.push_back(proportion_check("prob_all_los", prob_all_los(scn),
                                          static_cast<double>(all_los)));
    out.checks.push_back(proportion_check("prob_best_is_los",
                                          prob_best_is_los(scn),
                                          static_cast<double>(best_los)));

    for (int g = 1; g <= grid_points; ++g) {
        const double x = scn.radius * static_cast<double>(g) /
                         (grid_points + 1);
        out.ccdf_grid.push_back(x);
        long long los_beyond = 0, nlos_beyond = 0;
        for (long long i = 0; i < realizations; ++i) {
            if (min_los[i] >= x) ++los_beyond;
            if (min_nlos[i] >= x) ++nlos_beyond;
        }
        const double ccdf_l = nearest_los_ccdf(scn, x);
        const double ccdf_n = nearest_nlos_ccdf(scn, x);
        out.ccdf_los_closed.push_back(ccdf_l);
        out.ccdf_nlos_closed.push_back(ccdf_n);
        out.ccdf_los_geometric.push_back(nearest_los_ccdf_geometric(scn, x));
        out.ccdf_los_mc.push_back(los_beyond / n);
        out.ccdf_nlos_mc.push_back(nlos_beyond / n);
        auto c1 = proportion_check("nearest_los_ccdf@" + fmt_double(x), ccdf_l,
                                   static_cast<double>(los_beyond));
        auto c2 = proportion_check("nearest_nlos_ccdf@" + fmt_double(x), ccdf_n,
                                   static_cast<double>(nlos_beyond));
        out.checks.push_back(c1);
        out.checks.push_back(c2);
    }
    for (const auto& c : out.checks) out.all_pass = out.all_pass && c.pass;
    return out;
}

// ---------------------------------------------------------------------------
// SWIPT case study
// ---------------------------------------------------------------------------

struct CaseStudyAgentConfig {
    TsgeConfig tsge;   // num_arms/horizon filled per sweep point
    MucbConfig mucb;
    double mucb_gamma_scale = 1.0;
};

struct CaseStudyPoint {
    int num_devices = 0;
    std::string algorithm;
    double mean_throughput_bps = 0.0;
    double min_harvested_watts = 0.0;
};

struct CaseStudyResult {
    std::vector<CaseStudyPoint> points;  // averaged over seeds
    std::vector<CaseStudyPoint> per_seed;
    double oracle_rate_bps = 0.0;
    bool crossover = false;
    bool tsge_energy_positive = false;
    bool mucb_energy_zero_somewhere = false;
};

struct CaseRunOutcome {
    double throughput_bps = 0.0;
    double min_harvest_watts = 0.0;
};

inline CaseRunOutcome run_case_tsge(const SwiptScenario& scn, long long horizon,
                                    long long flip_interval,
                                    const TsgeConfig& agent_template,
                                    std::uint64_t seed) {
    SwiptNetworkEnv env(scn, horizon, flip_interval, mix_seed(seed, 500));
    TsgeConfig cfg = agent_template;
    cfg.num_arms = scn.num_devices;
    cfg.horizon = horizon;
    cfg.rng_seed = mix_seed(seed, 501);
    TsgeAgent<SwiptNetworkEnv> agent(cfg);

    double bits = 0.0;
    std::vector<double> joules(scn.num_devices, 0.0);
    const double ln2 = std::log(2.0);
    agent.set_trace_sink([&](const TraceRow& row, const PullOutcome& out) {
        switch (row.phase) {
            case Phase::Etc:
            case Phase::Ts: {
                const double power = out.reward * env.power_norm();
                bits += scn.bandwidth *
                        std::log1p(power / scn.noise_power) / ln2 *
                        scn.slot_seconds;
                break;
            }
            case Phase::Bp:
                for (int j = 0; j < scn.num_devices; ++j)
                    joules[j] += harvested_power(scn, env.distance(j),
                                                 env.is_los(j),
                                                 scn.num_devices) *
                                 scn.slot_seconds;
                break;
            case Phase::Ge: {
                const auto& members =
                    agent.super_arms()[row.action - 1].members;
                for (int j : members)
                    joules[j] += harvested_power(scn, env.distance(j),
                                                 env.is_los(j),
                                                 static_cast<int>(members.size())) *
                                 scn.slot_seconds;
                break;
            }
        }
    });
    agent.run(env);

    CaseRunOutcome out;
    const double seconds = static_cast<double>(horizon) * scn.slot_seconds;
    out.throughput_bps = bits / seconds;
    out.min_harvest_watts =
        *std::min_element(joules.begin(), joules.end()) / seconds;
    return out;
}

inline CaseRunOutcome run_case_mucb(const SwiptScenario& scn, long long horizon,
                                    long long flip_interval,
                                    const MucbConfig& agent_template,
                                    std::uint64_t seed) {
    SwiptNetworkEnv env(scn, horizon, flip_interval, mix_seed(seed, 500));
    MucbConfig cfg = agent_template;
    cfg.num_arms = scn.num_devices;
    cfg.rng_seed = mix_seed(seed, 502);
    MucbAgent<SwiptNetworkEnv> agent(cfg);

    double bits = 0.0;
    const double ln2 = std::log(2.0);
    while (env.t() < horizon) {
        agent.step(env);
        const double power = agent.last_outcome().reward * env.power_norm();
        bits += scn.bandwidth * std::log1p(power / scn.noise_power) / ln2 *
                scn.slot_seconds;
    }
    CaseRunOutcome out;
    const double seconds = static_cast<double>(horizon) * scn.slot_seconds;
    out.throughput_bps = bits / seconds;
    out.min_harvest_watts = 0.0;  // unicast only: no broadcast power transfer
    return out;
}

inline CaseStudyResult run_case_study_core(const SwiptScenario& base,
                                           std::span<const int> device_sweep,
                                           long long horizon,
                                           long long flip_interval,
                                           const CaseStudyAgentConfig& agents,
                                           int seeds, std::uint64_t base_seed,
                                           int threads) {
    CaseStudyResult result;
    struct Cell {
        RunningStats tsge_tp, tsge_min, mucb_tp, mucb_min;
        bool mucb_zero = false;
        bool tsge_positive = true;
    };
    std::vector<Cell> cells(device_sweep.size());
    std::vector<CaseStudyPoint> per_seed(device_sweep.size() * seeds * 2);

    const int jobs = static_cast<int>(device_sweep.size()) * seeds;
    parallel_for(jobs, threads, [&](int job) {
        const int sweep_idx = job / seeds;
        const int seed_idx = job % seeds;
        SwiptScenario scn = base;
        scn.num_devices = device_sweep[sweep_idx];
        const std::uint64_t seed =
            base_seed + static_cast<std::uint64_t>(job) * 1000ULL;

        MucbConfig mucb = agents.mucb;
        mucb.exploration_rate = MucbConfig::default_gamma(
            scn.num_devices, horizon, agents.mucb_gamma_scale);

        const CaseRunOutcome tsge =
            run_case_tsge(scn, horizon, flip_interval, agents.tsge, seed);
        const CaseRunOutcome mucb_out =
            run_case_mucb(scn, horizon, flip_interval, mucb, seed);
        per_seed[2 * job] = {scn.num_devices, "tsge", tsge.throughput_bps,
                             tsge.min_harvest_watts};
        per_seed[2 * job + 1] = {scn.num_devices, "mucb",
                                 mucb_out.throughput_bps,
                                 mucb_out.min_harvest_watts};
    });

    for (std::size_t i = 0; i < per_seed.size(); ++i) {
        const auto& p = per_seed[i];
        Cell& cell = cells[i / (2 * seeds)];
        if (p.algorithm == "tsge") {
            cell.tsge_tp.add(p.mean_throughput_bps);
            cell.tsge_min.add(p.min_harvested_watts);
            cell.tsge_positive = cell.tsge_positive &&
                                 p.min_harvested_watts > 0.0;
        } else {
            cell.mucb_tp.add(p.mean_throughput_bps);
            cell.mucb_min.add(p.min_harvested_watts);
            cell.mucb_zero = cell.mucb_zero || p.min_harvested_watts == 0.0;
        }
    }
    result.per_seed = std::move(per_seed);

    bool mucb_ahead_somewhere = false, tsge_ahead_somewhere = false;
    result.tsge_energy_positive = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        result.points.push_back({device_sweep[i], "tsge",
                                 cells[i].tsge_tp.mean(),
                                 cells[i].tsge_min.mean()});
        result.points.push_back({device_sweep[i], "mucb",
                                 cells[i].mucb_tp.mean(),
                                 cells[i].mucb_min.mean()});
        result.tsge_energy_positive &= cells[i].tsge_positive;
        if (i == 0 && cells[i].mucb_tp.mean() > cells[i].tsge_tp.mean())
            mucb_ahead_somewhere = true;
        if (i + 1 == cells.size() &&
            cells[i].tsge_tp.mean() > cells[i].mucb_tp.mean())
            tsge_ahead_somewhere = true;
        if (i + 1 == cells.size())
            result.mucb_energy_zero_somewhere = cells[i].mucb_zero;
    }
    result.crossover = mucb_ahead_somewhere && tsge_ahead_somewhere;
    result.oracle_rate_bps = expected_best_rate(base);
    return result;
}

}  // namespace tsge

#endif  // TSGE_HARNESS_HPP_
