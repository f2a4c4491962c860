// Comparator agents: classical Thompson sampling (never probes, never
// detects) and M-UCB (windowed change test on the played arm's own samples,
// full history flush on detection).
#ifndef TSGE_BASELINES_HPP_
#define TSGE_BASELINES_HPP_

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tsge/agent.hpp"
#include "tsge/env.hpp"
#include "tsge/math.hpp"
#include "tsge/trace.hpp"

namespace tsge {

/// Stationarity-oblivious Thompson sampling. Shares the selection/update
/// kernel with the TS phase of TsgeAgent.
template <typename Env>
class ClassicTsAgent {
  public:
    ClassicTsAgent(int num_arms, std::uint64_t seed)
        : beliefs_(num_arms), rng_(mix_seed(seed, 17)) {
        if (num_arms < 1) throw std::invalid_argument("need at least one arm");
    }

    const std::vector<ArmBelief>& beliefs() const { return beliefs_; }

    /// One slot: Beta-sample selection, pull, Bernoulli posterior update.
    int step(Env& env) {
        env.advance_slot();
        const int arm = ts_select(beliefs_, rng_);
        const PullOutcome out = env.pull(arm);
        ts_update(beliefs_[arm], out, rng_);
        last_outcome_ = out;
        return arm;
    }

    const PullOutcome& last_outcome() const { return last_outcome_; }

  private:
    std::vector<ArmBelief> beliefs_;
    Rng rng_;
    PullOutcome last_outcome_;
};

struct MucbConfig {
    int num_arms = 8;
    int window = 100;           // w, even
    double threshold_b = 10.0;  // window-sum deviation that triggers a restart
    double exploration_rate = 0.05;  // gamma
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (num_arms < 1) throw std::invalid_argument("need at least one arm");
        if (window < 2 || window % 2 != 0)
            throw std::invalid_argument("window must be even and >= 2");
        if (exploration_rate < 0.0 || exploration_rate > 1.0)
            throw std::invalid_argument("gamma outside [0,1]");
    }

    /// gamma = min(1, scale * sqrt(K log T / T)).
    static double default_gamma(int num_arms, long long horizon,
                                double scale = 1.0) {
        const double t = static_cast<double>(horizon);
        return std::min(1.0, scale * std::sqrt(num_arms * std::log(t) / t));
    }

    /// Threshold with the recommended shape b = c * sqrt((w/2) log(2 K T^2)),
    /// scaled to the reward noise level (c = 2 sigma matches a Gaussian
    /// reward model; the bounded-reward literature uses c = 1).
    static double default_threshold(int num_arms, long long horizon, int window,
                                    double noise_scale) {
        const double t = static_cast<double>(horizon);
        return 2.0 * noise_scale *
               std::sqrt(0.5 * window * std::log(2.0 * num_arms * t * t));
    }
};

/// M-UCB: UCB1 with deterministic round-robin forced exploration; after each
/// pull, if the pulled arm's last w samples split into halves whose sums
/// differ by more than b, every arm's history is flushed and exploration
/// restarts.
template <typename Env>
class MucbAgent {
  public:
    explicit MucbAgent(MucbConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        reset_history();
    }

    const MucbConfig& config() const { return cfg_; }
    long long restarts() const { return restarts_; }
    long long pulls(int arm) const { return counts_[arm]; }
    const PullOutcome& last_outcome() const { return last_outcome_; }

    int step(Env& env) {
        env.advance_slot();
        const int arm = choose_arm();
        const PullOutcome out = env.pull(arm);
        last_outcome_ = out;
        update(arm, out.reward);
        ++tau_;
        ++t_;
        return arm;
    }

  private:
    int choose_arm() const {
        const int k = cfg_.num_arms;
        if (cfg_.exploration_rate > 0.0) {
            const long long period = std::max<long long>(
                k, static_cast<long long>(
                       std::floor(k / cfg_.exploration_rate)));
            const long long phase = t_ % period;
            if (phase < k) return static_cast<int>(phase);
        }
        int best = 0;
        double best_index = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i) {
            double index;
            if (counts_[i] == 0) {
                index = std::numeric_limits<double>::infinity();
            } else {
                const double mean = sums_[i] / static_cast<double>(counts_[i]);
                index = mean + std::sqrt(2.0 *
                                         std::log(std::max<double>(tau_, 2)) /
                                         static_cast<double>(counts_[i]));
            }
            if (index > best_index) {
                best_index = index;
                best = i;
            }
        }
        return best;
    }

    void update(int arm, double reward) {
        sums_[arm] += reward;
        counts_[arm] += 1;
        auto& win = windows_[arm];
        win.push_back(reward);
        if (static_cast<int>(win.size()) > cfg_.window) win.pop_front();
        if (static_cast<int>(win.size()) == cfg_.window &&
            std::isfinite(cfg_.threshold_b)) {
            const int half = cfg_.window / 2;
            double first = 0.0, second = 0.0;
            for (int i = 0; i < half; ++i) first += win[i];
            for (int i = half; i < cfg_.window; ++i) second += win[i];
            if (std::abs(second - first) > cfg_.threshold_b) {
                reset_history();
                ++restarts_;
            }
        }
    }

    void reset_history() {
        sums_.assign(cfg_.num_arms, 0.0);
        counts_.assign(cfg_.num_arms, 0);
        windows_.assign(cfg_.num_arms, {});
        tau_ = 0;
    }

    MucbConfig cfg_;
    std::vector<double> sums_;
    std::vector<long long> counts_;
    std::vector<std::deque<double>> windows_;
    long long tau_ = 0;  // slots since the last restart
    long long t_ = 0;    // total slots, drives the forced-exploration cycle
    long long restarts_ = 0;
    PullOutcome last_outcome_;
};

}  // namespace tsge

#endif  // TSGE_BASELINES_HPP_
