// Piecewise-stationary K-armed Gaussian bandit. One arm's mean may jump once
// per episode, either through a Bernoulli per-slot change process or through
// an explicit schedule of planted changes. Supports single-arm pulls and
// averaged multi-arm pulls.
#ifndef TSGE_ENV_HPP_
#define TSGE_ENV_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsge/math.hpp"

namespace tsge {

// Stand-in for the -inf mean of a dummy (padding) arm.
inline constexpr double kDummyArmMean = -1e6;

struct ForcedChange {
    long long slot = -1;     // fires before the pull of this global slot
    long long episode = -1;  // alternatively, fires on the episode's first slot
    int arm = -1;            // -1: drawn uniformly among real arms
    double delta = std::numeric_limits<double>::quiet_NaN();  // NaN: drawn
};

struct EnvConfig {
    int num_arms = 2;
    double sigma = 0.1;
    long long horizon = 100000;
    long long episode_len = 0;  // 0: floor(sqrt(horizon))
    double change_prob_per_slot = 0.0;
    double change_min = 0.2;
    double change_max = 0.5;
    double reward_cap = 1.0;
    std::vector<double> initial_means;
    std::uint64_t rng_seed = 1;
    int padded_arms = 0;  // dummy arms at the tail of initial_means
    bool enforce_assumption4 = false;
    std::vector<ForcedChange> forced_changes;

    long long episode_len_or_default() const {
        if (episode_len > 0) return episode_len;
        return static_cast<long long>(std::sqrt(static_cast<double>(horizon)));
    }

    int real_arms() const { return num_arms - padded_arms; }

    void validate() const {
        if (num_arms < 1) throw std::invalid_argument("num_arms must be >= 1");
        if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
        if (change_prob_per_slot < 0.0 || change_prob_per_slot > 1.0)
            throw std::invalid_argument("change_prob_per_slot outside [0,1]");
        if (change_min <= 0.0 || change_max < change_min)
            throw std::invalid_argument("bad change magnitude range");
        if (change_min < 2.0 * sigma - 1e-12)
            throw std::invalid_argument("change_min must be >= 2*sigma");
        if (static_cast<int>(initial_means.size()) != num_arms)
            throw std::invalid_argument("initial_means size != num_arms");
        for (int i = 0; i < real_arms(); ++i) {
            if (initial_means[i] > reward_cap + 1e-12)
                throw std::invalid_argument("initial mean above reward_cap");
        }
        if (enforce_assumption4 &&
            change_prob_per_slot < assumption4_min_change_prob(horizon) - 1e-12)
            throw std::invalid_argument("p_b below the Assumption-4 floor");
    }

    static double assumption4_min_change_prob(long long horizon) {
        const double t = static_cast<double>(horizon);
        const double denom = std::sqrt(t) - std::pow(t, 0.4);
        if (denom <= 0.0) return 1.0;
        return 1.0 - std::pow(1.0 / t, 1.0 / denom);
    }
};

/// Rounds the arm count up to the next power of two by appending dummy arms
/// with a constant, hopeless mean. Dummy arms never change.
inline EnvConfig pad_to_power_of_two(EnvConfig cfg) {
    int k = 1;
    while (k < cfg.num_arms) k *= 2;
    const int extra = k - cfg.num_arms;
    cfg.initial_means.resize(cfg.initial_means.size() + extra, kDummyArmMean);
    cfg.num_arms = k;
    cfg.padded_arms += extra;
    return cfg;
}

struct PullOutcome {
    double reward = 0.0;
    double normalized_reward = 0.0;  // clamp(reward / reward_cap, 0, 1)
    long long slot = 0;
};

struct ChangeEvent {
    long long slot = 0;
    int arm = 0;
    double old_mean = 0.0;
    double new_mean = 0.0;
};

class GaussianBanditEnv {
  public:
    explicit GaussianBanditEnv(EnvConfig cfg)
        : cfg_(std::move(cfg)),
          means_(cfg_.initial_means),
          reward_rng_(mix_seed(cfg_.rng_seed, 0)),
          change_rng_(mix_seed(cfg_.rng_seed, 1)) {
        cfg_.validate();
        base_episode_len_ = cfg_.episode_len_or_default();
        current_episode_len_ = base_episode_len_;
    }

    const EnvConfig& config() const { return cfg_; }
    const std::vector<double>& current_means() const { return means_; }
    long long t() const { return t_; }
    long long episode_index() const { return episode_; }
    bool episode_changed_flag() const { return episode_changed_; }
    const std::vector<ChangeEvent>& change_log() const { return change_log_; }

    /// Switches the change process on; episode 1 starts at the next slot.
    /// Called once the initial exploration (ETC) is over.
    void begin_episodes() {
        episodes_active_ = true;
        episode_ = 0;
        slots_into_episode_ = current_episode_len_;  // roll over immediately
    }

    /// A GE insertion stretches the running episode; the change-process pause
    /// still resets only at the episode boundary.
    void extend_current_episode(long long extra_slots) {
        if (extra_slots < 0) throw std::invalid_argument("negative extension");
        current_episode_len_ += extra_slots;
    }

    /// Advances time by one slot and runs the per-slot change process.
    /// Must be called exactly once per slot, before any pull.
    void advance_slot() {
        if (episodes_active_ && slots_into_episode_ >= current_episode_len_) {
            ++episode_;
            slots_into_episode_ = 0;
            current_episode_len_ = base_episode_len_;
            episode_changed_ = false;
        }
        ++t_;
        ++slots_into_episode_;
        if (!episodes_active_ || episode_changed_) return;

        for (const auto& fc : cfg_.forced_changes) {
            const bool fire = (fc.slot == t_) ||
                              (fc.episode > 0 && fc.episode == episode_ &&
                               slots_into_episode_ == 1);
            if (fire) {
                apply_change(fc.arm, fc.delta);
                return;
            }
        }
        if (cfg_.change_prob_per_slot > 0.0) {
            std::bernoulli_distribution coin(cfg_.change_prob_per_slot);
            if (coin(change_rng_)) apply_change(-1, std::numeric_limits<double>::quiet_NaN());
        }
    }

    PullOutcome pull(int arm) {
        if (arm < 0 || arm >= cfg_.num_arms)
            throw std::out_of_range("arm index out of range");
        std::normal_distribution<double> noise(means_[arm], cfg_.sigma);
        return make_outcome(noise(reward_rng_));
    }

    /// Plays every arm in the set at once; the observed reward is the average
    /// of one fresh sample per member.
    PullOutcome pull_set(std::span<const int> arms) {
        if (arms.empty()) throw std::invalid_argument("empty arm set");
        double sum = 0.0;
        for (int a : arms) {
            if (a < 0 || a >= cfg_.num_arms)
                throw std::out_of_range("arm index out of range");
            std::normal_distribution<double> noise(means_[a], cfg_.sigma);
            sum += noise(reward_rng_);
        }
        return make_outcome(sum / static_cast<double>(arms.size()));
    }

    /// Best achievable mean right now. For the regret tracker only.
    double oracle_best_mean() const {
        double best = -std::numeric_limits<double>::infinity();
        for (double m : means_) best = std::max(best, m);
        return best;
    }

  private:
    PullOutcome make_outcome(double reward) const {
        PullOutcome out;
        out.reward = reward;
        out.normalized_reward = clamp01(reward / cfg_.reward_cap);
        out.slot = t_;
        return out;
    }

    void apply_change(int arm, double delta) {
        if (arm < 0) {
            std::uniform_int_distribution<int> pick(0, cfg_.real_arms() - 1);
            arm = pick(change_rng_);
        }
        if (arm >= cfg_.real_arms())
            throw std::invalid_argument("forced change targets a dummy arm");
        if (std::isnan(delta)) {
            std::uniform_real_distribution<double> mag(cfg_.change_min,
                                                       cfg_.change_max);
            std::bernoulli_distribution sign(0.5);
            delta = mag(change_rng_) * (sign(change_rng_) ? 1.0 : -1.0);
        }
        ChangeEvent ev;
        ev.slot = t_;
        ev.arm = arm;
        ev.old_mean = means_[arm];
        ev.new_mean = std::min(means_[arm] + delta, cfg_.reward_cap);
        means_[arm] = ev.new_mean;
        change_log_.push_back(ev);
        episode_changed_ = true;
    }

    EnvConfig cfg_;
    std::vector<double> means_;
    long long t_ = 0;
    long long episode_ = 0;
    long long slots_into_episode_ = 0;
    long long base_episode_len_ = 0;
    long long current_episode_len_ = 0;
    bool episodes_active_ = false;
    bool episode_changed_ = false;
    Rng reward_rng_;
    Rng change_rng_;
    std::vector<ChangeEvent> change_log_;
};

}  // namespace tsge

#endif  // TSGE_ENV_HPP_
