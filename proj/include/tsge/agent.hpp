// The TS-GE agent: explore-then-commit initialization, Thompson-sampling
// slots, broadcast-probing change detection, and the binary-coded group
// exploration that pins down which arm changed.
//
// Arms carry 0-based codes. Arm i belongs to super-arm B_k (k = 1..d) iff bit
// k of i's binary code is set, so every arm has a unique d-bit membership
// signature and the all-zero signature denotes arm 0 ("broadcast fired but no
// super-arm fired").
#ifndef TSGE_AGENT_HPP_
#define TSGE_AGENT_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "tsge/env.hpp"
#include "tsge/math.hpp"
#include "tsge/trace.hpp"

namespace tsge {

/// Plays per arm needed in ETC so that an arm is well-localized (estimate
/// within delta of the truth) except with probability p_loc_fail:
/// ceil(ln(1/p) / (2 delta^2)).
inline long long etc_length(double delta, double p_loc_fail) {
    if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
    if (p_loc_fail <= 0.0 || p_loc_fail > 1.0)
        throw std::invalid_argument("p_loc_fail must lie in (0, 1]");
    return static_cast<long long>(
        std::ceil(std::log(1.0 / p_loc_fail) / (2.0 * delta * delta)));
}

struct TsgeConfig {
    double delta = 0.05;         // localization half-width
    double loc_fail_prob = 1e-5; // p_L
    long long horizon = 100000;
    int num_arms = 8;
    long long n_ge = 0;          // plays per super-arm in GE; 0: floor(sqrt(T))
    double bp_threshold = 0.0;   // 0: 4*delta
    double ge_threshold = 0.0;   // 0: 2*delta
    std::uint64_t rng_seed = 1;

    long long episode_len() const {  // T_l = floor(sqrt(T))
        return static_cast<long long>(std::sqrt(static_cast<double>(horizon)));
    }
    long long bp_len() const {  // T_BP = floor(T^(2/5))
        return static_cast<long long>(
            std::pow(static_cast<double>(horizon), 0.4) + 1e-9);
    }
    long long ts_len() const { return episode_len() - bp_len(); }
    long long etc_plays() const { return etc_length(delta, loc_fail_prob); }
    long long ge_plays() const { return n_ge > 0 ? n_ge : episode_len(); }
    double bp_threshold_or_default() const {
        return bp_threshold > 0.0 ? bp_threshold : 4.0 * delta;
    }
    double ge_threshold_or_default() const {
        return ge_threshold > 0.0 ? ge_threshold : 2.0 * delta;
    }

    void validate() const {
        if (num_arms < 2 || (num_arms & (num_arms - 1)) != 0)
            throw std::invalid_argument("num_arms must be a power of two >= 2");
        if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
        if (ts_len() <= 0)
            throw std::invalid_argument("horizon too short: T_TS <= 0");
    }
};

struct ArmBelief {
    double alpha = 1.0;
    double beta = 1.0;
    double mu_hat = 0.0;
    double mu_sum = 0.0;
    long long pull_count = 0;
    long long last_probed_slot = 0;
};

struct SuperArm {
    int bit_index = 0;  // 1-based, as in the membership rule
    std::vector<int> members;
};

/// d = log2(K) super-arms over arm codes 0..K-1.
inline std::vector<SuperArm> construct_super_arms(int num_arms) {
    if (num_arms < 2 || (num_arms & (num_arms - 1)) != 0)
        throw std::invalid_argument("num_arms must be a power of two >= 2");
    int d = 0;
    while ((1 << d) < num_arms) ++d;
    std::vector<SuperArm> supers(d);
    for (int k = 1; k <= d; ++k) {
        supers[k - 1].bit_index = k;
        for (int i = 0; i < num_arms; ++i) {
            if (i & (1 << (k - 1))) supers[k - 1].members.push_back(i);
        }
    }
    return supers;
}

/// One Thompson step: sample Beta(alpha_i, beta_i) per arm, return the argmax
/// (ties to the lowest index).
inline int ts_select(std::span<const ArmBelief> beliefs, Rng& rng) {
    int best = 0;
    double best_theta = -1.0;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        const double theta = beta_sample(rng, beliefs[i].alpha, beliefs[i].beta);
        if (theta > best_theta) {
            best_theta = theta;
            best = static_cast<int>(i);
        }
    }
    return best;
}

/// Posterior and running-mean update after a single-arm play. The Bernoulli
/// trial succeeds with probability R_pi; a success raises alpha so that
/// better arms draw larger posterior samples.
inline void ts_update(ArmBelief& belief, const PullOutcome& outcome, Rng& rng) {
    std::bernoulli_distribution trial(outcome.normalized_reward);
    const bool success = trial(rng);
    belief.alpha += success ? 1.0 : 0.0;
    belief.beta += success ? 0.0 : 1.0;
    belief.mu_sum += outcome.reward;
    belief.pull_count += 1;
    belief.mu_hat = belief.mu_sum / static_cast<double>(belief.pull_count);
    belief.last_probed_slot = outcome.slot;
}

/// Broadcast change test. The per-arm estimates and the broadcast average
/// both estimate the mean-of-means, so their gap is compared on the summed
/// scale where a single arm's jump appears at full magnitude:
/// |sum_i mu_hat_i - K * bp_mean| >= threshold.
inline bool bp_detect(std::span<const ArmBelief> beliefs, double bp_mean,
                      double threshold) {
    double sum = 0.0;
    for (const auto& b : beliefs) sum += b.mu_hat;
    const double k = static_cast<double>(beliefs.size());
    return std::abs(sum - k * bp_mean) >= threshold;
}

inline double super_arm_estimate(const SuperArm& sa,
                                 std::span<const ArmBelief> beliefs) {
    double s = 0.0;
    for (int a : sa.members) s += beliefs[a].mu_hat;
    return s / static_cast<double>(sa.members.size());
}

/// Membership signature -> changed arm. Bit k fires iff the super-arm's
/// pre-GE estimate and its observed GE average (both per-arm scale) differ by
/// at least the threshold. The all-zero signature maps to arm 0.
inline int ge_identify(std::span<const SuperArm> super_arms,
                       std::span<const double> ge_means,
                       std::span<const ArmBelief> beliefs, double threshold) {
    if (super_arms.size() != ge_means.size())
        throw std::invalid_argument("one GE average per super-arm required");
    int code = 0;
    for (std::size_t k = 0; k < super_arms.size(); ++k) {
        const double est = super_arm_estimate(super_arms[k], beliefs);
        if (std::abs(est - ge_means[k]) >= threshold)
            code |= 1 << (super_arms[k].bit_index - 1);
    }
    return code;
}

/// Re-estimates the changed arm from the GE observations and the other arms'
/// (unchanged) estimates: for each containing super-arm,
/// mu_j^(k) = |B_k| * ge_mean_k - sum_{i in B_k, i != j} mu_hat_i, averaged
/// over k. Arm 0 sits in no super-arm and is re-estimated from the broadcast
/// mean instead. The repaired arm inherits the Beta parameters of the arm
/// with the nearest estimate, and its running mean restarts so stale samples
/// stop contributing.
inline void repair_changed_arm(std::vector<ArmBelief>& beliefs, int changed_arm,
                               std::span<const SuperArm> super_arms,
                               std::span<const double> ge_means,
                               double bp_mean) {
    const int k_arms = static_cast<int>(beliefs.size());
    if (changed_arm < 0 || changed_arm >= k_arms)
        throw std::out_of_range("changed arm out of range");

    double estimate = 0.0;
    int contributing = 0;
    for (std::size_t k = 0; k < super_arms.size(); ++k) {
        const auto& members = super_arms[k].members;
        bool contains = false;
        double others = 0.0;
        for (int a : members) {
            if (a == changed_arm)
                contains = true;
            else
                others += beliefs[a].mu_hat;
        }
        if (!contains) continue;
        estimate += static_cast<double>(members.size()) * ge_means[k] - others;
        ++contributing;
    }
    if (contributing > 0) {
        estimate /= static_cast<double>(contributing);
    } else {
        double others = 0.0;
        for (int i = 0; i < k_arms; ++i)
            if (i != changed_arm) others += beliefs[i].mu_hat;
        estimate = static_cast<double>(k_arms) * bp_mean - others;
    }

    ArmBelief& target = beliefs[changed_arm];
    target.mu_hat = estimate;
    target.mu_sum = estimate;
    target.pull_count = 1;

    int nearest = -1;
    double best_gap = 0.0;
    for (int i = 0; i < k_arms; ++i) {
        if (i == changed_arm) continue;
        const double gap = std::abs(beliefs[i].mu_hat - estimate);
        if (nearest < 0 || gap < best_gap) {
            nearest = i;
            best_gap = gap;
        }
    }
    if (nearest >= 0) {
        target.alpha = beliefs[nearest].alpha;
        target.beta = beliefs[nearest].beta;
    }
}

struct EpisodeReport {
    long long episode = 0;
    bool detected = false;
    int identified_arm = -1;
    long long slots_used = 0;
};

/// Runs the full schedule against any environment exposing advance_slot /
/// pull / pull_set / t. Trace rows go to the sink when one is installed.
template <typename Env>
class TsgeAgent {
  public:
    using TraceSink = std::function<void(const TraceRow&, const PullOutcome&)>;

    explicit TsgeAgent(TsgeConfig cfg)
        : cfg_(cfg),
          beliefs_(cfg.num_arms),
          super_arms_(construct_super_arms(cfg.num_arms)),
          rng_(mix_seed(cfg.rng_seed, 17)) {
        cfg_.validate();
        all_arms_.resize(cfg_.num_arms);
        std::iota(all_arms_.begin(), all_arms_.end(), 0);
    }

    const TsgeConfig& config() const { return cfg_; }
    const std::vector<ArmBelief>& beliefs() const { return beliefs_; }
    const std::vector<SuperArm>& super_arms() const { return super_arms_; }
    void set_trace_sink(TraceSink sink) { sink_ = std::move(sink); }

    /// ETC: each arm in round-robin, etc_plays() times. Mean estimates start
    /// here; the Beta parameters start fresh at (1, 1) regardless.
    void run_etc(Env& env) {
        const long long plays = cfg_.etc_plays();
        for (long long round = 0; round < plays; ++round) {
            for (int arm = 0; arm < cfg_.num_arms; ++arm) {
                if (env.t() >= cfg_.horizon) return;
                env.advance_slot();
                const PullOutcome out = env.pull(arm);
                ArmBelief& b = beliefs_[arm];
                b.mu_sum += out.reward;
                b.pull_count += 1;
                b.mu_hat = b.mu_sum / static_cast<double>(b.pull_count);
                b.last_probed_slot = out.slot;
                emit(out.slot, Phase::Etc, arm, out);
            }
        }
    }

    /// One episode: T_TS Thompson slots, T_BP broadcast slots, then the GE
    /// subroutine iff the broadcast test fired. Every arm is probed at least
    /// once through the broadcast slots.
    EpisodeReport run_episode(Env& env) {
        EpisodeReport report;
        const long long start = env.t();

        for (long long i = 0; i < cfg_.ts_len() && env.t() < cfg_.horizon; ++i) {
            env.advance_slot();
            const int arm = ts_select(beliefs_, rng_);
            const PullOutcome out = env.pull(arm);
            ts_update(beliefs_[arm], out, rng_);
            emit(out.slot, Phase::Ts, arm, out);
        }

        double bp_sum = 0.0;
        long long bp_n = 0;
        for (long long i = 0; i < cfg_.bp_len() && env.t() < cfg_.horizon; ++i) {
            env.advance_slot();
            const PullOutcome out = env.pull_set(all_arms_);
            bp_sum += out.reward;
            ++bp_n;
            for (auto& b : beliefs_) b.last_probed_slot = out.slot;
            emit(out.slot, Phase::Bp, -1, out);
        }

        report.episode = episode_counter_++;
        if (bp_n == cfg_.bp_len()) {
            const double bp_mean = bp_sum / static_cast<double>(bp_n);
            if (bp_detect(beliefs_, bp_mean, cfg_.bp_threshold_or_default())) {
                report.detected = true;
                report.identified_arm = run_ge(env, bp_mean);
            }
        }
        report.slots_used = env.t() - start;
        return report;
    }

    /// ETC followed by episodes until the horizon is spent.
    std::vector<EpisodeReport> run(Env& env) {
        std::vector<EpisodeReport> reports;
        run_etc(env);
        env.begin_episodes();
        while (env.t() < cfg_.horizon) reports.push_back(run_episode(env));
        return reports;
    }

  private:
    int run_ge(Env& env, double bp_mean) {
        const long long plays = cfg_.ge_plays();
        const int d = static_cast<int>(super_arms_.size());
        env.extend_current_episode(static_cast<long long>(d) * plays);

        std::vector<double> ge_means(d, 0.0);
        for (int k = 0; k < d; ++k) {
            double sum = 0.0;
            long long n = 0;
            for (long long i = 0; i < plays && env.t() < cfg_.horizon; ++i) {
                env.advance_slot();
                const PullOutcome out = env.pull_set(super_arms_[k].members);
                sum += out.reward;
                ++n;
                for (int a : super_arms_[k].members)
                    beliefs_[a].last_probed_slot = out.slot;
                emit(out.slot, Phase::Ge, super_arms_[k].bit_index, out);
            }
            if (n < plays) return -1;  // horizon ran out mid-GE
            ge_means[k] = sum / static_cast<double>(n);
        }

        const int arm = ge_identify(super_arms_, ge_means, beliefs_,
                                    cfg_.ge_threshold_or_default());
        repair_changed_arm(beliefs_, arm, super_arms_, ge_means, bp_mean);
        return arm;
    }

    void emit(long long slot, Phase phase, int action, const PullOutcome& out) {
        if (!sink_) return;
        TraceRow row;
        row.slot = slot;
        row.phase = phase;
        row.action = action;
        row.reward = out.reward;
        sink_(row, out);
    }

    TsgeConfig cfg_;
    std::vector<ArmBelief> beliefs_;
    std::vector<SuperArm> super_arms_;
    std::vector<int> all_arms_;
    Rng rng_;
    TraceSink sink_;
    long long episode_counter_ = 1;
};

}  // namespace tsge

#endif  // TSGE_AGENT_HPP_
