// IIoT case study: closed-form stochastic-geometry quantities for a binomial
// point process on a disk with exponential LOS blockage (all-LOS probability,
// nearest LOS/NLOS distance distributions, best-link LOS probability,
// throughput and harvested-energy formulas), plus a bandit-facing network
// environment whose arms are IoT devices with flipping visibility states.
#ifndef TSGE_SWIPT_HPP_
#define TSGE_SWIPT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "tsge/env.hpp"
#include "tsge/math.hpp"

namespace tsge {

struct SwiptScenario {
    double radius = 50.0;          // R, meters
    double tx_power = 1.0;         // P_t, watts
    double blockage_rate = 0.02;   // omega, 1/m; p_LOS(r) = exp(-omega r)
    double pathloss_coeff = 1e-3;  // kappa (the path-loss "K" of the model)
    double gamma_los = 2.1;
    double gamma_nlos = 3.4;
    double bandwidth = 1e7;        // B_w, Hz
    double noise_power = 1e-13;    // N_0, watts
    double harvest_eff = 0.5;      // theta_e
    int num_devices = 10;          // K_dev
    double slot_seconds = 0.01;

    void validate() const {
        if (radius <= 0.0 || blockage_rate <= 0.0)
            throw std::invalid_argument("radius and blockage rate must be positive");
        if (!(gamma_nlos > gamma_los && gamma_los > 0.0))
            throw std::invalid_argument("need gamma_nlos > gamma_los > 0");
        if (num_devices < 1)
            throw std::invalid_argument("need at least one device");
        if (harvest_eff <= 0.0 || harvest_eff > 1.0)
            throw std::invalid_argument("harvest efficiency outside (0,1]");
    }
};

/// Path gain with the near-field cap: min(1, r^-gamma), so the received
/// power never exceeds kappa * P_t.
inline double path_gain(double r, double gamma) {
    if (r <= 1.0) return 1.0;
    return std::pow(r, -gamma);
}

/// Inner integral of the distance law conditioned on being within x:
/// I_L(x) = int_0^x exp(-omega t) (2t/x^2) dt, evaluated by quadrature (the
/// displayed antiderivative in the source material is inconsistent with the
/// integral, so the definition is integrated directly).
inline double los_within_integral(const SwiptScenario& s, double x) {
    if (x <= 0.0) return 1.0;
    const double w = s.blockage_rate;
    return integrate([w, x](double t) { return std::exp(-w * t) * 2.0 * t /
                                               (x * x); },
                     0.0, x, 1e-12);
}

/// P(a uniformly placed device is LOS and within distance x).
inline double p_los_within(const SwiptScenario& s, double x) {
    const double r2 = s.radius * s.radius;
    return (x * x / r2) * los_within_integral(s, x);
}

/// P(a uniformly placed device is NLOS and within distance x).
inline double p_nlos_within(const SwiptScenario& s, double x) {
    const double r2 = s.radius * s.radius;
    return x * x / r2 - p_los_within(s, x);
}

/// B_L: probability that every device is in LOS, [int_0^R ...]^K_dev.
inline double prob_all_los(const SwiptScenario& s) {
    return std::pow(p_los_within(s, s.radius), s.num_devices);
}

/// B_N: probability that every device is in NLOS.
inline double prob_all_nlos(const SwiptScenario& s) {
    return std::pow(p_nlos_within(s, s.radius), s.num_devices);
}

/// CCDF of the nearest-LOS-device distance via the void-probability binomial
/// sum: condition on k of K devices falling within x, each of which must be
/// NLOS for the nearest LOS device to lie beyond x.
inline double nearest_los_ccdf(const SwiptScenario& s, double x) {
    if (!(x > 0.0 && x < s.radius))
        throw std::invalid_argument("x must lie in (0, R)");
    const int k_dev = s.num_devices;
    const double p_in = x * x / (s.radius * s.radius);
    const double los_in = los_within_integral(s, x);
    double sum = 0.0;
    for (int k = 0; k <= k_dev; ++k) {
        sum += binomial_coefficient(k_dev, k) *
               std::pow(p_in * (1.0 - los_in), k) *
               std::pow(1.0 - p_in, k_dev - k);
    }
    return sum;
}

/// NLOS twin of nearest_los_ccdf.
inline double nearest_nlos_ccdf(const SwiptScenario& s, double x) {
    if (!(x > 0.0 && x < s.radius))
        throw std::invalid_argument("x must lie in (0, R)");
    const int k_dev = s.num_devices;
    const double p_in = x * x / (s.radius * s.radius);
    const double nlos_in = 1.0 - los_within_integral(s, x);
    double sum = 0.0;
    for (int k = 0; k <= k_dev; ++k) {
        sum += binomial_coefficient(k_dev, k) *
               std::pow(p_in * (1.0 - nlos_in), k) *
               std::pow(1.0 - p_in, k_dev - k);
    }
    return sum;
}

/// The displayed geometric-series closed form, kept verbatim for
/// cross-checking against the binomial-sum evaluator.
inline double nearest_los_ccdf_geometric(const SwiptScenario& s, double x) {
    const double w = s.blockage_rate;
    const double r2 = s.radius * s.radius;
    const double ul =
        2.0 * (1.0 - std::exp(-w * x * (w * x + 1.0))) / (w * w * x);
    const double ratio = x * x * ul * r2 / (r2 - x * x);
    const double frac = (std::pow(ratio, s.num_devices + 1) - 1.0) / (ratio - 1.0);
    return frac * std::pow((r2 - x * x) / r2, s.num_devices);
}

/// Unnormalized density of the nearest LOS distance (finite part):
/// f(y) = K (1 - A(y))^(K-1) A'(y) with A = p_los_within.
inline double nearest_los_density(const SwiptScenario& s, double y) {
    const double a_prime =
        std::exp(-s.blockage_rate * y) * 2.0 * y / (s.radius * s.radius);
    return s.num_devices *
           std::pow(1.0 - p_los_within(s, y), s.num_devices - 1) * a_prime;
}

inline double nearest_nlos_density(const SwiptScenario& s, double y) {
    const double b_prime = (1.0 - std::exp(-s.blockage_rate * y)) * 2.0 * y /
                           (s.radius * s.radius);
    return s.num_devices *
           std::pow(1.0 - p_nlos_within(s, y), s.num_devices - 1) * b_prime;
}

/// P_L: probability that the best fading-averaged link is LOS, i.e.
/// r_L1 <= r_N1^(gamma_N / gamma_L). Evaluated exactly for the binomial
/// point process through the joint tail
/// P(r_L1 > a, r_N1 > b) = (1 - A(a) - B(b))^K.
inline double prob_best_is_los(const SwiptScenario& s) {
    const int k_dev = s.num_devices;
    const double a_r = p_los_within(s, s.radius);
    const double exponent_ratio = s.gamma_nlos / s.gamma_los;

    // All devices LOS: the best link is trivially LOS.
    double p = std::pow(a_r, k_dev);
    if (k_dev == 1) return p + 0.0 * exponent_ratio;

    auto integrand = [&](double y) {
        const double b_y = p_nlos_within(s, y);
        const double b_prime = (1.0 - std::exp(-s.blockage_rate * y)) * 2.0 *
                               y / (s.radius * s.radius);
        const double g = std::min(std::pow(y, exponent_ratio), s.radius);
        const double a_g = p_los_within(s, g);
        const double cond = std::pow(1.0 - b_y, k_dev - 1) -
                            std::pow(std::max(0.0, 1.0 - a_g - b_y), k_dev - 1);
        return k_dev * b_prime * cond;
    };
    return p + integrate(integrand, 0.0, s.radius, 1e-11);
}

/// The marginal-distribution form of the same probability (the two nearest
/// distances treated through their marginals); exposed for comparison with
/// the exact evaluator above.
inline double prob_best_is_los_marginal(const SwiptScenario& s) {
    const double exponent_ratio = s.gamma_nlos / s.gamma_los;
    const double no_nlos = std::pow(1.0 - p_nlos_within(s, s.radius),
                                    s.num_devices);
    const double some_los = 1.0 - std::pow(1.0 - p_los_within(s, s.radius),
                                           s.num_devices);
    auto integrand = [&](double y) {
        const double g = std::min(std::pow(y, exponent_ratio),
                                  s.radius * (1.0 - 1e-12));
        const double ccdf_l = g > 0.0 ? nearest_los_ccdf(s, g) : 1.0;
        return nearest_nlos_density(s, y) * (1.0 - ccdf_l);
    };
    return no_nlos * some_los + integrate(integrand, 0.0, s.radius, 1e-11);
}

/// CCDF of the best device's fading-averaged received power.
inline double best_power_ccdf(const SwiptScenario& s, double power) {
    const double peak = s.pathloss_coeff * s.tx_power;
    if (power >= peak) return 0.0;
    if (power <= 0.0) return 1.0;
    const double rho_l =
        std::min(s.radius, std::pow(peak / power, 1.0 / s.gamma_los));
    const double rho_n =
        std::min(s.radius, std::pow(peak / power, 1.0 / s.gamma_nlos));
    const double p_above = p_los_within(s, rho_l) + p_nlos_within(s, rho_n);
    return 1.0 - std::pow(1.0 - p_above, s.num_devices);
}

/// E[B log2(1 + P_r / N_0)] over the best-link power distribution.
inline double expected_best_rate(const SwiptScenario& s) {
    const double peak = s.pathloss_coeff * s.tx_power;
    const double ln2 = std::log(2.0);
    const double s_min = s.noise_power * 1e-6;
    // Below s_min the CCDF is 1 to floating precision.
    double rate = s.bandwidth / ln2 * std::log1p(s_min / s.noise_power);
    auto integrand = [&](double u) {
        const double power = std::exp(u);
        const double g_prime = s.bandwidth / (ln2 * (s.noise_power + power));
        return g_prime * best_power_ccdf(s, power) * power;
    };
    rate += integrate(integrand, std::log(s_min), std::log(peak), 1e-9, 48);
    return rate;
}

/// The two-case marginal version of the rate expectation (best link LOS with
/// probability P_L at distance r_L1, NLOS otherwise), for comparison.
inline double expected_best_rate_two_case(const SwiptScenario& s) {
    const double ln2 = std::log(2.0);
    const double peak = s.pathloss_coeff * s.tx_power;
    const double p_l = prob_best_is_los(s);
    auto rate_of = [&](double power) {
        return s.bandwidth / ln2 * std::log1p(power / s.noise_power);
    };
    const double p_some_los =
        1.0 - std::pow(1.0 - p_los_within(s, s.radius), s.num_devices);
    const double p_some_nlos =
        1.0 - std::pow(1.0 - p_nlos_within(s, s.radius), s.num_devices);
    auto los_term = [&](double y) {
        return nearest_los_density(s, y) * rate_of(peak * path_gain(y, s.gamma_los));
    };
    auto nlos_term = [&](double y) {
        return nearest_nlos_density(s, y) *
               rate_of(peak * path_gain(y, s.gamma_nlos));
    };
    double e_los = p_some_los > 0.0
                       ? integrate(los_term, 0.0, s.radius, 1e-9) / p_some_los
                       : 0.0;
    double e_nlos = p_some_nlos > 0.0
                        ? integrate(nlos_term, 0.0, s.radius, 1e-9) / p_some_nlos
                        : 0.0;
    return p_l * e_los + (1.0 - p_l) * e_nlos;
}

struct PhaseLengths {
    double n_episodes = 0.0;  // N_l
    double ts_len = 0.0;      // T_TS
    double bp_len = 0.0;      // T_BP
    double etc_len = 0.0;     // T_ETC
    double n_changes = 0.0;   // N_C
    double ge_len = 0.0;      // T_GE
};

/// Statistical throughput bound: the phase-time prefactor times the expected
/// best-link Shannon rate.
inline double network_throughput(const SwiptScenario& s,
                                 const PhaseLengths& ph) {
    const double denom =
        ph.n_episodes * ph.bp_len + ph.etc_len + ph.n_changes * ph.ge_len;
    if (denom <= 0.0)
        throw std::invalid_argument("degenerate phase lengths: no probing time");
    const double prefactor = ph.n_episodes * ph.ts_len / denom;
    return prefactor * expected_best_rate(s);
}

/// Harvested power at one device served in a subset of size subset_size:
/// the LOS branch harvests the received power share, the NLOS branch only
/// the noise-floor share.
inline double harvested_power(const SwiptScenario& s, double distance,
                              bool is_los, int subset_size) {
    if (subset_size < 1) throw std::invalid_argument("empty subset");
    const double share = static_cast<double>(subset_size) / s.num_devices;
    if (is_los) {
        return s.harvest_eff * share * s.pathloss_coeff * s.tx_power *
               path_gain(distance, s.gamma_los);
    }
    return s.harvest_eff * share * s.bandwidth * s.noise_power /
           static_cast<double>(subset_size);
}

struct DeviceRealization {
    std::vector<double> distances;
    std::vector<bool> los_flags;
};

inline DeviceRealization sample_realization(const SwiptScenario& s, Rng& rng) {
    DeviceRealization real;
    real.distances.resize(s.num_devices);
    real.los_flags.resize(s.num_devices);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int j = 0; j < s.num_devices; ++j) {
        const double r = s.radius * std::sqrt(unit(rng));
        real.distances[j] = r;
        real.los_flags[j] = unit(rng) < std::exp(-s.blockage_rate * r);
    }
    return real;
}

struct VisibilityFlip {
    long long slot = 0;
    int device = 0;
    bool now_los = false;
};

/// Bandit-facing wrapper: arms are devices, rewards are received powers
/// normalized by the best achievable LOS power, fading is exponential with
/// unit mean, and every flip_interval slots one uniformly chosen device
/// toggles its visibility state.
class SwiptNetworkEnv {
  public:
    SwiptNetworkEnv(const SwiptScenario& scenario, long long horizon,
                    long long flip_interval, std::uint64_t seed)
        : scn_(scenario),
          horizon_(horizon),
          flip_interval_(flip_interval),
          fading_rng_(mix_seed(seed, 0)),
          flip_rng_(mix_seed(seed, 1)) {
        scn_.validate();
        Rng placement_rng(mix_seed(seed, 2));
        real_ = sample_realization(scn_, placement_rng);
        power_norm_ = 0.0;
        for (double r : real_.distances)
            power_norm_ = std::max(power_norm_, peak_power() *
                                                    path_gain(r, scn_.gamma_los));
    }

    const SwiptScenario& scenario() const { return scn_; }
    const DeviceRealization& realization() const { return real_; }
    long long t() const { return t_; }
    double power_norm() const { return power_norm_; }
    bool is_los(int device) const { return real_.los_flags[device]; }
    double distance(int device) const { return real_.distances[device]; }
    const std::vector<VisibilityFlip>& flip_log() const { return flips_; }

    void begin_episodes() {}
    void extend_current_episode(long long) {}

    void advance_slot() {
        ++t_;
        if (flip_interval_ > 0 && t_ % flip_interval_ == 0) {
            std::uniform_int_distribution<int> pick(0, scn_.num_devices - 1);
            const int dev = pick(flip_rng_);
            real_.los_flags[dev] = !real_.los_flags[dev];
            flips_.push_back({t_, dev, real_.los_flags[dev]});
        }
    }

    /// Mean received power of a device with its current visibility state.
    double mean_power(int device) const {
        const double gamma =
            real_.los_flags[device] ? scn_.gamma_los : scn_.gamma_nlos;
        return peak_power() * path_gain(real_.distances[device], gamma);
    }

    PullOutcome pull(int device) {
        if (device < 0 || device >= scn_.num_devices)
            throw std::out_of_range("device index out of range");
        return make_outcome(faded_power(device) / power_norm_);
    }

    PullOutcome pull_set(std::span<const int> devices) {
        if (devices.empty()) throw std::invalid_argument("empty device set");
        double sum = 0.0;
        for (int d : devices) {
            if (d < 0 || d >= scn_.num_devices)
                throw std::out_of_range("device index out of range");
            sum += faded_power(d) / power_norm_;
        }
        return make_outcome(sum / static_cast<double>(devices.size()));
    }

  private:
    double peak_power() const { return scn_.pathloss_coeff * scn_.tx_power; }

    double faded_power(int device) {
        std::exponential_distribution<double> fading(1.0);
        return fading(fading_rng_) * mean_power(device);
    }

    PullOutcome make_outcome(double normalized_power) const {
        PullOutcome out;
        out.reward = normalized_power;
        out.normalized_reward = clamp01(normalized_power);
        out.slot = t_;
        return out;
    }

    SwiptScenario scn_;
    long long horizon_;
    long long flip_interval_;
    DeviceRealization real_;
    double power_norm_ = 1.0;
    long long t_ = 0;
    Rng fading_rng_;
    Rng flip_rng_;
    std::vector<VisibilityFlip> flips_;
};

}  // namespace tsge

#endif  // TSGE_SWIPT_HPP_
