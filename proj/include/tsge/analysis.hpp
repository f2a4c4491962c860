// Closed-form evaluators for the detection and regret bounds, crossing-point
// solvers for the bound-comparison figures, and the empirical regret
// calculator. Everything here is a pure function.
#ifndef TSGE_ANALYSIS_HPP_
#define TSGE_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsge/agent.hpp"
#include "tsge/env.hpp"
#include "tsge/math.hpp"
#include "tsge/trace.hpp"

namespace tsge {

struct BoundParams {
    int num_arms = 8;            // K
    double horizon = 1e5;        // T
    double num_changes = 10.0;   // N_C
    double sigma = 0.1;
    double delta = 0.05;         // localization half-width
    double n_etc = 100.0;
    double bp_len = 100.0;       // T_BP
    double ts_len = 216.0;       // T_TS
    double change_max = 0.5;     // Delta_max
    double change_magnitude = 0.2;  // Delta_i^C of the change under study
    double episode_change_prob = 0.0;  // p_C

    void validate() const {
        if (num_arms < 1 || sigma <= 0.0 || delta <= 0.0 || horizon < 1.0)
            throw std::invalid_argument("bad bound parameters");
        if (num_changes < 0.0 || num_changes > std::sqrt(horizon) + 1e-9)
            throw std::invalid_argument("N_C must lie in [0, sqrt(T)]");
    }
};

// The no-change variance is written with sigma^2/K in the false-alarm section
// but with sigma^2/K^2 in the appendix statistics; both are exposed rather
// than silently picking one.
enum class NcVarianceForm { SigmaSqOverK, SigmaSqOverKSq };

/// Standard deviation of the no-change broadcast test statistic,
/// sigma_NC = sqrt(scale * (1/n_ETC + 1/(m T_BP) + sum_j 1/n_j)).
inline double sigma_nc(const BoundParams& p, long long episode,
                       std::span<const long long> per_arm_counts,
                       NcVarianceForm form = NcVarianceForm::SigmaSqOverK) {
    if (episode < 1) throw std::invalid_argument("episode must be >= 1");
    if (p.n_etc <= 0.0) throw std::invalid_argument("n_etc must be positive");
    double count_sum = 0.0;
    for (long long n : per_arm_counts) {
        if (n <= 0) throw std::invalid_argument("per-arm count must be positive");
        count_sum += 1.0 / static_cast<double>(n);
    }
    const double k = static_cast<double>(p.num_arms);
    const double scale =
        form == NcVarianceForm::SigmaSqOverK ? p.sigma * p.sigma / k
                                             : p.sigma * p.sigma / (k * k);
    const double inner = 1.0 / p.n_etc +
                         1.0 / (static_cast<double>(episode) * p.bp_len) +
                         count_sum;
    return std::sqrt(scale * inner);
}

/// False-alarm probability of the broadcast test, Q(4 delta / sigma_NC).
/// The event is two-sided; the factor-2 variant is exposed as an option.
inline double p_false_alarm(const BoundParams& p, double sigma_nc_value,
                            bool two_sided = false) {
    if (sigma_nc_value <= 0.0)
        throw std::invalid_argument("sigma_nc must be positive");
    const double q = q_function(4.0 * p.delta / sigma_nc_value);
    return two_sided ? 2.0 * q : q;
}

inline double appendix_statistic_stddev(const BoundParams& p, double pulls) {
    const double k = static_cast<double>(p.num_arms);
    return (p.sigma / k) *
           std::sqrt(1.0 / p.n_etc + 1.0 / pulls + 1.0 / p.bp_len);
}

/// Missed-detection probability for a change inside the TS phase:
/// Q((Delta - 2 delta) / sigma_Z') with the appendix statistic's moments.
inline double p_missed_ts(const BoundParams& p, double t_minus, double t_plus) {
    if (t_minus < 0.0 || t_plus < 0.0 || t_minus + t_plus <= 0.0)
        throw std::invalid_argument("pull counts must be non-negative");
    const double delta_c = std::abs(p.change_magnitude);
    if (delta_c < 2.0 * p.delta)
        throw std::domain_error("bound vacuous for |Delta| < 2*delta");
    const double sd = appendix_statistic_stddev(p, t_minus + t_plus);
    return q_function((delta_c - 2.0 * p.delta) / sd);
}

enum class BpCase { Case1 = 1, Case2 = 2, Case3 = 3, Case4 = 4 };

struct BpMissResult {
    BpCase which;
    double probability;
    bool high_miss_regime;  // Cases 2 and 4
};

/// Classifies a BP-phase change by direction and by how late in the phase it
/// lands, then evaluates the corresponding missed-detection probability.
/// The case boundary t* = T_BP (|Delta| - 4 delta)/|Delta| is inclusive.
inline BpMissResult p_missed_bp(const BoundParams& p, double t_minus,
                                double t_plus) {
    if (t_minus < 0.0 || t_plus < 0.0)
        throw std::invalid_argument("pull counts must be non-negative");
    if (std::abs(t_minus + t_plus - p.bp_len) > 1e-9)
        throw std::invalid_argument("t_minus + t_plus must equal T_BP");
    const double mag = std::abs(p.change_magnitude);
    const bool increase = p.change_magnitude >= 0.0;
    const double boundary = mag > 0.0 ? p.bp_len * (mag - 4.0 * p.delta) / mag
                                      : -1.0;
    const bool early = t_minus <= boundary + 1e-12;

    BpMissResult r;
    r.which = increase ? (early ? BpCase::Case1 : BpCase::Case2)
                       : (early ? BpCase::Case3 : BpCase::Case4);
    r.high_miss_regime = !early;

    const double mean = (t_plus / p.bp_len) * mag;
    const double sd = appendix_statistic_stddev(p, std::max(t_minus + t_plus, 1.0));
    if (early) {
        r.probability = q_function((mean - 4.0 * p.delta) / sd);
    } else {
        // Honest two-sided probability that |Z| stays below the threshold.
        r.probability = normal_cdf((4.0 * p.delta - mean) / sd) -
                        normal_cdf((-4.0 * p.delta - mean) / sd);
    }
    return r;
}

/// TS-GE regret bound, K log t + sqrt(t) max{N_C (1 + log2 K), t^(2/5)},
/// with unit leading constants and natural log.
inline double regret_bound_tsge(const BoundParams& p, double t) {
    if (t < 1.0) throw std::invalid_argument("t must be >= 1");
    const double k = static_cast<double>(p.num_arms);
    const double ge_term = p.num_changes * (1.0 + std::log2(k));
    const double bp_term = std::pow(t, 0.4);
    return k * std::log(t) + std::sqrt(t) * std::max(ge_term, bp_term);
}

/// Competitor bound sqrt(N_C K t log t), unit constant.
inline double regret_bound_competitor(const BoundParams& p, double t) {
    if (t < 2.0) throw std::invalid_argument("t must be >= 2");
    return std::sqrt(p.num_changes * static_cast<double>(p.num_arms) * t *
                     std::log(t));
}

struct CrossingPoints {
    double t1 = 0.0;
    std::optional<double> t2;
    std::optional<double> t3;
};

/// T1 in closed form; T2/T3 as the (up to two) sign changes of
/// tsge(t) - competitor(t) located by a log-grid scan plus bisection.
inline CrossingPoints crossing_points(const BoundParams& p, double t_max,
                                      int grid_points = 4096) {
    if (t_max < 2.0) throw std::invalid_argument("t_max must be >= 2");
    CrossingPoints out;
    const double ge_term = p.num_changes * (1.0 + std::log2(p.num_arms));
    out.t1 = std::pow(ge_term, 2.5);

    if (p.num_changes <= 0.0) return out;  // competitor is identically zero

    auto diff = [&](double t) {
        return regret_bound_tsge(p, t) - regret_bound_competitor(p, t);
    };
    std::vector<double> roots;
    const double lo = 2.0;
    double prev_t = lo;
    double prev_f = diff(lo);
    for (int i = 1; i <= grid_points; ++i) {
        const double t = lo * std::pow(t_max / lo, static_cast<double>(i) /
                                                       grid_points);
        const double f = diff(t);
        if ((prev_f < 0.0) != (f < 0.0)) {
            double a = prev_t, b = t;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = diff(m);
                if (std::abs(fm) <=
                    1e-9 * std::max(1.0, regret_bound_competitor(p, m)))
                    break;
                if ((diff(a) < 0.0) != (fm < 0.0))
                    b = m;
                else
                    a = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_t = t;
        prev_f = f;
    }
    if (!roots.empty()) out.t2 = roots[0];
    if (roots.size() > 1) out.t3 = roots[1];
    return out;
}

struct BoundCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::string label;
};

/// Cumulative pseudo-regret of a trace: per slot, the gap between the oracle
/// best mean and the average true mean of the played set. Multi-arm slots
/// (BP, GE) charge the set-average gap.
inline BoundCurve empirical_regret(std::span<const TraceRow> trace,
                                   int num_arms,
                                   std::span<const double> initial_means,
                                   std::span<const ChangeEvent> change_log) {
    if (static_cast<int>(initial_means.size()) != num_arms)
        throw std::invalid_argument("initial_means size mismatch");
    for (const auto& ev : change_log) {
        if (ev.arm < 0 || ev.arm >= num_arms)
            throw std::invalid_argument("change log references unknown arm");
    }
    std::vector<double> means(initial_means.begin(), initial_means.end());
    std::vector<SuperArm> supers;
    bool pow2 = (num_arms & (num_arms - 1)) == 0;
    if (pow2 && num_arms >= 2) supers = construct_super_arms(num_arms);

    BoundCurve curve;
    curve.label = "empirical_regret";
    curve.grid.reserve(trace.size());
    curve.values.reserve(trace.size());
    std::size_t next_change = 0;
    double cum = 0.0;
    for (const auto& row : trace) {
        while (next_change < change_log.size() &&
               change_log[next_change].slot <= row.slot) {
            means[change_log[next_change].arm] = change_log[next_change].new_mean;
            ++next_change;
        }
        const double best = *std::max_element(means.begin(), means.end());
        double played = 0.0;
        switch (row.phase) {
            case Phase::Etc:
            case Phase::Ts:
                if (row.action < 0 || row.action >= num_arms)
                    throw std::invalid_argument("trace action out of range");
                played = means[row.action];
                break;
            case Phase::Bp: {
                double s = 0.0;
                for (double m : means) s += m;
                played = s / static_cast<double>(num_arms);
                break;
            }
            case Phase::Ge: {
                if (supers.empty() || row.action < 1 ||
                    row.action > static_cast<int>(supers.size()))
                    throw std::invalid_argument("GE trace row without super-arms");
                const auto& members = supers[row.action - 1].members;
                double s = 0.0;
                for (int a : members) s += means[a];
                played = s / static_cast<double>(members.size());
                break;
            }
        }
        cum += best - played;
        curve.grid.push_back(static_cast<double>(row.slot));
        curve.values.push_back(cum);
    }
    return curve;
}

}  // namespace tsge

#endif  // TSGE_ANALYSIS_HPP_
