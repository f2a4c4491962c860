// Per-slot and per-episode record types shared by agents, the regret
// calculator and the CSV exporters.
#ifndef TSGE_TRACE_HPP_
#define TSGE_TRACE_HPP_

#include <string>
#include <vector>

namespace tsge {

enum class Phase { Etc, Ts, Bp, Ge };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Etc: return "ETC";
        case Phase::Ts: return "TS";
        case Phase::Bp: return "BP";
        case Phase::Ge: return "GE";
    }
    return "?";
}

struct TraceRow {
    long long slot = 0;
    Phase phase = Phase::Ts;
    // Arm index for ETC/TS slots, the super-arm bit index (1-based) for GE
    // slots, -1 for BP slots (all arms).
    int action = 0;
    double reward = 0.0;
    double regret_increment = 0.0;
};

struct EpisodeRow {
    long long episode = 0;
    bool detected = false;
    int identified_arm = -1;
    int true_changed_arm = -1;
};

}  // namespace tsge

#endif  // TSGE_TRACE_HPP_
