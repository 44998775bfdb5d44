#ifndef BUNDLESCOPE_CBA_TUNE_HPP
#define BUNDLESCOPE_CBA_TUNE_HPP

#include <optional>
#include <vector>

#include "bundlescope/bundle.hpp"
#include "bundlescope/dataset.hpp"
#include "bundlescope/network.hpp"
#include "bundlescope/report.hpp"

namespace bundlescope {

struct CbaOptions {
    int target_epochs = 20; // consecutive conflict-free epochs required
    int probe_size = 2048;
    ResolutionPolicy policy = ResolutionPolicy::weight_ulp();
    double epsilon = 1e-12;
};

struct EvolutionLog {
    std::vector<char> block_tags;
    std::vector<EvolutionRow> steps;
    Architecture final_arch;
    int total_epochs = 0;
    int prune_steps = 0;
};

struct CbaResult {
    Network<float> net;
    EvolutionLog log;
};

// Train-detect-prune-restart loop: train one epoch, measure bundle entropy
// on a fixed probe, and on the first conflicting layer (block t, offset o)
// prune block t to o-1 layers, reinitialize every weight from a fresh
// derived seed and restart the epoch counter. Terminates after
// target_epochs consecutive conflict-free epochs.
CbaResult cba_tune(const Architecture& initial_arch, const Dataset& ds, const TrainConfig& cfg,
                   const CbaOptions& opts);

} // namespace bundlescope

#endif
