#ifndef BUNDLESCOPE_LESION_HPP
#define BUNDLESCOPE_LESION_HPP

#include <span>
#include <string>
#include <vector>

#include "bundlescope/bundle.hpp"
#include "bundlescope/dataset.hpp"
#include "bundlescope/network.hpp"
#include "bundlescope/report.hpp"

namespace bundlescope {

enum class LesionStrategy { Conflicting, NonConflicting, Random };

inline std::string to_string(LesionStrategy s) {
    switch (s) {
    case LesionStrategy::Conflicting: return "conflicting";
    case LesionStrategy::NonConflicting: return "non_conflicting";
    case LesionStrategy::Random: return "random";
    }
    return "random";
}

struct UnitClassification {
    int unit = 0;
    double branch_entropy = 0.0;
    bool conflicting = false;
};

// A unit is conflicting iff its pre-add branch output bundles samples of
// different labels on the probe (eval-mode forward).
std::vector<UnitClassification> classify_units(Network<float>& net, const Mat<float>& probe_inputs,
                                               std::span<const int> probe_labels,
                                               const MeasureConfig& mcfg);

struct LesionCell {
    LesionStrategy strategy;
    int k = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    bool skipped = false; // k exceeded the pool
};

struct LesionReport {
    double baseline_accuracy = 0.0;
    std::vector<UnitClassification> units;
    std::vector<LesionCell> cells;
};

// Deletes k units drawn from the strategy's pool and re-evaluates test
// accuracy; the base network is shared read-only.
LesionReport lesion_study(const Network<float>& net, const Dataset& test_set,
                          const Dataset& probe_source, std::span<const LesionStrategy> strategies,
                          std::span<const int> k_values, std::span<const std::uint64_t> seeds,
                          const MeasureConfig& mcfg, int probe_size, std::uint64_t probe_seed,
                          int jobs = 1);

std::vector<LesionRow> lesion_rows(const LesionReport& report);

} // namespace bundlescope

#endif
