#ifndef BUNDLESCOPE_EXPERIMENTS_HPP
#define BUNDLESCOPE_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "bundlescope/bundle.hpp"
#include "bundlescope/dataset.hpp"
#include "bundlescope/network.hpp"
#include "bundlescope/report.hpp"

namespace bundlescope {

// ---------------------------------------------------------------------------
// controlled toy runs

// Plain SGD needs a larger step than the paper's adaptive optimizer to fit
// the toy task within its 50 epochs; batches stay non-stratified so batch
// label frequencies reflect the dataset priors.
inline TrainConfig default_toy_config() {
    TrainConfig cfg;
    cfg.lr = 0.5;
    cfg.batch_size = 64;
    cfg.epochs = 50;
    cfg.weight_decay = 0.0;
    cfg.seed = 1;
    cfg.stratified = false;
    return cfg;
}

struct ToyRunResult {
    std::vector<ToyRow> rows;
    Dataset data;
};

// Two hidden layers of two neurons on the 1-D threshold toy set; the
// conflict variant collapses every sample at layer 1 via the manual
// initialization.
ToyRunResult run_toy(bool conflict, bool balanced, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// depth/width sweep

struct SweepOptions {
    std::vector<int> depths{5, 15, 25, 50};
    std::vector<int> widths{10, 25, 100};
    int probe_size = 2048;
    ResolutionPolicy policy = ResolutionPolicy::weight_ulp();
    double epsilon = 1e-12;
};

std::vector<SweepRow> sweep(const Dataset& train_set, const Dataset& test_set,
                            const TrainConfig& base_cfg, const SweepOptions& opts, int jobs = 1);

// ---------------------------------------------------------------------------
// residual bypass probe

struct ResidualProbeResult {
    double pre_add_entropy = 0.0;
    double post_add_entropy = 0.0;
    double test_accuracy = 0.0;
};

// Trains a net whose single residual unit has a branch forced into a
// constant function, then measures branch and unit-output entropies.
ResidualProbeResult residual_probe(ResidualKind kind, const Dataset& train_set,
                                   const Dataset& test_set, const TrainConfig& cfg,
                                   int probe_size, int width = 32);

// Constructed counterexample: branch == -r(x), so the unit output is
// identically zero. Returns the measured unit-output entropy on a balanced
// probe (expected ln(num_classes)).
double residual_negation_entropy(ResidualKind kind, int width, int num_classes,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// supplementary heatmap with brute-force oracle

// Ground truth for rounding collapse: apply the binary32 update
// W'_i[m] = fl32(W[m] - fl32((alpha/|B|) * a_i)) and group samples whose
// updated weight vectors are bitwise identical.
BundlePartition oracle_bundles(std::span<const float> a_values, std::span<const float> weights,
                               double alpha, int batch_size);

// Bitwise-equality partition of scalar activations (gamma = 0 semantics).
int exact_equality_bundle_count(std::span<const float> a_values);

struct HeatmapOptions {
    int n = 4096;
    int k = 8;
    std::vector<double> lr_grid{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    std::vector<int> batch_grid{1, 16, 64, 256, 1024, 4096};
    std::uint64_t seed = 0;
};

std::vector<HeatmapRow> heatmap(const HeatmapOptions& opts, int jobs = 1);

} // namespace bundlescope

#endif
