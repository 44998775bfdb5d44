#ifndef BUNDLESCOPE_REPORT_HPP
#define BUNDLESCOPE_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "bundlescope/architecture.hpp"
#include "bundlescope/bundle.hpp"

namespace bundlescope {

// Renders a double with 9 significant digits; round-trippable decimal for
// binary32-derived values.
std::string format_float(double v);

struct EntropyRow {
    int epoch = 0;
    int layer = 0;
    char block = '-';
    int offset = 0;
    MeasureLocation location = MeasureLocation::LayerOutput;
    double entropy = 0.0;
    int bundle_count = 0;
};

struct EvolutionRow {
    int step = 0;
    int epoch_reached = 0;
    std::vector<int> block_counts; // one per block tag, architecture order
    std::optional<char> pruned_block;
    std::optional<int> keep_count;
};

struct SweepRow {
    int depth = 0;
    int width = 0;
    double accuracy = 0.0;
    double final_entropy = 0.0;
    std::optional<int> first_conflicting_layer;
};

struct HeatmapRow {
    double lr = 0.0;
    int batch_size = 0;
    int oracle = 0;
    int metric = 0;
    int exact_eq = 0;
};

struct LesionRow {
    std::string strategy;
    int k = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    bool skipped = false; // k exceeded the pool; accuracy cell left empty
};

struct ToyRow {
    int epoch = 0;
    double grad_norm = 0.0;
    double accuracy = 0.0;
    std::vector<double> mean_out; // one per class
    double std_out = 0.0;
};

void write_entropy_csv(const std::vector<EntropyRow>& rows, const std::string& path);
void write_evolution_csv(const std::vector<EvolutionRow>& rows,
                         const std::vector<char>& block_tags, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
void write_heatmap_csv(const std::vector<HeatmapRow>& rows, const std::string& path);
void write_lesion_csv(const std::vector<LesionRow>& rows, const std::string& path);
void write_toy_csv(const std::vector<ToyRow>& rows, int num_classes, const std::string& path);

// Entropy rows from measurement records, with block/offset mapping from
// the architecture.
std::vector<EntropyRow> entropy_rows_from_records(const std::vector<BundleEntropyRecord>& records,
                                                  const Architecture& arch);

} // namespace bundlescope

#endif
