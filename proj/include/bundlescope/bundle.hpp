#ifndef BUNDLESCOPE_BUNDLE_HPP
#define BUNDLESCOPE_BUNDLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bundlescope/architecture.hpp"
#include "bundlescope/errors.hpp"
#include "bundlescope/float_format.hpp"
#include "bundlescope/matrix.hpp"
#include "bundlescope/network.hpp"

namespace bundlescope {

// res(W^l): either the ULP of the largest-magnitude weight of the layer
// (an update component below that spacing cannot perturb the dominant
// weights) or a fixed gamma.
struct ResolutionPolicy {
    enum class Kind { WeightUlp, FixedGamma };
    Kind kind = Kind::WeightUlp;
    double gamma = 0.0;

    static ResolutionPolicy weight_ulp() { return {Kind::WeightUlp, 0.0}; }
    static ResolutionPolicy fixed(double g) {
        if (g <= 0.0) throw config_error("resolution policy: fixed gamma must be > 0");
        return {Kind::FixedGamma, g};
    }
};

template <typename T>
double resolution_threshold(const Mat<T>& weights, const ResolutionPolicy& policy,
                            FloatFormat format) {
    if (policy.kind == ResolutionPolicy::Kind::FixedGamma) return policy.gamma;
    if (weights.empty()) throw shape_error("resolution_threshold: empty weight matrix");
    return ulp(double(max_abs(weights)), format);
}

// Scaled infinity-norm test of Eq.-style bundling, evaluated in binary64
// regardless of the network format.
inline bool bundled(std::span<const double> a_i, std::span<const double> a_j, double alpha,
                    int batch_size_train, double gamma) {
    if (a_i.size() != a_j.size()) throw shape_error("bundled: vector length mismatch");
    if (alpha <= 0.0) throw config_error("bundled: alpha must be > 0");
    if (batch_size_train < 1) throw config_error("bundled: batch size must be >= 1");
    const double scale = alpha / double(batch_size_train);
    double d = 0.0;
    for (std::size_t k = 0; k < a_i.size(); ++k) d = std::max(d, std::fabs(a_i[k] - a_j[k]));
    return scale * d <= gamma;
}

struct BundlePartition {
    int layer = 0;                         // 1-based global hidden layer index
    std::vector<std::vector<int>> bundles; // sample indices; first member is the representative
    int batch_size = 0;

    int bundle_count() const { return int(bundles.size()); }
};

namespace detail {
template <typename T>
bool rows_bundled(const Mat<T>& m, int i, int j, double scale, double gamma) {
    const auto ri = m.row(i);
    const auto rj = m.row(j);
    for (std::size_t k = 0; k < ri.size(); ++k) {
        const double d = std::fabs(double(ri[k]) - double(rj[k]));
        if (scale * d > gamma) return false;
    }
    return true;
}
} // namespace detail

// Single pass in row order: a sample joins the first bundle whose
// representative (first member) it is bundled with, else opens a new
// bundle. Approximate equality is not transitive; this rule resolves
// chains deterministically in sample order.
template <typename T>
BundlePartition partition_layer(const Mat<T>& activations, double alpha, int batch_size_train,
                                double gamma) {
    if (alpha <= 0.0) throw config_error("partition_layer: alpha must be > 0");
    if (batch_size_train < 1) throw config_error("partition_layer: batch size must be >= 1");
    const double scale = alpha / double(batch_size_train);
    BundlePartition part;
    part.batch_size = activations.rows();
    for (int i = 0; i < activations.rows(); ++i) {
        bool placed = false;
        for (auto& bundle : part.bundles) {
            if (detail::rows_bundled(activations, i, bundle.front(), scale, gamma)) {
                bundle.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) part.bundles.push_back({i});
    }
    return part;
}

// Bundle-size weighted label entropy of a partition. Classes absent from a
// bundle contribute exactly zero; epsilon only stabilizes the log.
inline double bundle_entropy(const BundlePartition& partition, std::span<const int> labels,
                             double epsilon, int num_classes) {
    if (int(labels.size()) != partition.batch_size)
        throw data_error("bundle_entropy: labels length != partition batch size");
    for (const int y : labels)
        if (y < 0 || y >= num_classes)
            throw data_error("bundle_entropy: label " + std::to_string(y) + " out of range [0, " +
                             std::to_string(num_classes) + ")");
    double weighted = 0.0;
    std::vector<int> counts(static_cast<std::size_t>(num_classes));
    for (const auto& bundle : partition.bundles) {
        std::fill(counts.begin(), counts.end(), 0);
        for (const int idx : bundle) ++counts[std::size_t(labels[std::size_t(idx)])];
        double h = 0.0;
        for (const int c : counts) {
            if (c == 0) continue;
            const double p = double(c) / double(bundle.size());
            h -= p * std::log(p + epsilon);
        }
        // A label-pure bundle must read exactly zero; epsilon would
        // otherwise leak a tiny negative value through log(1 + eps).
        if (h < 0.0) h = 0.0;
        weighted += double(bundle.size()) * h;
    }
    return weighted / double(partition.batch_size);
}

enum class MeasureLocation { LayerOutput, ResidualBranchPreAdd };

inline std::string to_string(MeasureLocation loc) {
    return loc == MeasureLocation::LayerOutput ? "layer_output" : "residual_branch_pre_add";
}

struct BundleEntropyRecord {
    int epoch = 0;
    int layer = 0; // 1-based global hidden layer index
    MeasureLocation location = MeasureLocation::LayerOutput;
    double entropy = 0.0;
    int bundle_count = 0;
    int batch_size = 0;
};

struct MeasureConfig {
    double alpha = 0.001;      // training learning rate entering the Eq. scaling
    int train_batch_size = 64; // |B| of the backprop division, not the probe size
    ResolutionPolicy policy = ResolutionPolicy::weight_ulp();
    double epsilon = 1e-12;
    int epoch = 0;
};

// One record per live hidden layer at its output, plus one per live
// residual unit at the branch output before the add. Gamma comes from each
// layer's own weights under the active policy.
template <typename T>
std::vector<BundleEntropyRecord> measure(const ActivationTrace<T>& trace,
                                         std::span<const int> labels, const Network<T>& net,
                                         const MeasureConfig& cfg) {
    constexpr FloatFormat format = format_of<T>::value;
    const int num_classes = net.arch.num_classes;
    std::vector<BundleEntropyRecord> records;
    records.reserve(trace.layer_out.size() + trace.branch_pre_add.size());
    for (std::size_t i = 0; i < trace.layer_out.size(); ++i) {
        const int li = trace.layer_index[i];
        const double gamma =
            resolution_threshold(net.layers[li].dense.W, cfg.policy, format);
        BundlePartition part =
            partition_layer(trace.layer_out[i], cfg.alpha, cfg.train_batch_size, gamma);
        part.layer = li + 1;
        BundleEntropyRecord rec;
        rec.epoch = cfg.epoch;
        rec.layer = li + 1;
        rec.location = MeasureLocation::LayerOutput;
        rec.entropy = bundle_entropy(part, labels, cfg.epsilon, num_classes);
        rec.bundle_count = part.bundle_count();
        rec.batch_size = part.batch_size;
        records.push_back(rec);
    }
    for (std::size_t i = 0; i < trace.branch_pre_add.size(); ++i) {
        const int unit_index = trace.branch_unit[i];
        const int second_layer = net.units[unit_index].first_layer + 1;
        const double gamma =
            resolution_threshold(net.layers[second_layer].dense.W, cfg.policy, format);
        BundlePartition part =
            partition_layer(trace.branch_pre_add[i], cfg.alpha, cfg.train_batch_size, gamma);
        part.layer = second_layer + 1;
        BundleEntropyRecord rec;
        rec.epoch = cfg.epoch;
        rec.layer = second_layer + 1;
        rec.location = MeasureLocation::ResidualBranchPreAdd;
        rec.entropy = bundle_entropy(part, labels, cfg.epsilon, num_classes);
        rec.bundle_count = part.bundle_count();
        rec.batch_size = part.batch_size;
        records.push_back(rec);
    }
    return records;
}

// Smallest global hidden layer whose output partition has positive entropy.
inline std::optional<BlockPosition> first_conflicting_layer(
    std::span<const BundleEntropyRecord> records, const Architecture& arch) {
    std::optional<int> best;
    for (const auto& rec : records) {
        if (rec.location != MeasureLocation::LayerOutput || rec.entropy <= 0.0) continue;
        if (!best || rec.layer < *best) best = rec.layer;
    }
    if (!best) return std::nullopt;
    return arch.layer_position(*best);
}

} // namespace bundlescope

#endif
