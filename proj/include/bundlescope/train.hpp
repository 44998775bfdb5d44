#ifndef BUNDLESCOPE_TRAIN_HPP
#define BUNDLESCOPE_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bundlescope/dataset.hpp"
#include "bundlescope/network.hpp"

namespace bundlescope {

struct EpochStats {
    double mean_loss = 0.0;
    // Mean L2 norm of the output-head parameter gradient (W and b) over
    // the epoch's batches.
    double head_grad_norm = 0.0;
    int batches = 0;
};

// One pass over the dataset. The batch order is derived from
// (cfg.seed, epoch_index) so whole runs are reproducible step by step.
inline EpochStats train_epoch(Network<float>& net, const Dataset& ds, const TrainConfig& cfg,
                              int epoch_index) {
    cfg.validate();
    RngStream batch_rng(RngStream::derive(cfg.seed, std::uint64_t(epoch_index) + 1));
    const auto batches = epoch_batches(ds, cfg.batch_size, cfg.stratified, batch_rng);
    EpochStats stats;
    for (const auto& idx : batches) {
        const Batch batch = materialize_batch(ds, idx);
        ActivationTrace<float> trace = forward(net, batch.inputs, Mode::Train, true);
        auto [loss, dlogits] = loss_and_output_grad(trace.logits, batch.onehot);
        Gradients<float> grads = backward(net, trace, dlogits);
        const double head_norm =
            std::sqrt(frobenius_norm(grads.head.W) * frobenius_norm(grads.head.W) +
                      frobenius_norm(grads.head.b) * frobenius_norm(grads.head.b));
        apply_update(net, grads, cfg);
        stats.mean_loss += loss;
        stats.head_grad_norm += head_norm;
        ++stats.batches;
    }
    if (stats.batches > 0) {
        stats.mean_loss /= stats.batches;
        stats.head_grad_norm /= stats.batches;
    }
    return stats;
}

// Eval-mode accuracy, computed in chunks to keep traces small.
inline double evaluate_accuracy(Network<float>& net, const Dataset& ds) {
    const int chunk = 512;
    int correct = 0;
    for (int start = 0; start < ds.size(); start += chunk) {
        const int end = std::min(ds.size(), start + chunk);
        Mat<float> x(end - start, ds.dim());
        for (int i = start; i < end; ++i) {
            const float* src = ds.inputs.row(i).data();
            std::copy(src, src + ds.dim(), x.row(i - start).data());
        }
        ActivationTrace<float> trace = forward(net, x, Mode::Eval, false);
        for (int i = 0; i < trace.probs.rows(); ++i) {
            int best = 0;
            for (int j = 1; j < trace.probs.cols(); ++j)
                if (trace.probs(i, j) > trace.probs(i, best)) best = j;
            if (best == ds.labels[std::size_t(start + i)]) ++correct;
        }
    }
    return double(correct) / double(ds.size());
}

// Fixed measurement probe: a seeded sample of the training set, drawn once
// per run and reused across epochs.
inline std::vector<int> probe_indices(const Dataset& ds, int probe_size, std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(ds.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    RngStream rng(RngStream::derive(seed, 0x9c0be));
    rng.shuffle(order);
    const int n = std::min(ds.size(), probe_size);
    order.resize(std::size_t(n));
    return order;
}

// Probe with exactly equal class counts, for checks against the ln(N_c)
// closed form.
inline std::vector<int> balanced_probe_indices(const Dataset& ds, int probe_size,
                                               std::uint64_t seed) {
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (int i = 0; i < ds.size(); ++i) by_class[std::size_t(ds.labels[std::size_t(i)])].push_back(i);
    RngStream rng(RngStream::derive(seed, 0xba1a));
    std::size_t per_class = std::size_t(std::max(1, probe_size / ds.num_classes));
    for (auto& v : by_class) {
        if (v.empty()) throw data_error("balanced_probe_indices: a class has no samples");
        rng.shuffle(v);
        per_class = std::min(per_class, v.size());
    }
    std::vector<int> out;
    for (std::size_t k = 0; k < per_class; ++k)
        for (const auto& v : by_class) out.push_back(v[k]);
    return out;
}

} // namespace bundlescope

#endif
