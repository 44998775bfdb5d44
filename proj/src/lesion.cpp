#include "bundlescope/lesion.hpp"

#include <algorithm>

#include "bundlescope/parallel.hpp"
#include "bundlescope/train.hpp"

namespace bundlescope {

std::vector<UnitClassification> classify_units(Network<float>& net, const Mat<float>& probe_inputs,
                                               std::span<const int> probe_labels,
                                               const MeasureConfig& mcfg) {
    if (net.live_units() < 1) throw config_error("classify_units: network has no residual units");
    ActivationTrace<float> trace = forward(net, probe_inputs, Mode::Eval);
    std::vector<UnitClassification> out;
    for (std::size_t i = 0; i < trace.branch_pre_add.size(); ++i) {
        const int unit_index = trace.branch_unit[i];
        const int second_layer = net.units[unit_index].first_layer + 1;
        const double gamma = resolution_threshold(net.layers[second_layer].dense.W, mcfg.policy,
                                                  FloatFormat::Binary32);
        const BundlePartition part =
            partition_layer(trace.branch_pre_add[i], mcfg.alpha, mcfg.train_batch_size, gamma);
        const double h = bundle_entropy(part, probe_labels, mcfg.epsilon, net.arch.num_classes);
        out.push_back(UnitClassification{unit_index, h, h > 0.0});
    }
    return out;
}

LesionReport lesion_study(const Network<float>& net, const Dataset& test_set,
                          const Dataset& probe_source, std::span<const LesionStrategy> strategies,
                          std::span<const int> k_values, std::span<const std::uint64_t> seeds,
                          const MeasureConfig& mcfg, int probe_size, std::uint64_t probe_seed,
                          int jobs) {
    LesionReport report;

    Network<float> probe_net = net; // eval-mode forward leaves parameters untouched
    const std::vector<int> probe = probe_indices(probe_source, probe_size, probe_seed);
    const Batch probe_batch = materialize_batch(probe_source, probe);
    report.units = classify_units(probe_net, probe_batch.inputs, probe_batch.labels, mcfg);

    std::vector<int> conflicting_pool, non_conflicting_pool, any_pool;
    for (const auto& u : report.units) {
        any_pool.push_back(u.unit);
        if (u.conflicting)
            conflicting_pool.push_back(u.unit);
        else
            non_conflicting_pool.push_back(u.unit);
    }

    report.baseline_accuracy = evaluate_accuracy(probe_net, test_set);

    struct Job {
        LesionStrategy strategy;
        int k;
        std::uint64_t seed;
    };
    std::vector<Job> jobs_list;
    for (const LesionStrategy s : strategies)
        for (const int k : k_values)
            for (const std::uint64_t seed : seeds) jobs_list.push_back(Job{s, k, seed});

    report.cells.resize(jobs_list.size());
    parallel_for(jobs, int(jobs_list.size()), [&](int idx) {
        const Job& job = jobs_list[std::size_t(idx)];
        const std::vector<int>* pool = &any_pool;
        if (job.strategy == LesionStrategy::Conflicting) pool = &conflicting_pool;
        if (job.strategy == LesionStrategy::NonConflicting) pool = &non_conflicting_pool;

        LesionCell cell;
        cell.strategy = job.strategy;
        cell.k = job.k;
        cell.seed = job.seed;
        if (job.k > int(pool->size())) {
            cell.skipped = true;
        } else if (job.k == 0) {
            cell.accuracy = report.baseline_accuracy;
        } else {
            std::vector<int> picks = *pool;
            RngStream rng(RngStream::derive(
                job.seed, std::uint64_t(job.strategy) * 1000003ULL + std::uint64_t(job.k)));
            rng.shuffle(picks);
            picks.resize(std::size_t(job.k));
            Network<float> lesioned = net;
            for (const int u : picks) delete_unit(lesioned, u);
            cell.accuracy = evaluate_accuracy(lesioned, test_set);
        }
        report.cells[std::size_t(idx)] = cell;
    });
    return report;
}

std::vector<LesionRow> lesion_rows(const LesionReport& report) {
    std::vector<LesionRow> rows;
    rows.reserve(report.cells.size());
    for (const auto& c : report.cells)
        rows.push_back(LesionRow{to_string(c.strategy), c.k, c.seed, c.accuracy, c.skipped});
    return rows;
}

} // namespace bundlescope
