#include "bundlescope/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "bundlescope/parallel.hpp"
#include "bundlescope/train.hpp"

namespace bundlescope {

// ---------------------------------------------------------------------------
// toy runs

ToyRunResult run_toy(bool conflict, bool balanced, const TrainConfig& cfg) {
    cfg.validate();
    ToyRunResult result;
    result.data = balanced ? toy_generate(1000, 0.5, cfg.seed)
                           : toy_generate(999, 2.0 / 3.0, cfg.seed);
    const Dataset& ds = result.data;

    Architecture arch;
    arch.input_dim = 1;
    arch.num_classes = 2;
    arch.blocks = {Block{'a', 2, 2, ResidualKind::None, 1.0, 0.0, false}};
    Network<float> net = build_network<float>(arch, cfg.seed);
    if (conflict) init_fully_conflicting(net);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const EpochStats stats = train_epoch(net, ds, cfg, epoch);

        Mat<float> all = ds.inputs;
        ActivationTrace<float> trace = forward(net, all, Mode::Eval);
        const Mat<float>& h = trace.probs;
        ToyRow row;
        row.epoch = epoch;
        row.grad_norm = stats.head_grad_norm;
        int correct = 0;
        std::vector<double> mean(std::size_t(ds.num_classes), 0.0);
        for (int i = 0; i < h.rows(); ++i) {
            int best = 0;
            for (int j = 1; j < h.cols(); ++j)
                if (h(i, j) > h(i, best)) best = j;
            if (best == ds.labels[std::size_t(i)]) ++correct;
            for (int j = 0; j < h.cols(); ++j) mean[std::size_t(j)] += h(i, j);
        }
        for (auto& m : mean) m /= h.rows();
        double pooled_std = 0.0;
        for (int j = 0; j < h.cols(); ++j) {
            double var = 0.0;
            for (int i = 0; i < h.rows(); ++i) {
                const double d = double(h(i, j)) - mean[std::size_t(j)];
                var += d * d;
            }
            pooled_std += std::sqrt(var / h.rows());
        }
        row.accuracy = double(correct) / double(h.rows());
        row.mean_out = mean;
        row.std_out = pooled_std / h.cols();
        result.rows.push_back(std::move(row));
    }
    return result;
}

// ---------------------------------------------------------------------------
// depth/width sweep

std::vector<SweepRow> sweep(const Dataset& train_set, const Dataset& test_set,
                            const TrainConfig& base_cfg, const SweepOptions& opts, int jobs) {
    base_cfg.validate();
    if (opts.depths.empty() || opts.widths.empty())
        throw config_error("sweep: depth and width grids must be nonempty");

    struct Cell {
        int depth, width;
    };
    std::vector<Cell> cells;
    for (const int d : opts.depths)
        for (const int w : opts.widths) cells.push_back(Cell{d, w});

    const std::vector<int> probe = probe_indices(train_set, opts.probe_size, base_cfg.seed);
    const Batch probe_batch = materialize_batch(train_set, probe);

    std::vector<SweepRow> rows(cells.size());
    parallel_for(jobs, int(cells.size()), [&](int ci) {
        const Cell cell = cells[std::size_t(ci)];
        Architecture arch;
        arch.input_dim = train_set.dim();
        arch.num_classes = train_set.num_classes;
        arch.blocks = {Block{'a', cell.depth, cell.width, ResidualKind::None, 1.0, 0.0, false}};

        TrainConfig cfg = base_cfg;
        cfg.seed = RngStream::derive(base_cfg.seed, std::uint64_t(ci) + 1);
        Network<float> net = build_network<float>(arch, cfg.seed);
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) train_epoch(net, train_set, cfg, epoch);

        MeasureConfig mcfg;
        mcfg.alpha = cfg.lr;
        mcfg.train_batch_size = cfg.batch_size;
        mcfg.policy = opts.policy;
        mcfg.epsilon = opts.epsilon;
        mcfg.epoch = cfg.epochs;
        ActivationTrace<float> trace = forward(net, probe_batch.inputs, Mode::Eval);
        const auto records = measure(trace, probe_batch.labels, net, mcfg);

        SweepRow row;
        row.depth = cell.depth;
        row.width = cell.width;
        row.accuracy = evaluate_accuracy(net, test_set);
        for (const auto& rec : records)
            if (rec.location == MeasureLocation::LayerOutput && rec.layer == cell.depth)
                row.final_entropy = rec.entropy;
        if (const auto pos = first_conflicting_layer(records, arch))
            row.first_conflicting_layer = pos->global_layer;
        rows[std::size_t(ci)] = std::move(row);
    });
    return rows;
}

// ---------------------------------------------------------------------------
// residual bypass probe

namespace {

Architecture probe_arch(ResidualKind kind, int input_dim, int num_classes, int width) {
    Architecture arch;
    arch.input_dim = input_dim;
    arch.num_classes = num_classes;
    arch.blocks = {Block{'t', 1, width, ResidualKind::None, 1.0, 0.0, false},
                   Block{'r', 2, width, kind, 2.0, 0.1, false}};
    return arch;
}

} // namespace

ResidualProbeResult residual_probe(ResidualKind kind, const Dataset& train_set,
                                   const Dataset& test_set, const TrainConfig& cfg,
                                   int probe_size, int width) {
    if (kind == ResidualKind::None)
        throw config_error("residual_probe: needs a residual kind");
    cfg.validate();
    const Architecture arch = probe_arch(kind, train_set.dim(), train_set.num_classes, width);
    Network<float> net = build_network<float>(arch, cfg.seed);
    force_branch_conflicting(net, 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) train_epoch(net, train_set, cfg, epoch);

    // Exactly balanced probe: a fully bundled branch must read ln(N_c).
    const std::vector<int> probe = balanced_probe_indices(train_set, probe_size, cfg.seed);
    const Batch probe_batch = materialize_batch(train_set, probe);
    MeasureConfig mcfg;
    mcfg.alpha = cfg.lr;
    mcfg.train_batch_size = cfg.batch_size;
    ActivationTrace<float> trace = forward(net, probe_batch.inputs, Mode::Eval);
    const auto records = measure(trace, probe_batch.labels, net, mcfg);

    ResidualProbeResult out;
    const int unit_output_layer = net.units[0].first_layer + 2; // 1-based global index
    for (const auto& rec : records) {
        if (rec.location == MeasureLocation::ResidualBranchPreAdd && rec.layer == unit_output_layer)
            out.pre_add_entropy = rec.entropy;
        if (rec.location == MeasureLocation::LayerOutput && rec.layer == unit_output_layer)
            out.post_add_entropy = rec.entropy;
    }
    out.test_accuracy = evaluate_accuracy(net, test_set);
    return out;
}

double residual_negation_entropy(ResidualKind kind, int width, int num_classes,
                                 std::uint64_t seed) {
    if (kind == ResidualKind::None)
        throw config_error("residual_negation_entropy: needs a residual kind");
    Architecture arch;
    arch.input_dim = width;
    arch.num_classes = num_classes;
    arch.blocks = {Block{'r', 2, width, kind, 2.0, 0.1, false}};
    Network<float> net = build_network<float>(arch, seed);

    const double scale = net.units[0].scale;
    const double shift = net.units[0].shift;
    // branch(x) = -r(x): first layer passes x through (inputs are
    // non-negative), second layer negates the residual map.
    auto& first = net.layers[0].dense;
    first.W = Mat<float>(width, width);
    for (int i = 0; i < width; ++i) first.W(i, i) = 1.0f;
    first.b = Mat<float>(width, 1);
    auto& second = net.layers[1].dense;
    second.W = Mat<float>(width, width);
    for (int i = 0; i < width; ++i) second.W(i, i) = float(-scale);
    second.b = Mat<float>::filled(width, 1, float(-shift));
    net.bump_version();

    // balanced probe over the classes
    const int per_class = 16;
    const int n = per_class * num_classes;
    RngStream rng(RngStream::derive(seed, 1));
    Mat<float> probe(n, width);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        labels[std::size_t(i)] = i % num_classes;
        for (int j = 0; j < width; ++j) probe(i, j) = float(rng.uniform());
    }

    ActivationTrace<float> trace = forward(net, probe, Mode::Eval);
    MeasureConfig mcfg;
    const auto records = measure(trace, labels, net, mcfg);
    for (const auto& rec : records)
        if (rec.location == MeasureLocation::LayerOutput && rec.layer == 2) return rec.entropy;
    throw internal_error("residual_negation_entropy: unit output record missing");
}

// ---------------------------------------------------------------------------
// heatmap oracle

BundlePartition oracle_bundles(std::span<const float> a_values, std::span<const float> weights,
                               double alpha, int batch_size) {
    if (a_values.size() < 2) throw config_error("oracle_bundles: need at least 2 samples");
    if (weights.empty()) throw config_error("oracle_bundles: need at least 1 weight");
    if (alpha <= 0.0 || batch_size < 1)
        throw config_error("oracle_bundles: alpha must be > 0 and batch size >= 1");

    const float scale = float(alpha) / float(batch_size);
    const std::size_t k = weights.size();

    struct KeyHash {
        std::size_t operator()(const std::vector<std::uint32_t>& key) const {
            std::size_t h = 1469598103934665603ULL;
            for (const std::uint32_t v : key) {
                h ^= v;
                h *= 1099511628211ULL;
            }
            return h;
        }
    };
    std::unordered_map<std::vector<std::uint32_t>, int, KeyHash> groups;
    BundlePartition part;
    part.batch_size = int(a_values.size());

    std::vector<std::uint32_t> key(k);
    for (std::size_t i = 0; i < a_values.size(); ++i) {
        const float update = scale * a_values[i]; // fl32((alpha/|B|) * a_i)
        for (std::size_t m = 0; m < k; ++m) {
            const float updated = weights[m] - update; // fl32(W[m] - update)
            std::uint32_t bits;
            std::memcpy(&bits, &updated, 4);
            key[m] = bits;
        }
        auto [it, inserted] = groups.try_emplace(key, int(part.bundles.size()));
        if (inserted)
            part.bundles.push_back({int(i)});
        else
            part.bundles[std::size_t(it->second)].push_back(int(i));
    }
    return part;
}

int exact_equality_bundle_count(std::span<const float> a_values) {
    std::unordered_set<std::uint32_t> seen;
    for (const float v : a_values) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        seen.insert(bits);
    }
    return int(seen.size());
}

std::vector<HeatmapRow> heatmap(const HeatmapOptions& opts, int jobs) {
    if (opts.lr_grid.empty() || opts.batch_grid.empty())
        throw config_error("heatmap: grids must be nonempty");
    if (opts.n < 2 || opts.k < 1) throw config_error("heatmap: need n >= 2 and k >= 1");

    // Distinct binary32 activations: the exact-equality panel is about the
    // detector, not accidental duplicate draws.
    RngStream rng(opts.seed);
    std::vector<float> a;
    a.reserve(std::size_t(opts.n));
    std::unordered_set<std::uint32_t> seen;
    while (int(a.size()) < opts.n) {
        const float v = float(rng.uniform());
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        if (seen.insert(bits).second) a.push_back(v);
    }
    std::vector<float> w(static_cast<std::size_t>(opts.k));
    for (auto& v : w) v = float(0.5 + 0.5 * rng.uniform());

    Mat<float> acts(opts.n, 1, std::vector<float>(a));
    Mat<float> wmat(1, opts.k, std::vector<float>(w));
    const double gamma = resolution_threshold(wmat, ResolutionPolicy::weight_ulp(),
                                              FloatFormat::Binary32);

    struct Cell {
        double lr;
        int batch;
    };
    std::vector<Cell> cells;
    for (const double lr : opts.lr_grid)
        for (const int b : opts.batch_grid) cells.push_back(Cell{lr, b});

    std::vector<HeatmapRow> rows(cells.size());
    parallel_for(jobs, int(cells.size()), [&](int ci) {
        const Cell cell = cells[std::size_t(ci)];
        HeatmapRow row;
        row.lr = cell.lr;
        row.batch_size = cell.batch;
        row.oracle = oracle_bundles(a, w, cell.lr, cell.batch).bundle_count();
        row.metric = partition_layer(acts, cell.lr, cell.batch, gamma).bundle_count();
        row.exact_eq = exact_equality_bundle_count(a);
        rows[std::size_t(ci)] = row;
    });
    return rows;
}

} // namespace bundlescope
