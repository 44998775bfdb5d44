#include "bundlescope/cba_tune.hpp"

#include <string>

#include "bundlescope/train.hpp"

namespace bundlescope {

namespace {

std::vector<int> block_counts(const Architecture& arch) {
    std::vector<int> counts;
    counts.reserve(arch.blocks.size());
    for (const auto& b : arch.blocks) counts.push_back(b.layer_count);
    return counts;
}

} // namespace

CbaResult cba_tune(const Architecture& initial_arch, const Dataset& ds, const TrainConfig& cfg,
                   const CbaOptions& opts) {
    initial_arch.validate();
    cfg.validate();
    if (opts.target_epochs < 1) throw config_error("cba_tune: target_epochs must be >= 1");
    const int initial_layers = initial_arch.hidden_layers();
    if (initial_layers < 1) throw config_error("cba_tune: architecture has no hidden layers");

    // Probe fixed once per run, reused across epochs and restarts.
    const std::vector<int> probe = probe_indices(ds, opts.probe_size, cfg.seed);
    const Batch probe_batch = materialize_batch(ds, probe);

    MeasureConfig mcfg;
    mcfg.alpha = cfg.lr;
    mcfg.train_batch_size = cfg.batch_size;
    mcfg.policy = opts.policy;
    mcfg.epsilon = opts.epsilon;

    Architecture arch = initial_arch;
    EvolutionLog log;
    for (const auto& b : arch.blocks) log.block_tags.push_back(b.tag);
    log.steps.push_back(EvolutionRow{0, 0, block_counts(arch), std::nullopt, std::nullopt});

    int prune_steps = 0;
    Network<float> net = build_network<float>(arch, RngStream::derive(cfg.seed, 0x5eed));
    int epoch = 0;
    int total_epochs = 0;

    while (epoch < opts.target_epochs) {
        TrainConfig epoch_cfg = cfg;
        train_epoch(net, ds, epoch_cfg, total_epochs);
        ++epoch;
        ++total_epochs;
        mcfg.epoch = epoch;

        ActivationTrace<float> trace = forward(net, probe_batch.inputs, Mode::Eval);
        const auto records = measure(trace, probe_batch.labels, net, mcfg);
        bool conflict = false;
        for (const auto& rec : records)
            if (rec.location == MeasureLocation::LayerOutput && rec.entropy > 0.0) conflict = true;
        if (!conflict) continue;

        const auto pos = first_conflicting_layer(records, arch);
        if (!pos) throw internal_error("cba_tune: conflict flagged but no layer located");
        if (arch.blocks[std::size_t(pos->block_index)].layer_count == 0)
            throw internal_error("cba_tune: conflict located in an empty block");

        bool any_prunable = false;
        for (const auto& b : arch.blocks)
            if (b.layer_count > 0) any_prunable = true;
        if (!any_prunable)
            throw state_error("cba_tune: conflict in non-prunable layer " +
                              std::to_string(pos->global_layer));

        const int keep = pos->offset - 1;
        arch = prune_architecture(arch, pos->block_tag, keep);
        ++prune_steps;
        if (prune_steps > initial_layers)
            throw internal_error("cba_tune: prune step budget exceeded (" +
                                 std::to_string(prune_steps) + " > " +
                                 std::to_string(initial_layers) + ")");
        log.steps.push_back(
            EvolutionRow{prune_steps, epoch, block_counts(arch), pos->block_tag, keep});

        // Fresh weights: the pruned model must not inherit parameters that
        // were trained against conflicting gradients.
        net = build_network<float>(arch, RngStream::derive(cfg.seed, 0x5eed + prune_steps));
        epoch = 0;
    }

    log.steps.push_back(EvolutionRow{prune_steps + 1, opts.target_epochs, block_counts(arch),
                                     std::nullopt, std::nullopt});
    log.final_arch = arch;
    log.total_epochs = total_epochs;
    log.prune_steps = prune_steps;
    return CbaResult{std::move(net), std::move(log)};
}

} // namespace bundlescope
