// bundlescope: feed-forward training toolkit with conflicting-bundle
// detection, depth auto-tuning and lesion studies. Subcommands bind a JSON
// run config to one experiment and write CSV reports plus the resolved
// config under --out.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bundlescope/cba_tune.hpp"
#include "bundlescope/checkpoint.hpp"
#include "bundlescope/config_json.hpp"
#include "bundlescope/experiments.hpp"
#include "bundlescope/lesion.hpp"
#include "bundlescope/report.hpp"
#include "bundlescope/train.hpp"

namespace bsc = bundlescope;
using bsc::json;

namespace {

struct DatasetSpec {
    std::string name = "synth";
    std::string images, labels, test_images, test_labels;
    int limit = 0;
    int size = 8000;
    int test_size = 2000;
    double class_zero_fraction = 0.5;
};

struct RunSettings {
    DatasetSpec dataset;
    std::optional<bsc::Architecture> arch;
    bsc::TrainConfig train;
    bsc::ResolutionPolicy policy = bsc::ResolutionPolicy::weight_ulp();
    int probe_size = 2048;
    double epsilon = 1e-12;
    std::string output_dir = "runs/out";
};

DatasetSpec dataset_from_json(const json& j) {
    bsc::require_known_keys(j,
                            {"name", "images", "labels", "test_images", "test_labels", "limit",
                             "size", "test_size", "class_zero_fraction"},
                            "dataset");
    DatasetSpec spec;
    spec.name = j.value("name", std::string("synth"));
    if (spec.name != "toy" && spec.name != "mnist" && spec.name != "synth")
        throw bsc::config_error("dataset.name must be toy, mnist or synth");
    spec.images = j.value("images", std::string());
    spec.labels = j.value("labels", std::string());
    spec.test_images = j.value("test_images", std::string());
    spec.test_labels = j.value("test_labels", std::string());
    spec.limit = j.value("limit", 0);
    spec.size = j.value("size", 8000);
    spec.test_size = j.value("test_size", 2000);
    spec.class_zero_fraction = j.value("class_zero_fraction", 0.5);
    return spec;
}

json dataset_to_json(const DatasetSpec& d) {
    json j;
    j["name"] = d.name;
    if (!d.images.empty()) j["images"] = d.images;
    if (!d.labels.empty()) j["labels"] = d.labels;
    if (!d.test_images.empty()) j["test_images"] = d.test_images;
    if (!d.test_labels.empty()) j["test_labels"] = d.test_labels;
    if (d.limit > 0) j["limit"] = d.limit;
    if (d.name == "synth") {
        j["size"] = d.size;
        j["test_size"] = d.test_size;
    }
    if (d.name == "toy") {
        j["size"] = d.size;
        j["class_zero_fraction"] = d.class_zero_fraction;
    }
    return j;
}

RunSettings load_settings(const std::string& config_path) {
    RunSettings settings;
    if (config_path.empty()) return settings;
    std::ifstream in(config_path);
    if (!in) throw bsc::config_error(config_path + ": cannot open config");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw bsc::config_error(config_path + ": invalid JSON (" + std::string(e.what()) + ")");
    }
    bsc::require_known_keys(root, {"dataset", "architecture", "train", "bundles", "output_dir"},
                            "config");
    if (root.contains("dataset")) settings.dataset = dataset_from_json(root.at("dataset"));
    if (root.contains("architecture"))
        settings.arch = bsc::architecture_from_json(root.at("architecture"));
    if (root.contains("train")) settings.train = bsc::train_from_json(root.at("train"));
    if (root.contains("bundles")) {
        const json& b = root.at("bundles");
        bsc::require_known_keys(b, {"policy", "probe_size", "epsilon"}, "bundles");
        if (b.contains("policy")) settings.policy = bsc::policy_from_json(b.at("policy"));
        settings.probe_size = b.value("probe_size", 2048);
        settings.epsilon = b.value("epsilon", 1e-12);
    }
    if (root.contains("output_dir")) settings.output_dir = root.at("output_dir").get<std::string>();
    return settings;
}

json settings_to_json(const RunSettings& s) {
    json root;
    root["dataset"] = dataset_to_json(s.dataset);
    if (s.arch) root["architecture"] = bsc::architecture_to_json(*s.arch);
    root["train"] = bsc::train_to_json(s.train);
    root["bundles"] = json{{"policy", bsc::policy_to_json(s.policy)},
                           {"probe_size", s.probe_size},
                           {"epsilon", s.epsilon}};
    root["output_dir"] = s.output_dir;
    return root;
}

void write_resolved_config(const RunSettings& s, const json& extra = json::object()) {
    std::filesystem::create_directories(s.output_dir);
    json root = settings_to_json(s);
    for (const auto& [k, v] : extra.items()) root[k] = v;
    std::ofstream out(s.output_dir + "/config.json", std::ios::binary | std::ios::trunc);
    if (!out) throw bsc::io_error(s.output_dir + "/config.json: cannot write");
    out << root.dump(2) << "\n";
}

bsc::Dataset load_train_set(const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.name == "toy") return bsc::toy_generate(spec.size, spec.class_zero_fraction, seed);
    if (spec.name == "mnist") {
        if (spec.images.empty() || spec.labels.empty())
            throw bsc::config_error("dataset: mnist needs images and labels paths");
        return bsc::mnist_load(spec.images, spec.labels, spec.limit);
    }
    bsc::Dataset ds = bsc::synth_digits(spec.size, bsc::RngStream::derive(seed, 0xda7a));
    return spec.limit > 0 ? bsc::subset(ds, spec.limit) : ds;
}

bsc::Dataset load_test_set(const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.name == "toy")
        return bsc::toy_generate(spec.size, spec.class_zero_fraction,
                                 bsc::RngStream::derive(seed, 0x7e57));
    if (spec.name == "mnist") {
        if (spec.test_images.empty() || spec.test_labels.empty())
            throw bsc::config_error("dataset: mnist needs test_images and test_labels paths");
        return bsc::mnist_load(spec.test_images, spec.test_labels, spec.limit);
    }
    return bsc::synth_digits(spec.test_size, bsc::RngStream::derive(seed, 0x7e57));
}

bsc::MeasureConfig measure_config(const RunSettings& s, int epoch = 0) {
    bsc::MeasureConfig m;
    m.alpha = s.train.lr;
    m.train_batch_size = s.train.batch_size;
    m.policy = s.policy;
    m.epsilon = s.epsilon;
    m.epoch = epoch;
    return m;
}

std::vector<bsc::EntropyRow> measure_rows(bsc::Network<float>& net, const bsc::Dataset& ds,
                                          const RunSettings& s, int epoch) {
    const std::vector<int> probe = bsc::probe_indices(ds, s.probe_size, s.train.seed);
    const bsc::Batch pb = bsc::materialize_batch(ds, probe);
    bsc::ActivationTrace<float> trace = bsc::forward(net, pb.inputs, bsc::Mode::Eval);
    const auto records = bsc::measure(trace, pb.labels, net, measure_config(s, epoch));
    return bsc::entropy_rows_from_records(records, net.arch);
}

int default_jobs() {
    if (const char* env = std::getenv("BUNDLESCOPE_THREADS")) return std::max(1, std::atoi(env));
    return 1;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_toy(const RunSettings& base, bool conflict, bool imbalanced) {
    RunSettings s = base;
    s.dataset.name = "toy";
    s.dataset.size = imbalanced ? 999 : 1000;
    s.dataset.class_zero_fraction = imbalanced ? 2.0 / 3.0 : 0.5;
    write_resolved_config(
        s, json{{"experiment", "toy"}, {"conflict", conflict}, {"imbalanced", imbalanced}});
    const bsc::ToyRunResult res = bsc::run_toy(conflict, !imbalanced, s.train);
    bsc::write_toy_csv(res.rows, 2, s.output_dir + "/toy.csv");
    std::cout << "toy: " << res.rows.size() << " epochs, final accuracy "
              << bsc::format_float(res.rows.back().accuracy) << "\n";
    return 0;
}

int cmd_train(const RunSettings& s) {
    if (!s.arch) throw bsc::config_error("train: config needs an architecture section");
    const bsc::Dataset train_set = load_train_set(s.dataset, s.train.seed);
    write_resolved_config(s, json{{"experiment", "train"}});

    bsc::Network<float> net = bsc::build_network<float>(*s.arch, s.train.seed);
    std::vector<bsc::EntropyRow> rows;
    for (int epoch = 1; epoch <= s.train.epochs; ++epoch) {
        const bsc::EpochStats stats = bsc::train_epoch(net, train_set, s.train, epoch - 1);
        auto epoch_rows = measure_rows(net, train_set, s, epoch);
        rows.insert(rows.end(), epoch_rows.begin(), epoch_rows.end());
        std::cout << "epoch " << epoch << ": loss " << bsc::format_float(stats.mean_loss) << "\n";
    }
    bsc::write_entropy_csv(rows, s.output_dir + "/entropy.csv");
    bsc::save_checkpoint(net, s.train, s.train.epochs, s.output_dir + "/checkpoint.cbnd");
    const bsc::Dataset test_set = load_test_set(s.dataset, s.train.seed);
    std::cout << "test accuracy " << bsc::format_float(bsc::evaluate_accuracy(net, test_set))
              << "\n";
    return 0;
}

int cmd_measure(RunSettings s, const std::string& checkpoint_path) {
    bsc::TrainConfig saved;
    bsc::Network<float> net = bsc::load_checkpoint<float>(checkpoint_path, &saved);
    s.train = saved;
    s.arch = net.arch;
    const bsc::Dataset ds = load_train_set(s.dataset, s.train.seed);
    write_resolved_config(s, json{{"experiment", "measure"}, {"checkpoint", checkpoint_path}});
    const auto rows = measure_rows(net, ds, s, 0);
    bsc::write_entropy_csv(rows, s.output_dir + "/entropy.csv");
    std::cout << "measured " << rows.size() << " records\n";
    return 0;
}

int cmd_sweep(const RunSettings& s, const std::vector<int>& depths, const std::vector<int>& widths,
              int jobs) {
    const bsc::Dataset train_set = load_train_set(s.dataset, s.train.seed);
    const bsc::Dataset test_set = load_test_set(s.dataset, s.train.seed);
    bsc::SweepOptions opts;
    if (!depths.empty()) opts.depths = depths;
    if (!widths.empty()) opts.widths = widths;
    opts.probe_size = s.probe_size;
    opts.policy = s.policy;
    opts.epsilon = s.epsilon;
    write_resolved_config(s, json{{"experiment", "sweep"},
                                  {"depths", opts.depths},
                                  {"widths", opts.widths},
                                  {"jobs", jobs}});
    const auto rows = bsc::sweep(train_set, test_set, s.train, opts, jobs);
    bsc::write_sweep_csv(rows, s.output_dir + "/sweep.csv");
    std::cout << "sweep: " << rows.size() << " cells\n";
    return 0;
}

int cmd_cba_tune(const RunSettings& s, int target_epochs) {
    if (!s.arch) throw bsc::config_error("cba-tune: config needs an architecture section");
    const bsc::Dataset train_set = load_train_set(s.dataset, s.train.seed);
    bsc::CbaOptions opts;
    opts.target_epochs = target_epochs;
    opts.probe_size = s.probe_size;
    opts.policy = s.policy;
    opts.epsilon = s.epsilon;
    write_resolved_config(
        s, json{{"experiment", "cba-tune"}, {"target_epochs", opts.target_epochs}});

    const bsc::CbaResult res = bsc::cba_tune(*s.arch, train_set, s.train, opts);
    bsc::write_evolution_csv(res.log.steps, res.log.block_tags, s.output_dir + "/evolution.csv");
    bsc::Network<float> net = res.net;
    bsc::save_checkpoint(net, s.train, res.log.total_epochs, s.output_dir + "/checkpoint.cbnd");
    const auto rows = measure_rows(net, train_set, s, res.log.total_epochs);
    bsc::write_entropy_csv(rows, s.output_dir + "/entropy.csv");

    const bsc::Dataset test_set = load_test_set(s.dataset, s.train.seed);
    std::cout << "cba-tune: " << res.log.prune_steps << " prunes, final layers "
              << res.log.final_arch.hidden_layers() << ", test accuracy "
              << bsc::format_float(bsc::evaluate_accuracy(net, test_set)) << "\n";
    return 0;
}

int cmd_lesion(const RunSettings& s, const std::string& checkpoint_path, std::vector<int> ks,
               int num_seeds, int jobs) {
    bsc::Network<float> net(
        [&] {
            if (!checkpoint_path.empty()) return bsc::load_checkpoint<float>(checkpoint_path);
            if (!s.arch) throw bsc::config_error("lesion: needs --checkpoint or an architecture");
            bsc::Network<float> fresh = bsc::build_network<float>(*s.arch, s.train.seed);
            const bsc::Dataset train_set = load_train_set(s.dataset, s.train.seed);
            for (int epoch = 0; epoch < s.train.epochs; ++epoch)
                bsc::train_epoch(fresh, train_set, s.train, epoch);
            return fresh;
        }());
    const bsc::Dataset train_set = load_train_set(s.dataset, s.train.seed);
    const bsc::Dataset test_set = load_test_set(s.dataset, s.train.seed);

    if (ks.empty()) {
        const int units = net.live_units();
        for (int k = 0; k <= units; k += std::max(1, units / 8)) ks.push_back(k);
    }
    std::vector<std::uint64_t> seeds;
    for (int i = 1; i <= num_seeds; ++i) seeds.push_back(std::uint64_t(i));
    const std::vector<bsc::LesionStrategy> strategies{bsc::LesionStrategy::Conflicting,
                                                      bsc::LesionStrategy::NonConflicting,
                                                      bsc::LesionStrategy::Random};
    write_resolved_config(s, json{{"experiment", "lesion"}, {"k_values", ks}, {"seeds", num_seeds}});

    const bsc::LesionReport report = bsc::lesion_study(
        net, test_set, train_set, strategies, ks, seeds, measure_config(s), s.probe_size,
        s.train.seed, jobs);
    bsc::write_lesion_csv(bsc::lesion_rows(report), s.output_dir + "/lesion.csv");

    json units = json::array();
    for (const auto& u : report.units)
        units.push_back(json{{"unit", u.unit},
                             {"branch_entropy", u.branch_entropy},
                             {"conflicting", u.conflicting}});
    std::ofstream uf(s.output_dir + "/lesion_units.json", std::ios::binary | std::ios::trunc);
    uf << json{{"baseline_accuracy", report.baseline_accuracy}, {"units", units}}.dump(2) << "\n";
    std::cout << "lesion: baseline accuracy " << bsc::format_float(report.baseline_accuracy)
              << ", " << report.units.size() << " units classified\n";
    return 0;
}

int cmd_heatmap(const RunSettings& s, int n, int k, int jobs) {
    bsc::HeatmapOptions opts;
    opts.n = n;
    opts.k = k;
    opts.seed = s.train.seed;
    write_resolved_config(s, json{{"experiment", "heatmap"},
                                  {"n", opts.n},
                                  {"k", opts.k},
                                  {"lr_grid", opts.lr_grid},
                                  {"batch_grid", opts.batch_grid},
                                  {"jobs", jobs}});
    const auto rows = bsc::heatmap(opts, jobs);
    bsc::write_heatmap_csv(rows, s.output_dir + "/heatmap.csv");
    int matches = 0;
    for (const auto& row : rows) matches += row.metric == row.oracle ? 1 : 0;
    std::cout << "heatmap: metric == oracle in " << matches << "/" << rows.size() << " cells\n";
    return 0;
}

int cmd_residual_probe(const RunSettings& s, const std::string& kind_name) {
    bsc::ResidualKind kind;
    if (kind_name == "identity")
        kind = bsc::ResidualKind::Identity;
    else if (kind_name == "affine")
        kind = bsc::ResidualKind::Affine;
    else
        throw bsc::config_error("residual-probe: --kind must be identity or affine");

    const bsc::Dataset train_set = load_train_set(s.dataset, s.train.seed);
    const bsc::Dataset test_set = load_test_set(s.dataset, s.train.seed);
    write_resolved_config(s, json{{"experiment", "residual-probe"}, {"kind", kind_name}});
    const bsc::ResidualProbeResult res =
        bsc::residual_probe(kind, train_set, test_set, s.train, s.probe_size);

    std::ofstream rf(s.output_dir + "/residual_probe.json", std::ios::binary | std::ios::trunc);
    rf << json{{"kind", kind_name},
               {"pre_add_entropy", res.pre_add_entropy},
               {"post_add_entropy", res.post_add_entropy},
               {"test_accuracy", res.test_accuracy}}
              .dump(2)
       << "\n";
    std::cout << "residual-probe " << kind_name << ": pre-add "
              << bsc::format_float(res.pre_add_entropy) << ", post-add "
              << bsc::format_float(res.post_add_entropy) << ", accuracy "
              << bsc::format_float(res.test_accuracy) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conflicting-bundle training toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_override, checkpoint_path, kind_name = "identity";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> epochs_override;
    int jobs = default_jobs();
    bool conflict = false, balanced = true;
    std::vector<int> depths, widths, ks;
    int heatmap_n = 4096, heatmap_k = 8, target_epochs = 20, num_seeds = 5;

    auto add_common = [&](CLI::App* cmd, bool with_jobs) {
        cmd->add_option("--config", config_path, "JSON run config");
        cmd->add_option("--seed", seed_override, "override train.seed");
        cmd->add_option("--epochs", epochs_override, "override train.epochs");
        cmd->add_option("--out", out_override, "output directory");
        if (with_jobs) cmd->add_option("--jobs", jobs, "parallel cells (BUNDLESCOPE_THREADS)");
    };

    CLI::App* toy = app.add_subcommand("toy", "controlled toy runs");
    add_common(toy, false);
    toy->add_flag("--conflict", conflict, "fully conflicting initialization");
    toy->add_flag("--balanced,!--imbalanced", balanced,
                  "balanced (default) or 2:1 imbalanced dataset");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "depth/width grid");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--depths", depths, "hidden layer counts")->delimiter(',');
    sweep_cmd->add_option("--widths", widths, "hidden widths")->delimiter(',');

    CLI::App* train_cmd = app.add_subcommand("train", "train one network");
    add_common(train_cmd, false);

    CLI::App* measure_cmd = app.add_subcommand("measure", "measure a checkpoint");
    add_common(measure_cmd, false);
    measure_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();

    CLI::App* cba = app.add_subcommand("cba-tune", "train-detect-prune-restart depth tuning");
    add_common(cba, false);
    cba->add_option("--target-epochs", target_epochs, "conflict-free epochs required");

    CLI::App* lesion_cmd = app.add_subcommand("lesion", "residual unit lesion study");
    add_common(lesion_cmd, true);
    lesion_cmd->add_option("--checkpoint", checkpoint_path, "trained checkpoint to lesion");
    lesion_cmd->add_option("--k", ks, "deletion counts")->delimiter(',');
    lesion_cmd->add_option("--seeds", num_seeds, "seeds per cell");

    CLI::App* heat = app.add_subcommand("heatmap", "rounding-collapse oracle heatmap");
    add_common(heat, true);
    heat->add_option("--n", heatmap_n, "activation samples");
    heat->add_option("--k", heatmap_k, "weights per sample");

    CLI::App* probe = app.add_subcommand("residual-probe", "bijective residual bypass probe");
    add_common(probe, false);
    probe->add_option("--kind", kind_name, "identity or affine");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e); // prints usage to stderr; nonzero on error
    }

    try {
        RunSettings settings = load_settings(config_path);
        if (seed_override) settings.train.seed = *seed_override;
        if (epochs_override) settings.train.epochs = *epochs_override;
        if (!out_override.empty()) settings.output_dir = out_override;

        if (toy->parsed()) {
            if (!toy->count("--config")) settings.train = bsc::default_toy_config();
            if (seed_override) settings.train.seed = *seed_override;
            if (epochs_override) settings.train.epochs = *epochs_override;
            return cmd_toy(settings, conflict, !balanced);
        }
        if (sweep_cmd->parsed()) {
            if (!sweep_cmd->count("--epochs") && !sweep_cmd->count("--config"))
                settings.train.epochs = 15;
            return cmd_sweep(settings, depths, widths, jobs);
        }
        if (train_cmd->parsed()) return cmd_train(settings);
        if (measure_cmd->parsed()) return cmd_measure(settings, checkpoint_path);
        if (cba->parsed()) return cmd_cba_tune(settings, target_epochs);
        if (lesion_cmd->parsed()) return cmd_lesion(settings, checkpoint_path, ks, num_seeds, jobs);
        if (heat->parsed()) return cmd_heatmap(settings, heatmap_n, heatmap_k, jobs);
        if (probe->parsed()) return cmd_residual_probe(settings, kind_name);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const bsc::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const bsc::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const bsc::format_error& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
