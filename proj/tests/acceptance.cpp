// Acceptance suite: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL] line. Run all with no arguments, a single criterion
// with --only N, and control sweep/heatmap parallelism with --jobs N (or
// BUNDLESCOPE_THREADS).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bundlescope/cba_tune.hpp"
#include "bundlescope/checkpoint.hpp"
#include "bundlescope/experiments.hpp"
#include "bundlescope/lesion.hpp"
#include "bundlescope/report.hpp"
#include "bundlescope/train.hpp"

using namespace bundlescope;

namespace {

struct check_failure : std::runtime_error {
    explicit check_failure(const std::string& what) : std::runtime_error(what) {}
};

void require(bool cond, const std::string& what) {
    if (!cond) throw check_failure(what);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

std::string temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "bundlescope_acceptance";
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Shared 8k-sample image set, served through the IDX loader.
Dataset acceptance_train_set() {
    const std::string img = temp_dir() + "/train-images.idx3";
    const std::string lbl = temp_dir() + "/train-labels.idx1";
    if (!std::filesystem::exists(img) || !std::filesystem::exists(lbl))
        write_idx_pair(synth_digits(8000, 20260801), img, lbl);
    return mnist_load(img, lbl, 8000);
}

Dataset acceptance_test_set() {
    const std::string img = temp_dir() + "/test-images.idx3";
    const std::string lbl = temp_dir() + "/test-labels.idx1";
    if (!std::filesystem::exists(img) || !std::filesystem::exists(lbl))
        write_idx_pair(synth_digits(2000, 20260802), img, lbl);
    return mnist_load(img, lbl, 2000);
}

int g_jobs = 1;

// ---------------------------------------------------------------------------
// 1. entropy closed forms

void criterion_1() {
    Architecture arch;
    arch.input_dim = 16;
    arch.num_classes = 10;
    arch.blocks = {Block{'a', 3, 12, ResidualKind::None, 1.0, 0.0, false}};
    Network<float> net = build_network<float>(arch, 1);
    init_fully_conflicting(net);

    RngStream rng(2);
    const int probe = 200; // balanced: 20 per class
    Mat<float> x(probe, 16);
    for (auto& v : x.data()) v = float(rng.uniform());
    std::vector<int> labels(probe);
    for (int i = 0; i < probe; ++i) labels[std::size_t(i)] = i % 10;

    ActivationTrace<float> trace = forward(net, x, Mode::Eval);
    MeasureConfig mcfg;
    const auto records = measure(trace, labels, net, mcfg);
    require(records.size() == 3, "expected one record per hidden layer");
    for (const auto& rec : records)
        require(std::fabs(rec.entropy - std::log(10.0)) < 1e-6,
                "fully bundled balanced probe entropy " + fmt(rec.entropy) + " != ln 10");

    // label-pure partitions give exactly zero
    BundlePartition pure;
    pure.batch_size = 6;
    pure.bundles = {{0, 1, 2}, {3}, {4, 5}};
    const std::vector<int> pure_labels{4, 4, 4, 1, 9, 9};
    require(bundle_entropy(pure, pure_labels, 1e-12, 10) == 0.0,
            "label-pure partition entropy must be exactly zero");
}

// ---------------------------------------------------------------------------
// 2. gradient oracle

double net_loss64(Network<double>& net, const Mat<double>& x, const Mat<double>& y) {
    ActivationTrace<double> tr = forward(net, x, Mode::Train, true);
    return loss_and_output_grad(tr.logits, y).first;
}

void criterion_2() {
    RngStream rng(20260803);
    double worst = 0.0;
    int checked = 0;
    while (checked < 20) {
        const int depth = 1 + int(rng.below(4));
        const int width = 4 + int(rng.below(13));
        const int input_dim = 2 + int(rng.below(5));
        const int nc = 2 + int(rng.below(4));
        Architecture arch;
        arch.input_dim = input_dim;
        arch.num_classes = nc;
        arch.blocks = {Block{'a', depth, width, ResidualKind::None, 1.0, 0.0, false}};
        Network<double> net = build_network<double>(arch, rng.next_u64());
        // keep preactivations away from the ReLU kink so central
        // differences measure the same one-sided behavior the analytic
        // gradient uses
        for (auto& hl : net.layers)
            for (auto& b : hl.dense.b.data()) b = 0.01 + 0.1 * rng.uniform();
        net.bump_version();

        const int batch = 4 + int(rng.below(5));
        Mat<double> x(batch, input_dim);
        for (auto& v : x.data()) v = rng.uniform();
        Mat<double> y(batch, nc);
        for (int i = 0; i < batch; ++i) y(i, int(rng.below(std::uint64_t(nc)))) = 1.0;

        ActivationTrace<double> probe = forward(net, x, Mode::Train, true);
        double min_abs_z = 1e300;
        for (const auto& cache : probe.caches)
            for (const double v : cache.z.data()) min_abs_z = std::min(min_abs_z, std::fabs(v));
        if (min_abs_z < 1e-3) continue;
        ++checked;

        ActivationTrace<double> tr = forward(net, x, Mode::Train, true);
        auto [loss, dlogits] = loss_and_output_grad(tr.logits, y);
        (void)loss;
        const Gradients<double> grads = backward(net, tr, dlogits);

        const double step = 1e-5;
        auto probe_param = [&](Mat<double>& param, const Mat<double>& grad) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                const double orig = param.data()[i];
                param.data()[i] = orig + step;
                const double up = net_loss64(net, x, y);
                param.data()[i] = orig - step;
                const double down = net_loss64(net, x, y);
                param.data()[i] = orig;
                const double fd = (up - down) / (2.0 * step);
                const double a = grad.data()[i];
                const double rel = std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-6});
                worst = std::max(worst, rel);
            }
        };
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            probe_param(net.layers[l].dense.W, grads.layers[l].W);
            probe_param(net.layers[l].dense.b, grads.layers[l].b);
        }
        probe_param(net.head.W, grads.head.W);
        probe_param(net.head.b, grads.head.b);
    }
    require(worst < 1e-4, "max relative error vs finite differences " + fmt(worst) + " >= 1e-4");
    std::cout << "      (max relative error " << fmt(worst) << " over 20 nets)\n";
}

// ---------------------------------------------------------------------------
// 3. fully-conflicting gradient identity

void criterion_3() {
    const int nc = 10;
    const int batch = 60;
    Architecture arch;
    arch.input_dim = 8;
    arch.num_classes = nc;
    arch.blocks = {Block{'a', 2, 6, ResidualKind::None, 1.0, 0.0, false}};
    Network<double> net = build_network<double>(arch, 5);
    init_fully_conflicting(net);

    RngStream rng(6);
    Mat<double> x(batch, 8);
    for (auto& v : x.data()) v = rng.uniform();
    Mat<double> y(batch, nc);
    for (int i = 0; i < batch; ++i) y(i, i % nc) = 1.0; // uniform labels

    ActivationTrace<double> tr = forward(net, x, Mode::Train, true);
    auto [loss, dlogits] = loss_and_output_grad(tr.logits, y);
    (void)loss;
    const Gradients<double> grads = backward(net, tr, dlogits);

    const Mat<double>& aL = tr.layer_out.back();
    const Mat<double>& h = tr.probs;
    for (int i = 1; i < batch; ++i)
        for (int j = 0; j < nc; ++j)
            require(h(i, j) == h(0, j), "outputs must collapse to a single h");
    for (int out = 0; out < nc; ++out) {
        const double coef = h(0, out) - 1.0 / nc;
        require(std::fabs(grads.head.b(out, 0) - coef) < 1e-6,
                "head bias gradient deviates from (h - 1/Nc)");
        for (int in = 0; in < aL.cols(); ++in)
            require(std::fabs(grads.head.W(out, in) - coef * aL(0, in)) < 1e-6,
                    "head weight gradient deviates from (h - 1/Nc) a^T");
    }
}

// ---------------------------------------------------------------------------
// 4. toy reproduction

void criterion_4() {
    TrainConfig cfg = default_toy_config();

    const ToyRunResult clean = run_toy(false, true, cfg);
    const ToyRow& clean_last = clean.rows.back();
    require(clean_last.accuracy >= 0.98,
            "no-conflict balanced run accuracy " + fmt(clean_last.accuracy) + " < 0.98");

    const ToyRunResult conflict = run_toy(true, true, cfg);
    const ToyRow& c_last = conflict.rows.back();
    for (const double m : c_last.mean_out)
        require(std::fabs(m - 0.5) <= 0.02,
                "conflict balanced mean output " + fmt(m) + " not within 0.5 +- 0.02");
    require(std::fabs(c_last.accuracy - 0.5) <= 0.05,
            "conflict balanced accuracy " + fmt(c_last.accuracy) + " not within 0.5 +- 0.05");

    const ToyRunResult imb = run_toy(true, false, cfg);
    const ToyRow& i_last = imb.rows.back();
    require(std::fabs(i_last.mean_out[0] - 0.66) <= 0.03,
            "conflict imbalanced class-0 mean output " + fmt(i_last.mean_out[0]) +
                " not within 0.66 +- 0.03");
}

// ---------------------------------------------------------------------------
// 5. heatmap oracle equivalence

void criterion_5() {
    HeatmapOptions opts;
    opts.seed = 20260805;
    const auto rows = heatmap(opts, g_jobs);
    require(rows.size() == 30, "expected the 5x6 desk grid");
    int matches = 0;
    for (const auto& row : rows) {
        if (row.metric == row.oracle) ++matches;
        require(row.exact_eq == opts.n,
                "exact-equality detector must report n singletons in every cell");
    }
    const double frac = double(matches) / double(rows.size());
    std::cout << "      (metric == oracle in " << matches << "/30 cells)\n";
    require(frac >= 0.95, "metric bundle counts equal oracle counts in only " +
                              std::to_string(matches) + "/30 cells (< 95%)");
}

// ---------------------------------------------------------------------------
// 6. residual bypass

void criterion_6() {
    const Dataset train = subset(acceptance_train_set(), 3000);
    const Dataset test = subset(acceptance_test_set(), 800);
    TrainConfig cfg;
    cfg.lr = 0.01;
    cfg.batch_size = 64;
    cfg.epochs = 3;
    cfg.seed = 33;
    cfg.stratified = false;

    double identity_acc = 0.0;
    for (const ResidualKind kind : {ResidualKind::Identity, ResidualKind::Affine}) {
        const ResidualProbeResult res = residual_probe(kind, train, test, cfg, 2000);
        const char* label =
            kind == ResidualKind::Identity ? "identity" : "affine(2, 0.1)";
        require(std::fabs(res.pre_add_entropy - std::log(10.0)) < 1e-6,
                std::string(label) + ": pre-add entropy " + fmt(res.pre_add_entropy) +
                    " != ln 10");
        require(res.post_add_entropy == 0.0, std::string(label) + ": post-add entropy " +
                                                 fmt(res.post_add_entropy) + " != 0");
        if (kind == ResidualKind::Identity)
            identity_acc = res.test_accuracy;
        else
            std::cout << "      (identity acc " << fmt(identity_acc) << ", affine acc "
                      << fmt(res.test_accuracy) << ")\n";
    }

    for (const ResidualKind kind : {ResidualKind::Identity, ResidualKind::Affine}) {
        const double h = residual_negation_entropy(kind, 16, 10, 7);
        require(std::fabs(h - std::log(10.0)) < 1e-6,
                "negated branch: post-add entropy " + fmt(h) + " != ln 10");
    }
}

// ---------------------------------------------------------------------------
// 7. depth/width trend

void criterion_7() {
    const Dataset train = acceptance_train_set();
    const Dataset test = acceptance_test_set();
    TrainConfig cfg;
    cfg.lr = 0.001;
    cfg.batch_size = 64;
    cfg.epochs = 15;
    cfg.seed = 20260807;
    cfg.stratified = false;
    SweepOptions opts; // depths {5,15,25,50} x widths {10,25,100}
    const auto rows = sweep(train, test, cfg, opts, g_jobs);

    for (const auto& row : rows)
        std::cout << "      depth " << row.depth << " width " << row.width << ": acc "
                  << fmt(row.accuracy) << ", H_L " << fmt(row.final_entropy) << ", fcl "
                  << (row.first_conflicting_layer ? std::to_string(*row.first_conflicting_layer)
                                                  : std::string("-"))
                  << "\n";

    // (a) within a depth, every conflicted cell sits below every clean cell
    for (const auto& a : rows)
        for (const auto& b : rows)
            if (a.depth == b.depth && a.final_entropy > 0.0 && b.final_entropy == 0.0)
                require(a.accuracy < b.accuracy,
                        "depth " + std::to_string(a.depth) + ": conflicted width " +
                            std::to_string(a.width) + " (acc " + fmt(a.accuracy) +
                            ") not below clean width " + std::to_string(b.width) + " (acc " +
                            fmt(b.accuracy) + ")");

    // (b) first conflicting layer non-decreasing in width at fixed depth
    for (const int depth : opts.depths) {
        double prev = -1.0;
        for (const int width : opts.widths) {
            for (const auto& row : rows) {
                if (row.depth != depth || row.width != width) continue;
                const double fcl = row.first_conflicting_layer
                                       ? double(*row.first_conflicting_layer)
                                       : std::numeric_limits<double>::infinity();
                require(prev < 0.0 || fcl >= prev,
                        "depth " + std::to_string(depth) +
                            ": first conflicting layer decreases with width");
                prev = fcl;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 8. CBA-tune

void criterion_8() {
    const Dataset train = acceptance_train_set();
    const Dataset test = acceptance_test_set();

    Architecture arch;
    arch.input_dim = train.dim();
    arch.num_classes = 10;
    arch.blocks = {Block{'a', 4, 64, ResidualKind::None, 1.0, 0.0, false},
                   Block{'b', 8, 32, ResidualKind::None, 1.0, 0.0, false},
                   Block{'c', 24, 16, ResidualKind::None, 1.0, 0.0, false},
                   Block{'d', 8, 8, ResidualKind::None, 1.0, 0.0, false}};
    const int initial_layers = arch.hidden_layers(); // 44

    TrainConfig cfg;
    cfg.lr = 0.001;
    cfg.batch_size = 64;
    cfg.epochs = 1;
    cfg.seed = 20260808;
    cfg.stratified = false;

    // over-deep baseline: the unpruned architecture trained for the same
    // per-run budget
    CbaOptions opts;
    opts.target_epochs = 20;
    opts.probe_size = 2048;

    Network<float> baseline = build_network<float>(arch, cfg.seed);
    for (int epoch = 0; epoch < opts.target_epochs; ++epoch)
        train_epoch(baseline, train, cfg, epoch);
    const double baseline_acc = evaluate_accuracy(baseline, test);

    const CbaResult res = cba_tune(arch, train, cfg, opts);
    std::cout << "      (prune steps " << res.log.prune_steps << ", final layers "
              << res.log.final_arch.hidden_layers() << ", baseline acc " << fmt(baseline_acc)
              << ")\n";
    for (const auto& step : res.log.steps) {
        std::cout << "      step " << step.step << " @epoch " << step.epoch_reached << ":";
        for (const int c : step.block_counts) std::cout << ' ' << c;
        if (step.pruned_block) std::cout << "  (pruned " << *step.pruned_block << ")";
        std::cout << "\n";
    }

    require(res.log.prune_steps >= 1, "over-deep architecture must be pruned at least once");
    require(res.log.prune_steps <= initial_layers, "prune steps exceed the initial layer count");
    require(res.log.final_arch.hidden_layers() < initial_layers,
            "final layer count must shrink strictly");

    // final training run is conflict-free on every layer
    Network<float> net = res.net;
    const std::vector<int> probe = probe_indices(train, opts.probe_size, cfg.seed);
    const Batch pb = materialize_batch(train, probe);
    ActivationTrace<float> trace = forward(net, pb.inputs, Mode::Eval);
    MeasureConfig mcfg;
    mcfg.alpha = cfg.lr;
    mcfg.train_batch_size = cfg.batch_size;
    for (const auto& rec : measure(trace, pb.labels, net, mcfg))
        if (rec.location == MeasureLocation::LayerOutput)
            require(rec.entropy == 0.0, "layer " + std::to_string(rec.layer) +
                                            " still conflicting after CBA-tune");

    const double final_acc = evaluate_accuracy(net, test);
    std::cout << "      (final acc " << fmt(final_acc) << ")\n";
    require(final_acc >= baseline_acc, "final accuracy " + fmt(final_acc) +
                                           " below over-deep baseline " + fmt(baseline_acc));
}

// ---------------------------------------------------------------------------
// 9. lesion ordering

void criterion_9() {
    const Dataset train = acceptance_train_set();
    const Dataset test = acceptance_test_set();

    Architecture arch;
    arch.input_dim = train.dim();
    arch.num_classes = 10;
    arch.blocks = {Block{'t', 1, 24, ResidualKind::None, 1.0, 0.0, false},
                   Block{'r', 32, 24, ResidualKind::Identity, 1.0, 0.0, false}};
    TrainConfig cfg;
    cfg.lr = 0.005;
    cfg.batch_size = 64;
    cfg.epochs = 8;
    cfg.seed = 20260809;
    cfg.stratified = false;

    Network<float> net = build_network<float>(arch, cfg.seed);
    for (int u = 0; u < 16; u += 2) force_branch_conflicting(net, u);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) train_epoch(net, train, cfg, epoch);

    MeasureConfig mcfg;
    mcfg.alpha = cfg.lr;
    mcfg.train_batch_size = cfg.batch_size;
    const std::vector<LesionStrategy> strategies{LesionStrategy::Conflicting,
                                                 LesionStrategy::NonConflicting,
                                                 LesionStrategy::Random};
    const std::vector<int> ks{8};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7};
    const LesionReport report =
        lesion_study(net, test, train, strategies, ks, seeds, mcfg, 2048, cfg.seed, g_jobs);

    int conflicting = 0;
    for (const auto& u : report.units) conflicting += u.conflicting ? 1 : 0;
    std::cout << "      (baseline acc " << fmt(report.baseline_accuracy) << ", conflicting units "
              << conflicting << "/16)\n";
    require(conflicting >= 8, "conflicting pool too small for k=8");
    require(16 - conflicting >= 8, "non-conflicting pool too small for k=8");

    std::map<LesionStrategy, double> mean_acc;
    std::map<LesionStrategy, int> counts;
    for (const auto& cell : report.cells) {
        require(!cell.skipped, "no cell should be skipped at k=8");
        mean_acc[cell.strategy] += cell.accuracy;
        counts[cell.strategy] += 1;
    }
    for (auto& [strategy, acc] : mean_acc) acc /= counts[strategy];
    const double deg_conf = report.baseline_accuracy - mean_acc[LesionStrategy::Conflicting];
    const double deg_rand = report.baseline_accuracy - mean_acc[LesionStrategy::Random];
    const double deg_nonc = report.baseline_accuracy - mean_acc[LesionStrategy::NonConflicting];
    std::cout << "      (degradation: conflicting " << fmt(deg_conf) << ", random "
              << fmt(deg_rand) << ", non-conflicting " << fmt(deg_nonc) << ")\n";
    require(deg_conf < deg_rand, "conflicting-pool degradation not below random");
    require(deg_rand < deg_nonc, "random degradation not below non-conflicting pool");

    // deleting the entire conflicting pool stays within 2 points of baseline
    Network<float> all_conf = net;
    for (const auto& u : report.units)
        if (u.conflicting) delete_unit(all_conf, u.unit);
    const double acc_wo_conf = evaluate_accuracy(all_conf, test);
    std::cout << "      (accuracy without conflicting pool " << fmt(acc_wo_conf) << ")\n";
    require(std::fabs(acc_wo_conf - report.baseline_accuracy) <= 0.02,
            "deleting the conflicting pool moved accuracy by more than 2 points");
}

// ---------------------------------------------------------------------------
// 10. determinism and persistence

void criterion_10() {
    const std::string dir = temp_dir();

    // identical configs and seeds give byte-identical CSVs
    TrainConfig cfg = default_toy_config();
    cfg.epochs = 5;
    const auto run1 = run_toy(true, true, cfg);
    const auto run2 = run_toy(true, true, cfg);
    write_toy_csv(run1.rows, 2, dir + "/toy1.csv");
    write_toy_csv(run2.rows, 2, dir + "/toy2.csv");
    require(slurp(dir + "/toy1.csv") == slurp(dir + "/toy2.csv"),
            "toy CSVs differ across identical runs");

    HeatmapOptions hopts;
    hopts.n = 512;
    hopts.k = 4;
    hopts.seed = 99;
    write_heatmap_csv(heatmap(hopts, 1), dir + "/hm1.csv");
    write_heatmap_csv(heatmap(hopts, 2), dir + "/hm2.csv");
    require(slurp(dir + "/hm1.csv") == slurp(dir + "/hm2.csv"),
            "heatmap CSVs differ across jobs settings");

    // checkpoint round trip is bitwise lossless
    Architecture arch;
    arch.input_dim = 784;
    arch.num_classes = 10;
    arch.blocks = {Block{'t', 1, 16, ResidualKind::None, 1.0, 0.0, true},
                   Block{'r', 2, 16, ResidualKind::Affine, 2.0, 0.1, true}};
    const Dataset train = subset(acceptance_train_set(), 1000);
    TrainConfig tcfg;
    tcfg.lr = 0.01;
    tcfg.epochs = 2;
    tcfg.seed = 77;
    tcfg.stratified = false;
    Network<float> net = build_network<float>(arch, tcfg.seed);
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) train_epoch(net, train, tcfg, epoch);

    const std::string ckpt = dir + "/net.cbnd";
    save_checkpoint(net, tcfg, tcfg.epochs, ckpt);
    Network<float> loaded = load_checkpoint<float>(ckpt);
    require(param_checksum(loaded) == param_checksum(net),
            "checkpoint round trip changed parameters");

    RngStream rng(3);
    Mat<float> x(32, 784);
    for (auto& v : x.data()) v = float(rng.uniform());
    const auto a = forward(net, x, Mode::Eval);
    const auto b = forward(loaded, x, Mode::Eval);
    for (std::size_t i = 0; i < a.probs.size(); ++i)
        require(a.probs.data()[i] == b.probs.data()[i],
                "loaded checkpoint predicts differently");
}

struct Criterion {
    int id;
    const char* name;
    std::function<void()> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    g_jobs = 2;
    if (const char* env = std::getenv("BUNDLESCOPE_THREADS")) g_jobs = std::max(1, std::atoi(env));
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc)
            g_jobs = std::max(1, std::atoi(argv[++i]));
        else {
            std::cerr << "usage: acceptance [--only N] [--jobs N]\n";
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "entropy closed forms", criterion_1},
        {2, "gradient oracle", criterion_2},
        {3, "fully-conflicting gradient identity", criterion_3},
        {4, "toy reproduction", criterion_4},
        {5, "heatmap oracle equivalence", criterion_5},
        {6, "residual bypass", criterion_6},
        {7, "depth/width trend", criterion_7},
        {8, "CBA-tune", criterion_8},
        {9, "lesion ordering", criterion_9},
        {10, "determinism and persistence", criterion_10},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run();
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::cout << "[PASS] criterion " << c.id << ": " << c.name << " (" << fmt(secs)
                      << "s)\n";
        } catch (const std::exception& e) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::cout << "[FAIL] criterion " << c.id << ": " << c.name << " (" << fmt(secs)
                      << "s) - " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
