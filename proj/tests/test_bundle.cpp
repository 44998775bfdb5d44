#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bundlescope/bundle.hpp"
#include "bundlescope/network.hpp"

using namespace bundlescope;

TEST_CASE("resolution threshold") {
    Mat<float> w1 = Mat<float>::filled(2, 2, 1.0f);
    CHECK(resolution_threshold(w1, ResolutionPolicy::weight_ulp(), FloatFormat::Binary32) ==
          std::pow(2.0, -23));

    Mat<float> w2 = Mat<float>::filled(2, 2, 0.75f);
    w2(0, 0) = -0.75f;
    CHECK(resolution_threshold(w2, ResolutionPolicy::weight_ulp(), FloatFormat::Binary32) ==
          std::pow(2.0, -24)); // spacing inside the binade [0.5, 1)

    CHECK(resolution_threshold(w1, ResolutionPolicy::fixed(1e-6), FloatFormat::Binary32) == 1e-6);
    CHECK_THROWS_AS(ResolutionPolicy::fixed(-1.0), config_error);

    // all-zero weights degrade to ulp(0)
    Mat<float> wz(3, 3);
    CHECK(resolution_threshold(wz, ResolutionPolicy::weight_ulp(), FloatFormat::Binary32) ==
          std::pow(2.0, -149));
}

TEST_CASE("bundled scaled infinity-norm test") {
    const std::vector<double> a{0.25, 0.5};
    const std::vector<double> same{0.25, 0.5};
    CHECK(bundled(a, same, 0.001, 64, 1e-30));

    // alpha=0.001, |B|=64, distance 1e-3: 1.5625e-8 <= 2^-23 -> bundled
    const std::vector<double> b{0.25 + 1e-3, 0.5};
    CHECK(bundled(a, b, 0.001, 64, std::pow(2.0, -23)));

    // distance 1e-2: 1.5625e-7 > 2^-23 -> not bundled
    const std::vector<double> c{0.25 + 1e-2, 0.5};
    CHECK_FALSE(bundled(a, c, 0.001, 64, std::pow(2.0, -23)));

    const std::vector<double> shorter{0.25};
    CHECK_THROWS_AS(bundled(a, shorter, 0.001, 64, 1e-6), shape_error);
}

TEST_CASE("partition of identical and separated rows") {
    Mat<float> same = Mat<float>::filled(8, 3, 0.37f);
    const BundlePartition one = partition_layer(same, 0.001, 64, 1e-7);
    CHECK(one.bundle_count() == 1);
    CHECK(int(one.bundles[0].size()) == 8);

    // rows pairwise separated far beyond the threshold -> all singletons
    Mat<float> spread(5, 2);
    for (int i = 0; i < 5; ++i) spread(i, 0) = float(i);
    const BundlePartition singles = partition_layer(spread, 0.001, 64, 1e-9);
    CHECK(singles.bundle_count() == 5);
}

TEST_CASE("near-threshold chain resolves by representative rule") {
    // A~B and B~C but A and C are not bundled; single pass in row order
    // puts A,B together and C alone.
    const double alpha = 1.0;
    const int batch = 1;
    const double gamma = 1.0; // distance threshold = 1.0
    Mat<double> rows(3, 1);
    rows(0, 0) = 0.0; // A
    rows(1, 0) = 0.9; // B (within 1.0 of A)
    rows(2, 0) = 1.8; // C (within 1.0 of B, not of A)
    const BundlePartition part = partition_layer(rows, alpha, batch, gamma);
    REQUIRE(part.bundle_count() == 2);
    CHECK(part.bundles[0] == std::vector<int>{0, 1});
    CHECK(part.bundles[1] == std::vector<int>{2});
}

TEST_CASE("partition validity on fuzzed inputs") {
    RngStream rng(100);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + int(rng.below(40));
        const int w = 1 + int(rng.below(5));
        Mat<float> acts(n, w);
        for (auto& v : acts.data()) v = float(rng.uniform() * (trial % 3 == 0 ? 1e-4 : 1.0));
        const double gamma = std::pow(10.0, -3.0 - double(rng.below(8)));
        const BundlePartition part = partition_layer(acts, 0.001, 64, gamma);
        std::vector<int> seen(std::size_t(n), 0);
        for (const auto& bundle : part.bundles) {
            CHECK(!bundle.empty());
            for (const int idx : bundle) ++seen[std::size_t(idx)];
        }
        for (const int s : seen) CHECK(s == 1); // disjoint and covering
        CHECK(part.bundle_count() >= 1);
        CHECK(part.bundle_count() <= n);
    }
}

TEST_CASE("enlarging gamma never increases bundle count") {
    RngStream rng(200);
    Mat<float> acts(60, 3);
    for (auto& v : acts.data()) v = float(rng.uniform() * 1e-3);
    int prev = acts.rows() + 1;
    for (double gamma = 1e-12; gamma < 1e-2; gamma *= 10.0) {
        const int count = partition_layer(acts, 0.001, 64, gamma).bundle_count();
        CHECK(count <= prev);
        prev = count;
    }
}

TEST_CASE("bitwise-equal rows are co-bundled in any order") {
    RngStream rng(300);
    Mat<float> acts(20, 2);
    for (auto& v : acts.data()) v = float(rng.uniform());
    // rows 3, 11, 17 duplicate row 3's pattern
    for (const int dup : {11, 17})
        for (int j = 0; j < 2; ++j) acts(dup, j) = acts(3, j);
    const BundlePartition part = partition_layer(acts, 0.001, 64, 0.0);
    int found = 0;
    for (const auto& bundle : part.bundles) {
        const bool has3 = std::count(bundle.begin(), bundle.end(), 3) > 0;
        const bool has11 = std::count(bundle.begin(), bundle.end(), 11) > 0;
        const bool has17 = std::count(bundle.begin(), bundle.end(), 17) > 0;
        if (has3 || has11 || has17) {
            CHECK(has3);
            CHECK(has11);
            CHECK(has17);
            ++found;
        }
    }
    CHECK(found == 1);
}

TEST_CASE("scaling equivalence of the bundling test") {
    RngStream rng(400);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(4), b(4);
        for (auto& v : a) v = rng.uniform();
        for (auto& v : b) v = rng.uniform();
        const double alpha = 0.001;
        const double gamma = std::pow(10.0, -(2.0 + double(rng.below(8))));
        const double c = std::exp(rng.normal());
        std::vector<double> ca(a), cb(b);
        for (auto& v : ca) v *= c;
        for (auto& v : cb) v *= c;
        CHECK(bundled(a, b, alpha, 64, gamma) == bundled(ca, cb, alpha, 64, c * gamma));
    }
}

TEST_CASE("bundle entropy closed forms") {
    // all singletons -> 0 exactly
    BundlePartition singles;
    singles.batch_size = 4;
    singles.bundles = {{0}, {1}, {2}, {3}};
    const std::vector<int> labels{0, 1, 2, 3};
    CHECK(bundle_entropy(singles, labels, 1e-12, 10) == 0.0);

    // one bundle balanced over 10 classes -> ln 10
    BundlePartition full;
    full.batch_size = 100;
    full.bundles.resize(1);
    std::vector<int> labels10;
    for (int i = 0; i < 100; ++i) {
        full.bundles[0].push_back(i);
        labels10.push_back(i % 10);
    }
    CHECK(std::fabs(bundle_entropy(full, labels10, 1e-12, 10) - std::log(10.0)) < 1e-6);

    // probe of 4: one mixed pair + two singletons -> (1/4)(2 ln 2)
    BundlePartition mixed;
    mixed.batch_size = 4;
    mixed.bundles = {{0, 1}, {2}, {3}};
    const std::vector<int> labels2{0, 1, 0, 1};
    CHECK(bundle_entropy(mixed, labels2, 1e-12, 2) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));

    // label-pure bundles -> 0 exactly even with epsilon
    BundlePartition pure;
    pure.batch_size = 4;
    pure.bundles = {{0, 1}, {2, 3}};
    const std::vector<int> pure_labels{1, 1, 0, 0};
    CHECK(bundle_entropy(pure, pure_labels, 1e-12, 2) == 0.0);

    const std::vector<int> bad{0, 1, 7, 1};
    CHECK_THROWS_AS(bundle_entropy(pure, bad, 1e-12, 2), data_error);
}

TEST_CASE("entropy bounds on fuzzed partitions") {
    RngStream rng(500);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + int(rng.below(50));
        const int nc = 2 + int(rng.below(9));
        Mat<float> acts(n, 2);
        for (auto& v : acts.data()) v = float(rng.uniform() * 1e-4);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& y : labels) y = int(rng.below(std::uint64_t(nc)));
        const BundlePartition part = partition_layer(acts, 0.001, 64, 1e-8);
        const double h = bundle_entropy(part, labels, 1e-12, nc);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(double(nc)) + 1e-9);

        // H == 0 iff every bundle is label-pure
        bool pure = true;
        for (const auto& bundle : part.bundles)
            for (const int idx : bundle)
                if (labels[std::size_t(idx)] != labels[std::size_t(bundle.front())]) pure = false;
        CHECK((h == 0.0) == pure);
    }
}

TEST_CASE("measure on a fully conflicting network") {
    Architecture arch;
    arch.input_dim = 8;
    arch.num_classes = 10;
    arch.blocks = {Block{'a', 3, 16, ResidualKind::None, 1.0, 0.0, false}};
    Network<float> net = build_network<float>(arch, 21);
    init_fully_conflicting(net);

    RngStream rng(22);
    const int probe = 100;
    Mat<float> x(probe, 8);
    for (auto& v : x.data()) v = float(rng.uniform());
    std::vector<int> labels(probe);
    for (int i = 0; i < probe; ++i) labels[std::size_t(i)] = i % 10;

    ActivationTrace<float> trace = forward(net, x, Mode::Eval);
    MeasureConfig cfg;
    const auto records = measure(trace, labels, net, cfg);
    REQUIRE(records.size() == 3);
    for (const auto& rec : records) {
        CHECK(rec.location == MeasureLocation::LayerOutput);
        CHECK(std::fabs(rec.entropy - std::log(10.0)) < 1e-6);
        CHECK(rec.bundle_count == 1);
    }
}

TEST_CASE("measure separates branch and output records on residual nets") {
    Architecture arch;
    arch.input_dim = 6;
    arch.num_classes = 2;
    arch.blocks = {Block{'r', 2, 6, ResidualKind::Identity, 1.0, 0.0, false}};
    Network<float> net = build_network<float>(arch, 77);
    force_branch_conflicting(net, 0);

    RngStream rng(78);
    Mat<float> x(40, 6);
    for (auto& v : x.data()) v = float(rng.uniform());
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) labels[std::size_t(i)] = i % 2;

    ActivationTrace<float> trace = forward(net, x, Mode::Eval);
    MeasureConfig cfg;
    const auto records = measure(trace, labels, net, cfg);
    double branch_h = -1.0, out_h = -1.0;
    for (const auto& rec : records) {
        if (rec.location == MeasureLocation::ResidualBranchPreAdd) branch_h = rec.entropy;
        if (rec.location == MeasureLocation::LayerOutput && rec.layer == 2) out_h = rec.entropy;
    }
    CHECK(branch_h == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(out_h == 0.0);
}

TEST_CASE("first conflicting layer mapping") {
    Architecture arch;
    arch.input_dim = 4;
    arch.num_classes = 10;
    arch.blocks = {Block{'a', 3, 8, ResidualKind::None, 1.0, 0.0, false},
                   Block{'b', 12, 8, ResidualKind::None, 1.0, 0.0, false}};

    std::vector<BundleEntropyRecord> records;
    for (int l = 1; l <= 15; ++l) {
        BundleEntropyRecord rec;
        rec.layer = l;
        rec.entropy = 0.0;
        records.push_back(rec);
    }
    CHECK(!first_conflicting_layer(records, arch).has_value());

    records[7].entropy = 0.3; // global layer 8
    records[10].entropy = 0.1;
    const auto pos = first_conflicting_layer(records, arch);
    REQUIRE(pos.has_value());
    CHECK(pos->block_tag == 'b');
    CHECK(pos->offset == 5);
    CHECK(pos->global_layer == 8);

    // [0, 0, 0.3, 0.1] -> layer 3
    std::vector<BundleEntropyRecord> four;
    for (int l = 1; l <= 4; ++l) {
        BundleEntropyRecord rec;
        rec.layer = l;
        rec.entropy = (l == 3) ? 0.3 : (l == 4 ? 0.1 : 0.0);
        four.push_back(rec);
    }
    Architecture small;
    small.input_dim = 4;
    small.num_classes = 10;
    small.blocks = {Block{'a', 4, 8, ResidualKind::None, 1.0, 0.0, false}};
    CHECK(first_conflicting_layer(four, small)->global_layer == 3);
}
