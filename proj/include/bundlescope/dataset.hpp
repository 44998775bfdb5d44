#ifndef BUNDLESCOPE_DATASET_HPP
#define BUNDLESCOPE_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bundlescope/errors.hpp"
#include "bundlescope/matrix.hpp"
#include "bundlescope/rng.hpp"

namespace bundlescope {

struct Dataset {
    Mat<float> inputs;       // n x d, values in [0, 1]
    std::vector<int> labels; // length n, values in [0, num_classes)
    int num_classes = 2;
    std::string name;

    int size() const { return inputs.rows(); }
    int dim() const { return inputs.cols(); }

    void validate() const;
};

// One-dimensional two-class toy set: class 0 lives in [0, 0.5), class 1 in
// [0.5, 1). Exactly round(n * class_zero_fraction) samples are class 0.
Dataset toy_generate(int n, double class_zero_fraction, std::uint64_t seed);

// IDX (big-endian) image/label pair, pixels scaled to [0,1] by /255.
Dataset mnist_load(const std::string& images_path, const std::string& labels_path,
                   int limit = 0);

// Writes a dataset back out as an IDX pair (inputs must be 784-wide,
// values in [0,1]; stored as rounded bytes).
void write_idx_pair(const Dataset& ds, const std::string& images_path,
                    const std::string& labels_path);

// Deterministic MNIST-shaped surrogate: ten fixed digit glyphs rendered at
// 28x28 with per-sample shift, intensity and noise jitter.
Dataset synth_digits(int n, std::uint64_t seed);

Dataset subset(const Dataset& ds, int limit);

// Index batches for one epoch, sampled without replacement. Stratified
// batches hold batch_size / num_classes samples of every class and drop
// remainders; the fallback shuffles uniformly and keeps a trailing
// partial batch.
std::vector<std::vector<int>> epoch_batches(const Dataset& ds, int batch_size, bool stratified,
                                            RngStream& rng);

struct Batch {
    Mat<float> inputs;
    Mat<float> onehot;
    std::vector<int> labels;
};

Batch materialize_batch(const Dataset& ds, const std::vector<int>& indices);

template <typename T>
Mat<T> one_hot(const std::vector<int>& labels, int num_classes) {
    Mat<T> out(int(labels.size()), num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= num_classes)
            throw data_error("one_hot: label " + std::to_string(y) + " out of range");
        out(int(i), y) = T(1);
    }
    return out;
}

} // namespace bundlescope

#endif
