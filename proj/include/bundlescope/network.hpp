#ifndef BUNDLESCOPE_NETWORK_HPP
#define BUNDLESCOPE_NETWORK_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "bundlescope/architecture.hpp"
#include "bundlescope/errors.hpp"
#include "bundlescope/matrix.hpp"
#include "bundlescope/rng.hpp"

namespace bundlescope {

enum class Mode { Train, Eval };

constexpr double kBnEpsilon = 1e-5;
constexpr double kBnMomentum = 0.99;

template <typename T>
struct DenseLayer {
    Mat<T> W; // out x in
    Mat<T> b; // out x 1
};

template <typename T>
struct BnLayer {
    Mat<T> gamma, beta, run_mean, run_var; // width x 1 each
};

enum class LayerRole { Plain, ResFirst, ResSecond };

template <typename T>
struct HiddenLayer {
    DenseLayer<T> dense;
    std::optional<BnLayer<T>> bn;
    LayerRole role = LayerRole::Plain;
    int block_index = 0;
    int unit_index = -1; // residual unit, if role != Plain
};

struct ResidualUnit {
    int first_layer = 0; // index into Network::layers of the ResFirst layer
    int block_index = 0;
    ResidualKind kind = ResidualKind::Identity;
    double scale = 1.0;
    double shift = 0.0;
    bool deleted = false;
};

// Block-structured feed-forward network. A residual unit is two dense
// layers; the unit output is r(x) + d where d is the branch output after
// the second layer (and its batch norm) with no nonlinearity after the add.
template <typename T>
struct Network {
    Architecture arch;
    std::vector<HiddenLayer<T>> layers;
    std::vector<ResidualUnit> units;
    DenseLayer<T> head;
    std::uint64_t seed = 0;
    std::uint64_t param_version = 0;

    void bump_version() { ++param_version; }

    int live_hidden_layers() const {
        int n = int(layers.size());
        for (const auto& u : units)
            if (u.deleted) n -= 2;
        return n;
    }

    int live_units() const {
        int n = 0;
        for (const auto& u : units)
            if (!u.deleted) ++n;
        return n;
    }
};

template <typename T>
struct LayerCache {
    Mat<T> input;    // input to the dense layer
    Mat<T> z;        // W*input + b (pre-BN)
    Mat<T> x_hat;    // BN-normalized z (only when the layer has BN)
    std::vector<T> inv_std;
    bool used_batch_stats = false;
};

template <typename T>
struct ActivationTrace {
    // Post-nonlinearity outputs a^(l+1), one per live hidden layer in
    // forward order. For a residual unit the second entry is r(x) + d.
    std::vector<Mat<T>> layer_out;
    std::vector<int> layer_index; // index into Network::layers per entry
    // Branch outputs d (after the second dense/BN, before the add), one
    // per live residual unit.
    std::vector<Mat<T>> branch_pre_add;
    std::vector<int> branch_unit;
    Mat<T> logits;
    Mat<T> probs;
    Mode mode = Mode::Eval;
    std::uint64_t param_version = 0;
    // Present only when the trace was built with caches (training path).
    std::vector<LayerCache<T>> caches;
    Mat<T> head_input;
    bool has_caches = false;
};

template <typename T>
struct LayerGrads {
    Mat<T> W, b;
    Mat<T> gamma, beta; // empty when the layer has no BN
};

template <typename T>
struct Gradients {
    std::vector<LayerGrads<T>> layers;
    LayerGrads<T> head;
    Mat<T> input_grad; // gradient w.r.t. the network input (batch x input_dim)
};

struct TrainConfig {
    double lr = 0.001;
    int batch_size = 64;
    int epochs = 1;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    bool stratified = true;

    void validate() const {
        if (lr <= 0.0) throw config_error("train: learning rate must be > 0");
        if (batch_size < 1) throw config_error("train: batch_size must be >= 1");
        if (epochs < 1) throw config_error("train: epochs must be >= 1");
        if (weight_decay < 0.0) throw config_error("train: weight_decay must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// construction

template <typename T>
Network<T> build_network(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    Network<T> net;
    net.arch = arch;
    net.seed = seed;
    RngStream rng(seed);

    auto he_dense = [&rng](int out, int in) {
        DenseLayer<T> d;
        d.W = Mat<T>(out, in);
        const double stddev = std::sqrt(2.0 / double(in));
        for (auto& w : d.W.data()) w = T(rng.normal() * stddev);
        d.b = Mat<T>(out, 1);
        return d;
    };
    auto fresh_bn = [](int width) {
        BnLayer<T> bn;
        bn.gamma = Mat<T>::filled(width, 1, T(1));
        bn.beta = Mat<T>(width, 1);
        bn.run_mean = Mat<T>(width, 1);
        bn.run_var = Mat<T>::filled(width, 1, T(1));
        return bn;
    };

    int in_width = arch.input_dim;
    for (std::size_t bi = 0; bi < arch.blocks.size(); ++bi) {
        const Block& blk = arch.blocks[bi];
        if (blk.layer_count == 0) continue;
        if (blk.residual == ResidualKind::None) {
            for (int l = 0; l < blk.layer_count; ++l) {
                HiddenLayer<T> hl;
                hl.dense = he_dense(blk.width, in_width);
                if (blk.batch_norm) hl.bn = fresh_bn(blk.width);
                hl.role = LayerRole::Plain;
                hl.block_index = int(bi);
                net.layers.push_back(std::move(hl));
                in_width = blk.width;
            }
        } else {
            for (int u = 0; u < blk.layer_count / 2; ++u) {
                ResidualUnit unit;
                unit.first_layer = int(net.layers.size());
                unit.block_index = int(bi);
                unit.kind = blk.residual;
                unit.scale = blk.residual == ResidualKind::Identity ? 1.0 : blk.res_scale;
                unit.shift = blk.residual == ResidualKind::Identity ? 0.0 : blk.res_shift;
                const int ui = int(net.units.size());

                HiddenLayer<T> first;
                first.dense = he_dense(blk.width, in_width);
                if (blk.batch_norm) first.bn = fresh_bn(blk.width);
                first.role = LayerRole::ResFirst;
                first.block_index = int(bi);
                first.unit_index = ui;
                net.layers.push_back(std::move(first));

                HiddenLayer<T> second;
                second.dense = he_dense(blk.width, blk.width);
                if (blk.batch_norm) second.bn = fresh_bn(blk.width);
                second.role = LayerRole::ResSecond;
                second.block_index = int(bi);
                second.unit_index = ui;
                net.layers.push_back(std::move(second));

                net.units.push_back(unit);
                in_width = blk.width;
            }
        }
    }
    net.head = he_dense(arch.num_classes, in_width);
    net.bump_version();
    return net;
}

// Collapses every input in [0,1)^d to a^(2) = 0: the first hidden layer
// gets W = -1 and b = 0, so its ReLU output is zero for any non-negative
// input. All other layers keep their He initialization.
template <typename T>
void init_fully_conflicting(Network<T>& net) {
    if (net.layers.empty()) throw config_error("init_fully_conflicting: no hidden layers");
    for (auto& w : net.layers[0].dense.W.data()) w = T(-1);
    for (auto& b : net.layers[0].dense.b.data()) b = T(0);
    net.bump_version();
}

// Kills one residual unit's branch the same way: the branch first layer
// outputs zero for any non-negative unit input, so the pre-add branch
// output is constant across the batch.
template <typename T>
void force_branch_conflicting(Network<T>& net, int unit_index) {
    if (unit_index < 0 || unit_index >= int(net.units.size()))
        throw config_error("force_branch_conflicting: unit out of range");
    auto& first = net.layers[net.units[unit_index].first_layer];
    for (auto& w : first.dense.W.data()) w = T(-1);
    for (auto& b : first.dense.b.data()) b = T(0);
    net.bump_version();
}

// ---------------------------------------------------------------------------
// batch norm

template <typename T>
Mat<T> batchnorm_forward(const Mat<T>& x, BnLayer<T>& bn, Mode mode, LayerCache<T>* cache) {
    if (x.rows() < 1) throw shape_error("batchnorm: empty input");
    if (x.cols() != bn.gamma.rows()) throw shape_error("batchnorm: width mismatch");
    const int n = x.rows();
    const int w = x.cols();
    Mat<T> out(n, w);
    if (mode == Mode::Train) {
        if (n < 2)
            throw config_error("batchnorm: train mode needs a batch of at least 2 rows");
        std::vector<T> mean(w, T(0)), var(w, T(0)), inv_std(w, T(0));
        for (int i = 0; i < n; ++i) {
            const T* r = x.row(i).data();
            for (int j = 0; j < w; ++j) mean[j] += r[j];
        }
        for (int j = 0; j < w; ++j) mean[j] /= T(n);
        for (int i = 0; i < n; ++i) {
            const T* r = x.row(i).data();
            for (int j = 0; j < w; ++j) {
                const T d = r[j] - mean[j];
                var[j] += d * d;
            }
        }
        for (int j = 0; j < w; ++j) {
            var[j] /= T(n);
            inv_std[j] = T(1) / std::sqrt(var[j] + T(kBnEpsilon));
        }
        Mat<T> x_hat(n, w);
        for (int i = 0; i < n; ++i) {
            const T* r = x.row(i).data();
            T* h = x_hat.row(i).data();
            T* o = out.row(i).data();
            for (int j = 0; j < w; ++j) {
                h[j] = (r[j] - mean[j]) * inv_std[j];
                o[j] = bn.gamma(j, 0) * h[j] + bn.beta(j, 0);
            }
        }
        for (int j = 0; j < w; ++j) {
            bn.run_mean(j, 0) = T(kBnMomentum) * bn.run_mean(j, 0) + T(1.0 - kBnMomentum) * mean[j];
            bn.run_var(j, 0) = T(kBnMomentum) * bn.run_var(j, 0) + T(1.0 - kBnMomentum) * var[j];
        }
        if (cache) {
            cache->x_hat = std::move(x_hat);
            cache->inv_std = std::move(inv_std);
            cache->used_batch_stats = true;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const T* r = x.row(i).data();
            T* o = out.row(i).data();
            for (int j = 0; j < w; ++j) {
                const T inv = T(1) / std::sqrt(bn.run_var(j, 0) + T(kBnEpsilon));
                o[j] = bn.gamma(j, 0) * (r[j] - bn.run_mean(j, 0)) * inv + bn.beta(j, 0);
            }
        }
    }
    out.debug_check_finite("batchnorm");
    return out;
}

// Gradient through train-mode batch statistics. Returns dx; fills dgamma,
// dbeta (width x 1).
template <typename T>
Mat<T> batchnorm_backward(const Mat<T>& dout, const BnLayer<T>& bn, const LayerCache<T>& cache,
                          Mat<T>& dgamma, Mat<T>& dbeta) {
    if (!cache.used_batch_stats)
        throw state_error("batchnorm backward: trace lacks train-mode statistics");
    const int n = dout.rows();
    const int w = dout.cols();
    dgamma = Mat<T>(w, 1);
    dbeta = Mat<T>(w, 1);
    std::vector<T> sum_dxhat(w, T(0)), sum_dxhat_xhat(w, T(0));
    Mat<T> dxhat(n, w);
    for (int i = 0; i < n; ++i) {
        const T* g = dout.row(i).data();
        const T* h = cache.x_hat.row(i).data();
        T* dh = dxhat.row(i).data();
        for (int j = 0; j < w; ++j) {
            dgamma(j, 0) += g[j] * h[j];
            dbeta(j, 0) += g[j];
            dh[j] = g[j] * bn.gamma(j, 0);
            sum_dxhat[j] += dh[j];
            sum_dxhat_xhat[j] += dh[j] * h[j];
        }
    }
    Mat<T> dx(n, w);
    const T invn = T(1) / T(n);
    for (int i = 0; i < n; ++i) {
        const T* dh = dxhat.row(i).data();
        const T* h = cache.x_hat.row(i).data();
        T* o = dx.row(i).data();
        for (int j = 0; j < w; ++j)
            o[j] = cache.inv_std[j] * invn *
                   (T(n) * dh[j] - sum_dxhat[j] - h[j] * sum_dxhat_xhat[j]);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// forward

template <typename T>
Mat<T> residual_map(const Mat<T>& x, const ResidualUnit& unit) {
    if (unit.kind == ResidualKind::Identity) return x;
    Mat<T> out = x;
    const T s = T(unit.scale);
    const T t = T(unit.shift);
    for (auto& v : out.data()) v = s * v + t;
    return out;
}

template <typename T>
Mat<T> dense_forward(const Mat<T>& x, const DenseLayer<T>& d) {
    return add_row_bias(matmul(x, transpose(d.W)), d.b);
}

template <typename T>
ActivationTrace<T> forward(Network<T>& net, const Mat<T>& inputs, Mode mode,
                           bool keep_caches = false) {
    if (inputs.cols() != net.arch.input_dim)
        throw shape_error("forward: input width " + std::to_string(inputs.cols()) +
                          " != input_dim " + std::to_string(net.arch.input_dim));
    ActivationTrace<T> trace;
    trace.mode = mode;
    trace.param_version = net.param_version;
    trace.has_caches = keep_caches;

    Mat<T> cur = inputs;
    std::size_t li = 0;
    while (li < net.layers.size()) {
        HiddenLayer<T>& hl = net.layers[li];
        if (hl.role == LayerRole::Plain) {
            LayerCache<T> cache;
            if (keep_caches) cache.input = cur;
            Mat<T> z = dense_forward(cur, hl.dense);
            if (keep_caches) cache.z = z;
            Mat<T> pre = hl.bn ? batchnorm_forward(z, *hl.bn, mode, keep_caches ? &cache : nullptr)
                               : std::move(z);
            Mat<T> a = relu(pre);
            trace.layer_out.push_back(a);
            trace.layer_index.push_back(int(li));
            if (keep_caches) trace.caches.push_back(std::move(cache));
            cur = std::move(a);
            ++li;
            continue;
        }
        // Residual unit (two layers).
        const ResidualUnit& unit = net.units[hl.unit_index];
        if (unit.deleted) {
            cur = residual_map(cur, unit);
            li += 2;
            continue;
        }
        Mat<T> unit_input = cur;

        LayerCache<T> cache1;
        if (keep_caches) cache1.input = unit_input;
        Mat<T> z1 = dense_forward(unit_input, hl.dense);
        if (keep_caches) cache1.z = z1;
        Mat<T> pre1 = hl.bn ? batchnorm_forward(z1, *hl.bn, mode, keep_caches ? &cache1 : nullptr)
                            : std::move(z1);
        Mat<T> a1 = relu(pre1);
        trace.layer_out.push_back(a1);
        trace.layer_index.push_back(int(li));
        if (keep_caches) trace.caches.push_back(std::move(cache1));

        HiddenLayer<T>& second = net.layers[li + 1];
        LayerCache<T> cache2;
        if (keep_caches) cache2.input = a1;
        Mat<T> z2 = dense_forward(a1, second.dense);
        if (keep_caches) cache2.z = z2;
        Mat<T> branch = second.bn
                            ? batchnorm_forward(z2, *second.bn, mode, keep_caches ? &cache2 : nullptr)
                            : std::move(z2);
        trace.branch_pre_add.push_back(branch);
        trace.branch_unit.push_back(hl.unit_index);

        Mat<T> out = add(residual_map(unit_input, unit), branch);
        trace.layer_out.push_back(out);
        trace.layer_index.push_back(int(li + 1));
        if (keep_caches) trace.caches.push_back(std::move(cache2));
        cur = std::move(out);
        li += 2;
    }

    if (keep_caches) trace.head_input = cur;
    trace.logits = dense_forward(cur, net.head);
    trace.probs = softmax_rows(trace.logits);
    return trace;
}

// ---------------------------------------------------------------------------
// loss

// Mean softmax cross-entropy and its gradient w.r.t. the logits.
template <typename T>
std::pair<double, Mat<T>> loss_and_output_grad(const Mat<T>& logits, const Mat<T>& onehot) {
    if (!logits.same_shape(onehot))
        throw shape_error("loss: logits and labels must have equal shapes");
    const int n = logits.rows();
    const int c = logits.cols();
    for (int i = 0; i < n; ++i) {
        int ones = 0;
        for (int j = 0; j < c; ++j) {
            const T v = onehot(i, j);
            if (v == T(1))
                ++ones;
            else if (v != T(0))
                throw data_error("loss: label row " + std::to_string(i) + " is not one-hot");
        }
        if (ones != 1) throw data_error("loss: label row " + std::to_string(i) + " is not one-hot");
    }
    double loss = 0.0;
    Mat<T> dlogits = softmax_rows(logits);
    for (int i = 0; i < n; ++i) {
        T mx = logits(i, 0);
        for (int j = 1; j < c; ++j) mx = std::max(mx, logits(i, j));
        double sum_exp = 0.0;
        double target = 0.0;
        for (int j = 0; j < c; ++j) {
            sum_exp += std::exp(double(logits(i, j)) - double(mx));
            if (onehot(i, j) == T(1)) target = double(logits(i, j)) - double(mx);
        }
        loss += std::log(sum_exp) - target;
    }
    loss /= n;
    const T invn = T(1) / T(n);
    for (std::size_t i = 0; i < dlogits.size(); ++i)
        dlogits.data()[i] = (dlogits.data()[i] - onehot.data()[i]) * invn;
    return {loss, std::move(dlogits)};
}

// ---------------------------------------------------------------------------
// backward

template <typename T>
Gradients<T> backward(const Network<T>& net, const ActivationTrace<T>& trace,
                      const Mat<T>& dlogits) {
    if (trace.param_version != net.param_version)
        throw state_error("backward: trace is stale (parameters changed since forward)");
    if (!trace.has_caches)
        throw state_error("backward: trace was built without caches");

    Gradients<T> grads;
    grads.layers.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        grads.layers[i].W = Mat<T>(net.layers[i].dense.W.rows(), net.layers[i].dense.W.cols());
        grads.layers[i].b = Mat<T>(net.layers[i].dense.b.rows(), 1);
        if (net.layers[i].bn) {
            grads.layers[i].gamma = Mat<T>(net.layers[i].bn->gamma.rows(), 1);
            grads.layers[i].beta = Mat<T>(net.layers[i].bn->beta.rows(), 1);
        }
    }

    auto colsum = [](const Mat<T>& g) {
        Mat<T> out(g.cols(), 1);
        for (int i = 0; i < g.rows(); ++i)
            for (int j = 0; j < g.cols(); ++j) out(j, 0) += g(i, j);
        return out;
    };

    grads.head.W = matmul(transpose(dlogits), trace.head_input);
    grads.head.b = colsum(dlogits);
    Mat<T> gcur = matmul(dlogits, net.head.W);

    // Walk the hidden stack backwards. `ci` indexes the recorded caches /
    // layer outputs (live layers only).
    int ci = int(trace.layer_out.size()) - 1;
    int li = int(net.layers.size()) - 1;
    while (li >= 0) {
        const HiddenLayer<T>& hl = net.layers[li];
        if (hl.role == LayerRole::Plain) {
            const LayerCache<T>& cache = trace.caches[ci];
            const Mat<T>& a = trace.layer_out[ci];
            Mat<T> gz = gcur;
            for (std::size_t k = 0; k < gz.size(); ++k)
                if (a.data()[k] <= T(0)) gz.data()[k] = T(0);
            if (hl.bn)
                gz = batchnorm_backward(gz, *hl.bn, cache, grads.layers[li].gamma,
                                        grads.layers[li].beta);
            grads.layers[li].W = matmul(transpose(gz), cache.input);
            grads.layers[li].b = colsum(gz);
            gcur = matmul(gz, hl.dense.W);
            --ci;
            --li;
            continue;
        }
        // hl.role == ResSecond: handle the whole unit.
        const ResidualUnit& unit = net.units[hl.unit_index];
        if (unit.deleted) {
            if (unit.kind == ResidualKind::Affine) gcur = scale(gcur, T(unit.scale));
            li -= 2;
            continue;
        }
        // gcur is the gradient w.r.t. the unit output r(x) + d.
        Mat<T> gres = unit.kind == ResidualKind::Affine ? scale(gcur, T(unit.scale)) : gcur;

        const LayerCache<T>& cache2 = trace.caches[ci];
        Mat<T> gz2 = gcur; // no nonlinearity after the second layer
        if (hl.bn)
            gz2 = batchnorm_backward(gz2, *hl.bn, cache2, grads.layers[li].gamma,
                                     grads.layers[li].beta);
        grads.layers[li].W = matmul(transpose(gz2), cache2.input);
        grads.layers[li].b = colsum(gz2);
        Mat<T> ga1 = matmul(gz2, hl.dense.W);
        --ci;

        const int li1 = li - 1;
        const HiddenLayer<T>& first = net.layers[li1];
        const LayerCache<T>& cache1 = trace.caches[ci];
        const Mat<T>& a1 = trace.layer_out[ci];
        Mat<T> gz1 = ga1;
        for (std::size_t k = 0; k < gz1.size(); ++k)
            if (a1.data()[k] <= T(0)) gz1.data()[k] = T(0);
        if (first.bn)
            gz1 = batchnorm_backward(gz1, *first.bn, cache1, grads.layers[li1].gamma,
                                     grads.layers[li1].beta);
        grads.layers[li1].W = matmul(transpose(gz1), cache1.input);
        grads.layers[li1].b = colsum(gz1);
        gcur = add(matmul(gz1, first.dense.W), gres);
        --ci;
        li -= 2;
    }
    grads.input_grad = std::move(gcur);
    return grads;
}

// ---------------------------------------------------------------------------
// update

// SGD with decoupled weight decay: W <- W - lr*grad - lr*decay*W, evaluated
// step by step in the network's own float format. Biases and BN parameters
// are not decayed.
template <typename T>
void apply_update(Network<T>& net, const Gradients<T>& grads, const TrainConfig& cfg) {
    cfg.validate();
    const T lr = T(cfg.lr);
    const T lr_decay = T(cfg.lr * cfg.weight_decay);
    auto update_mat = [&](Mat<T>& w, const Mat<T>& g, bool decay) {
        if (!w.same_shape(g)) throw shape_error("apply_update: gradient shape mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) {
            const T orig = w.data()[i];
            T nw = orig - lr * g.data()[i];
            if (decay) nw = nw - lr_decay * orig;
            w.data()[i] = nw;
        }
    };
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].unit_index >= 0 && net.units[net.layers[i].unit_index].deleted)
            continue;
        update_mat(net.layers[i].dense.W, grads.layers[i].W, true);
        update_mat(net.layers[i].dense.b, grads.layers[i].b, false);
        if (net.layers[i].bn) {
            update_mat(net.layers[i].bn->gamma, grads.layers[i].gamma, false);
            update_mat(net.layers[i].bn->beta, grads.layers[i].beta, false);
        }
    }
    update_mat(net.head.W, grads.head.W, true);
    update_mat(net.head.b, grads.head.b, false);
    net.bump_version();
}

// ---------------------------------------------------------------------------
// lesion support

// Replaces a residual unit by its residual path alone; all other trained
// parameters are untouched.
template <typename T>
void delete_unit(Network<T>& net, int unit_index) {
    if (unit_index < 0 || unit_index >= int(net.units.size()))
        throw config_error("delete_unit: unit " + std::to_string(unit_index) + " out of range");
    ResidualUnit& unit = net.units[unit_index];
    const auto& first = net.layers[unit.first_layer];
    const auto& second = net.layers[unit.first_layer + 1];
    if (first.dense.W.cols() != second.dense.W.rows() ||
        first.dense.W.cols() != second.dense.W.cols())
        throw config_error("delete_unit: unit changes width, cannot be lesioned");
    if (unit.deleted) throw config_error("delete_unit: unit already deleted");
    unit.deleted = true;
    net.bump_version();
}

template <typename T>
std::uint64_t param_checksum(const Network<T>& net) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_mat = [&h](const Mat<T>& m) {
        for (const T v : m.data()) {
            std::uint64_t bits = 0;
            if constexpr (sizeof(T) == 4) {
                std::uint32_t b32;
                static_assert(sizeof(b32) == sizeof(float));
                std::memcpy(&b32, &v, 4);
                bits = b32;
            } else {
                std::memcpy(&bits, &v, 8);
            }
            h ^= bits;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& hl : net.layers) {
        mix_mat(hl.dense.W);
        mix_mat(hl.dense.b);
        if (hl.bn) {
            mix_mat(hl.bn->gamma);
            mix_mat(hl.bn->beta);
            mix_mat(hl.bn->run_mean);
            mix_mat(hl.bn->run_var);
        }
    }
    mix_mat(net.head.W);
    mix_mat(net.head.b);
    return h;
}

} // namespace bundlescope

#endif
