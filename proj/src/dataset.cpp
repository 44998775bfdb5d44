#include "bundlescope/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

namespace bundlescope {

void Dataset::validate() const {
    if (size() < 1) throw data_error("dataset: empty");
    if (int(labels.size()) != size())
        throw data_error("dataset: labels length != number of inputs");
    for (const int y : labels)
        if (y < 0 || y >= num_classes)
            throw data_error("dataset: label " + std::to_string(y) + " out of range");
    for (const float v : inputs.data())
        if (!(v >= 0.0f && v <= 1.0f))
            throw data_error("dataset: input value outside [0, 1]");
}

Dataset toy_generate(int n, double class_zero_fraction, std::uint64_t seed) {
    if (n < 2) throw config_error("toy_generate: n must be >= 2");
    if (!(class_zero_fraction > 0.0 && class_zero_fraction < 1.0))
        throw config_error("toy_generate: class_zero_fraction must lie in (0, 1)");
    const int n_zero = int(std::lround(double(n) * class_zero_fraction));
    if (n_zero < 1 || n_zero >= n)
        throw config_error("toy_generate: fraction leaves an empty class");
    RngStream rng(seed);
    std::vector<float> values;
    std::vector<int> labels;
    values.reserve(std::size_t(n));
    labels.reserve(std::size_t(n));
    for (int i = 0; i < n_zero; ++i) {
        values.push_back(float(rng.uniform() * 0.5));
        labels.push_back(0);
    }
    for (int i = n_zero; i < n; ++i) {
        values.push_back(float(0.5 + rng.uniform() * 0.5));
        labels.push_back(1);
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    Dataset ds;
    ds.num_classes = 2;
    ds.name = "toy";
    ds.inputs = Mat<float>(n, 1);
    ds.labels.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        ds.inputs(i, 0) = values[std::size_t(order[std::size_t(i)])];
        ds.labels[std::size_t(i)] = labels[std::size_t(order[std::size_t(i)])];
    }
    return ds;
}

namespace {

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path, std::size_t offset) {
    std::array<unsigned char, 4> buf{};
    if (!in.read(reinterpret_cast<char*>(buf.data()), 4))
        throw format_error(path + ": truncated header at offset " + std::to_string(offset));
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be_u32(std::ofstream& out, std::uint32_t v) {
    const std::array<unsigned char, 4> buf{
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf.data()), 4);
}

constexpr std::uint32_t kImagesMagic = 0x00000803; // 2051
constexpr std::uint32_t kLabelsMagic = 0x00000801; // 2049

} // namespace

Dataset mnist_load(const std::string& images_path, const std::string& labels_path, int limit) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw format_error(images_path + ": cannot open");
    const std::uint32_t img_magic = read_be_u32(img, images_path, 0);
    if (img_magic != kImagesMagic)
        throw format_error(images_path + ": bad magic " + std::to_string(img_magic) +
                           " at offset 0 (expected 2051)");
    const std::uint32_t img_count = read_be_u32(img, images_path, 4);
    const std::uint32_t rows = read_be_u32(img, images_path, 8);
    const std::uint32_t cols = read_be_u32(img, images_path, 12);
    if (img_count == 0 || rows == 0 || cols == 0)
        throw format_error(images_path + ": zero count or image size in header");

    std::ifstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw format_error(labels_path + ": cannot open");
    const std::uint32_t lbl_magic = read_be_u32(lbl, labels_path, 0);
    if (lbl_magic != kLabelsMagic)
        throw format_error(labels_path + ": bad magic " + std::to_string(lbl_magic) +
                           " at offset 0 (expected 2049)");
    const std::uint32_t lbl_count = read_be_u32(lbl, labels_path, 4);
    if (lbl_count != img_count)
        throw format_error(labels_path + ": label count " + std::to_string(lbl_count) +
                           " != image count " + std::to_string(img_count) + " in " + images_path);

    std::uint32_t n = img_count;
    if (limit > 0 && std::uint32_t(limit) < n) n = std::uint32_t(limit);
    const std::size_t dim = std::size_t(rows) * cols;

    Dataset ds;
    ds.num_classes = 10;
    ds.name = "mnist";
    ds.inputs = Mat<float>(int(n), int(dim));
    ds.labels.resize(n);

    std::vector<unsigned char> pixel_row(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(pixel_row.data()), std::streamsize(dim)))
            throw format_error(images_path + ": truncated payload at offset " +
                               std::to_string(16 + std::size_t(i) * dim));
        float* out = ds.inputs.row(int(i)).data();
        for (std::size_t k = 0; k < dim; ++k) out[k] = float(pixel_row[k]) / 255.0f;
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        unsigned char y = 0;
        if (!lbl.read(reinterpret_cast<char*>(&y), 1))
            throw format_error(labels_path + ": truncated payload at offset " +
                               std::to_string(8 + std::size_t(i)));
        if (y > 9)
            throw format_error(labels_path + ": label byte " + std::to_string(int(y)) +
                               " out of range at offset " + std::to_string(8 + std::size_t(i)));
        ds.labels[i] = int(y);
    }
    return ds;
}

void write_idx_pair(const Dataset& ds, const std::string& images_path,
                    const std::string& labels_path) {
    if (ds.dim() != 28 * 28)
        throw data_error("write_idx_pair: inputs must be 28x28 flattened");
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw io_error(images_path + ": cannot open for writing");
    write_be_u32(img, kImagesMagic);
    write_be_u32(img, std::uint32_t(ds.size()));
    write_be_u32(img, 28);
    write_be_u32(img, 28);
    std::vector<unsigned char> row(static_cast<std::size_t>(ds.dim()));
    for (int i = 0; i < ds.size(); ++i) {
        const float* r = ds.inputs.row(i).data();
        for (int k = 0; k < ds.dim(); ++k)
            row[std::size_t(k)] = static_cast<unsigned char>(std::lround(r[k] * 255.0f));
        img.write(reinterpret_cast<const char*>(row.data()), ds.dim());
    }
    if (!img) throw io_error(images_path + ": write failed");

    std::ofstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw io_error(labels_path + ": cannot open for writing");
    write_be_u32(lbl, kLabelsMagic);
    write_be_u32(lbl, std::uint32_t(ds.size()));
    for (int i = 0; i < ds.size(); ++i) {
        const unsigned char y = static_cast<unsigned char>(ds.labels[std::size_t(i)]);
        lbl.write(reinterpret_cast<const char*>(&y), 1);
    }
    if (!lbl) throw io_error(labels_path + ": write failed");
}

namespace {

// 7x7 glyphs, upscaled 4x to 28x28 with per-sample jitter.
const std::array<std::array<const char*, 7>, 10> kGlyphs = {{
    {"..###..", ".#...#.", "#.....#", "#.....#", "#.....#", ".#...#.", "..###.."},
    {"...#...", "..##...", ".#.#...", "...#...", "...#...", "...#...", ".#####."},
    {".####..", "#....#.", ".....#.", "....#..", "..##...", ".#.....", "######."},
    {".####..", "#....#.", ".....#.", "..###..", ".....#.", "#....#.", ".####.."},
    {"....#..", "...##..", "..#.#..", ".#..#..", "######.", "....#..", "....#.."},
    {"######.", "#......", "#####..", ".....#.", ".....#.", "#....#.", ".####.."},
    {"..###..", ".#.....", "#......", "#####..", "#....#.", "#....#.", ".####.."},
    {"######.", ".....#.", "....#..", "...#...", "..#....", ".#.....", "#......"},
    {".####..", "#....#.", "#....#.", ".####..", "#....#.", "#....#.", ".####.."},
    {".####..", "#....#.", "#....#.", ".#####.", ".....#.", "....#..", ".###..."},
}};

} // namespace

Dataset synth_digits(int n, std::uint64_t seed) {
    if (n < 1) throw config_error("synth_digits: n must be >= 1");
    RngStream rng(seed);
    Dataset ds;
    ds.num_classes = 10;
    ds.name = "synth";
    ds.inputs = Mat<float>(n, 28 * 28);
    ds.labels.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        const int digit = int(rng.below(10));
        const int dx = int(rng.below(5)) - 2;
        const int dy = int(rng.below(5)) - 2;
        const double intensity = 0.6 + 0.4 * rng.uniform();
        ds.labels[std::size_t(i)] = digit;
        float* out = ds.inputs.row(i).data();
        for (int y = 0; y < 28; ++y) {
            for (int x = 0; x < 28; ++x) {
                const int sy = y - dy;
                const int sx = x - dx;
                double v = 0.0;
                if (sy >= 0 && sy < 28 && sx >= 0 && sx < 28 &&
                    kGlyphs[std::size_t(digit)][std::size_t(sy / 4)][sx / 4] == '#')
                    v = intensity;
                v += 0.15 * rng.uniform(); // background / stroke noise
                out[y * 28 + x] = float(std::min(1.0, std::max(0.0, v)));
            }
        }
    }
    return ds;
}

Dataset subset(const Dataset& ds, int limit) {
    if (limit < 1 || limit >= ds.size()) return ds;
    Dataset out;
    out.num_classes = ds.num_classes;
    out.name = ds.name;
    out.inputs = Mat<float>(limit, ds.dim());
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + limit);
    for (int i = 0; i < limit; ++i) {
        const float* src = ds.inputs.row(i).data();
        std::copy(src, src + ds.dim(), out.inputs.row(i).data());
    }
    return out;
}

std::vector<std::vector<int>> epoch_batches(const Dataset& ds, int batch_size, bool stratified,
                                            RngStream& rng) {
    if (batch_size < 1) throw config_error("epoch_batches: batch_size must be >= 1");
    std::vector<std::vector<int>> batches;
    if (!stratified) {
        std::vector<int> order(static_cast<std::size_t>(ds.size()));
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (std::size_t pos = 0; pos < order.size(); pos += std::size_t(batch_size)) {
            const std::size_t end = std::min(order.size(), pos + std::size_t(batch_size));
            batches.emplace_back(order.begin() + std::ptrdiff_t(pos),
                                 order.begin() + std::ptrdiff_t(end));
        }
        return batches;
    }
    if (batch_size % ds.num_classes != 0)
        throw config_error("epoch_batches: stratified batch_size " + std::to_string(batch_size) +
                           " not divisible by num_classes " + std::to_string(ds.num_classes));
    const int per_class = batch_size / ds.num_classes;
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (int i = 0; i < ds.size(); ++i) by_class[std::size_t(ds.labels[std::size_t(i)])].push_back(i);
    for (auto& v : by_class) rng.shuffle(v);
    std::vector<std::size_t> cursor(std::size_t(ds.num_classes), 0);
    for (;;) {
        bool enough = true;
        for (int c = 0; c < ds.num_classes; ++c)
            if (cursor[std::size_t(c)] + std::size_t(per_class) > by_class[std::size_t(c)].size())
                enough = false;
        if (!enough) break;
        std::vector<int> batch;
        batch.reserve(std::size_t(batch_size));
        for (int c = 0; c < ds.num_classes; ++c)
            for (int k = 0; k < per_class; ++k)
                batch.push_back(by_class[std::size_t(c)][cursor[std::size_t(c)]++]);
        rng.shuffle(batch);
        batches.push_back(std::move(batch));
    }
    return batches;
}

Batch materialize_batch(const Dataset& ds, const std::vector<int>& indices) {
    if (indices.empty()) throw data_error("materialize_batch: empty index list");
    Batch b;
    b.inputs = Mat<float>(int(indices.size()), ds.dim());
    b.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const float* src = ds.inputs.row(indices[i]).data();
        std::copy(src, src + ds.dim(), b.inputs.row(int(i)).data());
        b.labels.push_back(ds.labels[std::size_t(indices[i])]);
    }
    b.onehot = one_hot<float>(b.labels, ds.num_classes);
    return b;
}

} // namespace bundlescope
