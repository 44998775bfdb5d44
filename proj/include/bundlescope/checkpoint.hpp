#ifndef BUNDLESCOPE_CHECKPOINT_HPP
#define BUNDLESCOPE_CHECKPOINT_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bundlescope/config_json.hpp"
#include "bundlescope/errors.hpp"
#include "bundlescope/network.hpp"

namespace bundlescope {

// Checkpoint layout (version 1), all header integers little-endian:
//   "CBND" | u32 version | u32 metadata length | metadata JSON |
//   payload of raw little-endian IEEE floats.
// Payload order: per hidden layer W (row-major) then b, then gamma, beta,
// running_mean, running_var when the layer has batch norm; finally head W
// and b. Round-trips are bitwise lossless.

constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_le_u32(std::string& out, std::uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}

inline std::uint32_t get_le_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

template <typename T>
void append_mat(std::string& out, const Mat<T>& m) {
    for (const T v : m.data()) {
        if constexpr (sizeof(T) == 4) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_le_u32(out, bits);
        } else {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            put_le_u32(out, std::uint32_t(bits & 0xffffffffULL));
            put_le_u32(out, std::uint32_t(bits >> 32));
        }
    }
}

template <typename T>
void read_mat(const unsigned char*& p, const unsigned char* end, Mat<T>& m,
              const std::string& path) {
    const std::size_t bytes = m.size() * sizeof(T);
    if (std::size_t(end - p) < bytes)
        throw format_error(path + ": truncated payload while reading parameters");
    for (auto& v : m.data()) {
        if constexpr (sizeof(T) == 4) {
            const std::uint32_t bits = get_le_u32(p);
            std::memcpy(&v, &bits, 4);
            p += 4;
        } else {
            const std::uint64_t lo = get_le_u32(p);
            const std::uint64_t hi = get_le_u32(p + 4);
            const std::uint64_t bits = lo | (hi << 32);
            std::memcpy(&v, &bits, 8);
            p += 8;
        }
    }
}

template <typename Net, typename Fn>
void for_each_param(Net& net, Fn&& fn) {
    for (auto& hl : net.layers) {
        fn(hl.dense.W);
        fn(hl.dense.b);
        if (hl.bn) {
            fn(hl.bn->gamma);
            fn(hl.bn->beta);
            fn(hl.bn->run_mean);
            fn(hl.bn->run_var);
        }
    }
    fn(net.head.W);
    fn(net.head.b);
}

} // namespace detail

struct CheckpointMeta {
    Architecture arch;
    std::uint64_t seed = 0;
    TrainConfig train;
    int epoch = 0;
    FloatFormat format = FloatFormat::Binary32;
};

template <typename T>
void save_checkpoint(const Network<T>& net, const TrainConfig& train, int epoch,
                     const std::string& path) {
    json meta;
    meta["architecture"] = architecture_to_json(net.arch);
    meta["seed"] = net.seed;
    meta["train"] = train_to_json(train);
    meta["epoch"] = epoch;
    meta["float_format"] = to_string(format_of<T>::value);
    const std::string meta_str = meta.dump();

    std::string blob;
    blob.reserve(meta_str.size() + 1024);
    blob += "CBND";
    detail::put_le_u32(blob, kCheckpointVersion);
    detail::put_le_u32(blob, std::uint32_t(meta_str.size()));
    blob += meta_str;
    detail::for_each_param(net, [&blob](const Mat<T>& m) { detail::append_mat(blob, m); });

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error(tmp + ": cannot open for writing");
        out.write(blob.data(), std::streamsize(blob.size()));
        if (!out) throw io_error(tmp + ": write failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw io_error(path + ": rename from temporary failed");
}

inline CheckpointMeta read_checkpoint_meta(const std::vector<unsigned char>& bytes,
                                           const std::string& path) {
    if (bytes.size() < 12) throw format_error(path + ": file too short for a checkpoint header");
    if (std::memcmp(bytes.data(), "CBND", 4) != 0)
        throw format_error(path + ": bad magic (expected CBND)");
    const std::uint32_t version = detail::get_le_u32(bytes.data() + 4);
    if (version > kCheckpointVersion)
        throw format_error(path + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t meta_len = detail::get_le_u32(bytes.data() + 8);
    if (bytes.size() < 12 + std::size_t(meta_len))
        throw format_error(path + ": truncated metadata block");
    json meta;
    try {
        meta = json::parse(bytes.begin() + 12, bytes.begin() + 12 + meta_len);
    } catch (const json::exception& e) {
        throw format_error(path + ": invalid metadata JSON (" + e.what() + ")");
    }
    CheckpointMeta out;
    out.arch = architecture_from_json(meta.at("architecture"));
    out.seed = meta.value("seed", std::uint64_t(0));
    out.train = train_from_json(meta.at("train"));
    out.epoch = meta.value("epoch", 0);
    out.format = float_format_from_string(meta.at("float_format").get<std::string>());
    return out;
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path + ": cannot open");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

inline CheckpointMeta peek_checkpoint(const std::string& path) {
    return read_checkpoint_meta(read_file_bytes(path), path);
}

template <typename T>
Network<T> load_checkpoint(const std::string& path, TrainConfig* train_out = nullptr,
                           int* epoch_out = nullptr) {
    const std::vector<unsigned char> bytes = read_file_bytes(path);
    const CheckpointMeta meta = read_checkpoint_meta(bytes, path);
    if (meta.format != format_of<T>::value)
        throw format_error(path + ": checkpoint format " + to_string(meta.format) +
                           " does not match requested " + to_string(format_of<T>::value));

    Network<T> net = build_network<T>(meta.arch, meta.seed);
    const std::uint32_t meta_len = detail::get_le_u32(bytes.data() + 8);
    const unsigned char* p = bytes.data() + 12 + meta_len;
    const unsigned char* end = bytes.data() + bytes.size();

    std::size_t expected = 0;
    detail::for_each_param(net, [&expected](const Mat<T>& m) { expected += m.size() * sizeof(T); });
    const std::size_t actual = std::size_t(end - p);
    if (actual != expected)
        throw format_error(path + ": payload length mismatch, expected " +
                           std::to_string(expected) + " bytes for this architecture, found " +
                           std::to_string(actual));
    detail::for_each_param(net, [&p, end, &path](Mat<T>& m) { detail::read_mat(p, end, m, path); });
    if (train_out) *train_out = meta.train;
    if (epoch_out) *epoch_out = meta.epoch;
    net.bump_version();
    return net;
}

} // namespace bundlescope

#endif
