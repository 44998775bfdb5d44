#ifndef BUNDLESCOPE_ARCHITECTURE_HPP
#define BUNDLESCOPE_ARCHITECTURE_HPP

#include <optional>
#include <string>
#include <vector>

#include "bundlescope/errors.hpp"

namespace bundlescope {

enum class ResidualKind { None, Identity, Affine };

struct Block {
    char tag = 'a';
    int layer_count = 0; // hidden layers contributed by this block
    int width = 1;
    ResidualKind residual = ResidualKind::None;
    double res_scale = 1.0; // Affine residual r(x) = scale*x + shift
    double res_shift = 0.0;
    bool batch_norm = false;
};

// Maps a 1-based global hidden layer index into its block.
struct BlockPosition {
    char block_tag;
    int block_index;  // index into Architecture::blocks
    int offset;       // 1-based offset within the block
    int global_layer; // 1-based global hidden layer index
};

// Ordered block specification of a feed-forward network. Width changes
// happen in the first layer of a non-residual block; residual blocks keep
// input and output width equal (projection residuals are not supported).
// Empty blocks (layer_count 0) are skipped at forward time.
struct Architecture {
    int input_dim = 1;
    int num_classes = 2;
    std::vector<Block> blocks;

    int hidden_layers() const {
        int total = 0;
        for (const auto& b : blocks) total += b.layer_count;
        return total;
    }

    // Width feeding the output head (input_dim when all blocks are empty).
    int last_width() const {
        int w = input_dim;
        for (const auto& b : blocks)
            if (b.layer_count > 0) w = b.width;
        return w;
    }

    void validate() const {
        if (input_dim < 1) throw config_error("architecture: input_dim must be >= 1");
        if (num_classes < 2) throw config_error("architecture: num_classes must be >= 2");
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const Block& b = blocks[i];
            if (b.layer_count < 0)
                throw config_error(std::string("architecture: block '") + b.tag +
                                   "' has negative layer_count");
            if (b.layer_count > 0 && b.width < 1)
                throw config_error(std::string("architecture: block '") + b.tag +
                                   "' needs positive width");
            for (std::size_t j = 0; j < i; ++j)
                if (blocks[j].tag == b.tag)
                    throw config_error(std::string("architecture: duplicate block tag '") +
                                       b.tag + "'");
            if (b.residual != ResidualKind::None) {
                if (b.layer_count % 2 != 0)
                    throw config_error(std::string("architecture: residual block '") + b.tag +
                                       "' needs an even layer_count, got " +
                                       std::to_string(b.layer_count));
                if (b.residual == ResidualKind::Affine && b.res_scale == 0.0)
                    throw config_error(std::string("architecture: block '") + b.tag +
                                       "' affine residual scale must be nonzero");
                if (b.layer_count > 0) {
                    int in_width = input_dim;
                    for (std::size_t j = 0; j < i; ++j)
                        if (blocks[j].layer_count > 0) in_width = blocks[j].width;
                    if (in_width != b.width)
                        throw config_error(std::string("architecture: residual block '") + b.tag +
                                           "' input width " + std::to_string(in_width) +
                                           " != block width " + std::to_string(b.width) +
                                           " (width changes need a non-residual transition)");
                }
            }
        }
    }

    BlockPosition layer_position(int global_layer) const {
        if (global_layer < 1 || global_layer > hidden_layers())
            throw internal_error("layer_position: layer " + std::to_string(global_layer) +
                                 " out of range");
        int remaining = global_layer;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (remaining <= blocks[i].layer_count)
                return {blocks[i].tag, int(i), remaining, global_layer};
            remaining -= blocks[i].layer_count;
        }
        throw internal_error("layer_position: unreachable");
    }
};

// Shrinks one block to keep_count layers (rounded down to even for residual
// blocks); every other block is untouched.
inline Architecture prune_architecture(const Architecture& arch, char block_tag, int keep_count) {
    Architecture out = arch;
    bool found = false;
    for (auto& b : out.blocks) {
        if (b.tag != block_tag) continue;
        found = true;
        if (keep_count < 0)
            throw config_error("prune: keep_count must be >= 0");
        if (keep_count >= b.layer_count)
            throw config_error(std::string("prune: keep_count ") + std::to_string(keep_count) +
                               " >= current layer_count " + std::to_string(b.layer_count) +
                               " of block '" + b.tag + "'");
        if (b.residual != ResidualKind::None) keep_count -= keep_count % 2;
        b.layer_count = keep_count;
    }
    if (!found)
        throw config_error(std::string("prune: no block tagged '") + block_tag + "'");
    out.validate();
    return out;
}

inline std::string residual_kind_to_string(ResidualKind k) {
    switch (k) {
    case ResidualKind::None: return "none";
    case ResidualKind::Identity: return "identity";
    case ResidualKind::Affine: return "affine";
    }
    return "none";
}

} // namespace bundlescope

#endif
