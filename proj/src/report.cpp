#include "bundlescope/report.hpp"

#include <cstdio>
#include <fstream>

#include "bundlescope/errors.hpp"

namespace bundlescope {

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(path + ": cannot open for writing");
    return out;
}

void finish_csv(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw io_error(path + ": write failed");
}

} // namespace

void write_entropy_csv(const std::vector<EntropyRow>& rows, const std::string& path) {
    auto out = open_csv(path);
    out << "epoch,layer,block,offset,location,entropy,bundle_count\n";
    for (const auto& r : rows)
        out << r.epoch << ',' << r.layer << ',' << r.block << ',' << r.offset << ','
            << to_string(r.location) << ',' << format_float(r.entropy) << ',' << r.bundle_count
            << '\n';
    finish_csv(out, path);
}

void write_evolution_csv(const std::vector<EvolutionRow>& rows,
                         const std::vector<char>& block_tags, const std::string& path) {
    auto out = open_csv(path);
    out << "step,epoch_reached";
    for (const char t : block_tags) out << ",block_" << t;
    out << ",pruned_block,keep_count\n";
    for (const auto& r : rows) {
        if (r.block_counts.size() != block_tags.size())
            throw internal_error("evolution csv: row block count mismatch");
        out << r.step << ',' << r.epoch_reached;
        for (const int c : r.block_counts) out << ',' << c;
        out << ',';
        if (r.pruned_block) out << *r.pruned_block;
        out << ',';
        if (r.keep_count) out << *r.keep_count;
        out << '\n';
    }
    finish_csv(out, path);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    auto out = open_csv(path);
    out << "depth,width,accuracy,H_L,first_conflicting_layer\n";
    for (const auto& r : rows) {
        out << r.depth << ',' << r.width << ',' << format_float(r.accuracy) << ','
            << format_float(r.final_entropy) << ',';
        if (r.first_conflicting_layer) out << *r.first_conflicting_layer;
        out << '\n';
    }
    finish_csv(out, path);
}

void write_heatmap_csv(const std::vector<HeatmapRow>& rows, const std::string& path) {
    auto out = open_csv(path);
    out << "lr,batch_size,oracle,metric,exact_eq\n";
    for (const auto& r : rows)
        out << format_float(r.lr) << ',' << r.batch_size << ',' << r.oracle << ',' << r.metric
            << ',' << r.exact_eq << '\n';
    finish_csv(out, path);
}

void write_lesion_csv(const std::vector<LesionRow>& rows, const std::string& path) {
    auto out = open_csv(path);
    out << "strategy,k,seed,accuracy\n";
    for (const auto& r : rows) {
        out << r.strategy << ',' << r.k << ',' << r.seed << ',';
        if (!r.skipped) out << format_float(r.accuracy);
        out << '\n';
    }
    finish_csv(out, path);
}

void write_toy_csv(const std::vector<ToyRow>& rows, int num_classes, const std::string& path) {
    auto out = open_csv(path);
    out << "epoch,grad_norm,accuracy";
    for (int c = 0; c < num_classes; ++c) out << ",mean_out_" << c;
    out << ",std_out\n";
    for (const auto& r : rows) {
        if (int(r.mean_out.size()) != num_classes)
            throw internal_error("toy csv: mean_out width mismatch");
        out << r.epoch << ',' << format_float(r.grad_norm) << ',' << format_float(r.accuracy);
        for (const double m : r.mean_out) out << ',' << format_float(m);
        out << ',' << format_float(r.std_out) << '\n';
    }
    finish_csv(out, path);
}

std::vector<EntropyRow> entropy_rows_from_records(const std::vector<BundleEntropyRecord>& records,
                                                  const Architecture& arch) {
    std::vector<EntropyRow> rows;
    rows.reserve(records.size());
    for (const auto& rec : records) {
        EntropyRow row;
        row.epoch = rec.epoch;
        row.layer = rec.layer;
        const BlockPosition pos = arch.layer_position(rec.layer);
        row.block = pos.block_tag;
        row.offset = pos.offset;
        row.location = rec.location;
        row.entropy = rec.entropy;
        row.bundle_count = rec.bundle_count;
        rows.push_back(row);
    }
    return rows;
}

} // namespace bundlescope
