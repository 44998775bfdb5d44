#ifndef BUNDLESCOPE_CONFIG_JSON_HPP
#define BUNDLESCOPE_CONFIG_JSON_HPP

#include <string>

#include <json.hpp>

#include "bundlescope/architecture.hpp"
#include "bundlescope/bundle.hpp"
#include "bundlescope/errors.hpp"
#include "bundlescope/network.hpp"

namespace bundlescope {

using json = nlohmann::json;

// Rejects keys that no consumer would read; silent typos would otherwise
// invalidate experiments.
inline void require_known_keys(const json& obj, std::initializer_list<const char*> known,
                               const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw config_error(where + ": unknown key '" + key + "'");
    }
}

inline json block_to_json(const Block& b) {
    json j;
    j["tag"] = std::string(1, b.tag);
    j["layers"] = b.layer_count;
    j["width"] = b.width;
    if (b.residual == ResidualKind::Affine)
        j["residual"] = json{{"affine", {{"scale", b.res_scale}, {"shift", b.res_shift}}}};
    else
        j["residual"] = residual_kind_to_string(b.residual);
    j["batch_norm"] = b.batch_norm;
    return j;
}

inline Block block_from_json(const json& j) {
    require_known_keys(j, {"tag", "layers", "width", "residual", "batch_norm"}, "block");
    Block b;
    const std::string tag = j.at("tag").get<std::string>();
    if (tag.size() != 1) throw config_error("block: tag must be a single character");
    b.tag = tag[0];
    b.layer_count = j.at("layers").get<int>();
    b.width = j.at("width").get<int>();
    if (j.contains("residual")) {
        const json& r = j.at("residual");
        if (r.is_string()) {
            const std::string s = r.get<std::string>();
            if (s == "none")
                b.residual = ResidualKind::None;
            else if (s == "identity")
                b.residual = ResidualKind::Identity;
            else
                throw config_error("block: unknown residual kind '" + s + "'");
        } else {
            require_known_keys(r, {"affine"}, "block.residual");
            const json& a = r.at("affine");
            require_known_keys(a, {"scale", "shift"}, "block.residual.affine");
            b.residual = ResidualKind::Affine;
            b.res_scale = a.at("scale").get<double>();
            b.res_shift = a.at("shift").get<double>();
        }
    }
    b.batch_norm = j.value("batch_norm", false);
    return b;
}

inline json architecture_to_json(const Architecture& a) {
    json j;
    j["input_dim"] = a.input_dim;
    j["num_classes"] = a.num_classes;
    j["blocks"] = json::array();
    for (const auto& b : a.blocks) j["blocks"].push_back(block_to_json(b));
    return j;
}

inline Architecture architecture_from_json(const json& j) {
    require_known_keys(j, {"input_dim", "num_classes", "blocks"}, "architecture");
    Architecture a;
    a.input_dim = j.at("input_dim").get<int>();
    a.num_classes = j.at("num_classes").get<int>();
    for (const auto& bj : j.at("blocks")) a.blocks.push_back(block_from_json(bj));
    a.validate();
    return a;
}

inline json train_to_json(const TrainConfig& t) {
    json j;
    j["lr"] = t.lr;
    j["batch_size"] = t.batch_size;
    j["epochs"] = t.epochs;
    j["weight_decay"] = t.weight_decay;
    j["seed"] = t.seed;
    j["stratified"] = t.stratified;
    return j;
}

inline TrainConfig train_from_json(const json& j) {
    require_known_keys(j, {"lr", "batch_size", "epochs", "weight_decay", "seed", "stratified"},
                       "train");
    TrainConfig t;
    t.lr = j.value("lr", 0.001);
    t.batch_size = j.value("batch_size", 64);
    t.epochs = j.value("epochs", 1);
    t.weight_decay = j.value("weight_decay", 0.0);
    t.seed = j.value("seed", std::uint64_t(0));
    t.stratified = j.value("stratified", true);
    t.validate();
    return t;
}

inline json policy_to_json(const ResolutionPolicy& p) {
    if (p.kind == ResolutionPolicy::Kind::WeightUlp) return json("weight_ulp");
    return json{{"fixed_gamma", p.gamma}};
}

inline ResolutionPolicy policy_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "weight_ulp") return ResolutionPolicy::weight_ulp();
        throw config_error("bundles.policy: unknown policy '" + j.get<std::string>() + "'");
    }
    require_known_keys(j, {"fixed_gamma"}, "bundles.policy");
    return ResolutionPolicy::fixed(j.at("fixed_gamma").get<double>());
}

} // namespace bundlescope

#endif
