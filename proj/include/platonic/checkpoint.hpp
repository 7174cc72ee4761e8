#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "platonic/model.hpp"

namespace platonic {

inline std::string to_string(InteractionMode m) {
    return m == InteractionMode::softmax_attention ? "softmax_attention" : "linear_convolution";
}
inline std::string to_string(ScoreMode s) {
    return s == ScoreMode::equivariant ? "equivariant" : "invariant";
}
inline std::string to_string(KeyMode k) {
    return k == KeyMode::learned ? "learned" : "constant_ones";
}
inline std::string to_string(NormPlacement p) { return p == NormPlacement::pre ? "pre" : "post"; }
inline std::string to_string(ReadoutMode r) {
    return r == ReadoutMode::graph_invariant ? "graph_invariant" : "node_scalar_vector";
}
inline std::string to_string(Pooling p) { return p == Pooling::mean ? "mean" : "sum"; }

inline InteractionMode parse_interaction_mode(const std::string& s) {
    if (s == "softmax_attention") return InteractionMode::softmax_attention;
    if (s == "linear_convolution") return InteractionMode::linear_convolution;
    throw UsageError("unknown interaction mode '" + s +
                     "' (expected softmax_attention or linear_convolution)");
}
inline ScoreMode parse_score_mode(const std::string& s) {
    if (s == "equivariant") return ScoreMode::equivariant;
    if (s == "invariant") return ScoreMode::invariant;
    throw UsageError("unknown score mode '" + s + "' (expected equivariant or invariant)");
}
inline KeyMode parse_key_mode(const std::string& s) {
    if (s == "learned") return KeyMode::learned;
    if (s == "constant_ones") return KeyMode::constant_ones;
    throw UsageError("unknown key mode '" + s + "' (expected learned or constant_ones)");
}
inline NormPlacement parse_norm_placement(const std::string& s) {
    if (s == "pre") return NormPlacement::pre;
    if (s == "post") return NormPlacement::post;
    throw UsageError("unknown norm placement '" + s + "' (expected pre or post)");
}
inline ReadoutMode parse_readout(const std::string& s) {
    if (s == "graph_invariant") return ReadoutMode::graph_invariant;
    if (s == "node_scalar_vector") return ReadoutMode::node_scalar_vector;
    throw UsageError("unknown readout '" + s +
                     "' (expected graph_invariant or node_scalar_vector)");
}
inline Pooling parse_pooling(const std::string& s) {
    if (s == "mean") return Pooling::mean;
    if (s == "sum") return Pooling::sum;
    throw UsageError("unknown pooling '" + s + "' (expected mean or sum)");
}

inline nlohmann::json config_to_json(const ModelConfig& c) {
    nlohmann::json j;
    j["group"] = c.group;
    j["layers"] = c.layers;
    j["channels"] = c.channels;
    j["heads"] = c.heads;
    j["ffn_factor"] = c.ffn_factor;
    j["mode"] = to_string(c.mode);
    j["score"] = to_string(c.score);
    j["key_mode"] = to_string(c.key_mode);
    j["rope_sigma"] = c.rope_sigma;
    if (c.ape_sigma) j["ape_sigma"] = *c.ape_sigma;
    j["ape_freqs"] = c.ape_freqs;
    j["learned_freqs"] = c.learned_freqs;
    j["norm_placement"] = to_string(c.norm_placement);
    j["dropout"] = c.dropout;
    j["drop_path"] = c.drop_path;
    j["readout"] = to_string(c.readout);
    j["pooling"] = to_string(c.pooling);
    j["lift_positions"] = c.lift_positions;
    j["scalar_in"] = c.scalar_in;
    j["vector_in"] = c.vector_in;
    j["scalar_out"] = c.scalar_out;
    j["vector_out"] = c.vector_out;
    j["max_softmax_n"] = c.max_softmax_n;
    j["seed"] = c.seed;
    return j;
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.group = j.at("group").get<std::string>();
    c.layers = j.at("layers").get<int>();
    c.channels = j.at("channels").get<int>();
    c.heads = j.at("heads").get<int>();
    c.ffn_factor = j.at("ffn_factor").get<double>();
    c.mode = parse_interaction_mode(j.at("mode").get<std::string>());
    c.score = parse_score_mode(j.at("score").get<std::string>());
    c.key_mode = parse_key_mode(j.at("key_mode").get<std::string>());
    c.rope_sigma = j.at("rope_sigma").get<double>();
    if (j.contains("ape_sigma")) c.ape_sigma = j.at("ape_sigma").get<double>();
    c.ape_freqs = j.at("ape_freqs").get<int>();
    c.learned_freqs = j.at("learned_freqs").get<bool>();
    c.norm_placement = parse_norm_placement(j.at("norm_placement").get<std::string>());
    c.dropout = j.at("dropout").get<double>();
    c.drop_path = j.at("drop_path").get<double>();
    c.readout = parse_readout(j.at("readout").get<std::string>());
    c.pooling = parse_pooling(j.at("pooling").get<std::string>());
    c.lift_positions = j.at("lift_positions").get<bool>();
    c.scalar_in = j.at("scalar_in").get<int>();
    c.vector_in = j.at("vector_in").get<int>();
    c.scalar_out = j.at("scalar_out").get<int>();
    c.vector_out = j.at("vector_out").get<int>();
    c.max_softmax_n = j.at("max_softmax_n").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(const Model& m, const std::string& path) {
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["config"] = config_to_json(m.config());
    j["group"] = m.group().name;
    nlohmann::json params;
    for (const auto& [name, t] : m.parameters())
        params[name] = nlohmann::json{{"shape", t.shape}, {"data", t.data}};
    j["parameters"] = std::move(params);
    std::ofstream out(path);
    if (!out) throw ResourceError("cannot open checkpoint file " + path + " for writing");
    out << j.dump() << "\n";
}

inline Model load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open checkpoint file " + path);
    nlohmann::json j;
    in >> j;
    if (j.at("version").get<int>() != kCheckpointVersion)
        throw ContractError("unsupported checkpoint version " +
                            std::to_string(j.at("version").get<int>()));
    ModelConfig cfg = config_from_json(j.at("config"));
    Model m(cfg);
    if (j.at("group").get<std::string>() != m.group().name)
        throw ContractError("checkpoint group '" + j.at("group").get<std::string>() +
                            "' does not match config group '" + m.group().name + "'");
    const nlohmann::json& params = j.at("parameters");
    for (const std::string& name : m.parameter_names()) {
        if (!params.contains(name)) throw ContractError("checkpoint missing parameter " + name);
        const nlohmann::json& p = params.at(name);
        Tensor t(p.at("shape").get<Shape>(), p.at("data").get<std::vector<double>>());
        m.set_parameter(name, std::move(t));
    }
    return m;
}

}  // namespace platonic
