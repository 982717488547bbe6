#include "gmc/config.hpp"

#include <cstdio>
#include <stdexcept>

#include "gmc/rng.hpp"

namespace gmc {

TrainConfig TrainConfig::toy() {
    TrainConfig c;
    c.feature_dim = 16;
    c.fusion_hidden = 16;
    c.codebook_dim = 64;
    c.warmup_steps = 300;
    c.total_steps = 500;
    c.batch_size = 8;
    c.learning_rate = 1e-2;
    // at toy scale the fused scores start close together; a sharp fusion
    // temperature keeps the pairwise softmax from flattening into its
    // uniform plateau before the score head has learned any structure
    c.tau2 = 0.1;
    c.max_positions = 12;
    c.log_every = 10;
    return c;
}

TrainConfig TrainConfig::full_scale() { return TrainConfig{}; }

void TrainConfig::validate() const {
    if (tau1 <= 0 || tau2 <= 0 || tau3 <= 0)
        throw std::invalid_argument("config: temperatures must be positive");
    if (codebook_dim < 1 || feature_dim < 1 || fusion_hidden < 0)
        throw std::invalid_argument("config: dimensions must be positive");
    if (warmup_steps < 0 || total_steps < 0 || warmup_steps > total_steps)
        throw std::invalid_argument("config: need 0 <= warmup_steps <= total_steps");
    if (batch_size < 2) throw std::invalid_argument("config: batch_size must be >= 2");
    if (learning_rate < 0) throw std::invalid_argument("config: learning_rate must be >= 0");
    if (momentum < 0 || momentum >= 1)
        throw std::invalid_argument("config: momentum must be in [0, 1)");
    if (margin_orientation != "literal" && margin_orientation != "complement")
        throw std::invalid_argument("config: margin_orientation must be 'literal' or 'complement'");
    if (feature_mode != "synthetic" && feature_mode != "imported")
        throw std::invalid_argument("config: feature_mode must be 'synthetic' or 'imported'");
    if (max_positions < 1) throw std::invalid_argument("config: max_positions must be >= 1");
    if (log_every < 1) throw std::invalid_argument("config: log_every must be >= 1");
}

nlohmann::json TrainConfig::to_json() const {
    return nlohmann::json{{"tau1", tau1},
                          {"tau2", tau2},
                          {"tau3", tau3},
                          {"codebook_dim", codebook_dim},
                          {"feature_dim", feature_dim},
                          {"fusion_hidden", fusion_hidden},
                          {"warmup_steps", warmup_steps},
                          {"total_steps", total_steps},
                          {"batch_size", batch_size},
                          {"learning_rate", learning_rate},
                          {"momentum", momentum},
                          {"seed", seed},
                          {"margin_orientation", margin_orientation},
                          {"use_b", use_b},
                          {"use_bfcl", use_bfcl},
                          {"use_mcl", use_mcl},
                          {"use_gen", use_gen},
                          {"warmup_includes_gen", warmup_includes_gen},
                          {"freeze_bias_after_warmup", freeze_bias_after_warmup},
                          {"feature_mode", feature_mode},
                          {"max_positions", max_positions},
                          {"log_every", log_every}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    TrainConfig c;
    if (j.contains("preset")) {
        const auto& p = j["preset"];
        if (!p.is_string()) throw std::invalid_argument("config: 'preset' must be a string");
        std::string name = p.get<std::string>();
        if (name == "toy")
            c = toy();
        else if (name == "full")
            c = full_scale();
        else
            throw std::invalid_argument("config: unknown preset '" + name + "'");
    }
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "preset")
                continue;
            else if (key == "tau1")
                c.tau1 = value.get<double>();
            else if (key == "tau2")
                c.tau2 = value.get<double>();
            else if (key == "tau3")
                c.tau3 = value.get<double>();
            else if (key == "codebook_dim")
                c.codebook_dim = value.get<int>();
            else if (key == "feature_dim")
                c.feature_dim = value.get<int>();
            else if (key == "fusion_hidden")
                c.fusion_hidden = value.get<int>();
            else if (key == "warmup_steps")
                c.warmup_steps = value.get<int>();
            else if (key == "total_steps")
                c.total_steps = value.get<int>();
            else if (key == "batch_size")
                c.batch_size = value.get<int>();
            else if (key == "learning_rate")
                c.learning_rate = value.get<double>();
            else if (key == "momentum")
                c.momentum = value.get<double>();
            else if (key == "seed")
                c.seed = value.get<std::uint64_t>();
            else if (key == "margin_orientation")
                c.margin_orientation = value.get<std::string>();
            else if (key == "use_b")
                c.use_b = value.get<bool>();
            else if (key == "use_bfcl")
                c.use_bfcl = value.get<bool>();
            else if (key == "use_mcl")
                c.use_mcl = value.get<bool>();
            else if (key == "use_gen")
                c.use_gen = value.get<bool>();
            else if (key == "warmup_includes_gen")
                c.warmup_includes_gen = value.get<bool>();
            else if (key == "freeze_bias_after_warmup")
                c.freeze_bias_after_warmup = value.get<bool>();
            else if (key == "feature_mode")
                c.feature_mode = value.get<std::string>();
            else if (key == "max_positions")
                c.max_positions = value.get<int>();
            else if (key == "log_every")
                c.log_every = value.get<int>();
            else
                throw std::invalid_argument("config: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw std::invalid_argument("config: bad value for key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

std::string TrainConfig::hash() const {
    std::uint64_t h = fnv1a64(to_json().dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace gmc
