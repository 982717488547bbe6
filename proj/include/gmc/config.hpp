#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace gmc {

/// Everything a training run needs, serializable to/from the documented JSON
/// schema. `toy()` is sized for the shipped fixtures; `full_scale()` keeps
/// the full-scale defaults (768-dim features, batch 24, 6000 warm-up steps,
/// learning rate 1e-5) for reference.
struct TrainConfig {
    double tau1 = 0.2;  // bias-extractor temperature
    double tau2 = 1.0;  // fusion contrastive temperature
    double tau3 = 0.07; // margin contrastive temperature

    int codebook_dim = 64;
    int feature_dim = 768;
    int fusion_hidden = 0; // 0 -> same as feature_dim

    int warmup_steps = 6000;
    int total_steps = 12000;
    int batch_size = 24;
    double learning_rate = 1e-5;
    double momentum = 0.0; // 0 = plain gradient descent

    std::uint64_t seed = 1;
    std::string margin_orientation = "literal"; // "literal" | "complement"

    bool use_b = true;
    bool use_bfcl = true;
    bool use_mcl = true;
    bool use_gen = true;
    bool warmup_includes_gen = true;
    bool freeze_bias_after_warmup = false;

    std::string feature_mode = "synthetic"; // "synthetic" | "imported"
    int max_positions = 16;                 // decoder position-embedding table size
    int log_every = 10;

    static TrainConfig toy();
    static TrainConfig full_scale();

    int hidden() const { return fusion_hidden > 0 ? fusion_hidden : feature_dim; }

    void validate() const;
    nlohmann::json to_json() const;
    /// Accepts an optional "preset": "toy" | "full" base; every other key
    /// must name a config field (unknown keys are a validation error).
    static TrainConfig from_json(const nlohmann::json& j);
    /// FNV-1a64 of the canonical JSON dump, as fixed-width hex.
    std::string hash() const;
};

} // namespace gmc
