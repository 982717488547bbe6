#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gmc/batch.hpp"
#include "gmc/config.hpp"
#include "gmc/corpus.hpp"
#include "gmc/params.hpp"

namespace gmc {

/// Fixed feature vectors loaded from a JSONL file, one object per line:
/// {"id": "<video_id>", "kind": "video" | "text_<caption_index>",
///  "vector": [f64 x feature_dim]}. Text vectors are keyed by
/// "<video_id>#<caption_index>".
struct ImportedFeatures {
    std::unordered_map<std::string, std::vector<double>> video;
    std::unordered_map<std::string, std::vector<double>> text;

    static std::string text_key(const std::string& video_id, int caption_index) {
        return video_id + "#" + std::to_string(caption_index);
    }
};

ImportedFeatures load_features(const std::string& path, int feature_dim);

namespace model {

/// Synthetic mode: a learned per-video embedding through one affine+tanh
/// layer. Imported mode: the file vector, passed through unchanged (a
/// non-trainable leaf).
ad::Var encode_video(ad::Tape& tape, Binder& binder, const TrainConfig& cfg, const Corpus& corpus,
                     int video_index, const ImportedFeatures* feats);

/// Synthetic mode: mean of learned token embeddings through one affine+tanh
/// layer. Imported mode: passthrough of the file vector.
ad::Var encode_text(ad::Tape& tape, Binder& binder, const TrainConfig& cfg, const Corpus& corpus,
                    int video_index, int caption_index, const ImportedFeatures* feats);

/// Row i of both outputs is positive pair i of the batch.
std::pair<std::vector<ad::Var>, std::vector<ad::Var>> encode_batch(ad::Tape& tape, Binder& binder,
                                                                   const Batch& batch,
                                                                   const Corpus& corpus,
                                                                   const TrainConfig& cfg,
                                                                   const ImportedFeatures* feats);

/// Self-attention over the 2-token sequence [video, text], mean-pooled, then
/// a tanh MLP ending in a scalar score. Explicit-parameter form shared by the
/// trainer and the gradient-check harness.
ad::Var fusion_score_with(ad::Tape& tape, ad::Var video, ad::Var text, ad::Var wq, ad::Var wk,
                          ad::Var wv, ad::Var w1, ad::Var b1, ad::Var w2);

ad::Var fusion_score(ad::Tape& tape, Binder& binder, const TrainConfig& cfg, ad::Var video,
                     ad::Var text);

/// All B^2 pairings: entry (i, j) scores video i against text j.
std::vector<std::vector<ad::Var>> fusion_matrix(ad::Tape& tape, Binder& binder,
                                                const TrainConfig& cfg,
                                                const std::vector<ad::Var>& videos,
                                                const std::vector<ad::Var>& texts);

/// Pairwise encoder cosines and their clamped angles.
void dual_cosines(ad::Tape& tape, const std::vector<ad::Var>& videos,
                  const std::vector<ad::Var>& texts, std::vector<std::vector<ad::Var>>* cos_out,
                  std::vector<std::vector<ad::Var>>* theta_out);

} // namespace model

} // namespace gmc
