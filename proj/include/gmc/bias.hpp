#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gmc/batch.hpp"
#include "gmc/corpus.hpp"
#include "gmc/params.hpp"

namespace gmc {

/// Bucketed information-content values for one caption. The sentence score
/// is kept at two decimals and the video score at one; buckets are the
/// corresponding integer keys.
struct InfoContentScore {
    double sentence_score = 0.0;
    double video_score = 0.0;
    int sentence_bucket = 0;
    int video_bucket = 0;
};

inline int sentence_bucket_of(double raw_score) {
    return static_cast<int>(std::lround(raw_score * 100.0));
}
inline int video_bucket_of(double rounded_mean) {
    return static_cast<int>(std::lround(rounded_mean * 10.0));
}

/// Leave-one-out consensus score: the caption against the other captions of
/// its own video, document frequencies taken from the whole corpus. Videos
/// with a single caption score 0 (no consensus signal); the warning, when
/// requested, says so.
double info_score_sentence(const Corpus& corpus, int video_index, int caption_index,
                           std::string* warning = nullptr);

/// Mean of the video's (two-decimal) sentence scores, rounded to one decimal.
double info_score_video(const Corpus& corpus, int video_index, std::string* warning = nullptr);

/// Scores and buckets for every caption, indexed [video][caption].
std::vector<std::vector<InfoContentScore>> score_corpus(const Corpus& corpus,
                                                        std::vector<std::string>* warnings = nullptr);

/// Cosine of the learned codebook vectors for a (video bucket, sentence
/// bucket) pair, with the angle recovered after the shared epsilon clamp.
struct BiasScore {
    double y_hat = 0.0;  // clamped cosine, in [-1+eps, 1-eps]
    double xi_hat = 0.0; // arccos(y_hat), in (0, pi)
};

std::string codebook_video_name(int bucket);
std::string codebook_sentence_name(int bucket);

BiasScore bias_score(int video_bucket, int sentence_bucket, ParamStore& store, int codebook_dim);

/// Contrastive alignment of codebook vectors over a batch: for each pair,
/// -log softmax of the matched cosine against the other in-batch sentence
/// buckets (temperature tau1), summed over pairs. Cosines enter raw
/// (unclamped). B < 2 is an error.
ad::Var loss_b(ad::Tape& tape, Binder& binder, const Batch& batch, int codebook_dim, double tau1);

/// Same loss over an already-built cosine matrix (cos[i][j] between video
/// bucket i's vector and sentence bucket j's vector).
ad::Var loss_b_from_cosines(ad::Tape& tape, const std::vector<std::vector<ad::Var>>& cos,
                            double tau1);

/// Frozen per-pair codebook angles for margin construction: plain values,
/// deliberately not connected to the tape, so margins never backpropagate
/// into the codebooks.
std::vector<double> batch_bias_angles(ParamStore& store, const Batch& batch, int codebook_dim);

} // namespace gmc
