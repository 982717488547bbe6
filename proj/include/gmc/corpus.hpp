#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace gmc {

/// Lowercase + whitespace split + per-token strip of leading/trailing ASCII
/// punctuation; empty tokens dropped. Deterministic, dependency-free.
std::vector<std::string> tokenize(const std::string& text);

/// All contiguous length-n windows of `tokens` with multiplicity. N-grams are
/// represented as their tokens joined with a single space (tokens themselves
/// never contain whitespace). Empty when tokens.size() < n. n == 0 is an error.
std::map<std::string, int> ngrams(const std::vector<std::string>& tokens, int n);

struct Caption {
    std::string video_id;
    std::string text;
    std::vector<std::string> tokens;
};

struct VideoEntry {
    std::string video_id;
    std::vector<Caption> captions;
};

/// Document frequency of each n-gram, counted once per video that has at
/// least one caption containing it (per-video counting, not per-sentence).
struct DfTable {
    int n_max = 4;
    std::vector<std::unordered_map<std::string, int>> df; // index n-1
    int num_videos = 0;

    /// Stored count, or 0 when the n-gram was never seen.
    int count(int n, const std::string& gram) const;
};

struct Corpus {
    std::vector<VideoEntry> videos;
    DfTable df;
    std::unordered_map<std::string, int> video_index; // video_id -> index

    int index_of(const std::string& video_id) const; // -1 when absent
    std::size_t total_captions() const;
};

/// Parse one UTF-8 JSONL dataset file: one object per line,
/// {"video_id": "...", "captions": ["...", ...]}. Errors name the offending
/// line number; duplicate video_id and empty caption lists are rejected, as
/// are captions that tokenize to nothing.
Corpus build_corpus(const std::string& path, int n_max = 4);

/// Same validation and DF construction from already-parsed entries (used by
/// synthetic generators and tests).
Corpus build_corpus_from_entries(std::vector<VideoEntry> entries, int n_max = 4);

} // namespace gmc
