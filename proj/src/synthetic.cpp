#include "gmc/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gmc/rng.hpp"

namespace gmc {

namespace {

const std::vector<std::string> kSubjects = {"dog",  "cat",  "man",   "woman",
                                            "boy",  "girl", "bird",  "horse"};
const std::vector<std::string> kVerbs = {"runs",   "jumps", "walks", "sleeps",
                                         "plays",  "eats",  "sits",  "swims"};
const std::vector<std::string> kPlaces = {"park",   "street", "house", "garden",
                                          "field",  "beach",  "room",  "yard"};
const std::vector<std::string> kAdjectives = {"big", "small", "young", "old"};

std::string pick(Rng& rng, const std::vector<std::string>& pool) {
    return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

std::vector<std::string> template_tokens(Rng& rng) {
    return {"a", pick(rng, kSubjects), pick(rng, kVerbs), "in", "the", pick(rng, kPlaces)};
}

std::string join(const std::vector<std::string>& toks) {
    std::string s;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) s += ' ';
        s += toks[i];
    }
    return s;
}

Caption make_caption(const std::string& video_id, std::string text) {
    Caption c;
    c.video_id = video_id;
    c.text = std::move(text);
    c.tokens = tokenize(c.text);
    return c;
}

} // namespace

std::vector<VideoEntry> make_toy_entries(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x70F));
    std::vector<VideoEntry> entries;
    for (int i = 0; i < 24; ++i) {
        VideoEntry v;
        v.video_id = "toy" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        std::string s = pick(rng, kSubjects), w = pick(rng, kVerbs), p = pick(rng, kPlaces);
        std::string adj = pick(rng, kAdjectives), p2 = pick(rng, kPlaces);
        v.captions.push_back(make_caption(v.video_id, join({"a", s, w, "in", "the", p})));
        v.captions.push_back(make_caption(v.video_id, join({"the", s, w, "in", "the", p})));
        v.captions.push_back(
            make_caption(v.video_id, join({"the", adj, s, w, "near", "the", p2})));
        entries.push_back(std::move(v));
    }
    return entries;
}

std::vector<VideoEntry> make_zipf_entries(std::uint64_t seed) {
    (void)seed; // the band construction below is fully deterministic
    // Ten consensus bands with harmonically decaying video counts. Every
    // caption in band g shares a fixed 8-token block with its in-video
    // peers and appends g tokens of its own, and every token is private to
    // its video (document frequency 1, so the idf weights are uniform and
    // cancel inside each cosine). The leave-one-out consensus score of a
    // band-g caption is then exactly 2.5 * sum_{n=1..4} (9-n)/(9+g-n):
    // one score level per band, stepping down as g grows, while the number
    // of captions per level steps down with the band size -- a long-tail
    // profile whose rank/frequency relation is monotone by construction.
    constexpr int kBandVideos[] = {88, 43, 28, 21, 17, 14, 12, 10, 9, 8};
    constexpr int kShared = 8;
    constexpr int kCaptionsPerVideo = 4;

    std::vector<VideoEntry> entries;
    int video_no = 0;
    for (int g = 0; g < 10; ++g) {
        for (int i = 0; i < kBandVideos[g]; ++i) {
            VideoEntry v;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "v%03d", video_no);
            v.video_id = buf;
            std::vector<std::string> shared;
            shared.reserve(kShared);
            for (int k = 0; k < kShared; ++k)
                shared.push_back("w" + std::to_string(video_no) + "s" + std::to_string(k));
            for (int c = 0; c < kCaptionsPerVideo; ++c) {
                auto toks = shared;
                for (int k = 0; k < g; ++k)
                    toks.push_back("w" + std::to_string(video_no) + "c" + std::to_string(c) +
                                   "u" + std::to_string(k));
                v.captions.push_back(make_caption(v.video_id, join(toks)));
            }
            entries.push_back(std::move(v));
            ++video_no;
        }
    }
    return entries;
}

void write_entries_jsonl(const std::vector<VideoEntry>& entries, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write corpus to '" + path + "'");
    for (const auto& v : entries) {
        nlohmann::json caps = nlohmann::json::array();
        for (const auto& c : v.captions) caps.push_back(c.text);
        out << nlohmann::json{{"video_id", v.video_id}, {"captions", caps}}.dump() << '\n';
    }
    if (!out) throw std::runtime_error("failed writing corpus to '" + path + "'");
}

void write_toy_corpus(const std::string& path, std::uint64_t seed) {
    write_entries_jsonl(make_toy_entries(seed), path);
}

void write_zipf_corpus(const std::string& path, std::uint64_t seed) {
    write_entries_jsonl(make_zipf_entries(seed), path);
}

} // namespace gmc
