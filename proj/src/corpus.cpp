#include "gmc/corpus.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gmc {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        std::size_t b = 0, e = word.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
        if (b == e) continue;
        std::string tok = word.substr(b, e - b);
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(tok));
    }
    return out;
}

std::map<std::string, int> ngrams(const std::vector<std::string>& tokens, int n) {
    if (n == 0) throw std::invalid_argument("ngrams: n must be >= 1");
    std::map<std::string, int> out;
    if (n < 0 || tokens.size() < static_cast<std::size_t>(n)) return out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string g = tokens[i];
        for (std::size_t j = 1; j < static_cast<std::size_t>(n); ++j) {
            g += ' ';
            g += tokens[i + j];
        }
        ++out[g];
    }
    return out;
}

int DfTable::count(int n, const std::string& gram) const {
    if (n < 1 || n > n_max) return 0;
    const auto& level = df[static_cast<std::size_t>(n - 1)];
    auto it = level.find(gram);
    return it == level.end() ? 0 : it->second;
}

int Corpus::index_of(const std::string& video_id) const {
    auto it = video_index.find(video_id);
    return it == video_index.end() ? -1 : it->second;
}

std::size_t Corpus::total_captions() const {
    std::size_t n = 0;
    for (const auto& v : videos) n += v.captions.size();
    return n;
}

Corpus build_corpus_from_entries(std::vector<VideoEntry> entries, int n_max) {
    if (n_max < 1) throw std::invalid_argument("build_corpus: n_max must be >= 1");
    Corpus corpus;
    corpus.df.n_max = n_max;
    corpus.df.df.resize(static_cast<std::size_t>(n_max));
    corpus.videos = std::move(entries);
    for (std::size_t vi = 0; vi < corpus.videos.size(); ++vi) {
        VideoEntry& v = corpus.videos[vi];
        if (v.captions.empty())
            throw std::invalid_argument("video '" + v.video_id + "' has no captions");
        if (!corpus.video_index.emplace(v.video_id, static_cast<int>(vi)).second)
            throw std::invalid_argument("duplicate video_id '" + v.video_id + "'");
        for (Caption& c : v.captions) {
            c.video_id = v.video_id;
            if (c.tokens.empty()) c.tokens = tokenize(c.text);
            if (c.tokens.empty())
                throw std::invalid_argument("video '" + v.video_id +
                                            "' has a caption with no tokens after tokenization");
        }
        // count each n-gram once per video, regardless of caption multiplicity
        for (int n = 1; n <= n_max; ++n) {
            std::set<std::string> seen;
            for (const Caption& c : v.captions)
                for (const auto& [g, cnt] : ngrams(c.tokens, n)) seen.insert(g);
            for (const auto& g : seen) ++corpus.df.df[static_cast<std::size_t>(n - 1)][g];
        }
    }
    corpus.df.num_videos = static_cast<int>(corpus.videos.size());
    return corpus;
}

Corpus build_corpus(const std::string& path, int n_max) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dataset file '" + path + "'");
    std::vector<VideoEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": malformed JSON (" + e.what() + ")");
        }
        auto bad = [&](const std::string& why) {
            return std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + why);
        };
        if (!row.is_object() || !row.contains("video_id") || !row.contains("captions"))
            throw bad("expected object with 'video_id' and 'captions'");
        if (!row["video_id"].is_string()) throw bad("'video_id' must be a string");
        if (!row["captions"].is_array() || row["captions"].empty())
            throw bad("'captions' must be a nonempty array");
        VideoEntry v;
        v.video_id = row["video_id"].get<std::string>();
        for (const auto& c : row["captions"]) {
            if (!c.is_string()) throw bad("'captions' entries must be strings");
            Caption cap;
            cap.video_id = v.video_id;
            cap.text = c.get<std::string>();
            cap.tokens = tokenize(cap.text);
            if (cap.tokens.empty()) throw bad("caption tokenizes to nothing: '" + cap.text + "'");
            v.captions.push_back(std::move(cap));
        }
        entries.push_back(std::move(v));
    }
    try {
        return build_corpus_from_entries(std::move(entries), n_max);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

} // namespace gmc
