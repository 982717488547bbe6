#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmc/ablate.hpp"
#include "gmc/bias.hpp"
#include "gmc/config.hpp"
#include "gmc/corpus.hpp"
#include "gmc/encoders.hpp"
#include "gmc/gradcheck.hpp"
#include "gmc/manifest.hpp"
#include "gmc/metrics.hpp"
#include "gmc/trainer.hpp"
#include "gmc/version.hpp"

namespace {

using nlohmann::json;

constexpr double kGradThreshold = 1e-4;

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("GMC_SEED");
    if (!raw) return std::nullopt;
    std::string s(raw);
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("GMC_SEED must be a non-negative integer");
    }
    if (used != s.size() || s.empty() || s[0] == '-')
        throw std::invalid_argument("GMC_SEED must be a non-negative integer");
    return v;
}

std::uint64_t resolve_seed(std::uint64_t fallback) {
    if (auto e = env_seed()) return *e;
    return fallback;
}

json report_json(const gmc::LossReport& r) {
    return json{{"l_b", r.l_b},     {"l_bfcl", r.l_bfcl}, {"l_mcl", r.l_mcl},
                {"l_gen", r.l_gen}, {"l_gmc", r.l_gmc},   {"recall_at_1", r.recall_at_1}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return j;
}

int run_ingest(const std::string& dataset) {
    gmc::Corpus corpus = gmc::build_corpus(dataset);
    json types = json::object();
    for (int n = 1; n <= corpus.df.n_max; ++n)
        types[std::to_string(n)] = corpus.df.df[static_cast<std::size_t>(n - 1)].size();
    json summary{{"videos", corpus.videos.size()},
                 {"captions", corpus.total_captions()},
                 {"ngram_types", types}};
    std::cout << summary.dump() << '\n';

    gmc::RunManifest m;
    m.subcommand = "ingest";
    m.seed = resolve_seed(0);
    m.config = json::object();
    m.add_input(dataset);
    m.emit(std::cerr);
    return 0;
}

int run_score_bias(const std::string& dataset, const std::string& out) {
    gmc::Corpus corpus = gmc::build_corpus(dataset);
    std::vector<std::string> warnings;
    auto grid = gmc::score_corpus(corpus, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    std::ofstream os(out);
    if (!os) throw std::invalid_argument("cannot write '" + out + "'");
    std::size_t rows = 0;
    for (std::size_t v = 0; v < corpus.videos.size(); ++v) {
        for (std::size_t c = 0; c < grid[v].size(); ++c) {
            const auto& s = grid[v][c];
            os << json{{"video_id", corpus.videos[v].video_id},
                       {"caption_index", c},
                       {"sentence_score", s.sentence_score},
                       {"video_score", s.video_score},
                       {"sentence_bucket", s.sentence_bucket},
                       {"video_bucket", s.video_bucket}}
                      .dump()
               << '\n';
            ++rows;
        }
    }
    std::cout << json{{"captions_scored", rows}, {"out", out}}.dump() << '\n';

    gmc::RunManifest m;
    m.subcommand = "score-bias";
    m.seed = resolve_seed(0);
    m.config = json{{"out", out}};
    m.add_input(dataset);
    m.emit(std::cerr);
    return 0;
}

int run_hist(const std::string& dataset, const std::string& level, const std::string& rank_order,
             const std::string& out) {
    gmc::Corpus corpus = gmc::build_corpus(dataset);
    auto grid = gmc::score_corpus(corpus);

    // bucket value -> population; bucket values are scaled scores, so rank
    // order "desc" walks from the most redundant (highest consensus) down.
    std::map<int, long> freq;
    if (level == "sentence") {
        for (const auto& vid : grid)
            for (const auto& s : vid) ++freq[s.sentence_bucket];
    } else {
        for (const auto& vid : grid) ++freq[vid.front().video_bucket];
    }

    std::vector<std::pair<int, long>> ordered(freq.begin(), freq.end());
    if (rank_order == "desc") std::reverse(ordered.begin(), ordered.end());

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw std::invalid_argument("cannot write '" + out + "'");
        os = &file;
    }
    *os << "rank,frequency\n";
    for (std::size_t i = 0; i < ordered.size(); ++i)
        *os << (i + 1) << ',' << ordered[i].second << '\n';

    gmc::RunManifest m;
    m.subcommand = "hist";
    m.seed = resolve_seed(0);
    m.config = json{{"level", level}, {"rank_order", rank_order}};
    if (!out.empty()) m.config["out"] = out;
    m.add_input(dataset);
    m.emit(std::cerr);
    return 0;
}

int run_train(const std::string& config_path, const std::string& dataset,
              const std::string& features, const std::string& out) {
    gmc::TrainConfig cfg = gmc::TrainConfig::from_json(load_json_file(config_path));
    cfg.seed = resolve_seed(cfg.seed);
    cfg.validate();

    if (cfg.feature_mode == "imported" && features.empty())
        throw std::invalid_argument("config feature_mode is 'imported' but no --features given");
    if (cfg.feature_mode == "synthetic" && !features.empty())
        throw std::invalid_argument("--features given but config feature_mode is 'synthetic'");

    gmc::Corpus corpus = gmc::build_corpus(dataset);
    gmc::ImportedFeatures feats;
    const gmc::ImportedFeatures* feats_ptr = nullptr;
    if (!features.empty()) {
        feats = gmc::load_features(features, cfg.feature_dim);
        feats_ptr = &feats;
    }

    std::filesystem::create_directories(out);
    std::ofstream log(out + "/logs.jsonl");
    if (!log) throw std::invalid_argument("cannot write '" + out + "/logs.jsonl'");

    gmc::Trainer trainer(cfg, corpus, feats_ptr);
    gmc::RunResult res = trainer.run(&log);
    res.final_checkpoint.save(out + "/checkpoint.json");

    std::cout << json{{"steps", res.steps_run},
                      {"initial", report_json(res.initial_eval)},
                      {"final", report_json(res.final_eval)},
                      {"out", out}}
                     .dump()
              << '\n';

    gmc::RunManifest m;
    m.subcommand = "train";
    m.seed = cfg.seed;
    m.config = cfg.to_json();
    m.add_input(config_path);
    m.add_input(dataset);
    if (!features.empty()) m.add_input(features);
    m.emit(std::cerr);
    m.write_file(out);
    return 0;
}

int run_eval_metrics(const std::string& dataset, const std::string& candidates) {
    gmc::Corpus corpus = gmc::build_corpus(dataset);

    std::ifstream in(candidates);
    if (!in) throw std::invalid_argument("cannot read '" + candidates + "'");
    std::map<int, std::vector<gmc::MetricReport>> by_video;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::invalid_argument(candidates + ":" + std::to_string(line_no) + ": " +
                                        e.what());
        }
        if (!j.is_object() || !j.contains("video_id") || !j["video_id"].is_string() ||
            !j.contains("caption") || !j["caption"].is_string())
            throw std::invalid_argument(candidates + ":" + std::to_string(line_no) +
                                        ": expected {\"video_id\": str, \"caption\": str}");
        const std::string vid = j["video_id"].get<std::string>();
        int v = corpus.index_of(vid);
        if (v < 0)
            throw std::invalid_argument(candidates + ":" + std::to_string(line_no) +
                                        ": unknown video_id '" + vid + "'");
        std::vector<std::vector<std::string>> refs;
        for (const auto& cap : corpus.videos[static_cast<std::size_t>(v)].captions)
            refs.push_back(cap.tokens);
        auto cand = gmc::tokenize(j["caption"].get<std::string>());
        by_video[v].push_back(gmc::evaluate_caption(cand, refs, corpus.df));
    }
    if (by_video.empty())
        throw std::invalid_argument(candidates + ": no candidate rows");

    auto mean_of = [](const std::vector<gmc::MetricReport>& rs) {
        gmc::MetricReport m;
        for (int n = 1; n <= 4; ++n) m.bleu[n] = 0.0;
        for (const auto& r : rs) {
            for (const auto& [n, v] : r.bleu) m.bleu[n] += v;
            m.rouge_l += r.rouge_l;
            m.cider += r.cider;
        }
        const double k = static_cast<double>(rs.size());
        for (auto& [n, v] : m.bleu) v /= k;
        m.rouge_l /= k;
        m.cider /= k;
        return m;
    };

    auto row_json = [](const gmc::MetricReport& r) {
        json j;
        for (const auto& [n, v] : r.bleu) j["bleu_" + std::to_string(n)] = v;
        j["rouge_l"] = r.rouge_l;
        j["cider"] = r.cider;
        return j;
    };

    std::vector<gmc::MetricReport> video_means;
    for (const auto& [v, reports] : by_video) {
        gmc::MetricReport m = mean_of(reports);
        video_means.push_back(m);
        json row = row_json(m);
        row["video_id"] = corpus.videos[static_cast<std::size_t>(v)].video_id;
        row["candidates"] = reports.size();
        std::cout << row.dump() << '\n';
    }
    std::cout << json{{"corpus_mean", row_json(mean_of(video_means))}}.dump() << '\n';

    gmc::RunManifest m;
    m.subcommand = "eval-metrics";
    m.seed = resolve_seed(0);
    m.config = json::object();
    m.add_input(dataset);
    m.add_input(candidates);
    m.emit(std::cerr);
    return 0;
}

int run_gradcheck(const std::string& loss, std::uint64_t seed, int points, double h) {
    seed = resolve_seed(seed);
    std::vector<std::pair<std::string, double>> rows;
    double worst = 0.0;
    if (loss.empty()) {
        worst = gmc::gradcheck_all(seed, points, &rows, h);
    } else {
        worst = gmc::gradcheck_loss(loss, seed, points, h);
        rows.emplace_back(loss, worst);
    }
    json results = json::array();
    for (const auto& [name, err] : rows)
        results.push_back(json{{"loss", name}, {"max_rel_error", err}});
    const bool pass = worst < kGradThreshold;
    std::cout << json{{"seed", seed},
                      {"points", points},
                      {"h", h},
                      {"threshold", kGradThreshold},
                      {"results", results},
                      {"max_rel_error", worst},
                      {"pass", pass}}
                     .dump()
              << '\n';

    gmc::RunManifest m;
    m.subcommand = "gradcheck";
    m.seed = seed;
    m.config = json{{"loss", loss.empty() ? "all" : loss}, {"points", points}, {"h", h}};
    m.emit(std::cerr);
    return pass ? 0 : 2;
}

int run_ablate(const std::string& dataset, const std::string& config_path) {
    gmc::TrainConfig cfg =
        config_path.empty() ? gmc::TrainConfig::toy()
                            : gmc::TrainConfig::from_json(load_json_file(config_path));
    cfg.seed = resolve_seed(cfg.seed);
    cfg.validate();

    gmc::Corpus corpus = gmc::build_corpus(dataset);
    for (const auto& row : gmc::run_ablation(cfg, corpus))
        std::cout << row.to_json().dump() << '\n';

    gmc::RunManifest m;
    m.subcommand = "ablate";
    m.seed = cfg.seed;
    m.config = cfg.to_json();
    if (!config_path.empty()) m.add_input(config_path);
    m.add_input(dataset);
    m.emit(std::cerr);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"granularity bias measurement and correction toolkit"};
    app.set_version_flag("--version", std::string(gmc::kVersion));
    app.require_subcommand(1);

    std::string dataset, out, level = "sentence", rank_order = "desc", config_path, features;
    std::string candidates, loss;
    std::uint64_t seed = 7;
    int points = 20;
    double h = 1e-6;

    CLI::App* ingest = app.add_subcommand("ingest", "validate a caption dataset and summarize");
    ingest->add_option("--dataset", dataset, "caption JSONL file")->required();

    CLI::App* score = app.add_subcommand(
        "score-bias", "information-content scores and buckets for every caption");
    score->add_option("--dataset", dataset, "caption JSONL file")->required();
    score->add_option("--out", out, "output JSONL path")->required();

    CLI::App* hist =
        app.add_subcommand("hist", "bucket-frequency CSV (rank,frequency) for plotting");
    hist->add_option("--dataset", dataset, "caption JSONL file")->required();
    hist->add_option("--level", level, "sentence | video")
        ->check(CLI::IsMember({"sentence", "video"}));
    hist->add_option("--rank-order", rank_order, "desc (default) ranks highest bucket first")
        ->check(CLI::IsMember({"asc", "desc"}));
    hist->add_option("--out", out, "write CSV here instead of stdout");

    CLI::App* train = app.add_subcommand("train", "two-phase training run");
    train->add_option("--config", config_path, "config JSON file")->required();
    train->add_option("--dataset", dataset, "caption JSONL file")->required();
    train->add_option("--features", features, "imported feature JSONL file");
    train->add_option("--out", out, "output directory")->required();

    CLI::App* evalm = app.add_subcommand("eval-metrics", "score candidate captions");
    evalm->add_option("--dataset", dataset, "reference caption JSONL file")->required();
    evalm->add_option("--candidates", candidates, "candidate JSONL ({video_id, caption})")
        ->required();

    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "finite-difference check of the loss gradients");
    gradcheck->add_option("--loss", loss, "b | bfcl | mcl | gen | gmc (default: all)")
        ->check(CLI::IsMember({"b", "bfcl", "mcl", "gen", "gmc"}));
    gradcheck->add_option("--seed", seed, "base seed (default 7)");
    gradcheck->add_option("--points", points, "evaluation points per loss (default 20)")
        ->check(CLI::PositiveNumber);
    gradcheck->add_option("--step", h, "finite-difference step (default 1e-6)")
        ->check(CLI::PositiveNumber);

    CLI::App* ablate = app.add_subcommand("ablate", "train the standard component toggles");
    ablate->add_option("--dataset", dataset, "caption JSONL file")->required();
    ablate->add_option("--config", config_path, "config JSON file (default: toy preset)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // usage problems are validation failures
    }

    try {
        if (*ingest) return run_ingest(dataset);
        if (*score) return run_score_bias(dataset, out);
        if (*hist) return run_hist(dataset, level, rank_order, out);
        if (*train) return run_train(config_path, dataset, features, out);
        if (*evalm) return run_eval_metrics(dataset, candidates);
        if (*gradcheck) return run_gradcheck(loss, seed, points, h);
        if (*ablate) return run_ablate(dataset, config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
