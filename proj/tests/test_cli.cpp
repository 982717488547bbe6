#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmc/synthetic.hpp"

using nlohmann::json;

namespace {

const std::string kTmp = "build/tmp_cli";

struct Cmd {
    int code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(static_cast<bool>(in), "missing file: " << path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Cmd sh(const std::string& line) {
    static int counter = 0;
    std::filesystem::create_directories(kTmp);
    const std::string o = kTmp + "/cmd_out_" + std::to_string(counter);
    const std::string e = kTmp + "/cmd_err_" + std::to_string(counter);
    ++counter;
    Cmd r;
    int st = std::system((line + " >" + o + " 2>" + e).c_str());
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = read_file(o);
    r.err = read_file(e);
    return r;
}

std::string cli() {
    const char* p = std::getenv("GMC_CLI");
    REQUIRE_MESSAGE(p != nullptr, "GMC_CLI must point at the command-line binary");
    return p;
}

const std::string& toy_path() {
    static std::string path = [] {
        std::filesystem::create_directories(kTmp);
        std::string p = kTmp + "/toy.jsonl";
        gmc::write_toy_corpus(p, 7);
        return p;
    }();
    return path;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

json last_json_line(const std::string& text) {
    auto ls = lines_of(text);
    REQUIRE(!ls.empty());
    return json::parse(ls.back());
}

json write_train_config(const std::string& path, int total_steps) {
    json cfg{{"preset", "toy"},   {"feature_dim", 8}, {"fusion_hidden", 4},
             {"codebook_dim", 6}, {"batch_size", 8},  {"warmup_steps", total_steps / 2},
             {"total_steps", total_steps}, {"max_positions", 5}, {"log_every", 1},
             {"seed", 5}};
    std::ofstream out(path);
    out << cfg.dump() << '\n';
    return cfg;
}

} // namespace

TEST_CASE("help and argument validation exit codes") {
    CHECK(sh(cli() + std::string(" --help")).code == 0);
    CHECK(sh(cli() + std::string(" --version")).out.find("0.1.0") != std::string::npos);
    CHECK(sh(cli() + std::string(" --bogus")).code == 1);
    CHECK(sh(cli() + std::string("")).code == 1); // a subcommand is required
    CHECK(sh(cli() + std::string(" score-bias --dataset ") + toy_path()).code == 1); // no --out
}

TEST_CASE("ingest summarizes the corpus and emits a manifest") {
    Cmd r = sh(cli() + std::string(" ingest --dataset ") + toy_path());
    REQUIRE(r.code == 0);
    json s = json::parse(lines_of(r.out)[0]);
    CHECK(s["videos"] == 24);
    CHECK(s["captions"] == 72);
    for (const auto& n : {"1", "2", "3", "4"}) CHECK(s["ngram_types"][n].get<int>() > 0);

    json m = last_json_line(r.err);
    CHECK(m["subcommand"] == "ingest");
    CHECK(m["version"] == "0.1.0");
    CHECK(m["seed"] == 0);
    REQUIRE(m["inputs"].contains(toy_path()));
    CHECK(m["inputs"][toy_path()].get<std::string>().rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("seed environment override") {
    Cmd r = sh("GMC_SEED=99 " + cli() + std::string(" ingest --dataset ") + toy_path());
    REQUIRE(r.code == 0);
    CHECK(last_json_line(r.err)["seed"] == 99);

    Cmd bad = sh("GMC_SEED=banana " + cli() + std::string(" ingest --dataset ") + toy_path());
    CHECK(bad.code == 1);
    CHECK(bad.err.find("error:") != std::string::npos);
}

TEST_CASE("missing dataset file is a validation failure") {
    Cmd r = sh(cli() + std::string(" ingest --dataset build/tmp_cli/nope.jsonl"));
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("score-bias writes one scored row per caption") {
    const std::string out = kTmp + "/bias.jsonl";
    Cmd r = sh(cli() + std::string(" score-bias --dataset ") + toy_path() + " --out " + out);
    REQUIRE(r.code == 0);
    CHECK(json::parse(lines_of(r.out)[0])["captions_scored"] == 72);

    auto rows = lines_of(read_file(out));
    REQUIRE(rows.size() == 72);
    const std::set<std::string> want = {"video_id",    "caption_index",   "sentence_score",
                                        "video_score", "sentence_bucket", "video_bucket"};
    for (const auto& rl : rows) {
        json j = json::parse(rl);
        std::set<std::string> keys;
        for (const auto& [k, v] : j.items()) keys.insert(k);
        CHECK(keys == want);
        CHECK(j["sentence_bucket"].get<int>() ==
              static_cast<int>(std::lround(j["sentence_score"].get<double>() * 100)));
    }
    CHECK(json::parse(rows[0])["video_id"] == "toy00");
}

TEST_CASE("hist prints a rank,frequency table") {
    Cmd desc = sh(cli() + std::string(" hist --dataset ") + toy_path());
    REQUIRE(desc.code == 0);
    auto rows = lines_of(desc.out);
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == "rank,frequency");

    long total = 0;
    std::vector<long> freq_desc;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::istringstream ss(rows[i]);
        long rank, f;
        char comma;
        REQUIRE((ss >> rank >> comma >> f));
        CHECK(rank == static_cast<long>(i));
        freq_desc.push_back(f);
        total += f;
    }
    CHECK(total == 72);

    Cmd asc = sh(cli() + std::string(" hist --rank-order asc --dataset ") + toy_path());
    auto arows = lines_of(asc.out);
    std::vector<long> freq_asc;
    for (std::size_t i = 1; i < arows.size(); ++i)
        freq_asc.push_back(std::stol(arows[i].substr(arows[i].find(',') + 1)));
    std::vector<long> rev(freq_asc.rbegin(), freq_asc.rend());
    CHECK(rev == freq_desc);

    Cmd vid = sh(cli() + std::string(" hist --level video --dataset ") + toy_path());
    long vtotal = 0;
    for (const auto& row : lines_of(vid.out))
        if (row != "rank,frequency") vtotal += std::stol(row.substr(row.find(',') + 1));
    CHECK(vtotal == 24);

    const std::string out = kTmp + "/hist.csv";
    Cmd filed = sh(cli() + std::string(" hist --dataset ") + toy_path() + " --out " + out);
    REQUIRE(filed.code == 0);
    CHECK(lines_of(read_file(out))[0] == "rank,frequency");
}

TEST_CASE("gradcheck subcommand reports errors under the threshold") {
    Cmd r = sh(cli() + std::string(" gradcheck --loss b --points 2 --seed 3"));
    REQUIRE(r.code == 0);
    json j = json::parse(lines_of(r.out)[0]);
    CHECK(j["pass"] == true);
    CHECK(j["threshold"] == 1e-4);
    REQUIRE(j["results"].size() == 1);
    CHECK(j["results"][0]["loss"] == "b");
    CHECK(j["results"][0]["max_rel_error"].get<double>() < 1e-4);
    CHECK(j["max_rel_error"].get<double>() < 1e-4);
}

TEST_CASE("train writes logs, checkpoint, and manifest; equal manifests mean equal bytes") {
    const std::string cfg_path = kTmp + "/config.json";
    write_train_config(cfg_path, 4);

    auto train_into = [&](const std::string& dir, const std::string& env = "") {
        return sh(env + cli() + std::string(" train --config ") + cfg_path + " --dataset " +
                  toy_path() + " --out " + dir);
    };

    Cmd r1 = train_into(kTmp + "/run1");
    REQUIRE_MESSAGE(r1.code == 0, r1.err);
    json s = json::parse(lines_of(r1.out)[0]);
    CHECK(s["steps"] == 4);
    CHECK(s["initial"].contains("l_gmc"));
    CHECK(s["final"].contains("l_gmc"));

    auto log_rows = lines_of(read_file(kTmp + "/run1/logs.jsonl"));
    REQUIRE(log_rows.size() == 4); // log_every=1
    for (int i = 0; i < 4; ++i) {
        json row = json::parse(log_rows[static_cast<std::size_t>(i)]);
        CHECK(row["step"] == i);
        for (const auto& k : {"l_b", "l_bfcl", "l_mcl", "l_gen", "l_gmc", "recall_at_1"})
            CHECK(row.contains(k));
    }
    json ck = json::parse(read_file(kTmp + "/run1/checkpoint.json"));
    CHECK(ck["step"] == 4);
    CHECK(ck["seed"] == 5);

    json m = json::parse(read_file(kTmp + "/run1/manifest.json"));
    CHECK(m["subcommand"] == "train");
    CHECK(m["config"]["total_steps"] == 4);
    CHECK(m["inputs"].size() == 2); // config and dataset, never the output dir

    // identical manifests must produce byte-identical primary outputs
    Cmd r2 = train_into(kTmp + "/run2");
    REQUIRE(r2.code == 0);
    CHECK(read_file(kTmp + "/run1/manifest.json") == read_file(kTmp + "/run2/manifest.json"));
    CHECK(read_file(kTmp + "/run1/logs.jsonl") == read_file(kTmp + "/run2/logs.jsonl"));
    CHECK(read_file(kTmp + "/run1/checkpoint.json") == read_file(kTmp + "/run2/checkpoint.json"));

    // the seed override flows into config, manifest, and therefore the run
    Cmd r3 = train_into(kTmp + "/run3", "GMC_SEED=123 ");
    REQUIRE(r3.code == 0);
    json m3 = json::parse(read_file(kTmp + "/run3/manifest.json"));
    CHECK(m3["seed"] == 123);
    CHECK(m3["config"]["seed"] == 123);
    CHECK(read_file(kTmp + "/run3/logs.jsonl") != read_file(kTmp + "/run1/logs.jsonl"));

    // feature-mode cross checks
    Cmd bad = sh(cli() + std::string(" train --config ") + cfg_path + " --dataset " + toy_path() +
                 " --features " + toy_path() + " --out " + kTmp + "/run4");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("feature_mode") != std::string::npos);
}

TEST_CASE("eval-metrics scores candidates per video plus a corpus mean") {
    auto entries = gmc::make_toy_entries(7);
    const std::string cands = kTmp + "/cands.jsonl";
    std::filesystem::create_directories(kTmp);
    {
        std::ofstream out(cands);
        out << json{{"video_id", "toy00"}, {"caption", entries[0].captions[0].text}}.dump()
            << '\n';
        out << json{{"video_id", "toy01"}, {"caption", "a completely unrelated sentence"}}.dump()
            << '\n';
    }
    Cmd r = sh(cli() + std::string(" eval-metrics --dataset ") + toy_path() + " --candidates " +
               cands);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 3); // two videos + the corpus mean

    json row0 = json::parse(rows[0]);
    CHECK(row0["video_id"] == "toy00");
    CHECK(row0["candidates"] == 1);
    CHECK(row0["bleu_1"] == 1.0); // the candidate is one of the references
    CHECK(row0["rouge_l"] == 1.0);
    CHECK(row0["cider"].get<double>() > 0.0);

    json mean = json::parse(rows[2]);
    REQUIRE(mean.contains("corpus_mean"));
    for (const auto& k : {"bleu_1", "bleu_2", "bleu_3", "bleu_4", "rouge_l", "cider"})
        CHECK(mean["corpus_mean"].contains(k));

    // unknown video ids and empty candidate files are validation failures
    {
        std::ofstream out(cands);
        out << json{{"video_id", "nope"}, {"caption", "x"}}.dump() << '\n';
    }
    Cmd unk = sh(cli() + std::string(" eval-metrics --dataset ") + toy_path() + " --candidates " +
                 cands);
    CHECK(unk.code == 1);
    CHECK(unk.err.find("unknown video_id") != std::string::npos);

    {
        std::ofstream out(cands);
    }
    Cmd empty = sh(cli() + std::string(" eval-metrics --dataset ") + toy_path() +
                   " --candidates " + cands);
    CHECK(empty.code == 1);
}

TEST_CASE("ablate emits the four standard toggle rows") {
    const std::string cfg_path = kTmp + "/ablate_config.json";
    write_train_config(cfg_path, 4);
    Cmd r = sh(cli() + std::string(" ablate --dataset ") + toy_path() + " --config " + cfg_path);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 4);

    std::vector<std::string> names;
    for (const auto& rl : rows) {
        json j = json::parse(rl);
        names.push_back(j["name"].get<std::string>());
        for (const auto& k : {"use_bfcl", "use_mcl", "use_b", "use_gen", "l_b", "l_bfcl", "l_mcl",
                              "l_gen", "l_gmc", "recall_at_1"})
            CHECK_MESSAGE(j.contains(k), "missing " << k << " in " << rl);
    }
    CHECK(names == std::vector<std::string>{"baseline", "-bfcl", "-mcl-b", "full"});

    json baseline = json::parse(rows[0]);
    CHECK(baseline["use_bfcl"] == false);
    CHECK(baseline["use_mcl"] == false);
    CHECK(baseline["use_b"] == false);
    CHECK(baseline["use_gen"] == true);
    json full = json::parse(rows[3]);
    CHECK(full["use_bfcl"] == true);
    CHECK(full["use_mcl"] == true);
    CHECK(full["use_b"] == true);
    CHECK(full["use_gen"] == true);
}
