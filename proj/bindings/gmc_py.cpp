#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmc/bias.hpp"
#include "gmc/config.hpp"
#include "gmc/corpus.hpp"
#include "gmc/gradcheck.hpp"
#include "gmc/metrics.hpp"
#include "gmc/synthetic.hpp"
#include "gmc/trainer.hpp"
#include "gmc/version.hpp"

namespace py = pybind11;

namespace {

const gmc::VideoEntry& video_at(const gmc::Corpus& c, int video_index) {
    if (video_index < 0 || static_cast<std::size_t>(video_index) >= c.videos.size())
        throw std::out_of_range("video_index out of range");
    return c.videos[static_cast<std::size_t>(video_index)];
}

py::dict report_dict(const gmc::MetricReport& r) {
    py::dict d;
    for (const auto& [n, v] : r.bleu) d[("bleu_" + std::to_string(n)).c_str()] = v;
    d["rouge_l"] = r.rouge_l;
    d["cider"] = r.cider;
    return d;
}

py::dict loss_dict(const gmc::LossReport& r) {
    py::dict d;
    d["l_b"] = r.l_b;
    d["l_bfcl"] = r.l_bfcl;
    d["l_mcl"] = r.l_mcl;
    d["l_gen"] = r.l_gen;
    d["l_gmc"] = r.l_gmc;
    d["recall_at_1"] = r.recall_at_1;
    return d;
}

} // namespace

PYBIND11_MODULE(_gmc, m) {
    m.doc() = "caption granularity-bias toolkit: corpus statistics, consensus "
              "metrics, and the contrastive training stack";
    m.attr("__version__") = gmc::kVersion;

    m.def("tokenize", &gmc::tokenize, py::arg("text"),
          "lowercased tokens with edge punctuation stripped");
    m.def(
        "ngrams",
        [](const std::vector<std::string>& tokens, int n) { return gmc::ngrams(tokens, n); },
        py::arg("tokens"), py::arg("n"), "space-joined n-gram counts");

    py::class_<gmc::Corpus>(m, "Corpus")
        .def_property_readonly(
            "num_videos", [](const gmc::Corpus& c) { return c.videos.size(); })
        .def_property_readonly(
            "total_captions", [](const gmc::Corpus& c) { return c.total_captions(); })
        .def_property_readonly("video_ids",
                               [](const gmc::Corpus& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& v : c.videos) ids.push_back(v.video_id);
                                   return ids;
                               })
        .def(
            "captions",
            [](const gmc::Corpus& c, int video_index) {
                std::vector<std::string> out;
                for (const auto& cap : video_at(c, video_index).captions)
                    out.push_back(cap.text);
                return out;
            },
            py::arg("video_index"));

    m.def(
        "load_corpus", [](const std::string& path) { return gmc::build_corpus(path); },
        py::arg("path"), "parse and validate a caption JSONL file");

    m.def(
        "evaluate_caption",
        [](const gmc::Corpus& c, const std::string& video_id, const std::string& caption) {
            int v = c.index_of(video_id);
            if (v < 0) throw std::invalid_argument("unknown video_id '" + video_id + "'");
            std::vector<std::vector<std::string>> refs;
            for (const auto& cap : video_at(c, v).captions) refs.push_back(cap.tokens);
            return report_dict(gmc::evaluate_caption(gmc::tokenize(caption), refs, c.df));
        },
        py::arg("corpus"), py::arg("video_id"), py::arg("caption"),
        "consensus metrics of a candidate against one video's references");

    m.def(
        "info_score_sentence",
        [](const gmc::Corpus& c, int video_index, int caption_index) {
            return gmc::info_score_sentence(c, video_index, caption_index);
        },
        py::arg("corpus"), py::arg("video_index"), py::arg("caption_index"));
    m.def(
        "info_score_video",
        [](const gmc::Corpus& c, int video_index) { return gmc::info_score_video(c, video_index); },
        py::arg("corpus"), py::arg("video_index"));

    m.def(
        "score_bias",
        [](const gmc::Corpus& c) {
            auto grid = gmc::score_corpus(c);
            py::list rows;
            for (std::size_t v = 0; v < grid.size(); ++v) {
                for (std::size_t i = 0; i < grid[v].size(); ++i) {
                    py::dict row;
                    row["video_id"] = c.videos[v].video_id;
                    row["caption_index"] = i;
                    row["sentence_score"] = grid[v][i].sentence_score;
                    row["video_score"] = grid[v][i].video_score;
                    row["sentence_bucket"] = grid[v][i].sentence_bucket;
                    row["video_bucket"] = grid[v][i].video_bucket;
                    rows.append(row);
                }
            }
            return rows;
        },
        py::arg("corpus"), "information-content rows for every caption");

    m.def("gradcheck", &gmc::gradcheck_loss, py::arg("loss"), py::arg("seed") = 7,
          py::arg("points") = 5, py::arg("h") = 1e-6,
          "max relative error between analytic and finite-difference gradients");

    m.def(
        "train_toy",
        [](const std::string& dataset, const std::string& overrides_json) {
            nlohmann::json j = nlohmann::json::parse(overrides_json);
            nlohmann::json merged{{"preset", "toy"}};
            for (auto it = j.begin(); it != j.end(); ++it) merged[it.key()] = it.value();
            gmc::TrainConfig cfg = gmc::TrainConfig::from_json(merged);
            gmc::Corpus corpus = gmc::build_corpus(dataset);
            gmc::Trainer trainer(cfg, corpus);
            gmc::RunResult res = trainer.run(nullptr);
            py::dict out;
            out["steps"] = res.steps_run;
            out["initial"] = loss_dict(res.initial_eval);
            out["final"] = loss_dict(res.final_eval);
            return out;
        },
        py::arg("dataset"), py::arg("overrides_json") = std::string("{}"),
        "run the toy-preset training schedule; overrides_json patches config keys");

    m.def("write_toy_corpus", &gmc::write_toy_corpus, py::arg("path"), py::arg("seed") = 7);
    m.def("write_zipf_corpus", &gmc::write_zipf_corpus, py::arg("path"), py::arg("seed") = 11);
}
