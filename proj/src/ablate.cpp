#include "gmc/ablate.hpp"

#include "gmc/trainer.hpp"

namespace gmc {

nlohmann::json AblationRow::to_json() const {
    return nlohmann::json{{"name", name},
                          {"use_bfcl", use_bfcl},
                          {"use_mcl", use_mcl},
                          {"use_b", use_b},
                          {"use_gen", use_gen},
                          {"l_b", final_eval.l_b},
                          {"l_bfcl", final_eval.l_bfcl},
                          {"l_mcl", final_eval.l_mcl},
                          {"l_gen", final_eval.l_gen},
                          {"l_gmc", final_eval.l_gmc},
                          {"recall_at_1", final_eval.recall_at_1}};
}

std::vector<AblationRow> run_ablation(const TrainConfig& base, const Corpus& corpus,
                                      const ImportedFeatures* feats) {
    struct Toggle {
        const char* name;
        bool bfcl, mcl, b, gen;
    };
    // Mirrors the usual contribution table: start from the generation
    // objective alone, drop one component group from the full stack, then
    // the full stack itself.
    const Toggle rows[] = {
        {"baseline", false, false, false, true},
        {"-bfcl", false, true, true, true},
        {"-mcl-b", true, false, false, true},
        {"full", true, true, true, true},
    };

    std::vector<AblationRow> out;
    for (const auto& row : rows) {
        TrainConfig cfg = base;
        cfg.use_bfcl = row.bfcl;
        cfg.use_mcl = row.mcl;
        cfg.use_b = row.b;
        cfg.use_gen = row.gen;

        Trainer trainer(cfg, corpus, feats);
        RunResult result = trainer.run(nullptr);

        AblationRow r;
        r.name = row.name;
        r.use_bfcl = row.bfcl;
        r.use_mcl = row.mcl;
        r.use_b = row.b;
        r.use_gen = row.gen;
        r.final_eval = result.final_eval;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace gmc
