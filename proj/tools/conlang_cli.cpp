#include <CLI11.hpp>

#include <iostream>

#include "conlang/pipeline.hpp"

using namespace conlang;
using namespace conlang::pipeline;

namespace {

int report(const std::vector<StageResult>& results) {
    int code = kExitOk;
    for (const auto& r : results) {
        std::cout << r.stage << ": " << (r.skipped ? "skipped, " : "") << r.summary << "\n";
        for (const auto& f : r.failures) std::cerr << r.stage << ": " << f << "\n";
        code = std::max(code, r.exit_code);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conlang: build and evaluate constructed languages"};
    app.require_subcommand(1);

    std::string config_path;
    auto with_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "project config (JSON)")->required()->check(CLI::ExistingFile);
        return sub;
    };

    auto* phon = with_config(app.add_subcommand("phonology", "load or draft the grammar and sample morphemes"));
    auto* morph = with_config(app.add_subcommand("morphosyntax", "gloss the source sentences"));
    auto* lex = with_config(app.add_subcommand("lexicon", "assign forms, transcribe and spell the corpus"));
    auto* ortho = with_config(app.add_subcommand("orthography", "validate the spelling map against the lexicon"));
    auto* hb = with_config(app.add_subcommand("handbook", "assemble the handbook prompt"));
    auto* build = with_config(app.add_subcommand("build", "run phonology, morphosyntax, lexicon and handbook"));

    std::string text;
    auto* tr = with_config(app.add_subcommand("translate", "translate a new sentence and grow the lexicon"));
    tr->add_option("-t,--text", text, "English sentence")->required();

    auto* exp = with_config(app.add_subcommand("experiment", "annotation-aided translation experiment"));

    std::string hyp, ref;
    double alpha = 0.5;
    bool as_json = false;
    auto* score = app.add_subcommand("score", "score hypothesis glosses against references");
    score->add_option("--hyp", hyp, "hypothesis glosses")->required()->check(CLI::ExistingFile);
    score->add_option("--ref", ref, "reference glosses")->required()->check(CLI::ExistingFile);
    score->add_option("--alpha", alpha, "MSER weight of SER")->check(CLI::Range(0.0, 1.0));
    score->add_flag("--json", as_json, "print JSON instead of a table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitFatal;
    }

    try {
        if (score->parsed()) {
            auto r = score_files(hyp, ref, alpha);
            if (as_json)
                std::cout << metrics::report_to_json(r).dump(2) << "\n";
            else
                std::cout << metrics::format_report_table({{"hypothesis", r}});
            return kExitOk;
        }

        auto cfg = ProjectConfig::load(config_path);
        cfg.check_paths();
        Pipeline p(cfg, client_from_env(cfg));
        if (phon->parsed()) return report({p.phonology()});
        if (morph->parsed()) return report({p.morphosyntax()});
        if (lex->parsed()) return report({p.lexicon()});
        if (ortho->parsed()) return report({p.orthography()});
        if (hb->parsed()) return report({p.handbook()});
        if (build->parsed()) return report(p.build());
        if (tr->parsed()) return report({p.translate(text)});
        if (exp->parsed()) return report({p.experiment()});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    }
    return kExitFatal;
}
