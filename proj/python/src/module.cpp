#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "conlang/gloss.hpp"
#include "conlang/metrics.hpp"
#include "conlang/orthography.hpp"
#include "conlang/phonotactics.hpp"
#include "conlang/pipeline.hpp"
#include "conlang/soundchange.hpp"

namespace py = pybind11;
using namespace conlang;

namespace {

std::vector<gloss::GlossSentence> parse_all(const std::vector<std::string>& texts) {
    std::vector<gloss::GlossSentence> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(gloss::parse_gloss(t));
    return out;
}

py::dict stage_dict(const pipeline::StageResult& r) {
    py::dict d;
    d["stage"] = r.stage;
    d["exit_code"] = r.exit_code;
    d["skipped"] = r.skipped;
    d["failures"] = r.failures;
    d["summary"] = r.summary;
    std::vector<std::string> outputs;
    for (const auto& p : r.outputs) outputs.push_back(p.string());
    d["outputs"] = outputs;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "ConLang toolkit core";

    static py::exception<Error> base(m, "ConlangError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            base(e.what());
        }
    });

    m.def("normalize_gloss", [](const std::string& text) { return gloss::serialize_gloss(gloss::parse_gloss(text)); },
          py::arg("text"));
    m.def("lemmas", [](const std::string& text) { return gloss::strip_features(gloss::parse_gloss(text)); },
          py::arg("text"));

    m.def("ter", py::overload_cast<const metrics::Tokens&, const metrics::Tokens&>(&metrics::ter), py::arg("hyp"),
          py::arg("ref"));
    m.def("wer", py::overload_cast<const metrics::Tokens&, const metrics::Tokens&>(&metrics::wer), py::arg("hyp"),
          py::arg("ref"));
    m.def("cer", py::overload_cast<std::string_view, std::string_view>(&metrics::cer), py::arg("hyp"), py::arg("ref"));
    m.def("mser", &metrics::mser, py::arg("ser"), py::arg("mfer"), py::arg("alpha") = 0.5);
    m.def(
        "score_json",
        [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs, double alpha) {
            return metrics::report_to_json(metrics::score_corpus(parse_all(hyps), parse_all(refs), alpha)).dump();
        },
        py::arg("hyps"), py::arg("refs"), py::arg("alpha") = 0.5);

    m.def(
        "sample_morphemes",
        [](const std::string& grammar_path, size_t n, std::uint64_t seed) {
            std::vector<std::string> out;
            for (const auto& mo : phonotactics::sample_corpus(phonotactics::load_grammar(grammar_path), n, seed))
                out.push_back(mo.render());
            return out;
        },
        py::arg("grammar_path"), py::arg("n"), py::arg("seed"));

    m.def(
        "spell",
        [](const std::string& word, const std::filesystem::path& map_path) {
            return orthography::apply_orthography(phonotactics::Morpheme::parse(word), orthography::load_map(map_path));
        },
        py::arg("word"), py::arg("map_path"));
    m.def(
        "read",
        [](const std::string& written, const std::filesystem::path& map_path) {
            return orthography::invert(orthography::load_map(map_path)).decode(written);
        },
        py::arg("written"), py::arg("map_path"));

    m.def(
        "apply_sound_changes",
        [](const std::string& rules, const std::string& word, std::optional<std::filesystem::path> features) {
            std::optional<soundchange::PhonemeFeatureTable> table;
            if (features) table = soundchange::PhonemeFeatureTable::load(*features);
            auto set = soundchange::parse_rule_file(rules, table ? &*table : nullptr);
            return soundchange::apply_rules(set, phonotactics::Morpheme::parse(word)).render();
        },
        py::arg("rules"), py::arg("word"), py::arg("features") = py::none());

    m.def(
        "run_stage",
        [](const std::filesystem::path& config, const std::string& stage, const std::string& text) {
            auto cfg = pipeline::ProjectConfig::load(config);
            cfg.check_paths();
            pipeline::Pipeline p(cfg, pipeline::client_from_env(cfg));
            py::list out;
            if (stage == "build") {
                for (const auto& r : p.build()) out.append(stage_dict(r));
                return out;
            }
            pipeline::StageResult r;
            if (stage == "phonology") r = p.phonology();
            else if (stage == "morphosyntax") r = p.morphosyntax();
            else if (stage == "lexicon") r = p.lexicon();
            else if (stage == "orthography") r = p.orthography();
            else if (stage == "handbook") r = p.handbook();
            else if (stage == "translate") r = p.translate(text);
            else if (stage == "experiment") r = p.experiment();
            else throw pipeline::PipelineError("unknown stage '" + stage + "'");
            out.append(stage_dict(r));
            return out;
        },
        py::arg("config"), py::arg("stage"), py::arg("text") = "");
}
