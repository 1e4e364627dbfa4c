#include "conlang/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "conlang/digest.hpp"
#include "conlang/fileio.hpp"
#include "conlang/ngram.hpp"
#include "conlang/utf8.hpp"

namespace conlang::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string file_hash(const fs::path& p) { return sha256_hex(read_file(p)); }

std::string opt_hash(const std::optional<fs::path>& p) {
    return p && fs::exists(*p) ? file_hash(*p) : std::string();
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.emplace_back(line);
        pos = end + 1;
    }
    return out;
}

std::string fmt(double v, int prec = 2) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(prec) << v;
    return o.str();
}

std::string numbered(const std::string& prefix, size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix.c_str(), i);
    return buf;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

bool looks_like_path(const std::string& s) {
    return s.find('/') != std::string::npos || (s.size() > 5 && s.ends_with(".json"));
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ProjectConfig ProjectConfig::from_json(const json& doc, const fs::path& base_dir) {
    static const std::set<std::string> known = {
        "build_id",     "grammar",          "feature_set",       "label_table", "orthography",
        "seed",         "prompt_dir",       "cassette",          "output_dir",  "sources",
        "raw_texts",    "references",       "eval_corpora",      "model_id",    "sample_size",
        "refinement_rounds", "phonology_notes", "required_phonemes", "lexicon_sample", "handbook_texts",
        "constraints",  "experiment"};
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, _] : doc.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");

    auto path = [&](const std::string& s) { return (base_dir / s).lexically_normal(); };
    auto opt_path = [&](const char* key) -> std::optional<fs::path> {
        if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
        return path(doc[key].get<std::string>());
    };
    auto required = [&](const char* key) -> const json& {
        if (!doc.contains(key) || doc[key].is_null()) throw ConfigError(std::string("config is missing '") + key + "'");
        return doc[key];
    };

    ProjectConfig c;
    try {
        c.build_id = required("build_id").get<std::string>();
        if (c.build_id.empty() || c.build_id.find('/') != std::string::npos || c.build_id == "." || c.build_id == "..")
            throw ConfigError("build_id must be a plain directory name");
        c.grammar = opt_path("grammar");
        c.feature_set = required("feature_set").get<std::string>();
        if (looks_like_path(c.feature_set)) c.feature_set = path(c.feature_set).string();
        c.label_table = opt_path("label_table");
        c.orthography = path(required("orthography").get<std::string>());
        c.seed = required("seed").get<std::uint64_t>();
        c.prompt_dir = path(required("prompt_dir").get<std::string>());
        c.cassette = opt_path("cassette");
        c.output_dir = path(required("output_dir").get<std::string>());
        c.sources = opt_path("sources");
        c.raw_texts = opt_path("raw_texts");
        c.references = opt_path("references");
        for (const auto& p : doc.value("eval_corpora", json::array())) c.eval_corpora.push_back(path(p.get<std::string>()));
        c.model_id = doc.value("model_id", "");
        c.sample_size = doc.value("sample_size", c.sample_size);
        c.refinement_rounds = doc.value("refinement_rounds", c.refinement_rounds);
        c.phonology_notes = doc.value("phonology_notes", "");
        for (const auto& p : doc.value("required_phonemes", json::array()))
            c.required_phonemes.push_back(utf8::nfc(p.get<std::string>()));
        c.lexicon_sample = doc.value("lexicon_sample", c.lexicon_sample);
        c.handbook_texts = doc.value("handbook_texts", c.handbook_texts);
        if (doc.contains("constraints")) {
            const auto& k = doc["constraints"];
            c.constraints.min_stem_len = k.value("min_stem_len", c.constraints.min_stem_len);
            c.constraints.max_affix_len = k.value("max_affix_len", c.constraints.max_affix_len);
            c.constraints.max_retries = k.value("max_retries", c.constraints.max_retries);
        }
        if (doc.contains("experiment") && !doc["experiment"].is_null()) {
            const auto& e = doc["experiment"];
            ExperimentConfig ec;
            ec.items = path(e.at("items").get<std::string>());
            ec.runs = e.value("runs", ec.runs);
            if (ec.runs < 1) throw ConfigError("experiment.runs must be at least 1");
            c.experiment = ec;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    if (c.sample_size == 0) throw ConfigError("sample_size must be positive");
    if (c.refinement_rounds == 0) throw ConfigError("refinement_rounds must be positive");
    return c;
}

ProjectConfig ProjectConfig::load(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return from_json(doc, path.parent_path());
}

json ProjectConfig::to_json() const {
    auto opt = [](const std::optional<fs::path>& p) -> json { return p ? json(p->string()) : json(nullptr); };
    json j = {{"build_id", build_id},
              {"grammar", opt(grammar)},
              {"feature_set", feature_set},
              {"label_table", opt(label_table)},
              {"orthography", orthography.string()},
              {"seed", seed},
              {"prompt_dir", prompt_dir.string()},
              {"cassette", opt(cassette)},
              {"output_dir", output_dir.string()},
              {"sources", opt(sources)},
              {"raw_texts", opt(raw_texts)},
              {"references", opt(references)},
              {"model_id", model_id},
              {"sample_size", sample_size},
              {"refinement_rounds", refinement_rounds},
              {"phonology_notes", phonology_notes},
              {"required_phonemes", required_phonemes},
              {"lexicon_sample", lexicon_sample},
              {"handbook_texts", handbook_texts},
              {"constraints",
               {{"min_stem_len", constraints.min_stem_len},
                {"max_affix_len", constraints.max_affix_len},
                {"max_retries", constraints.max_retries}}}};
    j["eval_corpora"] = json::array();
    for (const auto& p : eval_corpora) j["eval_corpora"].push_back(p.string());
    if (experiment) j["experiment"] = {{"items", experiment->items.string()}, {"runs", experiment->runs}};
    return j;
}

void ProjectConfig::check_paths() const {
    auto need = [](const fs::path& p, const char* what) {
        if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
    };
    if (grammar) need(*grammar, "grammar");
    if (looks_like_path(feature_set)) need(feature_set, "feature set");
    if (label_table) need(*label_table, "label table");
    need(orthography, "orthography map");
    need(prompt_dir, "prompt directory");
    if (sources) need(*sources, "sources");
    if (raw_texts) need(*raw_texts, "raw texts");
    if (references) need(*references, "references");
    for (const auto& p : eval_corpora) need(p, "evaluation corpus");
    if (experiment) need(experiment->items, "experiment items");
}

std::shared_ptr<llm::Client> client_from_env(const ProjectConfig& cfg) {
    auto opts = llm::options_from_env();
    if (!cfg.model_id.empty()) opts.default_model = cfg.model_id;
    std::shared_ptr<llm::Cassette> cassette;
    if (cfg.cassette) cassette = std::make_shared<llm::Cassette>(llm::Cassette::load(*cfg.cassette));

    if (opts.mode == llm::Mode::Replay) {
        if (!cassette) return nullptr;
        return std::make_shared<llm::Client>(opts, nullptr, cassette);
    }
    std::shared_ptr<llm::Provider> provider;
    const char* kind = std::getenv("CONLANG_LLM_PROVIDER");
    if (kind && std::string(kind) == "scripted") {
        const char* script = std::getenv("CONLANG_LLM_SCRIPT");
        if (!script) throw ConfigError("CONLANG_LLM_SCRIPT is not set");
        provider = std::make_shared<llm::ScriptedProvider>(json::parse(read_file(script)).get<std::vector<std::string>>());
    } else {
        provider = llm::OpenAICompatibleProvider::from_env();
    }
    if (opts.mode == llm::Mode::Record && !cassette) throw ConfigError("record mode needs a cassette path in the config");
    return std::make_shared<llm::Client>(opts, provider, cassette);
}

// ---------------------------------------------------------------------------
// Records

std::vector<SourceItem> load_sources(const fs::path& path) {
    std::vector<SourceItem> out;
    size_t n = 0, line_no = 0;
    for (const auto& line : lines_of(read_file(path))) {
        ++line_no;
        if (utf8::trim(line).empty()) continue;
        ++n;
        try {
            auto j = json::parse(line);
            SourceItem it;
            it.id = j.contains("id") ? j["id"].get<std::string>() : numbered("s", n);
            it.text = j.value("text", "");
            it.source = j.at("source").get<std::string>();
            out.push_back(std::move(it));
        } catch (const json::exception& e) {
            throw PipelineError(path.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string format_glosses(const std::vector<GlossRecord>& records) {
    std::string out;
    for (const auto& r : records)
        out += json{{"id", r.id}, {"text", r.text}, {"gloss", gloss::serialize_gloss(r.gloss)}}.dump() + "\n";
    return out;
}

std::vector<GlossRecord> parse_glosses(std::string_view text) {
    std::vector<GlossRecord> out;
    size_t line_no = 0;
    for (const auto& line : lines_of(text)) {
        ++line_no;
        if (utf8::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            out.push_back({j.at("id").get<std::string>(), j.value("text", ""),
                           gloss::parse_gloss(j.at("gloss").get<std::string>())});
        } catch (const json::exception& e) {
            throw PipelineError("glosses line " + std::to_string(line_no) + ": " + e.what());
        } catch (const gloss::GlossError& e) {
            throw PipelineError("glosses line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prompt assembly

std::string assemble_handbook_prompt(const std::string& tmpl, const std::string& build_id,
                                     const phonotactics::PhonotacticGrammar& grammar,
                                     const orthography::OrthographyMap& map, const lexicon::Lexicon& lex,
                                     const std::vector<lexicon::CorpusRecord>& corpus,
                                     const morphosyntax::MorphosyntaxSpec& spec, size_t lexicon_sample,
                                     size_t text_count) {
    auto symbol_list = [](const std::map<std::string, double>& m) {
        std::vector<std::string> v;
        for (const auto& [k, _] : m) v.push_back(k);
        return utf8::join(v, " ");
    };

    std::string syllables;
    auto seqs = [](const std::vector<phonotactics::WeightedSequence>& v) {
        std::vector<std::string> parts;
        for (const auto& s : v) parts.push_back(s.phonemes.empty() ? "(empty)" : utf8::join(s.phonemes, " "));
        return utf8::join(parts, ", ");
    };
    syllables += "Onsets: " + seqs(grammar.onset_clusters) + "\n";
    syllables += "Nuclei: " + seqs(grammar.nucleus_patterns) + "\n";
    syllables += "Codas: " + seqs(grammar.coda_clusters);

    std::string ortho;
    auto add = [&](const std::map<std::string, std::string>& m, const char* note) {
        for (const auto& [ph, gr] : m)
            if (grammar.inventory.contains(ph)) ortho += ph + " = " + gr + note + "\n";
    };
    add(map.mapping, "");
    add(map.initial, " (word-initial)");
    add(map.final, " (word-final)");
    if (!ortho.empty()) ortho.pop_back();

    std::string lexs;
    size_t n = 0;
    for (const auto& [key, e] : lex.entries) {
        if (n++ >= lexicon_sample) break;
        lexs += e.lemma + " (" + lexicon::to_string(e.kind) + "): /" + e.phonemic.render() + "/";
        if (e.orthographic) lexs += " " + *e.orthographic;
        lexs += "\n";
    }
    if (!lexs.empty()) lexs.pop_back();

    std::string synopsis;
    auto spec_json = morphosyntax::spec_to_json(spec);
    for (const auto& [k, v] : spec_json.items()) synopsis += "- " + k + ": " + v.dump() + "\n";
    if (!synopsis.empty()) synopsis.pop_back();

    std::string texts;
    for (size_t i = 0; i < corpus.size() && i < text_count; ++i) {
        const auto& r = corpus[i];
        texts += "English: " + r.source_text + "\n";
        texts += "Gloss: " + gloss::serialize_gloss(r.gloss) + "\n";
        texts += "Phonemic: " + r.phonemic + "\n";
        if (r.orthographic) texts += "Written: " + *r.orthographic + "\n";
        texts += "\n";
    }
    while (!texts.empty() && texts.back() == '\n') texts.pop_back();

    return morphosyntax::fill_template(tmpl, {{"build_id", build_id},
                                              {"consonants", symbol_list(grammar.inventory.consonants)},
                                              {"vowels", symbol_list(grammar.inventory.vowels)},
                                              {"syllable_structure", syllables},
                                              {"script", map.script_tag},
                                              {"orthography_table", ortho},
                                              {"lexicon_sample", lexs},
                                              {"morphosyntax_synopsis", synopsis},
                                              {"sample_texts", texts}});
}

std::string assemble_translation_prompt(const std::string& tmpl, const std::string& handbook,
                                        const std::vector<GlossRecord>& samples, const std::string& new_text) {
    std::string s;
    for (const auto& r : samples) s += r.text + "\n" + gloss::serialize_gloss(r.gloss) + "\n\n";
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return morphosyntax::fill_template(tmpl, {{"handbook", handbook}, {"gloss_samples", s}, {"new_text", new_text}});
}

// ---------------------------------------------------------------------------
// Scoring

metrics::Tokens bleu_tokens(std::string_view text) {
    std::string spaced;
    for (char c : text) {
        if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == '"') {
            spaced += ' ';
            spaced += c;
            spaced += ' ';
        } else {
            spaced += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return utf8::split_whitespace(spaced);
}

ExperimentRow score_condition(const std::string& condition, const std::vector<std::string>& hyps,
                              const std::vector<std::string>& refs) {
    if (hyps.size() != refs.size()) throw PipelineError("hypothesis and reference counts differ");
    std::vector<metrics::Tokens> h, r;
    for (const auto& s : hyps) h.push_back(bleu_tokens(s));
    for (const auto& s : refs) r.push_back(bleu_tokens(s));
    return {condition, metrics::bleu_corpus(h, r, 2), metrics::bleu_corpus(h, r, 3), metrics::bleu_corpus(h, r, 4)};
}

std::string format_experiment_table(const std::vector<ExperimentRow>& rows) {
    std::string out = "| Condition | Bigram BLEU | Trigram BLEU | Tetragram BLEU |\n";
    out += "|---|---|---|---|\n";
    for (const auto& r : rows)
        out += "| " + r.condition + " | " + fmt(r.bigram) + " | " + fmt(r.trigram) + " | " + fmt(r.tetragram) + " |\n";
    return out;
}

metrics::MetricReport score_files(const fs::path& hyp, const fs::path& ref, double alpha) {
    auto read = [](const fs::path& p) {
        std::vector<gloss::GlossSentence> out;
        size_t line_no = 0;
        for (const auto& line : lines_of(read_file(p))) {
            ++line_no;
            auto t = utf8::trim(line);
            if (t.empty()) continue;
            try {
                if (t.front() == '{')
                    out.push_back(gloss::parse_gloss(json::parse(t).at("gloss").get<std::string>()));
                else
                    out.push_back(gloss::parse_gloss(t));
            } catch (const std::exception& e) {
                throw PipelineError(p.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        return out;
    };
    auto h = read(hyp);
    auto r = read(ref);
    if (h.size() != r.size())
        throw PipelineError("hypothesis has " + std::to_string(h.size()) + " sentences, reference has " +
                            std::to_string(r.size()));
    return metrics::score_corpus(h, r, alpha);
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(ProjectConfig cfg, std::shared_ptr<llm::Client> client)
    : cfg_(std::move(cfg)), client_(std::move(client)) {}

morphosyntax::MorphosyntaxSpec Pipeline::spec() const {
    if (looks_like_path(cfg_.feature_set)) return morphosyntax::load_spec_file(cfg_.feature_set);
    return morphosyntax::load_feature_set(cfg_.feature_set);
}

morphosyntax::FeatureLabelTable Pipeline::labels() const {
    if (!cfg_.label_table) return morphosyntax::FeatureLabelTable::standard();
    auto t = morphosyntax::FeatureLabelTable::from_json(json::parse(read_file(*cfg_.label_table)));
    t.validate();
    return t;
}

std::string Pipeline::template_text(const std::string& rel) const {
    auto p = cfg_.prompt_dir / rel;
    if (!fs::exists(p)) throw morphosyntax::TemplateMissing("prompt template missing: " + rel);
    return read_file(p);
}

llm::Client& Pipeline::require_client(const std::string& what) const {
    if (!client_)
        throw PipelineError(what +
                            " needs a model: set CONLANG_LLM_MODE=live with CONLANG_LLM_BASE_URL, or configure a cassette "
                            "that holds the recorded responses");
    return *client_;
}

llm::CompletionRequest Pipeline::request(std::string user) const {
    llm::CompletionRequest r;
    r.system_prompt = std::string(utf8::trim(template_text("system.txt")));
    r.user_prompt = std::move(user);
    r.model_id = cfg_.model_id;
    return r;
}

std::optional<json> Pipeline::read_stamp(const std::string& stage) const {
    auto p = out("reports/stamps/" + stage + ".json");
    if (!fs::exists(p)) return std::nullopt;
    try {
        return json::parse(read_file(p));
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

bool Pipeline::fresh(const std::string& stage, const std::string& inputs) const {
    auto s = read_stamp(stage);
    if (!s || s->value("inputs", "") != sha256_hex(inputs)) return false;
    for (const auto& [rel, h] : s->at("outputs").items()) {
        auto p = out(rel);
        if (!fs::exists(p) || file_hash(p) != h.get<std::string>()) return false;
    }
    return true;
}

void Pipeline::stamp(const std::string& stage, const std::string& inputs, const std::vector<fs::path>& outputs,
                     const std::string& grammar_id) const {
    json o = json::object();
    for (const auto& p : outputs) o[fs::relative(p, cfg_.build_dir()).generic_string()] = file_hash(p);
    json s = {{"stage", stage}, {"inputs", sha256_hex(inputs)}, {"grammar_id", grammar_id}, {"seed", cfg_.seed},
              {"outputs", o}};
    write_file_atomic(out("reports/stamps/" + stage + ".json"), s.dump(2) + "\n");
}

// ---- phonology

phonotactics::PhonotacticGrammar Pipeline::draft_grammar(StageResult& result) {
    auto& client = require_client("drafting a grammar");
    std::string required = cfg_.required_phonemes.empty() ? "(none)" : utf8::join(cfg_.required_phonemes, " ");
    auto prompt = morphosyntax::fill_template(template_text("phonology/draft.txt"),
                                              {{"notes", cfg_.phonology_notes.empty() ? "(none)" : cfg_.phonology_notes},
                                               {"required_phonemes", required}});

    auto parse = [](const std::string& text) {
        auto a = text.find('{');
        auto b = text.rfind('}');
        if (a == std::string::npos || b == std::string::npos || b < a)
            throw phonotactics::GrammarError("no JSON object in the answer");
        try {
            auto g = phonotactics::grammar_from_json(json::parse(text.substr(a, b - a + 1)));
            g.validate();
            return g;
        } catch (const json::exception& e) {
            throw phonotactics::GrammarError(std::string("the JSON does not parse: ") + e.what());
        }
    };
    auto critic = [&](const std::string& text) {
        llm::Critique c;
        phonotactics::PhonotacticGrammar g;
        try {
            g = parse(text);
        } catch (const phonotactics::GrammarError& e) {
            return llm::Critique{false, 1000, std::string("The grammar could not be used: ") + e.what() +
                                                  "\nAnswer with a single JSON object in the requested format."};
        }
        auto sample = phonotactics::sample_corpus(g, 200, cfg_.seed);
        for (const auto& m : sample) c.violations += phonotactics::validate_morpheme_format(m.render(), g.inventory).size();
        std::vector<std::string> missing;
        for (const auto& p : cfg_.required_phonemes)
            if (!g.inventory.contains(p)) missing.push_back(p);
        c.violations += missing.size();
        c.clean = c.violations == 0;
        if (!c.clean) {
            c.feedback = phonotactics::build_refinement_report(g, sample, cfg_.phonology_notes);
            if (!missing.empty()) c.feedback += "\n## Missing phonemes\n" + utf8::join(missing, " ") + "\n";
        }
        return c;
    };
    auto r = llm::run_refinement_loop(client, request(prompt), critic, cfg_.refinement_rounds);

    std::string transcript = "# Grammar drafting\n";
    for (const auto& round : r.rounds) {
        transcript += "\n## Round " + std::to_string(round.round) + "\n\n### Output\n\n" + round.output + "\n";
        transcript += "\n### Critique\n\n" + (round.critique.clean ? std::string("clean") : round.critique.feedback) + "\n";
    }
    write_file_atomic(out("reports/phonology_rounds.md"), transcript);
    result.outputs.push_back(out("reports/phonology_rounds.md"));
    if (!r.converged) {
        result.exit_code = kExitPartial;
        result.failures.push_back("grammar still has " + std::to_string(r.rounds[r.best_round - 1].critique.violations) +
                                  " problems after " + std::to_string(r.rounds.size()) + " rounds");
    }
    try {
        return parse(r.text);
    } catch (const phonotactics::GrammarError& e) {
        throw PipelineError(std::string("no usable grammar after refinement: ") + e.what());
    }
}

StageResult Pipeline::phonology() {
    StageResult result;
    result.stage = "phonology";
    json in = {{"stage", "phonology"},
               {"grammar", opt_hash(cfg_.grammar)},
               {"seed", cfg_.seed},
               {"sample_size", cfg_.sample_size},
               {"notes", cfg_.phonology_notes},
               {"required", cfg_.required_phonemes},
               {"rounds", cfg_.refinement_rounds},
               {"model", cfg_.model_id}};
    if (!cfg_.grammar) in["cassette"] = opt_hash(cfg_.cassette);
    for (const auto& p : cfg_.eval_corpora) in["eval"].push_back(file_hash(p));
    auto inputs = in.dump();
    if (fresh("phonology", inputs)) {
        result.skipped = true;
        result.summary = "phonology is up to date";
        return result;
    }

    auto grammar = cfg_.grammar ? phonotactics::load_grammar(cfg_.grammar->string()) : draft_grammar(result);
    auto sample = phonotactics::sample_corpus(grammar, cfg_.sample_size, cfg_.seed);
    std::string sample_text;
    size_t violations = 0;
    for (const auto& m : sample) {
        auto r = m.render();
        violations += phonotactics::validate_morpheme_format(r, grammar.inventory).size();
        sample_text += r + "\n";
    }

    std::string report = "# Phonology\n\n";
    report += "Grammar id: " + lexicon::grammar_id(grammar) + "\n";
    report += "Consonants: " + std::to_string(grammar.inventory.consonants.size()) +
              ", vowels: " + std::to_string(grammar.inventory.vowels.size()) + "\n";
    report += "Sample: " + std::to_string(sample.size()) + " morphemes, " + std::to_string(violations) +
              " format violations\n\n## Phoneme frequencies\n\n";
    for (const auto& [p, c] : phonotactics::phoneme_frequencies(sample)) report += p + "\t" + std::to_string(c) + "\n";

    if (!cfg_.eval_corpora.empty()) {
        std::vector<ngram::NgramModel> models;
        for (const auto& p : cfg_.eval_corpora) {
            auto corpus = ngram::read_corpus(p.string());
            if (corpus.language_tag.empty()) corpus.language_tag = p.stem().string();
            models.push_back(ngram::NgramModel::train(corpus));
        }
        ngram::EvalCorpus mine;
        mine.language_tag = cfg_.build_id;
        for (const auto& m : sample) mine.entries.push_back(m.phonemes);
        report += "\n## Closest languages by perplexity\n\n| Rank | Language | Perplexity | OOV |\n|---|---|---|---|\n";
        size_t rank = 0;
        for (const auto& r : ngram::rank_languages(mine, models))
            report += "| " + std::to_string(++rank) + " | " + r.language_tag + " | " + fmt(r.perplexity) + " | " +
                      fmt(100.0 * r.oov_rate, 1) + "% |\n";
    }
    if (violations > 0) {
        result.exit_code = kExitPartial;
        result.failures.push_back(std::to_string(violations) + " format violations in the sample");
    }

    write_file_atomic(out("grammar/grammar.json"), phonotactics::grammar_to_json(grammar).dump(2) + "\n");
    write_file_atomic(out("grammar/sample.txt"), sample_text);
    write_file_atomic(out("reports/phonology.md"), report);
    for (const char* p : {"grammar/grammar.json", "grammar/sample.txt", "reports/phonology.md"})
        result.outputs.push_back(out(p));
    stamp("phonology", inputs, result.outputs, lexicon::grammar_id(grammar));
    result.summary = "grammar " + lexicon::grammar_id(grammar) + ", " + std::to_string(sample.size()) + " sample morphemes";
    return result;
}

// ---- morphosyntax

gloss::GlossSentence Pipeline::llm_gloss(const std::string& text) {
    auto& client = require_client("glossing raw text");
    auto prompts = morphosyntax::build_cumulative_prompts(spec(), text, cfg_.prompt_dir / "morphosyntax");
    std::string prev;
    for (const auto& p : prompts) {
        auto user = replace_all(p.text, morphosyntax::kPreviousOutputMarker, prev);
        prev = std::string(utf8::trim(client.complete(request(user))));
    }
    try {
        return morphosyntax::structure_output(prev);
    } catch (const morphosyntax::StructuringNeeded&) {
        auto user = morphosyntax::fill_template(template_text("structure.txt"), {{"output", prev}});
        return morphosyntax::structure_output(client.complete(request(user)));
    }
}

StageResult Pipeline::morphosyntax() {
    StageResult result;
    result.stage = "morphosyntax";
    auto sp = spec();
    auto lt = labels();
    json in = {{"stage", "morphosyntax"},
               {"spec", morphosyntax::spec_to_json(sp)},
               {"labels", lt.to_json()},
               {"sources", opt_hash(cfg_.sources)},
               {"raw", opt_hash(cfg_.raw_texts)},
               {"references", opt_hash(cfg_.references)},
               {"model", cfg_.model_id}};
    if (cfg_.raw_texts) in["cassette"] = opt_hash(cfg_.cassette);
    auto inputs = in.dump();
    if (fresh("morphosyntax", inputs)) {
        result.skipped = true;
        result.summary = "morphosyntax is up to date";
        return result;
    }
    if (!cfg_.sources && !cfg_.raw_texts) throw ConfigError("morphosyntax needs 'sources' or 'raw_texts' in the config");

    std::vector<GlossRecord> records;
    size_t attempted = 0;
    if (cfg_.sources) {
        for (const auto& item : load_sources(*cfg_.sources)) {
            ++attempted;
            try {
                auto src = morphosyntax::parse_source(item.source);
                morphosyntax::validate_source(src);
                auto g = morphosyntax::transform(src, sp, lt);
                gloss::validate(g);
                records.push_back({item.id, item.text, std::move(g)});
            } catch (const Error& e) {
                result.failures.push_back(item.id + ": " + e.what());
            }
        }
    }
    if (cfg_.raw_texts) {
        size_t n = 0;
        for (const auto& line : lines_of(read_file(*cfg_.raw_texts))) {
            auto text = std::string(utf8::trim(line));
            if (text.empty()) continue;
            auto id = numbered("r", ++n);
            ++attempted;
            try {
                auto g = llm_gloss(text);
                gloss::validate(g);
                records.push_back({id, text, std::move(g)});
            } catch (const Error& e) {
                result.failures.push_back(id + ": " + e.what());
            }
        }
    }

    std::string report = "# Morphosyntax\n\nSentences: " + std::to_string(attempted) + ", glossed: " +
                         std::to_string(records.size()) + ", failed: " + std::to_string(result.failures.size()) + "\n";
    if (!result.failures.empty()) {
        report += "\n## Failed sentences\n\n";
        for (const auto& f : result.failures) report += "- " + f + "\n";
    }

    write_file_atomic(out("glosses.jsonl"), format_glosses(records));
    result.outputs.push_back(out("glosses.jsonl"));

    if (cfg_.references) {
        std::map<std::string, gloss::GlossSentence> refs;
        for (const auto& line : lines_of(read_file(*cfg_.references))) {
            if (utf8::trim(line).empty()) continue;
            auto j = json::parse(line);
            refs[j.at("id").get<std::string>()] = gloss::parse_gloss(j.at("gloss").get<std::string>());
        }
        std::vector<gloss::GlossSentence> hyps, rs;
        for (const auto& r : records) {
            auto it = refs.find(r.id);
            if (it == refs.end()) continue;
            hyps.push_back(r.gloss);
            rs.push_back(it->second);
        }
        auto scores = metrics::score_corpus(hyps, rs);
        report += "\n## Scores against references\n\n" + metrics::format_report_table({{cfg_.build_id, scores}});
        write_file_atomic(out("reports/morphosyntax_scores.json"), metrics::report_to_json(scores).dump(2) + "\n");
        result.outputs.push_back(out("reports/morphosyntax_scores.json"));
    }
    write_file_atomic(out("reports/morphosyntax.md"), report);
    result.outputs.push_back(out("reports/morphosyntax.md"));
    if (!result.failures.empty()) result.exit_code = kExitPartial;
    stamp("morphosyntax", inputs, result.outputs, "");
    result.summary = std::to_string(records.size()) + " of " + std::to_string(attempted) + " sentences glossed";
    return result;
}

// ---- lexicon and orthography

namespace {

phonotactics::PhonotacticGrammar build_grammar(const Pipeline& p) {
    auto path = p.out("grammar/grammar.json");
    if (!fs::exists(path)) throw PipelineError("run the phonology stage first (grammar/grammar.json is missing)");
    return phonotactics::load_grammar(path.string());
}

std::vector<GlossRecord> build_glosses(const Pipeline& p) {
    auto path = p.out("glosses.jsonl");
    if (!fs::exists(path)) throw PipelineError("run the morphosyntax stage first (glosses.jsonl is missing)");
    return parse_glosses(read_file(path));
}

std::vector<GlossRecord> build_translations(const Pipeline& p) {
    auto path = p.out("translations.jsonl");
    if (!fs::exists(path)) return {};
    std::vector<GlossRecord> out;
    for (const auto& r : lexicon::load_corpus(path)) out.push_back({"", r.source_text, r.gloss});
    return out;
}

std::vector<gloss::GlossSentence> just_glosses(const std::vector<GlossRecord>& a, const std::vector<GlossRecord>& b = {}) {
    std::vector<gloss::GlossSentence> out;
    for (const auto& r : a) out.push_back(r.gloss);
    for (const auto& r : b) out.push_back(r.gloss);
    return out;
}

}  // namespace

namespace {

orthography::OrthographyMap checked_map(const ProjectConfig& cfg, const phonotactics::PhonotacticGrammar& grammar) {
    auto map = orthography::load_map(cfg.orthography);
    auto violations = orthography::validate_map(map, grammar.inventory);
    if (!violations.empty()) {
        std::string msg = "orthography map is invalid:";
        for (const auto& v : violations)
            msg += "\n  " + orthography::to_string(v.kind) + " " + v.phoneme + " " + v.grapheme +
                   (v.detail.empty() ? "" : " (" + v.detail + ")");
        throw PipelineError(msg);
    }
    orthography::invert(map);
    return map;
}

}  // namespace

StageResult Pipeline::lexicon() {
    StageResult result;
    result.stage = "lexicon";
    auto grammar = build_grammar(*this);
    auto gid = lexicon::grammar_id(grammar);
    auto glosses = build_glosses(*this);
    json in = {{"stage", "lexicon"},
               {"grammar", gid},
               {"glosses", file_hash(out("glosses.jsonl"))},
               {"map", file_hash(cfg_.orthography)},
               {"seed", cfg_.seed},
               {"constraints", {cfg_.constraints.min_stem_len, cfg_.constraints.max_affix_len, cfg_.constraints.max_retries}}};
    auto inputs = in.dump();
    if (fresh("lexicon", inputs)) {
        result.skipped = true;
        result.summary = "lexicon is up to date";
        return result;
    }
    auto map = checked_map(cfg_, grammar);

    std::optional<lexicon::Lexicon> base;
    auto prev = read_stamp("lexicon");
    if (prev && fs::exists(out("lexicon.jsonl")) && prev->value("grammar_id", "") == gid &&
        prev->value("seed", std::uint64_t{0}) == cfg_.seed)
        base = lexicon::load_lexicon(out("lexicon.jsonl"));

    auto all = just_glosses(glosses, build_translations(*this));
    auto lex = lexicon::build_lexicon(all, grammar, cfg_.constraints, cfg_.seed, base ? &*base : nullptr);
    lex.validate(cfg_.constraints);
    for (auto& [_, e] : lex.entries) e.orthographic = orthography::apply_orthography(e.phonemic, map);

    std::vector<lexicon::CorpusRecord> corpus;
    for (const auto& g : glosses) {
        std::string written;
        try {
            written = orthography::write_sentence(lexicon::transcribe_words(g.gloss, lex), map, g.gloss.trailing_punct);
        } catch (const Error& e) {
            throw PipelineError(g.id + ": " + e.what());
        }
        corpus.push_back({g.text, g.gloss, lexicon::transcribe(g.gloss, lex), written});
    }
    lexicon::save_lexicon(lex, out("lexicon.jsonl"));
    lexicon::save_corpus(corpus, out("corpus.jsonl"));
    std::string report = "# Lexicon\n\nGrammar id: " + gid + "\nSeed: " + std::to_string(cfg_.seed) + "\n";
    for (auto k : {lexicon::Kind::Stem, lexicon::Kind::Prefix, lexicon::Kind::Suffix, lexicon::Kind::FeatureWord})
        report += lexicon::to_string(k) + ": " + std::to_string(lex.count(k)) + "\n";
    if (base) report += "Kept " + std::to_string(base->entries.size()) + " entries from the previous build\n";
    write_file_atomic(out("reports/lexicon.md"), report);
    result.outputs = {out("lexicon.jsonl"), out("corpus.jsonl"), out("reports/lexicon.md")};
    stamp("lexicon", inputs, result.outputs, gid);
    result.summary = std::to_string(lex.entries.size()) + " lexicon entries, " + std::to_string(corpus.size()) +
                     " sentences written in " + map.script_tag + " script";
    return result;
}

StageResult Pipeline::orthography() {
    StageResult result;
    result.stage = "orthography";
    auto grammar = build_grammar(*this);
    auto map = checked_map(cfg_, grammar);
    auto inverse = orthography::invert(map);
    std::string report = "# Orthography\n\nScript: " + map.script_tag + "\nGraphemes: " +
                         std::to_string(map.mapping.size() + map.initial.size() + map.final.size()) + "\n";
    if (fs::exists(out("lexicon.jsonl"))) {
        size_t checked = 0;
        for (const auto& [_, e] : lexicon::load_lexicon(out("lexicon.jsonl")).entries) {
            ++checked;
            auto written = orthography::apply_orthography(e.phonemic, map);
            if (inverse.decode(written) != e.phonemic.phonemes)
                result.failures.push_back(e.lemma + ": " + written + " does not read back as /" + e.phonemic.render() + "/");
            if (e.orthographic && *e.orthographic != written)
                result.failures.push_back(e.lemma + ": stored spelling " + *e.orthographic + " differs from " + written);
        }
        report += "Lexicon entries checked: " + std::to_string(checked) + ", mismatches: " +
                  std::to_string(result.failures.size()) + "\n";
    }
    for (const auto& f : result.failures) report += "- " + f + "\n";
    write_file_atomic(out("reports/orthography.md"), report);
    result.outputs.push_back(out("reports/orthography.md"));
    if (!result.failures.empty()) result.exit_code = kExitPartial;
    result.summary = "map is valid and uniquely decodable";
    return result;
}

// ---- handbook

StageResult Pipeline::handbook() {
    StageResult result;
    result.stage = "handbook";
    auto grammar = build_grammar(*this);
    if (!fs::exists(out("lexicon.jsonl")) || !fs::exists(out("corpus.jsonl")))
        throw PipelineError("run the lexicon stage first");
    auto tmpl = template_text("handbook.txt");
    json in = {{"stage", "handbook"},
               {"template", sha256_hex(tmpl)},
               {"grammar", lexicon::grammar_id(grammar)},
               {"map", file_hash(cfg_.orthography)},
               {"lexicon", file_hash(out("lexicon.jsonl"))},
               {"corpus", file_hash(out("corpus.jsonl"))},
               {"spec", morphosyntax::spec_to_json(spec())},
               {"cassette", client_ ? opt_hash(cfg_.cassette) : ""}};
    auto inputs = in.dump();
    if (fresh("handbook", inputs)) {
        result.skipped = true;
        result.summary = "handbook is up to date";
        return result;
    }
    auto prompt = assemble_handbook_prompt(tmpl, cfg_.build_id, grammar, orthography::load_map(cfg_.orthography),
                                           lexicon::load_lexicon(out("lexicon.jsonl")),
                                           lexicon::load_corpus(out("corpus.jsonl")), spec(), cfg_.lexicon_sample,
                                           cfg_.handbook_texts);
    write_file_atomic(out("handbook_prompt.txt"), prompt);
    result.outputs.push_back(out("handbook_prompt.txt"));
    if (client_) {
        try {
            write_file_atomic(out("handbook.md"), client_->complete(request(prompt)));
            result.outputs.push_back(out("handbook.md"));
        } catch (const llm::LlmError& e) {
            result.exit_code = kExitPartial;
            result.failures.push_back(std::string("handbook text: ") + e.what());
        }
    }
    stamp("handbook", inputs, result.outputs, lexicon::grammar_id(grammar));
    result.summary = result.outputs.size() == 2 ? "handbook prompt and text written" : "handbook prompt written";
    return result;
}

// ---- translation

StageResult Pipeline::translate(const std::string& text) {
    StageResult result;
    result.stage = "translate";
    auto grammar = build_grammar(*this);
    auto glosses = build_glosses(*this);
    if (!fs::exists(out("lexicon.jsonl"))) throw PipelineError("run the lexicon stage first");
    std::string handbook;
    if (fs::exists(out("handbook.md")))
        handbook = read_file(out("handbook.md"));
    else if (fs::exists(out("handbook_prompt.txt")))
        handbook = read_file(out("handbook_prompt.txt"));
    else
        throw PipelineError("run the handbook stage first");

    std::vector<GlossRecord> samples(glosses.begin(), glosses.begin() + std::min<size_t>(glosses.size(), 10));
    auto prompt = assemble_translation_prompt(template_text("translation.txt"), handbook, samples, text);
    write_file_atomic(out("reports/translation_prompt.txt"), prompt);
    result.outputs.push_back(out("reports/translation_prompt.txt"));
    if (!client_) {
        result.summary = "translation prompt written; no model configured";
        return result;
    }

    auto answer = client_->complete(request(prompt));
    gloss::GlossSentence g;
    try {
        g = morphosyntax::structure_output(answer);
    } catch (const morphosyntax::StructuringNeeded&) {
        g = morphosyntax::structure_output(
            client_->complete(request(morphosyntax::fill_template(template_text("structure.txt"), {{"output", answer}}))));
    }
    gloss::validate(g);

    auto lex = lexicon::load_lexicon(out("lexicon.jsonl"));
    auto translations = build_translations(*this);
    translations.push_back({"", text, g});
    auto grown = lexicon::build_lexicon(just_glosses(glosses, translations), grammar, cfg_.constraints, cfg_.seed, &lex);
    size_t added = grown.entries.size() - lex.entries.size();
    auto map = checked_map(cfg_, grammar);
    for (auto& [_, e] : grown.entries)
        if (!e.orthographic) e.orthographic = orthography::apply_orthography(e.phonemic, map);

    std::vector<lexicon::CorpusRecord> records;
    if (fs::exists(out("translations.jsonl"))) records = lexicon::load_corpus(out("translations.jsonl"));
    lexicon::CorpusRecord rec{text, g, lexicon::transcribe(g, grown),
                              orthography::write_sentence(lexicon::transcribe_words(g, grown), map, g.trailing_punct)};
    records.push_back(rec);
    lexicon::save_corpus(records, out("translations.jsonl"));
    lexicon::save_lexicon(grown, out("lexicon.jsonl"));
    result.outputs.push_back(out("translations.jsonl"));
    result.outputs.push_back(out("lexicon.jsonl"));
    result.summary = gloss::serialize_gloss(g) + "\n" + rec.phonemic + (rec.orthographic ? "\n" + *rec.orthographic : "") +
                     "\nlexicon grew by " + std::to_string(added) + " entries";
    return result;
}

// ---- experiment

StageResult Pipeline::experiment() {
    StageResult result;
    result.stage = "experiment";
    if (!cfg_.experiment) throw ConfigError("config has no 'experiment' section");
    auto& client = require_client("the translation experiment");

    struct Item {
        std::string id, source, annotation, reference;
    };
    std::vector<Item> items;
    size_t n = 0;
    for (const auto& line : lines_of(read_file(cfg_.experiment->items))) {
        if (utf8::trim(line).empty()) continue;
        auto j = json::parse(line);
        items.push_back({j.contains("id") ? j["id"].get<std::string>() : numbered("e", ++n),
                         j.at("source").get<std::string>(), j.value("annotation", ""), j.at("reference").get<std::string>()});
    }
    if (items.empty()) throw PipelineError("experiment has no items");

    std::vector<std::string> refs;
    for (const auto& it : items) refs.push_back(it.reference);
    const std::vector<std::string> conditions = {"unannotated", "annotated"};
    json runs = json::array();
    json outputs = json::array();
    std::map<std::string, std::vector<ExperimentRow>> per_condition;
    for (int run = 1; run <= cfg_.experiment->runs; ++run) {
        for (const auto& cond : conditions) {
            auto tmpl = template_text("experiment/" + cond + ".txt");
            std::vector<std::string> hyps;
            for (const auto& it : items) {
                auto req = request(morphosyntax::fill_template(tmpl, {{"source", it.source}, {"annotation", it.annotation}}));
                req.system_prompt += "\nSession " + std::to_string(run) + ".";
                std::string hyp;
                try {
                    auto answer = client.complete(req);
                    for (const auto& l : lines_of(answer)) {
                        auto t = std::string(utf8::trim(l));
                        if (t.rfind("Translation:", 0) == 0) t = std::string(utf8::trim(t.substr(12)));
                        if (!t.empty()) {
                            hyp = t;
                            break;
                        }
                    }
                } catch (const llm::LlmError& e) {
                    result.failures.push_back(cond + " run " + std::to_string(run) + " " + it.id + ": " + e.what());
                }
                hyps.push_back(hyp);
                outputs.push_back({{"run", run}, {"condition", cond}, {"id", it.id}, {"hypothesis", hyp}});
            }
            auto row = score_condition(cond, hyps, refs);
            per_condition[cond].push_back(row);
            runs.push_back({{"run", run}, {"condition", cond}, {"bigram", row.bigram}, {"trigram", row.trigram},
                            {"tetragram", row.tetragram}});
        }
    }
    std::vector<ExperimentRow> table;
    json means = json::object();
    for (const auto& cond : conditions) {
        ExperimentRow m{cond};
        const auto& rows = per_condition[cond];
        for (const auto& r : rows) {
            m.bigram += r.bigram;
            m.trigram += r.trigram;
            m.tetragram += r.tetragram;
        }
        double k = static_cast<double>(rows.size());
        m.bigram /= k;
        m.trigram /= k;
        m.tetragram /= k;
        table.push_back(m);
        means[cond] = {{"bigram", m.bigram}, {"trigram", m.trigram}, {"tetragram", m.tetragram}};
    }
    std::string outs;
    for (const auto& o : outputs) outs += o.dump() + "\n";
    write_file_atomic(out("reports/experiment_outputs.jsonl"), outs);
    write_file_atomic(out("reports/experiment.json"),
                      json{{"items", items.size()}, {"runs", runs}, {"mean", means}}.dump(2) + "\n");
    auto md = "# Annotation-aided translation\n\n" + std::to_string(items.size()) + " sentences, " +
              std::to_string(cfg_.experiment->runs) + " runs, corpus BLEU averaged over runs\n\n" +
              format_experiment_table(table);
    write_file_atomic(out("reports/experiment.md"), md);
    result.outputs = {out("reports/experiment_outputs.jsonl"), out("reports/experiment.json"), out("reports/experiment.md")};
    if (!result.failures.empty()) result.exit_code = kExitPartial;
    result.summary = format_experiment_table(table);
    return result;
}

std::vector<StageResult> Pipeline::build() {
    std::vector<StageResult> out;
    out.push_back(phonology());
    out.push_back(morphosyntax());
    out.push_back(lexicon());
    out.push_back(handbook());
    return out;
}

}  // namespace conlang::pipeline
