#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conlang/error.hpp"
#include "conlang/gloss.hpp"
#include "conlang/lexicon.hpp"
#include "conlang/llm.hpp"
#include "conlang/metrics.hpp"
#include "conlang/morphosyntax.hpp"
#include "conlang/orthography.hpp"
#include "conlang/phonotactics.hpp"

namespace conlang::pipeline {

class PipelineError : public Error {
public:
    using Error::Error;
};

class ConfigError : public PipelineError {
public:
    using PipelineError::PipelineError;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitFatal = 2;

struct ExperimentConfig {
    std::filesystem::path items;  // JSONL {id, source, annotation, reference}
    int runs = 3;
};

/// Relative paths are resolved against the config file's directory.
struct ProjectConfig {
    std::string build_id;
    std::optional<std::filesystem::path> grammar;
    std::string feature_set;  // built-in name or path to a spec file
    std::optional<std::filesystem::path> label_table;
    std::filesystem::path orthography;
    std::uint64_t seed = 0;
    std::filesystem::path prompt_dir;
    std::optional<std::filesystem::path> cassette;
    std::filesystem::path output_dir;

    std::optional<std::filesystem::path> sources;     // JSONL {id?, text, source}
    std::optional<std::filesystem::path> raw_texts;   // one sentence per line, glossed by the LLM chain
    std::optional<std::filesystem::path> references;  // JSONL {id, gloss}
    std::vector<std::filesystem::path> eval_corpora;

    std::string model_id;
    size_t sample_size = 10000;
    size_t refinement_rounds = 3;
    std::string phonology_notes;
    std::vector<std::string> required_phonemes;
    size_t lexicon_sample = 40;
    size_t handbook_texts = 3;
    lexicon::Constraints constraints;
    std::optional<ExperimentConfig> experiment;

    static ProjectConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
    static ProjectConfig load(const std::filesystem::path& path);
    /// Paths are the resolved ones.
    nlohmann::json to_json() const;

    std::filesystem::path build_dir() const { return output_dir / build_id; }
    /// Throws ConfigError naming the first missing input.
    void check_paths() const;
};

struct StageResult {
    std::string stage;
    int exit_code = kExitOk;
    bool skipped = false;
    std::vector<std::string> failures;
    std::vector<std::filesystem::path> outputs;
    std::string summary;
};

/// Client for the configured cassette and the CONLANG_LLM_* environment, or
/// null when neither a cassette nor a provider is available.
/// CONLANG_LLM_PROVIDER=scripted with CONLANG_LLM_SCRIPT=<json array file>
/// selects canned responses.
std::shared_ptr<llm::Client> client_from_env(const ProjectConfig& cfg);

struct SourceItem {
    std::string id;
    std::string text;
    std::string source;
};

std::vector<SourceItem> load_sources(const std::filesystem::path& path);

struct GlossRecord {
    std::string id;
    std::string text;
    gloss::GlossSentence gloss;
};

std::string format_glosses(const std::vector<GlossRecord>& records);
std::vector<GlossRecord> parse_glosses(std::string_view text);

std::string assemble_handbook_prompt(const std::string& tmpl, const std::string& build_id,
                                     const phonotactics::PhonotacticGrammar& grammar,
                                     const orthography::OrthographyMap& map, const lexicon::Lexicon& lex,
                                     const std::vector<lexicon::CorpusRecord>& corpus,
                                     const morphosyntax::MorphosyntaxSpec& spec, size_t lexicon_sample,
                                     size_t text_count);

std::string assemble_translation_prompt(const std::string& tmpl, const std::string& handbook,
                                        const std::vector<GlossRecord>& samples, const std::string& new_text);

/// Lowercased, punctuation split off, whitespace tokenized.
metrics::Tokens bleu_tokens(std::string_view text);

struct ExperimentRow {
    std::string condition;
    double bigram = 0.0;
    double trigram = 0.0;
    double tetragram = 0.0;
};

/// Corpus BLEU at orders 2, 3 and 4.
ExperimentRow score_condition(const std::string& condition, const std::vector<std::string>& hyps,
                              const std::vector<std::string>& refs);
std::string format_experiment_table(const std::vector<ExperimentRow>& rows);

/// Hypothesis and reference files hold one gloss per line or JSONL with a
/// "gloss" field.
metrics::MetricReport score_files(const std::filesystem::path& hyp, const std::filesystem::path& ref,
                                  double alpha = 0.5);

class Pipeline {
public:
    explicit Pipeline(ProjectConfig cfg, std::shared_ptr<llm::Client> client = nullptr);

    const ProjectConfig& config() const { return cfg_; }
    std::filesystem::path out(const std::string& rel) const { return cfg_.build_dir() / rel; }

    StageResult phonology();
    StageResult morphosyntax();
    /// Lexicon, transcription and spelling in one stage.
    StageResult lexicon();
    /// Validates the map and checks that lexicon spellings read back.
    StageResult orthography();
    StageResult handbook();
    StageResult translate(const std::string& text);
    StageResult experiment();
    /// phonology, morphosyntax, lexicon, handbook.
    std::vector<StageResult> build();

    morphosyntax::MorphosyntaxSpec spec() const;
    morphosyntax::FeatureLabelTable labels() const;

private:
    bool fresh(const std::string& stage, const std::string& inputs) const;
    void stamp(const std::string& stage, const std::string& inputs, const std::vector<std::filesystem::path>& outputs,
               const std::string& grammar_id) const;
    std::optional<nlohmann::json> read_stamp(const std::string& stage) const;
    llm::Client& require_client(const std::string& what) const;
    llm::CompletionRequest request(std::string user) const;
    phonotactics::PhonotacticGrammar draft_grammar(StageResult& result);
    gloss::GlossSentence llm_gloss(const std::string& text);
    std::string template_text(const std::string& rel) const;

    ProjectConfig cfg_;
    std::shared_ptr<llm::Client> client_;
};

}  // namespace conlang::pipeline
