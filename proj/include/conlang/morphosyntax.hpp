#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "conlang/error.hpp"
#include "conlang/gloss.hpp"

namespace conlang::morphosyntax {

class MorphosyntaxError : public Error {
public:
    using Error::Error;
};
class InvalidSpec : public MorphosyntaxError {
public:
    using MorphosyntaxError::MorphosyntaxError;
};
class InvalidSource : public MorphosyntaxError {
public:
    using MorphosyntaxError::MorphosyntaxError;
};
class MissingVerb : public InvalidSource {
public:
    using InvalidSource::InvalidSource;
};
class UnknownFeatureSet : public MorphosyntaxError {
public:
    using MorphosyntaxError::MorphosyntaxError;
};
class UnmappedFeatureValue : public MorphosyntaxError {
public:
    using MorphosyntaxError::MorphosyntaxError;
};
class TemplateMissing : public MorphosyntaxError {
public:
    using MorphosyntaxError::MorphosyntaxError;
};
class StructuringNeeded : public MorphosyntaxError {
public:
    using MorphosyntaxError::MorphosyntaxError;
};

enum class Strategy { Prefix, Suffix, PrepositionalWord, PostpositionalWord };

std::string to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct MarkedFeature {
    std::vector<std::string> values;
    Strategy strategy = Strategy::Suffix;

    bool has(std::string_view v) const;
};

struct CaseSpec {
    std::vector<std::string> case_marking;
    Strategy case_marking_strategy = Strategy::Suffix;
    std::optional<std::string> oblique_case_marking;

    bool has(std::string_view v) const;
};

struct PersonSpec {
    std::vector<std::string> person_agreement;
    Strategy person_marking_strategy = Strategy::Suffix;
    std::vector<std::string> verbal_number_agreement;
    Strategy verbal_number_marking_strategy = Strategy::Suffix;
};

struct RelativizationSpec {
    std::string relativization_order = "head-initial";      // head-initial | head-final
    std::optional<std::string> relativization_marking;      // head-marking | dependent-marking
    std::optional<std::string> relativizer_position;        // prepositional | postpositional
    std::optional<std::string> relativizer_morpheme;        // affix | word
};

struct MorphosyntaxSpec {
    std::string main_word_order = "SVO";
    std::string adj_noun_word_order = "NA";
    std::string posspron_noun_word_order = "PossN";
    std::string num_noun_word_order = "NumN";
    std::string adposition_noun_word_order = "PN";

    std::optional<CaseSpec> case_;
    std::optional<MarkedFeature> definiteness;
    std::optional<MarkedFeature> adjective_agreement;
    std::optional<MarkedFeature> comparative;
    std::optional<MarkedFeature> tense_aspect;
    std::optional<MarkedFeature> nominal_number;
    std::optional<PersonSpec> person;
    std::optional<MarkedFeature> voice;
    std::optional<MarkedFeature> mood;
    std::optional<RelativizationSpec> relativization;
    std::optional<Strategy> negation;
    std::optional<Strategy> infinitive;
    bool inclusive_exclusive = false;
    std::vector<std::string> extras;

    /// Throws InvalidSpec when a value is outside its domain or the
    /// cross-field invariants fail.
    void validate() const;
};

MorphosyntaxSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const MorphosyntaxSpec& spec);
MorphosyntaxSpec load_spec_file(const std::filesystem::path& path);

/// arabic, fijian, french, hixkaryana, mizo, turkish, vietnamese, welsh, hard.
const std::vector<std::string>& feature_set_names();
MorphosyntaxSpec load_feature_set(std::string_view name);

enum class Role { Subj, Obj, Verb, Adj, Num, Poss, Adp, Obl, Neg, RelClauseMarker, Other };

std::string to_string(Role r);
Role role_from_string(std::string_view s);

struct SourceToken {
    std::string lemma;
    Role role = Role::Other;
    std::optional<size_t> head;
    /// number, person, clusivity, tense_aspect, mood, voice, definiteness,
    /// degree, case, is_transitive_clause, is_infinitive. Values are stored in
    /// their long form ("plural", "first", "recent past", "true").
    std::map<std::string, std::string> features;

    std::optional<std::string> feature(std::string_view key) const;
    friend bool operator==(const SourceToken&, const SourceToken&) = default;
};

struct SourceSentence {
    std::vector<SourceToken> tokens;
    std::optional<std::string> trailing_punct;

    friend bool operator==(const SourceSentence&, const SourceSentence&) = default;
};

/// Bracketed notation, e.g. `[cat|SUBJ|head=1|number=pl,definiteness=def] [sleep|VERB|tense_aspect=past] .`
/// Feature values may be abbreviated (sg, pl, du, pc, 1, 2, 3, def, indef,
/// cmp, sup, eqt, incl, excl); underscores stand for spaces.
SourceSentence parse_source(std::string_view text);
std::string format_source(const SourceSentence& sentence);

/// Checks role/head structure; throws InvalidSource or MissingVerb.
void validate_source(const SourceSentence& sentence);

/// Maps (feature, value) pairs to gloss labels.
class FeatureLabelTable {
public:
    static const FeatureLabelTable& standard();
    static FeatureLabelTable from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    /// Throws UnmappedFeatureValue.
    std::string label(std::string_view feature, std::string_view value) const;
    bool contains(std::string_view feature, std::string_view value) const;
    void set(std::string feature, std::string value, std::string label);
    /// Throws MorphosyntaxError when two in-use pairs share a label or a label
    /// is not a valid feature label.
    void validate() const;

private:
    std::map<std::pair<std::string, std::string>, std::string> table_;
};

/// Permutes clause constituents and noun-phrase dependents per the spec.
/// Head indices are remapped to the new positions.
SourceSentence reorder(const SourceSentence& source, const MorphosyntaxSpec& spec);

/// Attaches labels to an already reordered sentence.
gloss::GlossSentence mark_features(const SourceSentence& reordered, const MorphosyntaxSpec& spec,
                                   const FeatureLabelTable& labels = FeatureLabelTable::standard());

/// reorder followed by mark_features.
gloss::GlossSentence transform(const SourceSentence& source, const MorphosyntaxSpec& spec,
                               const FeatureLabelTable& labels = FeatureLabelTable::standard());

/// Tokens that mark_features realizes as labels (NEG and relative clause
/// markers when the spec marks them) and therefore do not surface as stems.
bool is_absorbed(const SourceToken& token, const MorphosyntaxSpec& spec);

inline constexpr std::string_view kPreviousOutputMarker = "<<PREVIOUS_OUTPUT>>";

struct Prompt {
    std::string group;
    std::string text;
};

/// Word order first, then each active morphology group. The first prompt
/// embeds `source_text`; later ones carry kPreviousOutputMarker.
std::vector<Prompt> build_cumulative_prompts(const MorphosyntaxSpec& spec, std::string_view source_text,
                                             const std::filesystem::path& template_dir);

/// Group names in prompting order.
const std::vector<std::string>& prompt_groups();

/// Fills `{name}` slots; throws MorphosyntaxError on an unknown slot.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Deterministic extraction of a gloss from free model output.
gloss::GlossSentence structure_output(std::string_view raw);

}  // namespace conlang::morphosyntax
