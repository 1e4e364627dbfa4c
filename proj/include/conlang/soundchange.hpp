#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conlang/error.hpp"
#include "conlang/phonotactics.hpp"

namespace conlang::soundchange {

class SoundChangeError : public Error {
public:
    using Error::Error;
};

class UnknownPhoneme : public SoundChangeError {
public:
    explicit UnknownPhoneme(const std::string& symbol)
        : SoundChangeError("phoneme '" + symbol + "' is not in the feature table"), symbol_(symbol) {}
    const std::string& symbol() const { return symbol_; }

private:
    std::string symbol_;
};

class RuleSyntaxError : public SoundChangeError {
public:
    using SoundChangeError::SoundChangeError;
};

/// '+', '-' or '0' (unspecified).
using FeatureVector = std::vector<char>;

class PhonemeFeatureTable {
public:
    PhonemeFeatureTable() = default;
    PhonemeFeatureTable(std::vector<std::string> feature_names, std::map<std::string, FeatureVector> rows);

    /// Tab-separated: header "segment<TAB>feature...", then one row per symbol.
    static PhonemeFeatureTable parse(std::string_view text);
    static PhonemeFeatureTable load(const std::filesystem::path& path);

    const std::vector<std::string>& feature_names() const { return names_; }
    bool contains(std::string_view symbol) const;
    /// Throws UnknownPhoneme.
    const FeatureVector& features(std::string_view symbol) const;
    /// Value of one named feature.
    char value(std::string_view symbol, std::string_view feature) const;
    size_t feature_index(std::string_view feature) const;
    std::vector<std::string> symbols() const;
    /// Symbol whose vector equals `v`, if any.
    std::optional<std::string> find(const FeatureVector& v) const;

private:
    std::vector<std::string> names_;
    std::map<std::string, FeatureVector, std::less<>> rows_;
};

/// Number of features whose values differ. Unspecified against a specified
/// value counts as a difference.
int phoneme_distance(std::string_view p, std::string_view q, const PhonemeFeatureTable& table);

inline constexpr double kCardinalityPenalty = 1.0;

/// For each phoneme of `candidate`, the distance to the closest phoneme of
/// `conlang`, summed, plus a penalty per phoneme of size difference.
double inventory_distance(const std::set<std::string>& conlang, const std::set<std::string>& candidate,
                          const PhonemeFeatureTable& table, double penalty = kCardinalityPenalty);

struct RankedInventory {
    std::string id;
    double distance = 0.0;
};

/// Ascending distance, ties broken by id.
std::vector<RankedInventory> rank_inventories(const std::set<std::string>& conlang,
                                              const std::vector<std::pair<std::string, std::set<std::string>>>& candidates,
                                              const PhonemeFeatureTable& table, double penalty = kCardinalityPenalty);

/// One position of a rule environment.
struct ContextElement {
    bool boundary = false;
    std::set<std::string> symbols;
};

struct SoundChangeRule {
    std::string notation;
    /// Target symbol -> replacement sequence (empty means deletion).
    std::map<std::string, std::vector<std::string>> mapping;
    /// Non-empty for epenthesis rules ("0 -> e / # _ s").
    std::vector<std::string> insertion;
    std::vector<ContextElement> left;
    std::vector<ContextElement> right;
    std::vector<std::pair<phonotactics::Morpheme, phonotactics::Morpheme>> examples;

    bool context_free() const { return left.empty() && right.empty(); }
};

/// `t k p -> ð x f / V _ V | a t a => a ð a ; o p e => o f e`
/// Items are symbols, classes (V, C, N) or feature matrices such as
/// `V[+nasal]`; a matrix on the right changes those features. `0` marks
/// deletion or insertion, `#` a word edge.
SoundChangeRule parse_rule(std::string_view text, const PhonemeFeatureTable* table = nullptr);

struct RuleSet {
    std::vector<SoundChangeRule> rules;
    std::string source_id;
    std::string derived_id;
};

/// One rule per line; blank lines and lines starting with '#' are skipped.
RuleSet parse_rule_file(std::string_view text, const PhonemeFeatureTable* table = nullptr);

phonotactics::Morpheme apply_rule(const SoundChangeRule& rule, const phonotactics::Morpheme& m);
phonotactics::Morpheme apply_rules(const RuleSet& rules, const phonotactics::Morpheme& m);

/// Context-free rules replace their targets; conditioned rules keep the
/// target and add the replacement.
std::set<std::string> propagate_inventory(const std::set<std::string>& parent, const RuleSet& rules);

struct ExampleFailure {
    size_t rule_index = 0;
    phonotactics::Morpheme input;
    phonotactics::Morpheme expected;
    phonotactics::Morpheme actual;
};

std::vector<ExampleFailure> check_rule_examples(const RuleSet& rules);
/// Feedback text listing each failure with input, expected and actual forms.
std::string format_failures(const RuleSet& rules, const std::vector<ExampleFailure>& failures);

struct DiachronicaEntry {
    std::string language_id;
    std::optional<std::string> parent_id;
    std::optional<std::set<std::string>> phonemes;
    RuleSet rules;
};

/// JSON array of {language_id, parent_id, phonemes, rules}.
std::vector<DiachronicaEntry> load_diachronica(const std::filesystem::path& path, const PhonemeFeatureTable& table);
std::vector<DiachronicaEntry> parse_diachronica(std::string_view text, const PhonemeFeatureTable& table);

/// Fills missing inventories from the parent by propagate_inventory.
/// Throws SoundChangeError on unknown or cyclic parents.
void expand_inventories(std::vector<DiachronicaEntry>& entries);

}  // namespace conlang::soundchange
