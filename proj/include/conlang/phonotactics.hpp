#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "conlang/error.hpp"
#include "conlang/rng.hpp"

namespace conlang::phonotactics {

class GrammarError : public Error {
public:
    using Error::Error;
};

/// One base character plus optional modifiers; a tie bar may join a second
/// base (t͡ʃ). "C", "V", "." and "#" are reserved.
bool is_valid_ipa_symbol(std::string_view symbol);

struct PhonemeInventory {
    std::map<std::string, double> consonants;
    std::map<std::string, double> vowels;

    bool contains(std::string_view symbol) const;
    bool is_vowel(std::string_view symbol) const;
    bool is_consonant(std::string_view symbol) const;
    /// All symbols, consonants first, each group sorted.
    std::vector<std::string> symbols() const;
    void validate() const;
};

/// Reserved cluster elements that draw a phoneme from the inventory by weight.
inline constexpr std::string_view kAnyConsonant = "C";
inline constexpr std::string_view kAnyVowel = "V";

struct WeightedSequence {
    std::vector<std::string> phonemes;
    double weight = 1.0;
};

struct PhonotacticGrammar {
    PhonemeInventory inventory;
    std::vector<WeightedSequence> onset_clusters;
    std::vector<WeightedSequence> coda_clusters;
    std::vector<WeightedSequence> nucleus_patterns;
    std::map<int, double> syllable_count_distribution;
    int max_syllables = 4;

    void validate() const;
    /// Same inventory and templates, syllable count fixed at one.
    PhonotacticGrammar single_syllable() const;
};

PhonotacticGrammar grammar_from_json(const nlohmann::json& doc);
nlohmann::json grammar_to_json(const PhonotacticGrammar& grammar);
PhonotacticGrammar load_grammar(const std::string& path);

/// Phoneme sequence with syllable breaks. A break at position j sits
/// between phonemes j-1 and j.
struct Morpheme {
    std::vector<std::string> phonemes;
    std::set<size_t> syllable_breaks;

    /// "s o . d a . n i"
    std::string render() const;
    /// Tokenizes on whitespace; "." tokens become syllable breaks. Performs
    /// no inventory check (see validate_morpheme_format).
    static Morpheme parse(std::string_view rendered);

    friend bool operator==(const Morpheme&, const Morpheme&) = default;
};

Morpheme generate_morpheme(const PhonotacticGrammar& grammar, Rng& rng);

std::vector<Morpheme> sample_corpus(const PhonotacticGrammar& grammar, size_t n, std::uint64_t seed);

enum class ViolationKind { FusedCluster, UnknownSymbol, MalformedSeparator, Empty };

struct FormatViolation {
    ViolationKind kind;
    std::string token;
    size_t position = 0;  // token index in the rendered string

    friend bool operator==(const FormatViolation&, const FormatViolation&) = default;
};

std::string to_string(ViolationKind kind);

/// Splits `token` into inventory phonemes if possible (greedy longest match
/// with backtracking). Empty when no segmentation exists.
std::vector<std::string> segment(std::string_view token, const PhonemeInventory& inventory);

std::vector<FormatViolation> validate_morpheme_format(std::string_view rendered,
                                                      const PhonemeInventory& inventory);

/// Phoneme token counts over a sample, sorted by descending count then symbol.
std::vector<std::pair<std::string, size_t>> phoneme_frequencies(std::span<const Morpheme> sample);

/// Feedback text for the next round of grammar drafting: fused clusters seen
/// in the sample, the sample's phoneme frequency table, and instructions.
std::string build_refinement_report(const PhonotacticGrammar& previous_grammar,
                                    std::span<const Morpheme> sample, std::string_view target_notes);

}  // namespace conlang::phonotactics
