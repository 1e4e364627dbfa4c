#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conlang/error.hpp"

namespace conlang::gloss {

/// Uppercase grammatical label such as PLUR, PAST or 3SGERG.
class FeatureLabel {
public:
    /// Returns nullopt unless `text` matches [A-Z0-9]+ with at least one letter.
    static std::optional<FeatureLabel> make(std::string_view text);
    /// Throws GlossError when `text` is not a valid label.
    explicit FeatureLabel(std::string_view text);

    const std::string& text() const { return text_; }
    static bool matches(std::string_view text);

    friend bool operator==(const FeatureLabel&, const FeatureLabel&) = default;
    friend auto operator<=>(const FeatureLabel&, const FeatureLabel&) = default;

private:
    struct Unchecked {};
    FeatureLabel(Unchecked, std::string text) : text_(std::move(text)) {}
    std::string text_;
};

struct GlossWord {
    std::vector<FeatureLabel> prefixes;
    /// Lemma, or the label text when `is_feature_word` is set.
    std::string stem;
    std::vector<FeatureLabel> suffixes;
    bool is_feature_word = false;

    /// Total number of morphemes (stem plus affixes).
    size_t morpheme_count() const { return prefixes.size() + 1 + suffixes.size(); }

    static GlossWord lexical(std::string stem, std::vector<FeatureLabel> prefixes = {},
                             std::vector<FeatureLabel> suffixes = {});
    static GlossWord feature(FeatureLabel label);

    friend bool operator==(const GlossWord&, const GlossWord&) = default;
};

struct GlossSentence {
    std::vector<GlossWord> words;
    std::optional<std::string> trailing_punct;

    friend bool operator==(const GlossSentence&, const GlossSentence&) = default;
};

enum class GlossErrorKind {
    AmbiguousToken,     // two lexical morphemes, or no morphemes at all
    InvalidMorpheme,    // neither a label nor a lexical stem
    InvalidPunctuation, // symbol outside {. ? ! ,}
    LabelStemCollision, // a label equals a stem of the same sentence
};

class GlossError : public Error {
public:
    GlossError(GlossErrorKind kind, std::optional<size_t> token_index, const std::string& what);
    GlossErrorKind kind() const { return kind_; }
    /// Zero-based whitespace token index, when the error is tied to a token.
    std::optional<size_t> token_index() const { return token_index_; }

private:
    GlossErrorKind kind_;
    std::optional<size_t> token_index_;
};

/// Canonical spelling for aliased labels (PL -> PLUR, SG -> SING).
std::string canonical_label(std::string_view label);

GlossSentence parse_gloss(std::string_view text);

std::string serialize_gloss(const GlossSentence& sentence);

std::string serialize_word(const GlossWord& word);

/// Lexical stems in order; feature words and affixes are dropped.
std::vector<std::string> strip_features(const GlossSentence& sentence);

/// Checks the GlossWord/GlossSentence invariants, throwing GlossError.
void validate(const GlossSentence& sentence);

}  // namespace conlang::gloss
