#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conlang/error.hpp"
#include "conlang/gloss.hpp"
#include "conlang/phonotactics.hpp"

namespace conlang::lexicon {

class LexiconError : public Error {
public:
    using Error::Error;
};

enum class Kind { Stem, Prefix, Suffix, FeatureWord };

std::string to_string(Kind k);
Kind kind_from_string(std::string_view s);

class ExhaustedRetries : public LexiconError {
public:
    ExhaustedRetries(Kind kind, const std::string& lemma, size_t attempts);
    Kind kind() const { return kind_; }
    const std::string& lemma() const { return lemma_; }

private:
    Kind kind_;
    std::string lemma_;
};

class MissingEntry : public LexiconError {
public:
    MissingEntry(const std::string& lemma, Kind kind);
    const std::string& lemma() const { return lemma_; }
    Kind kind() const { return kind_; }

private:
    std::string lemma_;
    Kind kind_;
};

struct Constraints {
    size_t min_stem_len = 5;
    size_t max_affix_len = 3;
    size_t max_retries = 2000;
};

struct LexiconEntry {
    std::string lemma;
    Kind kind = Kind::Stem;
    phonotactics::Morpheme phonemic;
    std::optional<std::string> orthographic;

    friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

using Key = std::pair<std::string, Kind>;

struct Lexicon {
    std::map<Key, LexiconEntry> entries;
    std::string grammar_id;
    std::uint64_t seed = 0;

    const LexiconEntry& at(const std::string& lemma, Kind kind) const;
    bool contains(const std::string& lemma, Kind kind) const;
    size_t count(Kind kind) const;
    /// Throws LexiconError on a length or uniqueness breach.
    void validate(const Constraints& c = {}) const;

    friend bool operator==(const Lexicon&, const Lexicon&) = default;
};

/// Distinct (lemma, kind) pairs in order of first appearance.
std::vector<Key> collect_morphemes(std::span<const gloss::GlossSentence> corpus);

/// Short digest of the grammar's canonical JSON.
std::string grammar_id(const phonotactics::PhonotacticGrammar& grammar);

/// Every morpheme of `corpus` gets a form. Each entry samples from its own
/// stream seeded by (kind, lemma, seed), so extending the corpus leaves old
/// entries alone. Entries already in `base` are kept as they are.
Lexicon build_lexicon(std::span<const gloss::GlossSentence> corpus, const phonotactics::PhonotacticGrammar& grammar,
                      const Constraints& constraints, std::uint64_t seed, const Lexicon* base = nullptr);

/// Morphemes of one word joined with syllable breaks.
phonotactics::Morpheme transcribe_word(const gloss::GlossWord& word, const Lexicon& lex);

std::vector<phonotactics::Morpheme> transcribe_words(const gloss::GlossSentence& sentence, const Lexicon& lex);

inline constexpr std::string_view kWordBoundary = "#";

/// Words rendered with phoneme spacing, separated by " # ".
std::string transcribe(const gloss::GlossSentence& sentence, const Lexicon& lex);

/// One JSON object per line sorted by (kind, lemma).
void save_lexicon(const Lexicon& lex, const std::filesystem::path& path);
std::string format_lexicon(const Lexicon& lex);
Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);

struct CorpusRecord {
    std::string source_text;
    gloss::GlossSentence gloss;
    std::string phonemic;
    std::optional<std::string> orthographic;

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

std::string format_corpus(std::span<const CorpusRecord> records);
/// Errors carry the 1-based line number.
std::vector<CorpusRecord> parse_corpus(std::string_view text);
void save_corpus(std::span<const CorpusRecord> records, const std::filesystem::path& path);
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

}  // namespace conlang::lexicon
