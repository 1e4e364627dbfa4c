#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "conlang/error.hpp"
#include "conlang/phonotactics.hpp"

namespace conlang::orthography {

class OrthographyError : public Error {
public:
    using Error::Error;
};

class UnmappedPhoneme : public OrthographyError {
public:
    explicit UnmappedPhoneme(const std::string& phoneme)
        : OrthographyError("no grapheme for phoneme '" + phoneme + "'"), phoneme_(phoneme) {}
    const std::string& phoneme() const { return phoneme_; }

private:
    std::string phoneme_;
};

class NotInvertible : public OrthographyError {
public:
    using OrthographyError::OrthographyError;
};

enum class Position { Initial, Medial, Final };

struct OrthographyMap {
    std::string script_tag;
    std::map<std::string, std::string> mapping;
    /// Optional positional variants (e.g. Greek final sigma).
    std::map<std::string, std::string> initial;
    std::map<std::string, std::string> final;

    /// Throws UnmappedPhoneme.
    const std::string& grapheme(const std::string& phoneme, Position pos) const;
};

OrthographyMap map_from_json(const nlohmann::json& doc);
nlohmann::json map_to_json(const OrthographyMap& map);
OrthographyMap load_map(const std::filesystem::path& path);

/// Script tags with a bundled character range table.
const std::vector<std::string>& known_scripts();
/// Apostrophe and hyphen are accepted for every script.
bool in_script(std::string_view script_tag, char32_t cp);

enum class ViolationKind { MissingPhoneme, DuplicateGrapheme, ScriptRangeViolation, EmptyGrapheme, UnknownScript };

std::string to_string(ViolationKind kind);

struct MapViolation {
    ViolationKind kind;
    std::string phoneme;
    std::string grapheme;
    std::string detail;
};

std::vector<MapViolation> validate_map(const OrthographyMap& map, std::span<const std::string> inventory);
std::vector<MapViolation> validate_map(const OrthographyMap& map, const phonotactics::PhonemeInventory& inventory);

/// First pair of distinct graphemes where one is a prefix of the other.
std::optional<std::pair<std::string, std::string>> prefix_conflict(const OrthographyMap& map);

/// Graphemes concatenated; syllable breaks dropped; lowercase only.
std::string apply_orthography(const phonotactics::Morpheme& word, const OrthographyMap& map);

/// Words joined by single spaces, punctuation appended.
std::string write_sentence(std::span<const phonotactics::Morpheme> words, const OrthographyMap& map,
                           const std::optional<std::string>& trailing_punct = std::nullopt);

class InverseMap {
public:
    /// Phonemes of one written word; throws OrthographyError when the text
    /// does not decode.
    std::vector<std::string> decode(std::string_view word) const;

private:
    friend InverseMap invert(const OrthographyMap& map);
    struct Target {
        std::string phoneme;
        Position pos;
    };
    std::map<std::string, std::vector<Target>> table_;
};

/// Throws NotInvertible unless the grapheme set is a prefix code and each
/// grapheme names a single phoneme.
InverseMap invert(const OrthographyMap& map);

}  // namespace conlang::orthography
