#include "conlang/orthography.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <set>

#include "conlang/fileio.hpp"
#include "conlang/utf8.hpp"

namespace conlang::orthography {

using nlohmann::json;

namespace {

struct Range {
    char32_t lo, hi;
};

const std::map<std::string, std::vector<Range>, std::less<>>& script_ranges() {
    static const std::map<std::string, std::vector<Range>, std::less<>> table = {
        {"Latin",
         {{0x61, 0x7A}, {0x41, 0x5A}, {0xC0, 0xD6}, {0xD8, 0xF6}, {0xF8, 0x24F}, {0x250, 0x2AF}, {0x1E00, 0x1EFF},
          {0x300, 0x36F}}},
        {"Cyrillic", {{0x400, 0x52F}, {0x1C80, 0x1C8F}, {0x2DE0, 0x2DFF}, {0xA640, 0xA69F}, {0x300, 0x36F}}},
        {"Greek", {{0x370, 0x3FF}, {0x1F00, 0x1FFF}, {0x300, 0x36F}}},
        {"Arabic", {{0x600, 0x6FF}, {0x750, 0x77F}, {0x8A0, 0x8FF}}},
        {"Armenian", {{0x530, 0x58F}}},
        {"Georgian", {{0x10A0, 0x10FF}, {0x1C90, 0x1CBF}}},
        {"Hebrew", {{0x591, 0x5F4}}},
    };
    return table;
}

std::string code_point_name(char32_t cp) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
    return buf;
}

std::map<std::string, std::string> string_map(const json& doc, const char* key) {
    if (!doc.contains(key) || doc[key].is_null()) return {};
    return doc[key].get<std::map<std::string, std::string>>();
}

}  // namespace

const std::string& OrthographyMap::grapheme(const std::string& phoneme, Position pos) const {
    if (pos == Position::Initial)
        if (auto it = initial.find(phoneme); it != initial.end()) return it->second;
    if (pos == Position::Final)
        if (auto it = final.find(phoneme); it != final.end()) return it->second;
    auto it = mapping.find(phoneme);
    if (it == mapping.end()) throw UnmappedPhoneme(phoneme);
    return it->second;
}

OrthographyMap map_from_json(const json& doc) {
    OrthographyMap m;
    try {
        m.script_tag = doc.at("script_tag").get<std::string>();
        m.mapping = doc.at("mapping").get<std::map<std::string, std::string>>();
        m.initial = string_map(doc, "initial");
        m.final = string_map(doc, "final");
    } catch (const json::exception& e) {
        throw OrthographyError(std::string("malformed orthography map: ") + e.what());
    }
    return m;
}

json map_to_json(const OrthographyMap& m) {
    json doc = {{"script_tag", m.script_tag}, {"mapping", m.mapping}};
    if (!m.initial.empty()) doc["initial"] = m.initial;
    if (!m.final.empty()) doc["final"] = m.final;
    return doc;
}

OrthographyMap load_map(const std::filesystem::path& path) {
    try {
        return map_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw OrthographyError(path.string() + ": " + e.what());
    }
}

const std::vector<std::string>& known_scripts() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : script_ranges()) v.push_back(k);
        return v;
    }();
    return names;
}

bool in_script(std::string_view script_tag, char32_t cp) {
    if (cp == U'\'' || cp == U'-') return true;
    auto it = script_ranges().find(script_tag);
    if (it == script_ranges().end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const Range& r) { return cp >= r.lo && cp <= r.hi; });
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::MissingPhoneme: return "MissingPhoneme";
        case ViolationKind::DuplicateGrapheme: return "DuplicateGrapheme";
        case ViolationKind::ScriptRangeViolation: return "ScriptRangeViolation";
        case ViolationKind::EmptyGrapheme: return "EmptyGrapheme";
        case ViolationKind::UnknownScript: return "UnknownScript";
    }
    return "?";
}

std::vector<MapViolation> validate_map(const OrthographyMap& map, std::span<const std::string> inventory) {
    std::vector<MapViolation> out;
    bool known = script_ranges().count(map.script_tag) > 0;
    if (!known) out.push_back({ViolationKind::UnknownScript, "", "", "no character table for '" + map.script_tag + "'"});
    for (const auto& p : inventory)
        if (!map.mapping.count(p)) out.push_back({ViolationKind::MissingPhoneme, p, "", "phoneme has no grapheme"});

    std::map<std::string, std::string> owner;
    auto check = [&](const std::map<std::string, std::string>& table) {
        for (const auto& [p, g] : table) {
            if (g.empty()) {
                out.push_back({ViolationKind::EmptyGrapheme, p, g, "empty grapheme"});
                continue;
            }
            auto [it, fresh] = owner.emplace(g, p);
            if (!fresh && it->second != p)
                out.push_back({ViolationKind::DuplicateGrapheme, p, g, "also used for '" + it->second + "'"});
            if (known)
                for (char32_t cp : utf8::decode(g))
                    if (!in_script(map.script_tag, cp)) {
                        out.push_back({ViolationKind::ScriptRangeViolation, p, g,
                                       code_point_name(cp) + " is outside " + map.script_tag});
                        break;
                    }
        }
    };
    check(map.mapping);
    check(map.initial);
    check(map.final);
    return out;
}

std::vector<MapViolation> validate_map(const OrthographyMap& map, const phonotactics::PhonemeInventory& inventory) {
    auto symbols = inventory.symbols();
    return validate_map(map, std::span<const std::string>(symbols));
}

std::optional<std::pair<std::string, std::string>> prefix_conflict(const OrthographyMap& map) {
    std::set<std::string> graphemes;
    for (const auto* t : {&map.mapping, &map.initial, &map.final})
        for (const auto& [_, g] : *t) graphemes.insert(g);
    // In sorted order a grapheme's extensions follow it directly.
    for (auto it = graphemes.begin(); it != graphemes.end(); ++it) {
        auto next = std::next(it);
        if (next != graphemes.end() && next->compare(0, it->size(), *it) == 0) return std::make_pair(*it, *next);
    }
    return std::nullopt;
}

std::string apply_orthography(const phonotactics::Morpheme& word, const OrthographyMap& map) {
    std::string out;
    const size_t n = word.phonemes.size();
    for (size_t i = 0; i < n; ++i) {
        Position pos = i == 0 ? Position::Initial : (i + 1 == n ? Position::Final : Position::Medial);
        if (n == 1 && map.final.count(word.phonemes[i]) && !map.initial.count(word.phonemes[i])) pos = Position::Final;
        out += map.grapheme(word.phonemes[i], pos);
    }
    return out;
}

std::string write_sentence(std::span<const phonotactics::Morpheme> words, const OrthographyMap& map,
                           const std::optional<std::string>& trailing_punct) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += apply_orthography(w, map);
    }
    if (trailing_punct) out += *trailing_punct;
    return out;
}

InverseMap invert(const OrthographyMap& map) {
    if (auto c = prefix_conflict(map))
        throw NotInvertible("grapheme '" + c->first + "' is a prefix of '" + c->second + "'");
    InverseMap inv;
    std::map<std::string, std::string> owner;
    auto add = [&](const std::map<std::string, std::string>& table, Position pos) {
        for (const auto& [p, g] : table) {
            if (g.empty()) throw NotInvertible("empty grapheme for '" + p + "'");
            auto [it, fresh] = owner.emplace(g, p);
            if (!fresh && it->second != p)
                throw NotInvertible("grapheme '" + g + "' used for '" + it->second + "' and '" + p + "'");
            inv.table_[g].push_back({p, pos});
        }
    };
    add(map.mapping, Position::Medial);
    add(map.initial, Position::Initial);
    add(map.final, Position::Final);
    return inv;
}

std::vector<std::string> InverseMap::decode(std::string_view word) const {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < word.size()) {
        bool found = false;
        for (size_t len = 1; i + len <= word.size() && !found; ++len) {
            auto it = table_.find(std::string(word.substr(i, len)));
            if (it == table_.end()) continue;
            out.push_back(it->second.front().phoneme);
            i += len;
            found = true;
        }
        if (!found) throw OrthographyError("cannot decode '" + std::string(word.substr(i)) + "'");
    }
    return out;
}

}  // namespace conlang::orthography
