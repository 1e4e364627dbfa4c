#include "conlang/lexicon.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "conlang/digest.hpp"
#include "conlang/fileio.hpp"
#include "conlang/rng.hpp"

namespace conlang::lexicon {

using nlohmann::json;
using phonotactics::Morpheme;

std::string to_string(Kind k) {
    switch (k) {
        case Kind::Stem: return "stem";
        case Kind::Prefix: return "prefix";
        case Kind::Suffix: return "suffix";
        case Kind::FeatureWord: return "feature_word";
    }
    return "?";
}

Kind kind_from_string(std::string_view s) {
    if (s == "stem") return Kind::Stem;
    if (s == "prefix") return Kind::Prefix;
    if (s == "suffix") return Kind::Suffix;
    if (s == "feature_word") return Kind::FeatureWord;
    throw LexiconError("unknown morpheme kind '" + std::string(s) + "'");
}

ExhaustedRetries::ExhaustedRetries(Kind kind, const std::string& lemma, size_t attempts)
    : LexiconError("no free " + to_string(kind) + " form for '" + lemma + "' after " + std::to_string(attempts) +
                   " attempts"),
      kind_(kind),
      lemma_(lemma) {}

MissingEntry::MissingEntry(const std::string& lemma, Kind kind)
    : LexiconError("no lexicon entry for " + to_string(kind) + " '" + lemma + "'"), lemma_(lemma), kind_(kind) {}

const LexiconEntry& Lexicon::at(const std::string& lemma, Kind kind) const {
    auto it = entries.find({lemma, kind});
    if (it == entries.end()) throw MissingEntry(lemma, kind);
    return it->second;
}

bool Lexicon::contains(const std::string& lemma, Kind kind) const { return entries.count({lemma, kind}) > 0; }

size_t Lexicon::count(Kind kind) const {
    return static_cast<size_t>(
        std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first.second == kind; }));
}

namespace {

bool length_ok(Kind kind, size_t n, const Constraints& c) {
    if (n == 0) return false;
    return kind == Kind::Stem ? n >= c.min_stem_len : n <= c.max_affix_len;
}

}  // namespace

void Lexicon::validate(const Constraints& c) const {
    std::map<Kind, std::set<std::vector<std::string>>> seen;
    for (const auto& [key, e] : entries) {
        if (key.first != e.lemma || key.second != e.kind) throw LexiconError("entry key mismatch for '" + e.lemma + "'");
        if (!length_ok(e.kind, e.phonemic.phonemes.size(), c))
            throw LexiconError(to_string(e.kind) + " '" + e.lemma + "' has " +
                               std::to_string(e.phonemic.phonemes.size()) + " phonemes");
        if (!seen[e.kind].insert(e.phonemic.phonemes).second)
            throw LexiconError("duplicate " + to_string(e.kind) + " form " + e.phonemic.render());
    }
}

std::vector<Key> collect_morphemes(std::span<const gloss::GlossSentence> corpus) {
    std::vector<Key> out;
    std::set<Key> seen;
    auto add = [&](const std::string& lemma, Kind kind) {
        if (seen.insert({lemma, kind}).second) out.emplace_back(lemma, kind);
    };
    for (const auto& s : corpus)
        for (const auto& w : s.words) {
            if (w.is_feature_word) {
                add(w.stem, Kind::FeatureWord);
                continue;
            }
            for (const auto& p : w.prefixes) add(p.text(), Kind::Prefix);
            add(w.stem, Kind::Stem);
            for (const auto& x : w.suffixes) add(x.text(), Kind::Suffix);
        }
    return out;
}

std::string grammar_id(const phonotactics::PhonotacticGrammar& grammar) {
    return sha256_hex(phonotactics::grammar_to_json(grammar).dump()).substr(0, 16);
}

Lexicon build_lexicon(std::span<const gloss::GlossSentence> corpus, const phonotactics::PhonotacticGrammar& grammar,
                      const Constraints& constraints, std::uint64_t seed, const Lexicon* base) {
    grammar.validate();
    Lexicon lex;
    if (base) lex = *base;
    lex.grammar_id = grammar_id(grammar);
    lex.seed = seed;
    const auto short_grammar = grammar.single_syllable();

    std::map<Kind, std::set<std::vector<std::string>>> taken;
    for (const auto& [key, e] : lex.entries) taken[key.second].insert(e.phonemic.phonemes);

    for (const auto& [lemma, kind] : collect_morphemes(corpus)) {
        if (lex.contains(lemma, kind)) continue;
        Rng rng(sha256_u64(to_string(kind) + "\t" + lemma + "\t" + std::to_string(seed)));
        const auto& g = kind == Kind::Stem ? grammar : short_grammar;
        std::optional<Morpheme> form;
        for (size_t attempt = 0; attempt < constraints.max_retries && !form; ++attempt) {
            auto m = phonotactics::generate_morpheme(g, rng);
            if (length_ok(kind, m.phonemes.size(), constraints) && !taken[kind].count(m.phonemes)) form = m;
        }
        if (!form) throw ExhaustedRetries(kind, lemma, constraints.max_retries);
        taken[kind].insert(form->phonemes);
        lex.entries[{lemma, kind}] = LexiconEntry{lemma, kind, *form, std::nullopt};
    }
    return lex;
}

Morpheme transcribe_word(const gloss::GlossWord& word, const Lexicon& lex) {
    Morpheme out;
    auto append = [&](const Morpheme& m) {
        if (!out.phonemes.empty()) out.syllable_breaks.insert(out.phonemes.size());
        size_t offset = out.phonemes.size();
        for (size_t b : m.syllable_breaks) out.syllable_breaks.insert(offset + b);
        out.phonemes.insert(out.phonemes.end(), m.phonemes.begin(), m.phonemes.end());
    };
    if (word.is_feature_word) {
        append(lex.at(word.stem, Kind::FeatureWord).phonemic);
        return out;
    }
    for (const auto& p : word.prefixes) append(lex.at(p.text(), Kind::Prefix).phonemic);
    append(lex.at(word.stem, Kind::Stem).phonemic);
    for (const auto& s : word.suffixes) append(lex.at(s.text(), Kind::Suffix).phonemic);
    return out;
}

std::vector<Morpheme> transcribe_words(const gloss::GlossSentence& sentence, const Lexicon& lex) {
    std::vector<Morpheme> out;
    for (const auto& w : sentence.words) out.push_back(transcribe_word(w, lex));
    return out;
}

std::string transcribe(const gloss::GlossSentence& sentence, const Lexicon& lex) {
    std::string out;
    for (const auto& m : transcribe_words(sentence, lex)) {
        if (!out.empty()) out += " " + std::string(kWordBoundary) + " ";
        out += m.render();
    }
    return out;
}

std::string format_lexicon(const Lexicon& lex) {
    std::vector<const LexiconEntry*> sorted;
    for (const auto& [_, e] : lex.entries) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const LexiconEntry* a, const LexiconEntry* b) {
        auto ka = to_string(a->kind), kb = to_string(b->kind);
        return ka != kb ? ka < kb : a->lemma < b->lemma;
    });
    std::string out;
    for (const auto* e : sorted) {
        json j = {{"lemma", e->lemma}, {"kind", to_string(e->kind)}, {"phonemic", e->phonemic.render()}};
        j["orthographic"] = e->orthographic ? json(*e->orthographic) : json(nullptr);
        out += j.dump() + "\n";
    }
    return out;
}

Lexicon parse_lexicon(std::string_view text) {
    Lexicon lex;
    size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            LexiconEntry e;
            e.lemma = j.at("lemma").get<std::string>();
            e.kind = kind_from_string(j.at("kind").get<std::string>());
            e.phonemic = Morpheme::parse(j.at("phonemic").get<std::string>());
            if (j.contains("orthographic") && !j["orthographic"].is_null())
                e.orthographic = j["orthographic"].get<std::string>();
            Key key{e.lemma, e.kind};
            if (!lex.entries.emplace(key, std::move(e)).second) throw LexiconError("duplicate entry");
        } catch (const std::exception& ex) {
            throw LexiconError("lexicon line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return lex;
}

void save_lexicon(const Lexicon& lex, const std::filesystem::path& path) { write_file_atomic(path, format_lexicon(lex)); }

Lexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(read_file(path)); }

std::string format_corpus(std::span<const CorpusRecord> records) {
    std::string out;
    for (const auto& r : records) {
        json j = {{"source_text", r.source_text}, {"gloss", gloss::serialize_gloss(r.gloss)}, {"phonemic", r.phonemic}};
        if (r.orthographic) j["orthographic"] = *r.orthographic;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<CorpusRecord> parse_corpus(std::string_view text) {
    std::vector<CorpusRecord> out;
    size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            CorpusRecord r;
            r.source_text = j.at("source_text").get<std::string>();
            r.gloss = gloss::parse_gloss(j.at("gloss").get<std::string>());
            r.phonemic = j.at("phonemic").get<std::string>();
            if (j.contains("orthographic") && !j["orthographic"].is_null())
                r.orthographic = j["orthographic"].get<std::string>();
            out.push_back(std::move(r));
        } catch (const std::exception& ex) {
            throw LexiconError("corpus line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

void save_corpus(std::span<const CorpusRecord> records, const std::filesystem::path& path) {
    write_file_atomic(path, format_corpus(records));
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) { return parse_corpus(read_file(path)); }

}  // namespace conlang::lexicon
