#include "conlang/gloss.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "conlang/utf8.hpp"

namespace conlang::gloss {

namespace {

bool is_punct(char c) { return c == '.' || c == '?' || c == '!' || c == ','; }

enum class MorphemeClass { Label, Lexical, Invalid };

/// A morpheme is lexical when it holds a letter that is not uppercase, a
/// label when it has no such letter but at least one uppercase letter.
MorphemeClass classify(std::string_view m) {
    if (m.empty()) return MorphemeClass::Invalid;
    bool has_lower = false;
    bool has_upper = false;
    for (char32_t cp : utf8::decode(m)) {
        if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (c >= 'a' && c <= 'z') {
                has_lower = true;
            } else if (c >= 'A' && c <= 'Z') {
                has_upper = true;
            } else if ((c >= '0' && c <= '9') || c == '\'') {
                // allowed in both
            } else {
                return MorphemeClass::Invalid;
            }
            continue;
        }
        if (u_isupper(static_cast<UChar32>(cp))) {
            has_upper = true;
        } else if (u_isalpha(static_cast<UChar32>(cp)) || utf8::is_modifier(cp)) {
            has_lower = true;
        } else {
            return MorphemeClass::Invalid;
        }
    }
    if (has_lower) return MorphemeClass::Lexical;
    if (has_upper) return FeatureLabel::matches(m) ? MorphemeClass::Label : MorphemeClass::Invalid;
    return MorphemeClass::Invalid;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

void check_collisions(const GlossSentence& s, const std::vector<size_t>* token_of_word) {
    std::set<std::string> stems;
    for (const auto& w : s.words)
        if (!w.is_feature_word) stems.insert(ascii_lower(w.stem));
    for (size_t i = 0; i < s.words.size(); ++i) {
        const auto& w = s.words[i];
        auto check = [&](const std::string& label) {
            if (stems.count(ascii_lower(label)))
                throw GlossError(GlossErrorKind::LabelStemCollision,
                                 token_of_word ? std::optional<size_t>((*token_of_word)[i]) : std::nullopt,
                                 "feature label '" + label + "' collides with a stem of the same sentence");
        };
        if (w.is_feature_word) check(w.stem);
        for (const auto& p : w.prefixes) check(p.text());
        for (const auto& p : w.suffixes) check(p.text());
    }
}

}  // namespace

GlossError::GlossError(GlossErrorKind kind, std::optional<size_t> token_index, const std::string& what)
    : Error(token_index ? what + " (token " + std::to_string(*token_index) + ")" : what),
      kind_(kind),
      token_index_(token_index) {}

bool FeatureLabel::matches(std::string_view text) {
    if (text.empty()) return false;
    bool letter = false;
    for (char c : text) {
        if (c >= 'A' && c <= 'Z')
            letter = true;
        else if (!(c >= '0' && c <= '9'))
            return false;
    }
    return letter;
}

std::string canonical_label(std::string_view label) {
    if (label == "PL") return "PLUR";
    if (label == "SG") return "SING";
    return std::string(label);
}

std::optional<FeatureLabel> FeatureLabel::make(std::string_view text) {
    if (!matches(text)) return std::nullopt;
    return FeatureLabel(Unchecked{}, canonical_label(text));
}

FeatureLabel::FeatureLabel(std::string_view text) {
    if (!matches(text))
        throw GlossError(GlossErrorKind::InvalidMorpheme, std::nullopt,
                         "'" + std::string(text) + "' is not a feature label");
    text_ = canonical_label(text);
}

GlossWord GlossWord::lexical(std::string stem, std::vector<FeatureLabel> prefixes,
                             std::vector<FeatureLabel> suffixes) {
    return GlossWord{std::move(prefixes), std::move(stem), std::move(suffixes), false};
}

GlossWord GlossWord::feature(FeatureLabel label) { return GlossWord{{}, label.text(), {}, true}; }

GlossSentence parse_gloss(std::string_view text) {
    GlossSentence out;
    std::vector<std::string> tokens = utf8::split_whitespace(text);
    std::vector<size_t> token_of_word;
    std::string pending_punct;

    for (size_t t = 0; t < tokens.size(); ++t) {
        std::string_view tok = tokens[t];
        size_t end = tok.size();
        while (end > 0 && is_punct(tok[end - 1])) --end;
        std::string punct(tok.substr(end));
        tok = tok.substr(0, end);

        if (tok.empty()) {
            // A bare punctuation token; only the sentence-final run is kept.
            pending_punct += punct;
            continue;
        }
        pending_punct = punct;

        std::vector<std::string_view> morphemes;
        size_t start = 0;
        while (true) {
            size_t dash = tok.find('-', start);
            morphemes.push_back(tok.substr(start, dash == std::string_view::npos ? std::string_view::npos
                                                                                  : dash - start));
            if (dash == std::string_view::npos) break;
            start = dash + 1;
        }
        bool all_empty = std::all_of(morphemes.begin(), morphemes.end(),
                                     [](std::string_view m) { return m.empty(); });
        if (all_empty)
            throw GlossError(GlossErrorKind::AmbiguousToken, t, "token '" + tokens[t] + "' has no morphemes");

        GlossWord word;
        std::optional<size_t> stem_at;
        std::vector<FeatureLabel> labels;
        for (size_t i = 0; i < morphemes.size(); ++i) {
            switch (classify(morphemes[i])) {
                case MorphemeClass::Label:
                    labels.push_back(*FeatureLabel::make(morphemes[i]));
                    break;
                case MorphemeClass::Lexical:
                    if (stem_at)
                        throw GlossError(GlossErrorKind::AmbiguousToken, t,
                                         "token '" + tokens[t] + "' has more than one lexical morpheme");
                    stem_at = labels.size();
                    word.stem = std::string(morphemes[i]);
                    break;
                case MorphemeClass::Invalid: {
                    bool symbol = !morphemes[i].empty() && std::any_of(morphemes[i].begin(), morphemes[i].end(), [](char c) {
                        auto u = static_cast<unsigned char>(c);
                        return u < 0x80 && !std::isalnum(u) && c != '\'';
                    });
                    throw GlossError(symbol ? GlossErrorKind::InvalidPunctuation : GlossErrorKind::InvalidMorpheme, t,
                                     "invalid morpheme '" + std::string(morphemes[i]) + "' in token '" + tokens[t] + "'");
                }
            }
        }
        if (stem_at) {
            word.prefixes.assign(labels.begin(), labels.begin() + static_cast<long>(*stem_at));
            word.suffixes.assign(labels.begin() + static_cast<long>(*stem_at), labels.end());
        } else if (labels.size() == 1) {
            word = GlossWord::feature(labels.front());
        } else {
            throw GlossError(GlossErrorKind::AmbiguousToken, t,
                             "token '" + tokens[t] + "' has several labels and no stem");
        }
        out.words.push_back(std::move(word));
        token_of_word.push_back(t);
    }
    if (!pending_punct.empty()) out.trailing_punct = pending_punct;
    check_collisions(out, &token_of_word);
    return out;
}

std::string serialize_word(const GlossWord& word) {
    std::string out;
    for (const auto& p : word.prefixes) out += p.text() + "-";
    out += word.stem;
    for (const auto& s : word.suffixes) out += "-" + s.text();
    return out;
}

std::string serialize_gloss(const GlossSentence& sentence) {
    std::string out;
    for (size_t i = 0; i < sentence.words.size(); ++i) {
        if (i) out += ' ';
        out += serialize_word(sentence.words[i]);
    }
    if (sentence.trailing_punct) out += *sentence.trailing_punct;
    return out;
}

std::vector<std::string> strip_features(const GlossSentence& sentence) {
    std::vector<std::string> stems;
    for (const auto& w : sentence.words)
        if (!w.is_feature_word) stems.push_back(w.stem);
    return stems;
}

void validate(const GlossSentence& sentence) {
    for (size_t i = 0; i < sentence.words.size(); ++i) {
        const auto& w = sentence.words[i];
        if (w.is_feature_word) {
            if (!w.prefixes.empty() || !w.suffixes.empty() || !FeatureLabel::matches(w.stem))
                throw GlossError(GlossErrorKind::InvalidMorpheme, i, "malformed feature word");
        } else if (w.stem.find('-') != std::string::npos || classify(w.stem) != MorphemeClass::Lexical) {
            throw GlossError(GlossErrorKind::InvalidMorpheme, i, "malformed stem '" + w.stem + "'");
        }
    }
    if (sentence.trailing_punct) {
        const auto& p = *sentence.trailing_punct;
        if (p.empty() || !std::all_of(p.begin(), p.end(), is_punct))
            throw GlossError(GlossErrorKind::InvalidPunctuation, std::nullopt, "bad trailing punctuation");
    }
    check_collisions(sentence, nullptr);
}

}  // namespace conlang::gloss
