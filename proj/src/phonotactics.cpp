#include "conlang/phonotactics.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "conlang/utf8.hpp"

namespace conlang::phonotactics {

using nlohmann::json;

bool is_valid_ipa_symbol(std::string_view symbol) {
    if (symbol.empty() || symbol == kAnyConsonant || symbol == kAnyVowel) return false;
    auto cps = utf8::decode(symbol);
    size_t i = 0;
    auto base = [&] {
        if (i >= cps.size()) return false;
        char32_t cp = cps[i];
        if (utf8::is_modifier(cp) || !u_isalpha(static_cast<UChar32>(cp))) return false;
        ++i;
        return true;
    };
    if (!base()) return false;
    bool tied = false;
    while (i < cps.size() && utf8::is_modifier(cps[i])) tied |= utf8::is_tie_bar(cps[i++]);
    if (tied) {
        if (!base()) return false;
        while (i < cps.size() && utf8::is_modifier(cps[i])) {
            if (utf8::is_tie_bar(cps[i])) return false;
            ++i;
        }
    }
    return i == cps.size();
}

bool PhonemeInventory::contains(std::string_view s) const { return is_vowel(s) || is_consonant(s); }

bool PhonemeInventory::is_vowel(std::string_view s) const { return vowels.count(std::string(s)) > 0; }

bool PhonemeInventory::is_consonant(std::string_view s) const { return consonants.count(std::string(s)) > 0; }

std::vector<std::string> PhonemeInventory::symbols() const {
    std::vector<std::string> out;
    for (const auto& [s, w] : consonants) out.push_back(s);
    for (const auto& [s, w] : vowels) out.push_back(s);
    return out;
}

void PhonemeInventory::validate() const {
    if (consonants.empty() && vowels.empty()) throw GrammarError("phoneme inventory is empty");
    auto check = [](const std::map<std::string, double>& group, const char* name) {
        for (const auto& [s, w] : group) {
            if (!is_valid_ipa_symbol(s)) throw GrammarError(std::string(name) + " symbol '" + s + "' is not a valid IPA symbol");
            if (!(w > 0.0)) throw GrammarError(std::string(name) + " weight for '" + s + "' must be positive");
        }
    };
    check(consonants, "consonant");
    check(vowels, "vowel");
    for (const auto& [s, w] : consonants)
        if (vowels.count(s)) throw GrammarError("'" + s + "' is listed as both consonant and vowel");
}

namespace {

void check_sequences(const PhonemeInventory& inv, const std::vector<WeightedSequence>& seqs, const char* name,
                     bool allow_empty_sequence) {
    if (seqs.empty()) throw GrammarError(std::string(name) + " must not be empty");
    for (const auto& seq : seqs) {
        if (!(seq.weight > 0.0)) throw GrammarError(std::string(name) + " weights must be positive");
        if (seq.phonemes.empty() && !allow_empty_sequence)
            throw GrammarError(std::string(name) + " may not contain an empty sequence");
        for (const auto& p : seq.phonemes) {
            if (p == kAnyConsonant) {
                if (inv.consonants.empty()) throw GrammarError(std::string(name) + " uses C but there are no consonants");
            } else if (p == kAnyVowel) {
                if (inv.vowels.empty()) throw GrammarError(std::string(name) + " uses V but there are no vowels");
            } else if (!inv.contains(p)) {
                throw GrammarError(std::string(name) + " uses '" + p + "', which is not in the inventory");
            }
        }
    }
}

const std::string& draw_from(const std::map<std::string, double>& group, Rng& rng) {
    std::vector<double> weights;
    weights.reserve(group.size());
    for (const auto& [s, w] : group) weights.push_back(w);
    size_t k = rng.pick(weights);
    auto it = group.begin();
    std::advance(it, static_cast<long>(k));
    return it->first;
}

const WeightedSequence& draw_sequence(const std::vector<WeightedSequence>& seqs, Rng& rng) {
    std::vector<double> weights;
    weights.reserve(seqs.size());
    for (const auto& s : seqs) weights.push_back(s.weight);
    return seqs[rng.pick(weights)];
}

std::vector<WeightedSequence> sequences_from_json(const json& arr, const char* key) {
    if (!arr.is_array()) throw GrammarError(std::string(key) + " must be an array");
    std::vector<WeightedSequence> out;
    for (const auto& item : arr) {
        WeightedSequence seq;
        if (item.is_object()) {
            seq.phonemes = item.at("phonemes").get<std::vector<std::string>>();
            seq.weight = item.value("weight", 1.0);
        } else if (item.is_array() && item.size() == 2 && item[0].is_array()) {
            seq.phonemes = item[0].get<std::vector<std::string>>();
            seq.weight = item[1].get<double>();
        } else {
            throw GrammarError(std::string(key) + " entries must be {\"phonemes\": [...], \"weight\": w}");
        }
        out.push_back(std::move(seq));
    }
    return out;
}

json sequences_to_json(const std::vector<WeightedSequence>& seqs) {
    json arr = json::array();
    for (const auto& s : seqs) arr.push_back({{"phonemes", s.phonemes}, {"weight", s.weight}});
    return arr;
}

}  // namespace

void PhonotacticGrammar::validate() const {
    inventory.validate();
    check_sequences(inventory, onset_clusters, "onset_clusters", true);
    check_sequences(inventory, coda_clusters, "coda_clusters", true);
    check_sequences(inventory, nucleus_patterns, "nucleus_patterns", false);
    for (const auto& seq : nucleus_patterns)
        for (const auto& p : seq.phonemes)
            if (p != kAnyVowel && !inventory.is_vowel(p))
                throw GrammarError("nucleus_patterns may only contain vowels; found '" + p + "'");
    if (syllable_count_distribution.empty()) throw GrammarError("syllable_count_distribution must not be empty");
    if (max_syllables < 1) throw GrammarError("max_syllables must be at least 1");
    for (const auto& [k, w] : syllable_count_distribution) {
        if (k < 1 || k > max_syllables)
            throw GrammarError("syllable count " + std::to_string(k) + " outside 1.." + std::to_string(max_syllables));
        if (!(w > 0.0)) throw GrammarError("syllable count weights must be positive");
    }
}

PhonotacticGrammar PhonotacticGrammar::single_syllable() const {
    PhonotacticGrammar g = *this;
    g.syllable_count_distribution = {{1, 1.0}};
    return g;
}

PhonotacticGrammar grammar_from_json(const json& doc) {
    PhonotacticGrammar g;
    try {
        g.inventory.consonants = doc.at("consonants").get<std::map<std::string, double>>();
        g.inventory.vowels = doc.at("vowels").get<std::map<std::string, double>>();
        g.onset_clusters = sequences_from_json(doc.at("onset_clusters"), "onset_clusters");
        g.coda_clusters = sequences_from_json(doc.at("coda_clusters"), "coda_clusters");
        g.nucleus_patterns = sequences_from_json(doc.at("nucleus_patterns"), "nucleus_patterns");
        for (const auto& [k, w] : doc.at("syllable_count_distribution").items()) {
            size_t used = 0;
            int count = std::stoi(k, &used);
            if (used != k.size()) throw GrammarError("syllable count key '" + k + "' is not an integer");
            g.syllable_count_distribution[count] = w.get<double>();
        }
        g.max_syllables = doc.value("max_syllables", 4);
    } catch (const json::exception& e) {
        throw GrammarError(std::string("malformed grammar document: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw GrammarError("syllable_count_distribution keys must be integers");
    }
    g.validate();
    return g;
}

json grammar_to_json(const PhonotacticGrammar& g) {
    json dist = json::object();
    for (const auto& [k, w] : g.syllable_count_distribution) dist[std::to_string(k)] = w;
    return json{{"consonants", g.inventory.consonants},
                {"vowels", g.inventory.vowels},
                {"onset_clusters", sequences_to_json(g.onset_clusters)},
                {"coda_clusters", sequences_to_json(g.coda_clusters)},
                {"nucleus_patterns", sequences_to_json(g.nucleus_patterns)},
                {"syllable_count_distribution", dist},
                {"max_syllables", g.max_syllables}};
}

PhonotacticGrammar load_grammar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GrammarError("cannot open grammar file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw GrammarError(path + ": " + e.what());
    }
    return grammar_from_json(doc);
}

std::string Morpheme::render() const {
    std::string out;
    for (size_t i = 0; i < phonemes.size(); ++i) {
        if (i) out += syllable_breaks.count(i) ? " . " : " ";
        out += phonemes[i];
    }
    return out;
}

Morpheme Morpheme::parse(std::string_view rendered) {
    Morpheme m;
    for (auto& tok : utf8::split_whitespace(rendered)) {
        if (tok == ".") {
            if (!m.phonemes.empty()) m.syllable_breaks.insert(m.phonemes.size());
            continue;
        }
        m.phonemes.push_back(std::move(tok));
    }
    // Breaks at the very end carry no information.
    m.syllable_breaks.erase(m.phonemes.size());
    return m;
}

Morpheme generate_morpheme(const PhonotacticGrammar& g, Rng& rng) {
    std::vector<double> count_weights;
    std::vector<int> counts;
    for (const auto& [k, w] : g.syllable_count_distribution) {
        counts.push_back(k);
        count_weights.push_back(w);
    }
    int syllables = counts[rng.pick(count_weights)];

    Morpheme m;
    auto emit = [&](const WeightedSequence& seq) {
        for (const auto& p : seq.phonemes) {
            if (p == kAnyConsonant)
                m.phonemes.push_back(draw_from(g.inventory.consonants, rng));
            else if (p == kAnyVowel)
                m.phonemes.push_back(draw_from(g.inventory.vowels, rng));
            else
                m.phonemes.push_back(p);
        }
    };
    for (int s = 0; s < syllables; ++s) {
        if (s > 0) m.syllable_breaks.insert(m.phonemes.size());
        emit(draw_sequence(g.onset_clusters, rng));
        emit(draw_sequence(g.nucleus_patterns, rng));
        emit(draw_sequence(g.coda_clusters, rng));
    }
    return m;
}

std::vector<Morpheme> sample_corpus(const PhonotacticGrammar& grammar, size_t n, std::uint64_t seed) {
    if (n == 0) throw GrammarError("sample size must be at least 1");
    grammar.validate();
    Rng rng(seed);
    std::vector<Morpheme> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(generate_morpheme(grammar, rng));
    return out;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::FusedCluster: return "FusedCluster";
        case ViolationKind::UnknownSymbol: return "UnknownSymbol";
        case ViolationKind::MalformedSeparator: return "MalformedSeparator";
        case ViolationKind::Empty: return "Empty";
    }
    return "?";
}

std::vector<std::string> segment(std::string_view token, const PhonemeInventory& inventory) {
    auto cps = utf8::code_points(token);
    const size_t n = cps.size();
    // best[i]: a segmentation of cps[i..n) exists; next[i]: end of the first piece.
    std::vector<int> next(n + 1, -1);
    std::vector<bool> ok(n + 1, false);
    ok[n] = true;
    for (size_t i = n; i-- > 0;) {
        std::string piece;
        for (size_t j = i; j < n; ++j) {
            piece += cps[j];
            if (ok[j + 1] && inventory.contains(piece)) {
                ok[i] = true;
                next[i] = static_cast<int>(j + 1);  // keep the longest piece
            }
        }
    }
    if (!ok[0]) return {};
    std::vector<std::string> out;
    for (size_t i = 0; i < n;) {
        auto j = static_cast<size_t>(next[i]);
        std::string piece;
        for (size_t k = i; k < j; ++k) piece += cps[k];
        out.push_back(std::move(piece));
        i = j;
    }
    return out;
}

std::vector<FormatViolation> validate_morpheme_format(std::string_view rendered, const PhonemeInventory& inventory) {
    std::vector<FormatViolation> out;
    auto tokens = utf8::split_whitespace(rendered);
    if (tokens.empty()) {
        out.push_back({ViolationKind::Empty, "", 0});
        return out;
    }
    bool separator_ok = true;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        if (tok == ".") {
            bool edge = i == 0 || i + 1 == tokens.size();
            bool doubled = i > 0 && tokens[i - 1] == ".";
            if (separator_ok && (edge || doubled)) {
                out.push_back({ViolationKind::MalformedSeparator, tok, i});
                separator_ok = false;
            }
            continue;
        }
        if (inventory.contains(tok)) continue;
        bool glued_dot = tok.find('.') != std::string::npos;
        if (glued_dot && separator_ok) {
            out.push_back({ViolationKind::MalformedSeparator, tok, i});
            separator_ok = false;
            continue;
        }
        auto pieces = segment(tok, inventory);
        out.push_back({pieces.size() >= 2 ? ViolationKind::FusedCluster : ViolationKind::UnknownSymbol, tok, i});
    }
    return out;
}

std::vector<std::pair<std::string, size_t>> phoneme_frequencies(std::span<const Morpheme> sample) {
    std::map<std::string, size_t> counts;
    for (const auto& m : sample)
        for (const auto& p : m.phonemes) ++counts[p];
    std::vector<std::pair<std::string, size_t>> out(counts.begin(), counts.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::string build_refinement_report(const PhonotacticGrammar& previous_grammar, std::span<const Morpheme> sample,
                                    std::string_view target_notes) {
    if (sample.empty()) throw GrammarError("refinement report needs a non-empty sample");
    std::vector<std::string> fused;
    std::vector<std::string> unknown;
    std::set<std::string> seen;
    for (const auto& m : sample) {
        for (const auto& v : validate_morpheme_format(m.render(), previous_grammar.inventory)) {
            if (!seen.insert(to_string(v.kind) + v.token).second) continue;
            if (v.kind == ViolationKind::FusedCluster) fused.push_back(v.token);
            if (v.kind == ViolationKind::UnknownSymbol) unknown.push_back(v.token);
        }
    }

    std::ostringstream out;
    out << "## Fused phoneme sequences\n";
    if (fused.empty()) {
        out << "(none)\n";
    } else {
        out << "The following tokens combine several phonemes without spaces between them. "
               "Every phoneme in a morpheme must be separated by a space:\n"
            << utf8::join(fused, ", ") << "\n";
    }
    out << "\n## Symbols not in the inventory\n";
    out << (unknown.empty() ? std::string("(none)") : utf8::join(unknown, ", ")) << "\n";

    auto freqs = phoneme_frequencies(sample);
    size_t total = 0;
    for (const auto& [p, c] : freqs) total += c;
    out << "\n## Phoneme frequencies in a sample of " << sample.size() << " morphemes (" << total
        << " phoneme tokens)\n";
    for (const auto& [p, c] : freqs) {
        out << p << "\t" << c << "\t" << std::fixed << std::setprecision(2)
            << (100.0 * static_cast<double>(c) / static_cast<double>(total)) << "%\n";
    }
    out << "\n## Sample morphemes\n";
    for (size_t i = 0; i < sample.size() && i < 20; ++i) out << sample[i].render() << "\n";
    if (!target_notes.empty()) out << "\n## Target language notes\n" << target_notes << "\n";
    out << "\n## Instructions\n"
           "Revise the grammar so that the generated morphemes resemble the target language more closely. "
           "Check whether characteristic phonemes of the target language are missing from the inventory, "
           "and whether any listed phoneme does not belong. Compare the frequency table above with the "
           "expected frequencies of the target language and adjust the weights. Return the complete "
           "revised grammar as a JSON document.\n";
    return out.str();
}

}  // namespace conlang::phonotactics
