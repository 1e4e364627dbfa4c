#include <algorithm>
#include <deque>
#include <functional>

#include "conlang/morphosyntax.hpp"

namespace conlang::morphosyntax {

namespace {

bool is_noun(Role r) { return r == Role::Subj || r == Role::Obj || r == Role::Obl || r == Role::Poss; }

using Indices = std::vector<size_t>;

struct Tree {
    const std::vector<SourceToken>& tokens;
    std::vector<Indices> children;

    explicit Tree(const std::vector<SourceToken>& t) : tokens(t), children(t.size()) {
        for (size_t i = 0; i < t.size(); ++i)
            if (t[i].head) children[*t[i].head].push_back(i);
    }

    std::optional<size_t> child_with_role(size_t i, Role r) const {
        for (size_t c : children[i])
            if (tokens[c].role == r) return c;
        return std::nullopt;
    }
};

struct Unit {
    size_t anchor;
    char slot;  // 'S', 'O', 'V' or 'X'
    Indices tokens;
};

class Reorderer {
public:
    Reorderer(const Tree& tree, const MorphosyntaxSpec& spec) : tree_(tree), spec_(spec) {}

    Indices clause(size_t verb, bool main) const {
        const auto& t = tree_.tokens;
        std::vector<Unit> units;
        Unit v{verb, 'V', {verb}};
        for (size_t c : tree_.children[verb]) {
            switch (t[c].role) {
                case Role::Neg: append(v.tokens, expand(c)); break;
                case Role::Subj: units.push_back({c, 'S', noun_phrase(c)}); break;
                case Role::Obj: units.push_back({c, 'O', noun_phrase(c)}); break;
                default: units.push_back({c, 'X', expand(c)}); break;
            }
        }
        std::sort(v.tokens.begin(), v.tokens.end());
        units.push_back(std::move(v));
        if (main)
            for (size_t i = 0; i < t.size(); ++i)
                if (!t[i].head && t[i].role == Role::Other) units.push_back({i, 'X', expand(i)});
        std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.anchor < b.anchor; });

        std::vector<size_t> slots;
        std::map<char, size_t> by_slot;
        for (size_t k = 0; k < units.size(); ++k)
            if (units[k].slot != 'X') {
                slots.push_back(k);
                by_slot[units[k].slot] = k;
            }
        std::vector<Unit> filled = units;
        size_t next = 0;
        for (char c : spec_.main_word_order)
            if (auto it = by_slot.find(c); it != by_slot.end()) filled[slots[next++]] = units[it->second];

        Indices out;
        for (const auto& u : filled) append(out, u.tokens);
        return out;
    }

private:
    static void append(Indices& out, const Indices& more) { out.insert(out.end(), more.begin(), more.end()); }

    Indices expand(size_t i) const {
        const auto& t = tree_.tokens;
        if (is_noun(t[i].role)) return noun_phrase(i);
        if (t[i].role == Role::Verb) return clause(i, false);
        std::vector<std::pair<size_t, Indices>> parts{{i, {i}}};
        for (size_t c : tree_.children[i]) parts.push_back({c, expand(c)});
        std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        Indices out;
        for (const auto& p : parts) append(out, p.second);
        return out;
    }

    Indices noun_phrase(size_t n) const {
        const auto& t = tree_.tokens;
        Indices adp, adj, num, poss, rc, before, after;
        for (size_t c : tree_.children[n]) {
            Indices sub = expand(c);
            switch (t[c].role) {
                case Role::Adp: append(adp, sub); break;
                case Role::Adj: append(adj, sub); break;
                case Role::Num: append(num, sub); break;
                case Role::Poss: append(poss, sub); break;
                case Role::Verb: append(rc, sub); break;
                default: append(c < n ? before : after, sub); break;
            }
        }
        bool head_final = spec_.relativization && spec_.relativization->relativization_order == "head-final";
        Indices out;
        if (spec_.adposition_noun_word_order == "PN") append(out, adp);
        if (head_final) append(out, rc);
        append(out, before);
        if (spec_.posspron_noun_word_order == "PossN") append(out, poss);
        if (spec_.num_noun_word_order == "NumN") append(out, num);
        if (spec_.adj_noun_word_order == "AN") append(out, adj);
        out.push_back(n);
        if (spec_.adj_noun_word_order == "NA") append(out, adj);
        if (spec_.num_noun_word_order == "NNum") append(out, num);
        if (spec_.posspron_noun_word_order == "NPoss") append(out, poss);
        append(out, after);
        if (!head_final) append(out, rc);
        if (spec_.adposition_noun_word_order == "NP") append(out, adp);
        return out;
    }

    const Tree& tree_;
    const MorphosyntaxSpec& spec_;
};

struct Built {
    std::deque<std::string> prefixes;
    std::vector<std::string> suffixes;
    std::deque<std::string> pre_words;
    std::vector<std::string> post_words;
    bool absorbed = false;
};

void attach(Built& b, Strategy s, const std::string& label) {
    switch (s) {
        case Strategy::Prefix: b.prefixes.push_front(label); break;
        case Strategy::Suffix: b.suffixes.push_back(label); break;
        case Strategy::PrepositionalWord: b.pre_words.push_front(label); break;
        case Strategy::PostpositionalWord: b.post_words.push_back(label); break;
    }
}

const std::vector<std::string>& tense_fallback(const std::string& value) {
    static const std::map<std::string, std::vector<std::string>> chains = {
        {"past", {"past", "recent past", "remote past", "immediate past", "perfect"}},
        {"present", {"present", "nonpast"}},
        {"future", {"future", "nonpast"}},
        {"perfect", {"perfect", "past", "recent past"}},
        {"imperfect", {"imperfect", "past", "remote past"}},
        {"immediate past", {"immediate past", "recent past", "past"}},
        {"recent past", {"recent past", "immediate past", "past"}},
        {"remote past", {"remote past", "past"}},
        {"nonpast", {"nonpast", "present"}},
    };
    static const std::vector<std::string> empty;
    auto it = chains.find(value);
    return it == chains.end() ? empty : it->second;
}

std::string number_in(const std::vector<std::string>& values, std::string n) {
    if ((n == "dual" || n == "paucal") && std::find(values.begin(), values.end(), n) == values.end()) n = "plural";
    return std::find(values.begin(), values.end(), n) == values.end() ? std::string() : n;
}

void check_mapped(const MorphosyntaxSpec& spec, const FeatureLabelTable& labels) {
    auto need = [&](const char* feature, const std::string& value) {
        if (!labels.contains(feature, value)) labels.label(feature, value);
    };
    auto need_all = [&](const char* feature, const std::vector<std::string>& values) {
        for (const auto& v : values) need(feature, v);
    };
    if (spec.case_) need_all("case", spec.case_->case_marking);
    if (spec.definiteness) need_all("definiteness", spec.definiteness->values);
    if (spec.comparative) need_all("comparative", spec.comparative->values);
    if (spec.tense_aspect) need_all("tense_aspect", spec.tense_aspect->values);
    if (spec.nominal_number) need_all("number", spec.nominal_number->values);
    if (spec.voice) need_all("voice", spec.voice->values);
    if (spec.mood) need_all("mood", spec.mood->values);
    if (spec.person) {
        need_all("person", spec.person->person_agreement);
        need_all("number", spec.person->verbal_number_agreement);
        if (spec.person->person_marking_strategy == spec.person->verbal_number_marking_strategy) {
            need_all("fused_person", spec.person->person_agreement);
            need_all("fused_number", spec.person->verbal_number_agreement);
        }
    }
    if (spec.inclusive_exclusive) {
        need("clusivity", "inclusive");
        need("clusivity", "exclusive");
    }
    if (spec.negation) need("negation", "negative");
    if (spec.infinitive) need("infinitive", "infinitive");
    if (spec.relativization && spec.relativization->relativization_marking) need("relativization", "relative");
}

class Marker {
public:
    Marker(const SourceSentence& s, const MorphosyntaxSpec& spec, const FeatureLabelTable& labels)
        : t_(s.tokens), tree_(s.tokens), spec_(spec), labels_(labels), built_(s.tokens.size()) {}

    std::vector<Built> run() {
        for (size_t i = 0; i < t_.size(); ++i) {
            built_[i].absorbed = is_absorbed(t_[i], spec_);
            if (is_noun(t_[i].role)) mark_noun(i);
        }
        for (size_t i = 0; i < t_.size(); ++i)
            if (t_[i].role == Role::Adj) mark_adj(i);
        for (size_t i = 0; i < t_.size(); ++i)
            if (t_[i].role == Role::Verb) mark_verb(i);
        mark_relatives();
        return std::move(built_);
    }

private:
    bool transitive(size_t verb) const {
        if (auto f = t_[verb].feature("is_transitive_clause")) return *f == "true";
        return tree_.child_with_role(verb, Role::Obj).has_value();
    }

    std::optional<std::string> case_value(size_t n) const {
        if (!spec_.case_) return std::nullopt;
        const auto& c = *spec_.case_;
        auto pick = [&](const char* v) -> std::optional<std::string> {
            if (c.has(v)) return std::string(v);
            return std::nullopt;
        };
        switch (t_[n].role) {
            case Role::Subj:
                if (transitive(*t_[n].head)) {
                    if (c.has("ergative")) return "ergative";
                    return pick("nominative");
                }
                if (c.has("ergative")) return pick("absolutive");
                return pick("nominative");
            case Role::Obj:
                if (c.has("absolutive")) return "absolutive";
                return pick("accusative");
            case Role::Obl:
                if (auto f = t_[n].feature("case"); f && c.has(*f)) return *f;
                return c.oblique_case_marking;
            case Role::Poss: return pick("genitive");
            default: return std::nullopt;
        }
    }

    void mark_noun(size_t n) {
        auto& b = built_[n];
        const auto& tok = t_[n];
        if (tok.role != Role::Poss) {
            if (spec_.nominal_number)
                if (auto num = tok.feature("number")) {
                    auto v = number_in(spec_.nominal_number->values, *num);
                    if (!v.empty()) {
                        noun_labels_[n]["number"] = labels_.label("number", v);
                        attach(b, spec_.nominal_number->strategy, noun_labels_[n]["number"]);
                    }
                }
            if (spec_.definiteness)
                if (auto d = tok.feature("definiteness"); d && spec_.definiteness->has(*d)) {
                    noun_labels_[n]["definiteness"] = labels_.label("definiteness", *d);
                    attach(b, spec_.definiteness->strategy, noun_labels_[n]["definiteness"]);
                }
        }
        if (auto c = case_value(n)) {
            noun_labels_[n]["case"] = labels_.label("case", *c);
            attach(b, spec_.case_->case_marking_strategy, noun_labels_[n]["case"]);
        }
    }

    void mark_adj(size_t a) {
        auto& b = built_[a];
        if (spec_.comparative)
            if (auto d = t_[a].feature("degree"); d && spec_.comparative->has(*d))
                attach(b, spec_.comparative->strategy, labels_.label("comparative", *d));
        if (!spec_.adjective_agreement || !t_[a].head || !is_noun(t_[*t_[a].head].role)) return;
        auto it = noun_labels_.find(*t_[a].head);
        if (it == noun_labels_.end()) return;
        for (const char* f : {"number", "definiteness", "case"}) {
            if (!spec_.adjective_agreement->has(f)) continue;
            if (auto l = it->second.find(f); l != it->second.end())
                attach(b, spec_.adjective_agreement->strategy, l->second);
        }
    }

    void mark_verb(size_t v) {
        auto& b = built_[v];
        const auto& tok = t_[v];
        bool infinitive = tok.feature("is_infinitive") == std::optional<std::string>("true") ||
                          (tok.head && t_[*tok.head].role == Role::Verb);
        if (spec_.voice)
            if (auto x = tok.feature("voice"); x && spec_.voice->has(*x))
                attach(b, spec_.voice->strategy, labels_.label("voice", *x));
        if (infinitive) {
            if (spec_.infinitive) attach(b, *spec_.infinitive, labels_.label("infinitive", "infinitive"));
        } else {
            if (spec_.tense_aspect)
                if (auto x = tok.feature("tense_aspect"))
                    for (const auto& cand : tense_fallback(*x))
                        if (spec_.tense_aspect->has(cand)) {
                            attach(b, spec_.tense_aspect->strategy, labels_.label("tense_aspect", cand));
                            break;
                        }
            if (spec_.mood)
                if (auto x = tok.feature("mood"); x && spec_.mood->has(*x))
                    attach(b, spec_.mood->strategy, labels_.label("mood", *x));
            mark_agreement(v);
        }
        if (spec_.negation && tree_.child_with_role(v, Role::Neg))
            attach(b, *spec_.negation, labels_.label("negation", "negative"));
    }

    void mark_agreement(size_t v) {
        if (!spec_.person) return;
        auto subj = tree_.child_with_role(v, Role::Subj);
        if (!subj) return;
        const auto& p = *spec_.person;
        const auto& s = t_[*subj];
        std::string person = s.feature("person").value_or("third");
        std::string number = number_in(p.verbal_number_agreement, s.feature("number").value_or("singular"));
        bool has_person = std::find(p.person_agreement.begin(), p.person_agreement.end(), person) !=
                          p.person_agreement.end();
        std::optional<std::string> clusivity;
        if (spec_.inclusive_exclusive && person == "first" && !number.empty() && number != "singular")
            clusivity = s.feature("clusivity");
        auto& b = built_[v];
        if (has_person && !number.empty() && p.person_marking_strategy == p.verbal_number_marking_strategy) {
            std::string fused = labels_.label("fused_person", person) + labels_.label("fused_number", number);
            if (clusivity) fused += labels_.label("clusivity", *clusivity);
            if (auto c = case_value(*subj)) fused += labels_.label("case", *c);
            attach(b, p.person_marking_strategy, fused);
            return;
        }
        if (has_person) attach(b, p.person_marking_strategy, labels_.label("person", person));
        if (!number.empty()) attach(b, p.verbal_number_marking_strategy, labels_.label("number", number));
        if (clusivity) attach(b, p.person_marking_strategy, labels_.label("clusivity", *clusivity));
    }

    void mark_relatives() {
        if (!spec_.relativization || !spec_.relativization->relativization_marking) return;
        const auto& r = *spec_.relativization;
        bool prepositional = r.relativizer_position == std::optional<std::string>("prepositional");
        bool affix = r.relativizer_morpheme == std::optional<std::string>("affix");
        Strategy s = affix ? (prepositional ? Strategy::Prefix : Strategy::Suffix)
                           : (prepositional ? Strategy::PrepositionalWord : Strategy::PostpositionalWord);
        std::string label = labels_.label("relativization", "relative");
        for (size_t v = 0; v < t_.size(); ++v) {
            if (t_[v].role != Role::Verb || !t_[v].head || !is_noun(t_[*t_[v].head].role)) continue;
            size_t target = *r.relativization_marking == "head-marking" ? *t_[v].head : v;
            attach(built_[target], s, label);
        }
    }

    const std::vector<SourceToken>& t_;
    Tree tree_;
    const MorphosyntaxSpec& spec_;
    const FeatureLabelTable& labels_;
    std::vector<Built> built_;
    std::map<size_t, std::map<std::string, std::string>> noun_labels_;
};

std::vector<gloss::FeatureLabel> to_labels(const auto& texts) {
    std::vector<gloss::FeatureLabel> out;
    for (const auto& l : texts) out.emplace_back(l);
    return out;
}

}  // namespace

bool is_absorbed(const SourceToken& token, const MorphosyntaxSpec& spec) {
    if (token.role == Role::Neg) return spec.negation.has_value();
    if (token.role == Role::RelClauseMarker) return spec.relativization.has_value();
    return false;
}

SourceSentence reorder(const SourceSentence& source, const MorphosyntaxSpec& spec) {
    validate_source(source);
    const auto& t = source.tokens;
    Tree tree(t);
    size_t root = 0;
    for (size_t i = 0; i < t.size(); ++i)
        if (!t[i].head && t[i].role == Role::Verb) root = i;
    Indices order = Reorderer(tree, spec).clause(root, true);
    if (order.size() != t.size()) throw MorphosyntaxError("reorder lost tokens");
    std::vector<size_t> pos(t.size());
    for (size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    SourceSentence out;
    out.trailing_punct = source.trailing_punct;
    for (size_t i : order) {
        SourceToken tok = t[i];
        if (tok.head) tok.head = pos[*tok.head];
        out.tokens.push_back(std::move(tok));
    }
    return out;
}

gloss::GlossSentence mark_features(const SourceSentence& reordered, const MorphosyntaxSpec& spec,
                                   const FeatureLabelTable& labels) {
    validate_source(reordered);
    check_mapped(spec, labels);
    auto built = Marker(reordered, spec, labels).run();
    gloss::GlossSentence out;
    out.trailing_punct = reordered.trailing_punct;
    for (size_t i = 0; i < built.size(); ++i) {
        const auto& b = built[i];
        if (b.absorbed) continue;
        for (const auto& w : b.pre_words) out.words.push_back(gloss::GlossWord::feature(gloss::FeatureLabel(w)));
        out.words.push_back(
            gloss::GlossWord::lexical(reordered.tokens[i].lemma, to_labels(b.prefixes), to_labels(b.suffixes)));
        for (const auto& w : b.post_words) out.words.push_back(gloss::GlossWord::feature(gloss::FeatureLabel(w)));
    }
    gloss::validate(out);
    return out;
}

gloss::GlossSentence transform(const SourceSentence& source, const MorphosyntaxSpec& spec,
                               const FeatureLabelTable& labels) {
    return mark_features(reorder(source, spec), spec, labels);
}

}  // namespace conlang::morphosyntax
