#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <set>

#include "conlang/morphosyntax.hpp"
#include "conlang/utf8.hpp"

namespace conlang::morphosyntax {

using nlohmann::json;

namespace {

const std::vector<std::string> kMainOrders = {"SOV", "SVO", "VSO", "VOS", "OSV", "OVS"};
const std::vector<std::string> kCases = {"nominative", "accusative", "dative",       "genitive",  "ablative",
                                         "locative",   "instrumental", "ergative", "absolutive"};
const std::vector<std::string> kDefiniteness = {"definite", "indefinite"};
const std::vector<std::string> kAgreement = {"number", "case", "definiteness"};
const std::vector<std::string> kComparative = {"comparative", "superlative", "equative"};
const std::vector<std::string> kTenseAspect = {"present",        "past",        "future",      "perfect", "imperfect",
                                               "immediate past", "recent past", "remote past", "nonpast"};
const std::vector<std::string> kNumber = {"singular", "plural", "dual", "paucal"};
const std::vector<std::string> kPerson = {"first", "second", "third"};
const std::vector<std::string> kVoice = {"active", "passive"};
const std::vector<std::string> kMood = {"indicative", "subjunctive", "imperative", "conditional"};
const std::vector<std::string> kDegree = {"positive", "comparative", "superlative", "equative"};
const std::vector<std::string> kClusivity = {"inclusive", "exclusive", "n/a"};
const std::vector<std::string> kBool = {"true", "false"};

bool contains(const std::vector<std::string>& v, std::string_view s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void check_value(const std::vector<std::string>& domain, std::string_view value, const std::string& field) {
    if (!contains(domain, value)) throw InvalidSpec(field + ": '" + std::string(value) + "' is not an allowed value");
}

void check_values(const std::vector<std::string>& domain, const std::vector<std::string>& values,
                  const std::string& field) {
    if (values.empty()) throw InvalidSpec(field + ": list must not be empty");
    std::set<std::string> seen;
    for (const auto& v : values) {
        check_value(domain, v, field);
        if (!seen.insert(v).second) throw InvalidSpec(field + ": duplicate value '" + v + "'");
    }
}

}  // namespace

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Prefix: return "prefix";
        case Strategy::Suffix: return "suffix";
        case Strategy::PrepositionalWord: return "prepositional word";
        case Strategy::PostpositionalWord: return "postpositional word";
    }
    return "?";
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "prefix") return Strategy::Prefix;
    if (s == "suffix") return Strategy::Suffix;
    if (s == "prepositional word") return Strategy::PrepositionalWord;
    if (s == "postpositional word") return Strategy::PostpositionalWord;
    throw InvalidSpec("unknown marking strategy '" + std::string(s) + "'");
}

bool MarkedFeature::has(std::string_view v) const { return contains(values, v); }
bool CaseSpec::has(std::string_view v) const { return contains(case_marking, v); }

void MorphosyntaxSpec::validate() const {
    check_value(kMainOrders, main_word_order, "main_word_order");
    check_value({"NA", "AN"}, adj_noun_word_order, "adj_noun_word_order");
    check_value({"PossN", "NPoss"}, posspron_noun_word_order, "posspron_noun_word_order");
    check_value({"NumN", "NNum"}, num_noun_word_order, "num_noun_word_order");
    check_value({"PN", "NP"}, adposition_noun_word_order, "adposition_noun_word_order");
    if (case_) {
        check_values(kCases, case_->case_marking, "case_marking");
        if (case_->oblique_case_marking && !case_->has(*case_->oblique_case_marking))
            throw InvalidSpec("oblique_case_marking must be one of case_marking");
    }
    if (definiteness) check_values(kDefiniteness, definiteness->values, "definiteness");
    if (adjective_agreement) check_values(kAgreement, adjective_agreement->values, "adjective_agreement");
    if (comparative) check_values(kComparative, comparative->values, "comparative");
    if (tense_aspect) check_values(kTenseAspect, tense_aspect->values, "tense_aspect");
    if (nominal_number) check_values(kNumber, nominal_number->values, "nominal_number");
    if (voice) check_values(kVoice, voice->values, "voice");
    if (mood) check_values(kMood, mood->values, "mood");
    if (person) {
        if (person->person_agreement.empty() && person->verbal_number_agreement.empty())
            throw InvalidSpec("person: person_agreement or verbal_number_agreement is required");
        if (!person->person_agreement.empty()) check_values(kPerson, person->person_agreement, "person_agreement");
        if (!person->verbal_number_agreement.empty())
            check_values(kNumber, person->verbal_number_agreement, "verbal_number_agreement");
    }
    if (inclusive_exclusive) {
        bool ok = person && contains(person->person_agreement, "first") &&
                  (contains(person->verbal_number_agreement, "plural") || contains(person->verbal_number_agreement, "dual"));
        if (!ok) throw InvalidSpec("inclusive_exclusive requires first-person agreement with plural or dual verbal number");
    }
    if (relativization) {
        check_value({"head-initial", "head-final"}, relativization->relativization_order, "relativization_order");
        const auto& r = *relativization;
        if (r.relativization_marking) {
            check_value({"head-marking", "dependent-marking"}, *r.relativization_marking, "relativization_marking");
            if (!r.relativizer_position || !r.relativizer_morpheme)
                throw InvalidSpec("relativization_marking requires relativizer_position and relativizer_morpheme");
        }
        if (r.relativizer_position) check_value({"prepositional", "postpositional"}, *r.relativizer_position, "relativizer_position");
        if (r.relativizer_morpheme) check_value({"affix", "word"}, *r.relativizer_morpheme, "relativizer_morpheme");
    }
}

namespace {

std::optional<std::string> opt_string(const json& obj, const char* key) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    return obj[key].get<std::string>();
}

std::optional<MarkedFeature> marked_from_json(const json& doc, const char* group, const char* strategy_key) {
    if (!doc.contains(group) || doc[group].is_null()) return std::nullopt;
    const auto& g = doc[group];
    MarkedFeature f;
    f.values = g.at(group).get<std::vector<std::string>>();
    if (g.contains(strategy_key) && !g[strategy_key].is_null())
        f.strategy = strategy_from_string(g[strategy_key].get<std::string>());
    else
        throw InvalidSpec(std::string(group) + ": missing " + strategy_key);
    return f;
}

json marked_to_json(const std::optional<MarkedFeature>& f, const char* group, const char* strategy_key) {
    if (!f) return nullptr;
    return json{{group, f->values}, {strategy_key, to_string(f->strategy)}};
}

}  // namespace

MorphosyntaxSpec spec_from_json(const json& doc) {
    MorphosyntaxSpec s;
    try {
        s.main_word_order = doc.at("main_word_order").get<std::string>();
        s.adj_noun_word_order = doc.at("adj_noun_word_order").get<std::string>();
        // The feature tables spell this key posspron_pron_word_order; accept both.
        if (doc.contains("posspron_noun_word_order"))
            s.posspron_noun_word_order = doc["posspron_noun_word_order"].get<std::string>();
        else
            s.posspron_noun_word_order = doc.at("posspron_pron_word_order").get<std::string>();
        s.num_noun_word_order = doc.at("num_noun_word_order").get<std::string>();
        s.adposition_noun_word_order = doc.at("adposition_noun_word_order").get<std::string>();

        if (doc.contains("case") && !doc["case"].is_null()) {
            const auto& c = doc["case"];
            CaseSpec cs;
            cs.case_marking = c.at("case_marking").get<std::vector<std::string>>();
            cs.case_marking_strategy = strategy_from_string(c.at("case_marking_strategy").get<std::string>());
            cs.oblique_case_marking = opt_string(c, "oblique_case_marking");
            s.case_ = cs;
        }
        s.definiteness = marked_from_json(doc, "definiteness", "definiteness_marking_strategy");
        s.adjective_agreement = marked_from_json(doc, "adjective_agreement", "adjective_agreement_strategy");
        s.comparative = marked_from_json(doc, "comparative", "comparative_marking_strategy");
        s.tense_aspect = marked_from_json(doc, "tense_aspect", "tense_aspect_marking_strategy");
        s.nominal_number = marked_from_json(doc, "nominal_number", "nominal_number_marking_strategy");
        s.voice = marked_from_json(doc, "voice", "voice_marking_strategy");
        s.mood = marked_from_json(doc, "mood", "mood_marking_strategy");
        if (doc.contains("person") && !doc["person"].is_null()) {
            const auto& p = doc["person"];
            PersonSpec ps;
            ps.person_agreement = p.value("person_agreement", std::vector<std::string>{});
            if (auto v = opt_string(p, "person_marking_strategy")) ps.person_marking_strategy = strategy_from_string(*v);
            ps.verbal_number_agreement = p.value("verbal_number_agreement", std::vector<std::string>{});
            if (auto v = opt_string(p, "verbal_number_marking_strategy"))
                ps.verbal_number_marking_strategy = strategy_from_string(*v);
            s.person = ps;
        }
        if (doc.contains("relativization") && !doc["relativization"].is_null()) {
            const auto& r = doc["relativization"];
            RelativizationSpec rs;
            rs.relativization_order = r.at("relativization_order").get<std::string>();
            rs.relativization_marking = opt_string(r, "relativization_marking");
            rs.relativizer_position = opt_string(r, "relativizer_position");
            rs.relativizer_morpheme = opt_string(r, "relativizer_morpheme");
            s.relativization = rs;
        }
        if (auto v = opt_string(doc, "negation")) s.negation = strategy_from_string(*v);
        if (doc.contains("infinitive") && !doc["infinitive"].is_null()) {
            const auto& inf = doc["infinitive"];
            auto strat = opt_string(inf, "infinitive_marking_strategy");
            if (!strat) strat = opt_string(inf, "infinitive_position");
            if (!strat) throw InvalidSpec("infinitive: missing infinitive_marking_strategy");
            s.infinitive = strategy_from_string(*strat);
        }
        s.inclusive_exclusive = doc.value("inclusive_exclusive", false);
        s.extras = doc.value("extras", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw InvalidSpec(std::string("malformed morphosyntax document: ") + e.what());
    }
    s.validate();
    return s;
}

json spec_to_json(const MorphosyntaxSpec& s) {
    json doc;
    doc["main_word_order"] = s.main_word_order;
    doc["adj_noun_word_order"] = s.adj_noun_word_order;
    doc["posspron_noun_word_order"] = s.posspron_noun_word_order;
    doc["num_noun_word_order"] = s.num_noun_word_order;
    doc["adposition_noun_word_order"] = s.adposition_noun_word_order;
    if (s.case_) {
        doc["case"] = {{"case_marking", s.case_->case_marking},
                       {"case_marking_strategy", to_string(s.case_->case_marking_strategy)},
                       {"oblique_case_marking", s.case_->oblique_case_marking ? json(*s.case_->oblique_case_marking) : json(nullptr)}};
    } else {
        doc["case"] = nullptr;
    }
    doc["definiteness"] = marked_to_json(s.definiteness, "definiteness", "definiteness_marking_strategy");
    doc["adjective_agreement"] = marked_to_json(s.adjective_agreement, "adjective_agreement", "adjective_agreement_strategy");
    doc["comparative"] = marked_to_json(s.comparative, "comparative", "comparative_marking_strategy");
    doc["tense_aspect"] = marked_to_json(s.tense_aspect, "tense_aspect", "tense_aspect_marking_strategy");
    doc["nominal_number"] = marked_to_json(s.nominal_number, "nominal_number", "nominal_number_marking_strategy");
    if (s.person) {
        doc["person"] = {{"person_agreement", s.person->person_agreement},
                         {"person_marking_strategy", to_string(s.person->person_marking_strategy)},
                         {"verbal_number_agreement", s.person->verbal_number_agreement},
                         {"verbal_number_marking_strategy", to_string(s.person->verbal_number_marking_strategy)}};
    } else {
        doc["person"] = nullptr;
    }
    doc["voice"] = marked_to_json(s.voice, "voice", "voice_marking_strategy");
    doc["mood"] = marked_to_json(s.mood, "mood", "mood_marking_strategy");
    if (s.relativization) {
        auto o = [](const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); };
        doc["relativization"] = {{"relativization_order", s.relativization->relativization_order},
                                 {"relativization_marking", o(s.relativization->relativization_marking)},
                                 {"relativizer_position", o(s.relativization->relativizer_position)},
                                 {"relativizer_morpheme", o(s.relativization->relativizer_morpheme)}};
    } else {
        doc["relativization"] = nullptr;
    }
    doc["negation"] = s.negation ? json(to_string(*s.negation)) : json(nullptr);
    doc["infinitive"] = s.infinitive ? json{{"infinitive", "infinitive"}, {"infinitive_marking_strategy", to_string(*s.infinitive)}}
                                     : json(nullptr);
    doc["inclusive_exclusive"] = s.inclusive_exclusive;
    doc["extras"] = s.extras;
    return doc;
}

MorphosyntaxSpec load_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open " + path.string());
    try {
        return spec_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw InvalidSpec(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Source sentences

std::string to_string(Role r) {
    switch (r) {
        case Role::Subj: return "SUBJ";
        case Role::Obj: return "OBJ";
        case Role::Verb: return "VERB";
        case Role::Adj: return "ADJ";
        case Role::Num: return "NUM";
        case Role::Poss: return "POSS";
        case Role::Adp: return "ADP";
        case Role::Obl: return "OBL";
        case Role::Neg: return "NEG";
        case Role::RelClauseMarker: return "REL-CLAUSE-MARKER";
        case Role::Other: return "OTHER";
    }
    return "?";
}

Role role_from_string(std::string_view s) {
    static const std::map<std::string, Role, std::less<>> roles = {
        {"SUBJ", Role::Subj}, {"OBJ", Role::Obj}, {"VERB", Role::Verb}, {"ADJ", Role::Adj},
        {"NUM", Role::Num},   {"POSS", Role::Poss}, {"ADP", Role::Adp}, {"OBL", Role::Obl},
        {"NEG", Role::Neg},   {"REL-CLAUSE-MARKER", Role::RelClauseMarker}, {"REL", Role::RelClauseMarker},
        {"OTHER", Role::Other}};
    auto it = roles.find(s);
    if (it == roles.end()) throw InvalidSource("unknown role '" + std::string(s) + "'");
    return it->second;
}

std::optional<std::string> SourceToken::feature(std::string_view key) const {
    auto it = features.find(std::string(key));
    if (it == features.end()) return std::nullopt;
    return it->second;
}

namespace {

std::string normalize_feature(const std::string& key, std::string value) {
    std::replace(value.begin(), value.end(), '_', ' ');
    static const std::map<std::string, std::map<std::string, std::string>> abbrev = {
        {"number", {{"sg", "singular"}, {"pl", "plural"}, {"du", "dual"}, {"pc", "paucal"}}},
        {"person", {{"1", "first"}, {"2", "second"}, {"3", "third"}}},
        {"clusivity", {{"incl", "inclusive"}, {"excl", "exclusive"}}},
        {"definiteness", {{"def", "definite"}, {"indef", "indefinite"}}},
        {"degree", {{"pos", "positive"}, {"cmp", "comparative"}, {"sup", "superlative"}, {"eqt", "equative"}}},
        {"tense_aspect", {{"pres", "present"}, {"fut", "future"}, {"perf", "perfect"}, {"impf", "imperfect"}}},
        {"mood", {{"ind", "indicative"}, {"subj", "subjunctive"}, {"imp", "imperative"}, {"cond", "conditional"}}},
        {"voice", {{"act", "active"}, {"pass", "passive"}}},
        {"case",
         {{"nom", "nominative"}, {"acc", "accusative"}, {"dat", "dative"}, {"gen", "genitive"}, {"abl", "ablative"},
          {"loc", "locative"}, {"ins", "instrumental"}, {"erg", "ergative"}, {"abs", "absolutive"}}},
    };
    static const std::map<std::string, const std::vector<std::string>*> domains = {
        {"number", &kNumber},  {"person", &kPerson},     {"clusivity", &kClusivity},
        {"definiteness", &kDefiniteness}, {"degree", &kDegree}, {"tense_aspect", &kTenseAspect},
        {"mood", &kMood},      {"voice", &kVoice},       {"case", &kCases},
        {"is_transitive_clause", &kBool}, {"is_infinitive", &kBool}};
    auto dom = domains.find(key);
    if (dom == domains.end()) throw InvalidSource("unknown feature '" + key + "'");
    if (auto a = abbrev.find(key); a != abbrev.end())
        if (auto v = a->second.find(value); v != a->second.end()) value = v->second;
    if (!contains(*dom->second, value)) throw InvalidSource("feature " + key + ": bad value '" + value + "'");
    return value;
}

std::string abbreviate(std::string value) {
    std::replace(value.begin(), value.end(), ' ', '_');
    return value;
}

bool is_punct(std::string_view s) { return s == "." || s == "?" || s == "!" || s == ","; }

}  // namespace

SourceSentence parse_source(std::string_view text) {
    SourceSentence out;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c != '[') {
            size_t end = i;
            while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
            auto tok = text.substr(i, end - i);
            if (!is_punct(tok)) throw InvalidSource("unexpected text '" + std::string(tok) + "' outside brackets");
            out.trailing_punct = std::string(tok);
            i = end;
            continue;
        }
        if (out.trailing_punct) throw InvalidSource("punctuation is only allowed at the end of a sentence");
        size_t close = text.find(']', i);
        if (close == std::string_view::npos) throw InvalidSource("unterminated token");
        auto body = std::string(text.substr(i + 1, close - i - 1));
        i = close + 1;

        std::vector<std::string> fields;
        size_t pos = 0;
        for (;;) {
            size_t bar = body.find('|', pos);
            fields.emplace_back(utf8::trim(std::string_view(body).substr(pos, bar == std::string::npos ? std::string::npos : bar - pos)));
            if (bar == std::string::npos) break;
            pos = bar + 1;
        }
        if (fields.size() < 2 || fields[0].empty()) throw InvalidSource("token needs lemma and role: [" + body + "]");
        SourceToken tok;
        tok.lemma = fields[0];
        tok.role = role_from_string(fields[1]);
        for (size_t f = 2; f < fields.size(); ++f) {
            const auto& field = fields[f];
            if (field.empty()) continue;
            if (field.rfind("head=", 0) == 0) {
                try {
                    tok.head = static_cast<size_t>(std::stoul(field.substr(5)));
                } catch (const std::exception&) {
                    throw InvalidSource("bad head index in [" + body + "]");
                }
                continue;
            }
            size_t p = 0;
            while (p <= field.size()) {
                size_t comma = field.find(',', p);
                auto kv = std::string(utf8::trim(std::string_view(field).substr(p, comma == std::string::npos ? std::string::npos : comma - p)));
                p = comma == std::string::npos ? field.size() + 1 : comma + 1;
                if (kv.empty()) continue;
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw InvalidSource("feature without value: " + kv);
                auto key = kv.substr(0, eq);
                tok.features[key] = normalize_feature(key, kv.substr(eq + 1));
            }
        }
        out.tokens.push_back(std::move(tok));
    }
    validate_source(out);
    return out;
}

std::string format_source(const SourceSentence& s) {
    std::string out;
    for (const auto& t : s.tokens) {
        if (!out.empty()) out += ' ';
        out += "[" + t.lemma + "|" + to_string(t.role);
        if (t.head) out += "|head=" + std::to_string(*t.head);
        if (!t.features.empty()) {
            out += "|";
            bool first = true;
            for (const auto& [k, v] : t.features) {
                if (!first) out += ",";
                first = false;
                out += k + "=" + abbreviate(v);
            }
        }
        out += "]";
    }
    if (s.trailing_punct) out += " " + *s.trailing_punct;
    return out;
}

namespace {

bool is_noun(Role r) { return r == Role::Subj || r == Role::Obj || r == Role::Obl || r == Role::Poss; }

}  // namespace

void validate_source(const SourceSentence& s) {
    const auto& t = s.tokens;
    size_t roots = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i].lemma.empty()) throw InvalidSource("token " + std::to_string(i) + " has an empty lemma");
        if (!t[i].head) {
            if (t[i].role == Role::Verb) ++roots;
            else if (t[i].role != Role::Other)
                throw InvalidSource("token " + std::to_string(i) + " (" + to_string(t[i].role) + ") needs a head");
            continue;
        }
        size_t h = *t[i].head;
        if (h >= t.size() || h == i) throw InvalidSource("token " + std::to_string(i) + " has an invalid head");
        Role hr = t[h].role;
        bool ok = true;
        switch (t[i].role) {
            case Role::Subj:
            case Role::Obj:
            case Role::Obl:
            case Role::Neg:
            case Role::RelClauseMarker: ok = hr == Role::Verb; break;
            case Role::Num:
            case Role::Poss:
            case Role::Adp: ok = is_noun(hr); break;
            case Role::Adj: ok = is_noun(hr) || hr == Role::Verb; break;
            case Role::Verb: ok = hr == Role::Verb || is_noun(hr); break;
            case Role::Other: break;
        }
        if (!ok) throw InvalidSource("token " + std::to_string(i) + " (" + to_string(t[i].role) + ") cannot depend on a " + to_string(hr));
        // Cycle check: walking up must reach a root within t.size() steps.
        size_t cur = i, steps = 0;
        while (t[cur].head) {
            cur = *t[cur].head;
            if (++steps > t.size()) throw InvalidSource("head cycle at token " + std::to_string(i));
        }
    }
    if (roots == 0) throw MissingVerb("sentence has no main verb");
    if (roots > 1) throw InvalidSource("sentence has more than one main verb");
    std::map<std::pair<size_t, Role>, int> args;
    for (const auto& tok : t)
        if (tok.head && (tok.role == Role::Subj || tok.role == Role::Obj))
            if (++args[{*tok.head, tok.role}] > 1) throw InvalidSource("a verb has more than one " + to_string(tok.role));
}

// ---------------------------------------------------------------------------
// Label table

const FeatureLabelTable& FeatureLabelTable::standard() {
    static const FeatureLabelTable table = [] {
        FeatureLabelTable t;
        const std::vector<std::tuple<const char*, const char*, const char*>> rows = {
            {"case", "nominative", "NOM"},      {"case", "accusative", "ACC"},    {"case", "dative", "DAT"},
            {"case", "genitive", "GEN"},        {"case", "ablative", "ABL"},      {"case", "locative", "LOC"},
            {"case", "instrumental", "INS"},    {"case", "ergative", "ERG"},      {"case", "absolutive", "ABS"},
            {"definiteness", "definite", "DEF"}, {"definiteness", "indefinite", "INDF"},
            {"comparative", "comparative", "CMPR"}, {"comparative", "superlative", "SUPL"},
            {"comparative", "equative", "EQT"},
            {"tense_aspect", "present", "PRES"}, {"tense_aspect", "past", "PAST"}, {"tense_aspect", "future", "FUT"},
            {"tense_aspect", "perfect", "PERF"}, {"tense_aspect", "imperfect", "IMPF"},
            {"tense_aspect", "immediate past", "IMMPST"}, {"tense_aspect", "recent past", "RECPST"},
            {"tense_aspect", "remote past", "REMPST"}, {"tense_aspect", "nonpast", "NPST"},
            {"number", "singular", "SING"},     {"number", "plural", "PLUR"},     {"number", "dual", "DUAL"},
            {"number", "paucal", "PAUC"},
            {"person", "first", "1PERS"},       {"person", "second", "2PERS"},    {"person", "third", "3PERS"},
            {"voice", "active", "ACT"},         {"voice", "passive", "PASS"},
            {"mood", "indicative", "IND"},      {"mood", "subjunctive", "SBJV"},  {"mood", "imperative", "IMP"},
            {"mood", "conditional", "COND"},
            {"clusivity", "inclusive", "INCL"}, {"clusivity", "exclusive", "EXCL"},
            {"negation", "negative", "NEG"},    {"infinitive", "infinitive", "INF"},
            {"relativization", "relative", "REL"},
            {"fused_person", "first", "1"},     {"fused_person", "second", "2"},  {"fused_person", "third", "3"},
            {"fused_number", "singular", "SG"}, {"fused_number", "plural", "PL"}, {"fused_number", "dual", "DU"},
            {"fused_number", "paucal", "PC"},
        };
        for (const auto& [f, v, l] : rows) t.set(f, v, l);
        t.validate();
        return t;
    }();
    return table;
}

FeatureLabelTable FeatureLabelTable::from_json(const json& doc) {
    FeatureLabelTable t;
    try {
        for (const auto& [feature, values] : doc.items())
            for (const auto& [value, label] : values.items()) t.set(feature, value, label.get<std::string>());
    } catch (const json::exception& e) {
        throw MorphosyntaxError(std::string("malformed label table: ") + e.what());
    }
    t.validate();
    return t;
}

json FeatureLabelTable::to_json() const {
    json doc = json::object();
    for (const auto& [key, label] : table_) doc[key.first][key.second] = label;
    return doc;
}

bool FeatureLabelTable::contains(std::string_view feature, std::string_view value) const {
    return table_.count({std::string(feature), std::string(value)}) > 0;
}

std::string FeatureLabelTable::label(std::string_view feature, std::string_view value) const {
    auto it = table_.find({std::string(feature), std::string(value)});
    if (it == table_.end())
        throw UnmappedFeatureValue("no label for " + std::string(feature) + "=" + std::string(value));
    return it->second;
}

void FeatureLabelTable::set(std::string feature, std::string value, std::string label) {
    table_[{std::move(feature), std::move(value)}] = std::move(label);
}

void FeatureLabelTable::validate() const {
    std::map<std::string, std::pair<std::string, std::string>> seen;
    for (const auto& [key, label] : table_) {
        if (key.first.rfind("fused_", 0) == 0) {
            for (char c : label)
                if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')))
                    throw MorphosyntaxError("fused label part '" + label + "' must be uppercase letters or digits");
            continue;
        }
        if (!gloss::FeatureLabel::matches(label) || gloss::canonical_label(label) != label)
            throw MorphosyntaxError("label '" + label + "' for " + key.first + "=" + key.second + " is not a canonical label");
        // Nominal and verbal number share labels by design.
        auto [it, inserted] = seen.emplace(label, key);
        if (!inserted)
            throw MorphosyntaxError("label '" + label + "' is used for both " + it->second.first + "=" + it->second.second +
                                    " and " + key.first + "=" + key.second);
    }
}

}  // namespace conlang::morphosyntax
