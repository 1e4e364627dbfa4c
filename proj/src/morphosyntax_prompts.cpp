#include <cctype>
#include <fstream>
#include <sstream>

#include "conlang/morphosyntax.hpp"
#include "conlang/utf8.hpp"

namespace conlang::morphosyntax {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out.empty() ? "none" : out;
}

std::string opt(const std::optional<std::string>& s) { return s ? *s : "none"; }

std::map<std::string, std::string> spec_values(const MorphosyntaxSpec& s) {
    std::map<std::string, std::string> v = {
        {"main_word_order", s.main_word_order},
        {"adj_noun_word_order", s.adj_noun_word_order},
        {"posspron_noun_word_order", s.posspron_noun_word_order},
        {"num_noun_word_order", s.num_noun_word_order},
        {"adposition_noun_word_order", s.adposition_noun_word_order},
        {"inclusive_exclusive", s.inclusive_exclusive ? "yes" : "no"},
        {"negation", s.negation ? to_string(*s.negation) : "none"},
        {"infinitive", s.infinitive ? to_string(*s.infinitive) : "none"},
    };
    v["case_marking"] = s.case_ ? join(s.case_->case_marking) : "none";
    v["case_marking_strategy"] = s.case_ ? to_string(s.case_->case_marking_strategy) : "none";
    v["oblique_case_marking"] = s.case_ ? opt(s.case_->oblique_case_marking) : "none";
    auto marked = [&](const std::string& name, const std::optional<MarkedFeature>& f, const std::string& strategy_key) {
        v[name] = f ? join(f->values) : "none";
        v[strategy_key] = f ? to_string(f->strategy) : "none";
    };
    marked("definiteness", s.definiteness, "definiteness_marking_strategy");
    marked("adjective_agreement", s.adjective_agreement, "adjective_agreement_strategy");
    marked("comparative", s.comparative, "comparative_marking_strategy");
    marked("tense_aspect", s.tense_aspect, "tense_aspect_marking_strategy");
    marked("nominal_number", s.nominal_number, "nominal_number_marking_strategy");
    marked("voice", s.voice, "voice_marking_strategy");
    marked("mood", s.mood, "mood_marking_strategy");
    v["person_agreement"] = s.person ? join(s.person->person_agreement) : "none";
    v["person_marking_strategy"] = s.person ? to_string(s.person->person_marking_strategy) : "none";
    v["verbal_number_agreement"] = s.person ? join(s.person->verbal_number_agreement) : "none";
    v["verbal_number_marking_strategy"] = s.person ? to_string(s.person->verbal_number_marking_strategy) : "none";
    v["relativization_order"] = s.relativization ? s.relativization->relativization_order : "none";
    v["relativization_marking"] = s.relativization ? opt(s.relativization->relativization_marking) : "none";
    v["relativizer_position"] = s.relativization ? opt(s.relativization->relativizer_position) : "none";
    v["relativizer_morpheme"] = s.relativization ? opt(s.relativization->relativizer_morpheme) : "none";
    return v;
}

bool group_active(const MorphosyntaxSpec& s, const std::string& g) {
    if (g == "word_order") return true;
    if (g == "case") return s.case_.has_value();
    if (g == "definiteness") return s.definiteness.has_value();
    if (g == "adjective_agreement") return s.adjective_agreement.has_value();
    if (g == "comparative") return s.comparative.has_value();
    if (g == "tense_aspect") return s.tense_aspect.has_value();
    if (g == "nominal_number") return s.nominal_number.has_value();
    if (g == "person") return s.person.has_value();
    if (g == "voice") return s.voice.has_value();
    if (g == "mood") return s.mood.has_value();
    if (g == "relativization") return s.relativization.has_value();
    if (g == "infinitive") return s.infinitive.has_value();
    if (g == "negation") return s.negation.has_value();
    return false;
}

std::string strip_line(std::string line) {
    line = std::string(utf8::trim(line));
    for (const char* prefix : {"Word:", "Gloss:", "Output:", "Answer:"}) {
        std::string_view p(prefix);
        if (line.size() >= p.size() && line.compare(0, p.size(), p) == 0) {
            line = std::string(utf8::trim(std::string_view(line).substr(p.size())));
            break;
        }
    }
    if (line.size() >= 2 && (line.front() == '`' || line.front() == '"') && line.back() == line.front())
        line = line.substr(1, line.size() - 2);
    return line;
}

bool has_affix(const gloss::GlossSentence& s) {
    for (const auto& w : s.words)
        if (!w.prefixes.empty() || !w.suffixes.empty()) return true;
    return false;
}

bool has_feature_word(const gloss::GlossSentence& s) {
    bool found = false;
    for (const auto& w : s.words) {
        if (w.is_feature_word && w.stem.size() < 2) return false;
        found = found || w.is_feature_word;
    }
    return found;
}

}  // namespace

const std::vector<std::string>& prompt_groups() {
    static const std::vector<std::string> groups = {
        "word_order", "case",   "definiteness", "adjective_agreement", "comparative", "tense_aspect", "nominal_number",
        "person",     "voice",  "mood",         "relativization",      "infinitive",  "negation"};
    return groups;
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
            out += c;
            i += 2;
            continue;
        }
        if (c == '}') throw MorphosyntaxError("unbalanced '}' in template");
        if (c != '{') {
            out += c;
            ++i;
            continue;
        }
        size_t end = tmpl.find('}', i);
        if (end == std::string_view::npos) throw MorphosyntaxError("unterminated slot in template");
        std::string name(tmpl.substr(i + 1, end - i - 1));
        auto it = values.find(name);
        if (it == values.end()) throw MorphosyntaxError("unknown template slot {" + name + "}");
        out += it->second;
        i = end + 1;
    }
    return out;
}

std::vector<Prompt> build_cumulative_prompts(const MorphosyntaxSpec& spec, std::string_view source_text,
                                             const std::filesystem::path& template_dir) {
    spec.validate();
    auto values = spec_values(spec);
    std::vector<Prompt> out;
    for (const auto& g : prompt_groups()) {
        if (!group_active(spec, g)) continue;
        auto path = template_dir / (g + ".txt");
        std::ifstream in(path);
        if (!in) throw TemplateMissing("missing prompt template " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        values["input"] = out.empty() ? std::string(source_text) : std::string(kPreviousOutputMarker);
        out.push_back({g, fill_template(ss.str(), values)});
    }
    return out;
}

gloss::GlossSentence structure_output(std::string_view raw) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(raw)};
    std::string line;
    while (std::getline(in, line)) {
        auto s = strip_line(line);
        if (s.empty() || s.rfind("```", 0) == 0) continue;
        lines.push_back(s);
    }
    auto try_parse = [](const std::string& s) -> std::optional<gloss::GlossSentence> {
        try {
            return gloss::parse_gloss(s);
        } catch (const gloss::GlossError&) {
            return std::nullopt;
        }
    };
    for (auto it = lines.rbegin(); it != lines.rend(); ++it)
        if (auto g = try_parse(*it); g && has_affix(*g)) return *g;
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        auto g = try_parse(*it);
        if (!g || !has_feature_word(*g)) continue;
        const auto& first = g->words.front();
        if (!first.is_feature_word && std::isupper(static_cast<unsigned char>(first.stem[0]))) continue;
        return *g;
    }
    throw StructuringNeeded("no gloss found in model output");
}

}  // namespace conlang::morphosyntax
