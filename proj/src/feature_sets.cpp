#include <json.hpp>

#include "conlang/morphosyntax.hpp"

namespace conlang::morphosyntax {

namespace {

const char* const kHard = R"({
  "main_word_order": "OSV", "adj_noun_word_order": "NA", "posspron_noun_word_order": "NPoss",
  "num_noun_word_order": "NNum", "adposition_noun_word_order": "NP",
  "case": {"case_marking": ["ergative", "absolutive", "genitive", "dative", "locative", "instrumental"],
           "case_marking_strategy": "prefix", "oblique_case_marking": "instrumental"},
  "definiteness": {"definiteness": ["definite", "indefinite"], "definiteness_marking_strategy": "suffix"},
  "adjective_agreement": {"adjective_agreement": ["number", "case", "definiteness"], "adjective_agreement_strategy": "prefix"},
  "comparative": {"comparative": ["comparative", "superlative", "equative"], "comparative_marking_strategy": "prefix"},
  "tense_aspect": {"tense_aspect": ["present", "future", "recent past", "remote past"], "tense_aspect_marking_strategy": "prefix"},
  "mood": {"mood": ["indicative", "subjunctive", "imperative", "conditional"], "mood_marking_strategy": "prefix"},
  "voice": {"voice": ["active", "passive"], "voice_marking_strategy": "prefix"},
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "suffix",
             "verbal_number_agreement": ["singular", "plural", "dual"], "verbal_number_marking_strategy": "prefix"},
  "inclusive_exclusive": true,
  "nominal_number": {"nominal_number": ["singular", "plural", "dual"], "nominal_number_marking_strategy": "prefix"},
  "relativization": {"relativization_order": "head-final", "relativization_marking": "head-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "affix"},
  "negation": "suffix",
  "infinitive": {"infinitive": "infinitive", "infinitive_marking_strategy": "prefix"}
})";

const char* const kArabic = R"({
  "main_word_order": "VSO", "adj_noun_word_order": "NA", "posspron_noun_word_order": "NPoss",
  "num_noun_word_order": "NumN", "adposition_noun_word_order": "PN",
  "case": {"case_marking": ["nominative", "accusative", "genitive"], "case_marking_strategy": "suffix",
           "oblique_case_marking": "genitive"},
  "definiteness": {"definiteness": ["definite"], "definiteness_marking_strategy": "prefix"},
  "adjective_agreement": {"adjective_agreement": ["number", "case", "definiteness"], "adjective_agreement_strategy": "suffix"},
  "comparative": {"comparative": ["comparative", "superlative"], "comparative_marking_strategy": "suffix"},
  "tense_aspect": {"tense_aspect": ["present", "past", "future"], "tense_aspect_marking_strategy": "suffix"},
  "mood": {"mood": ["indicative", "subjunctive", "imperative"], "mood_marking_strategy": "suffix"},
  "voice": {"voice": ["active", "passive"], "voice_marking_strategy": "suffix"},
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "suffix",
             "verbal_number_agreement": ["singular", "plural", "dual"], "verbal_number_marking_strategy": "suffix"},
  "inclusive_exclusive": true,
  "nominal_number": {"nominal_number": ["singular", "plural", "dual"], "nominal_number_marking_strategy": "suffix"},
  "relativization": {"relativization_order": "head-initial", "relativization_marking": "head-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "word"},
  "negation": "prepositional word",
  "infinitive": null
})";

const char* const kFijian = R"({
  "main_word_order": "VOS", "adj_noun_word_order": "NA", "posspron_noun_word_order": "NPoss",
  "num_noun_word_order": "NumN", "adposition_noun_word_order": "PN",
  "case": null, "definiteness": null, "adjective_agreement": null,
  "comparative": {"comparative": ["comparative", "superlative"], "comparative_marking_strategy": "postpositional word"},
  "tense_aspect": null, "mood": null, "voice": null,
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "prepositional word",
             "verbal_number_agreement": ["singular", "plural", "dual", "paucal"],
             "verbal_number_marking_strategy": "prepositional word"},
  "inclusive_exclusive": false,
  "nominal_number": null,
  "relativization": {"relativization_order": "head-initial", "relativization_marking": null,
                     "relativizer_position": null, "relativizer_morpheme": null},
  "negation": "prepositional word",
  "infinitive": null
})";

const char* const kFrench = R"({
  "main_word_order": "SVO", "adj_noun_word_order": "NA", "posspron_noun_word_order": "PossN",
  "num_noun_word_order": "NumN", "adposition_noun_word_order": "PN",
  "case": null,
  "definiteness": {"definiteness": ["definite", "indefinite"], "definiteness_marking_strategy": "prepositional word"},
  "adjective_agreement": {"adjective_agreement": ["number"], "adjective_agreement_strategy": "suffix"},
  "comparative": {"comparative": ["comparative", "superlative", "equative"], "comparative_marking_strategy": "prepositional word"},
  "tense_aspect": {"tense_aspect": ["present", "past", "future", "imperfect"], "tense_aspect_marking_strategy": "suffix"},
  "mood": {"mood": ["indicative", "subjunctive", "imperative", "conditional"], "mood_marking_strategy": "suffix"},
  "voice": {"voice": ["active", "passive"], "voice_marking_strategy": "suffix"},
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "suffix",
             "verbal_number_agreement": ["singular", "plural"], "verbal_number_marking_strategy": "suffix"},
  "inclusive_exclusive": false,
  "nominal_number": {"nominal_number": ["singular", "plural"], "nominal_number_marking_strategy": "suffix"},
  "relativization": {"relativization_order": "head-initial", "relativization_marking": "head-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "word"},
  "negation": "postpositional word",
  "infinitive": {"infinitive": "infinitive", "infinitive_marking_strategy": "suffix"}
})";

const char* const kHixkaryana = R"({
  "main_word_order": "OVS", "adj_noun_word_order": "NA", "posspron_noun_word_order": "PossN",
  "num_noun_word_order": "NumN", "adposition_noun_word_order": "PN",
  "case": null,
  "definiteness": {"definiteness": ["definite", "indefinite"], "definiteness_marking_strategy": "prepositional word"},
  "adjective_agreement": {"adjective_agreement": ["number"], "adjective_agreement_strategy": "suffix"},
  "comparative": {"comparative": ["comparative", "superlative", "equative"], "comparative_marking_strategy": "prepositional word"},
  "tense_aspect": {"tense_aspect": ["present", "past", "future", "imperfect"], "tense_aspect_marking_strategy": "suffix"},
  "mood": {"mood": ["indicative", "subjunctive", "imperative", "conditional"], "mood_marking_strategy": "suffix"},
  "voice": {"voice": ["active", "passive"], "voice_marking_strategy": "suffix"},
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "suffix",
             "verbal_number_agreement": ["singular", "plural"], "verbal_number_marking_strategy": "suffix"},
  "inclusive_exclusive": true,
  "nominal_number": {"nominal_number": ["singular", "plural"], "nominal_number_marking_strategy": "suffix"},
  "relativization": {"relativization_order": "head-initial", "relativization_marking": "head-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "word"},
  "negation": "postpositional word",
  "infinitive": {"infinitive": "infinitive", "infinitive_marking_strategy": "suffix"}
})";

const char* const kMizo = R"({
  "main_word_order": "OSV", "adj_noun_word_order": "NA", "posspron_noun_word_order": "PossN",
  "num_noun_word_order": "NNum", "adposition_noun_word_order": "NP",
  "case": {"case_marking": ["ergative", "absolutive", "genitive", "instrumental"],
           "case_marking_strategy": "postpositional word", "oblique_case_marking": null},
  "definiteness": null, "adjective_agreement": null,
  "comparative": {"comparative": ["comparative", "superlative"], "comparative_marking_strategy": "postpositional word"},
  "tense_aspect": null, "mood": null, "voice": null,
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "prepositional word",
             "verbal_number_agreement": ["singular", "plural"], "verbal_number_marking_strategy": "prepositional word"},
  "inclusive_exclusive": false,
  "nominal_number": null,
  "relativization": {"relativization_order": "head-initial", "relativization_marking": "dependent-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "affix"},
  "negation": "postpositional word",
  "infinitive": null
})";

const char* const kTurkish = R"({
  "main_word_order": "SOV", "adj_noun_word_order": "AN", "posspron_noun_word_order": "PossN",
  "num_noun_word_order": "NumN", "adposition_noun_word_order": "NP",
  "case": {"case_marking": ["nominative", "accusative", "dative", "genitive", "ablative", "locative", "instrumental"],
           "case_marking_strategy": "suffix", "oblique_case_marking": "genitive"},
  "definiteness": null, "adjective_agreement": null,
  "comparative": {"comparative": ["comparative", "superlative"], "comparative_marking_strategy": "prepositional word"},
  "tense_aspect": {"tense_aspect": ["present", "past", "future"], "tense_aspect_marking_strategy": "suffix"},
  "mood": {"mood": ["indicative", "imperative", "conditional"], "mood_marking_strategy": "suffix"},
  "voice": {"voice": ["active", "passive"], "voice_marking_strategy": "suffix"},
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "suffix",
             "verbal_number_agreement": ["singular", "plural"], "verbal_number_marking_strategy": "suffix"},
  "inclusive_exclusive": false,
  "nominal_number": {"nominal_number": ["singular", "plural"], "nominal_number_marking_strategy": "suffix"},
  "relativization": {"relativization_order": "head-final", "relativization_marking": "dependent-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "affix"},
  "negation": "suffix",
  "infinitive": {"infinitive": "infinitive", "infinitive_marking_strategy": "suffix"}
})";

const char* const kVietnamese = R"({
  "main_word_order": "SVO", "adj_noun_word_order": "NA", "posspron_noun_word_order": "NPoss",
  "num_noun_word_order": "NumN", "adposition_noun_word_order": "PN",
  "case": null, "definiteness": null, "adjective_agreement": null,
  "comparative": {"comparative": ["comparative", "superlative", "equative"], "comparative_marking_strategy": "postpositional word"},
  "tense_aspect": null, "mood": null, "voice": null, "person": null,
  "inclusive_exclusive": false,
  "nominal_number": null,
  "relativization": {"relativization_order": "head-initial", "relativization_marking": "head-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "word"},
  "negation": "prepositional word",
  "infinitive": null
})";

const char* const kWelsh = R"({
  "main_word_order": "VSO", "adj_noun_word_order": "NA", "posspron_noun_word_order": "NPoss",
  "num_noun_word_order": "NumN", "adposition_noun_word_order": "PN",
  "case": null,
  "definiteness": {"definiteness": ["definite"], "definiteness_marking_strategy": "prepositional word"},
  "adjective_agreement": null,
  "comparative": {"comparative": ["comparative", "superlative"], "comparative_marking_strategy": "suffix"},
  "tense_aspect": {"tense_aspect": ["present", "past", "future"], "tense_aspect_marking_strategy": "suffix"},
  "mood": {"mood": ["indicative", "subjunctive", "imperative", "conditional"], "mood_marking_strategy": "suffix"},
  "voice": null,
  "person": {"person_agreement": ["first", "second", "third"], "person_marking_strategy": "suffix",
             "verbal_number_agreement": ["singular", "plural"], "verbal_number_marking_strategy": "suffix"},
  "inclusive_exclusive": false,
  "nominal_number": {"nominal_number": ["singular", "plural"], "nominal_number_marking_strategy": "suffix"},
  "relativization": {"relativization_order": "head-initial", "relativization_marking": "head-marking",
                     "relativizer_position": "postpositional", "relativizer_morpheme": "word"},
  "negation": "prepositional word",
  "infinitive": null
})";

}  // namespace

const std::vector<std::string>& feature_set_names() {
    static const std::vector<std::string> names = {"arabic", "fijian",  "french",     "hixkaryana", "mizo",
                                                   "turkish", "vietnamese", "welsh", "hard"};
    return names;
}

MorphosyntaxSpec load_feature_set(std::string_view name) {
    static const std::map<std::string, const char*, std::less<>> sets = {
        {"arabic", kArabic}, {"fijian", kFijian},         {"french", kFrench}, {"hixkaryana", kHixkaryana},
        {"mizo", kMizo},     {"turkish", kTurkish},       {"vietnamese", kVietnamese}, {"welsh", kWelsh},
        {"hard", kHard}};
    auto it = sets.find(name);
    if (it == sets.end()) throw UnknownFeatureSet("unknown feature set '" + std::string(name) + "'");
    return spec_from_json(nlohmann::json::parse(it->second));
}

}  // namespace conlang::morphosyntax
