#include "conlang/phonotactics.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

using namespace conlang;
using namespace conlang::phonotactics;

namespace {

PhonotacticGrammar toy_grammar() {
    PhonotacticGrammar g;
    g.inventory.consonants = {{"p", 0.5}, {"t", 0.3}, {"k", 0.2}};
    g.inventory.vowels = {{"a", 1.0}};
    g.onset_clusters = {{{"C"}, 1.0}};
    g.nucleus_patterns = {{{"a"}, 1.0}};
    g.coda_clusters = {{{}, 1.0}};
    g.syllable_count_distribution = {{1, 1.0}};
    return g;
}

PhonotacticGrammar welshish() {
    return grammar_from_json(nlohmann::json::parse(R"({
      "consonants": {"p": 1, "b": 1, "t": 2, "d": 1, "k": 1, "ɬ": 0.5, "l": 2, "r": 2, "n": 3, "m": 2, "f": 1, "θ": 0.5},
      "vowels": {"a": 3, "e": 2, "i": 2, "o": 1, "u": 1, "ə": 2},
      "onset_clusters": [{"phonemes": ["C"], "weight": 5}, {"phonemes": [], "weight": 1},
                         {"phonemes": ["t", "r"], "weight": 0.5}],
      "nucleus_patterns": [{"phonemes": ["V"], "weight": 5}, {"phonemes": ["a", "i"], "weight": 0.5}],
      "coda_clusters": [{"phonemes": [], "weight": 3}, {"phonemes": ["C"], "weight": 2},
                        {"phonemes": ["l", "f"], "weight": 0.2}],
      "syllable_count_distribution": {"1": 0.3, "2": 0.5, "3": 0.2}
    })"));
}

}  // namespace

TEST(IpaSymbol, Validity) {
    EXPECT_TRUE(is_valid_ipa_symbol("a"));
    EXPECT_TRUE(is_valid_ipa_symbol("ɬ"));
    EXPECT_TRUE(is_valid_ipa_symbol("tʰ"));
    EXPECT_TRUE(is_valid_ipa_symbol("aː"));
    EXPECT_TRUE(is_valid_ipa_symbol("t͡ʃ"));
    EXPECT_TRUE(is_valid_ipa_symbol("ã"));
    EXPECT_FALSE(is_valid_ipa_symbol("tʃ"));
    EXPECT_FALSE(is_valid_ipa_symbol("ʰ"));
    EXPECT_FALSE(is_valid_ipa_symbol("."));
    EXPECT_FALSE(is_valid_ipa_symbol("#"));
    EXPECT_FALSE(is_valid_ipa_symbol("C"));
    EXPECT_FALSE(is_valid_ipa_symbol(""));
    EXPECT_FALSE(is_valid_ipa_symbol("t͡"));
}

TEST(Grammar, JsonRoundTrip) {
    auto g = welshish();
    auto again = grammar_from_json(grammar_to_json(g));
    EXPECT_EQ(grammar_to_json(again), grammar_to_json(g));
    EXPECT_EQ(g.max_syllables, 4);
}

TEST(Grammar, RejectsBadDocuments) {
    auto doc = grammar_to_json(toy_grammar());
    auto bad = doc;
    bad["onset_clusters"] = nlohmann::json::array({{{"phonemes", {"z"}}, {"weight", 1}}});
    EXPECT_THROW(grammar_from_json(bad), GrammarError);
    bad = doc;
    bad["syllable_count_distribution"] = {{"5", 1.0}};
    EXPECT_THROW(grammar_from_json(bad), GrammarError);
    bad = doc;
    bad["consonants"]["tʃ"] = 1.0;
    EXPECT_THROW(grammar_from_json(bad), GrammarError);
    bad = doc;
    bad["nucleus_patterns"] = nlohmann::json::array({{{"phonemes", {"p"}}, {"weight", 1}}});
    EXPECT_THROW(grammar_from_json(bad), GrammarError);
    bad = doc;
    bad.erase("vowels");
    EXPECT_THROW(grammar_from_json(bad), GrammarError);
}

TEST(Morpheme, RenderAndParse) {
    Morpheme m{{"s", "o", "d", "a", "n", "i"}, {2, 4}};
    EXPECT_EQ(m.render(), "s o . d a . n i");
    EXPECT_EQ(Morpheme::parse("s o . d a . n i"), m);
    EXPECT_EQ(Morpheme::parse("s  o  .  d a .  n i"), m);
}

TEST(Generate, WeightsDriveClassSlots) {
    auto samples = sample_corpus(toy_grammar(), 20000, 5);
    std::map<std::string, double> counts;
    for (const auto& m : samples) counts[m.phonemes.at(0)] += 1;
    EXPECT_NEAR(counts["p"] / 20000, 0.5, 0.02);
    EXPECT_NEAR(counts["t"] / 20000, 0.3, 0.02);
    EXPECT_NEAR(counts["k"] / 20000, 0.2, 0.02);
}

TEST(Generate, DeterministicAndWellFormed) {
    auto g = welshish();
    auto a = sample_corpus(g, 500, 42);
    auto b = sample_corpus(g, 500, 42);
    EXPECT_EQ(a, b);
    for (const auto& m : a) {
        ASSERT_FALSE(m.phonemes.empty());
        EXPECT_TRUE(validate_morpheme_format(m.render(), g.inventory).empty()) << m.render();
        EXPECT_LE(m.syllable_breaks.size() + 1, 3u);
        EXPECT_EQ(Morpheme::parse(m.render()), m);
    }
    auto one = sample_corpus(g.single_syllable(), 200, 1);
    for (const auto& m : one) EXPECT_TRUE(m.syllable_breaks.empty());
}

TEST(Validate, DetectsViolations) {
    auto inv = welshish().inventory;
    auto v = validate_morpheme_format("a lf . m a", inv);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, ViolationKind::FusedCluster);
    EXPECT_EQ(v[0].token, "lf");
    EXPECT_EQ(v[0].position, 1u);

    v = validate_morpheme_format("a z", inv);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, ViolationKind::UnknownSymbol);

    EXPECT_EQ(validate_morpheme_format(". a", inv).at(0).kind, ViolationKind::MalformedSeparator);
    EXPECT_EQ(validate_morpheme_format("a . . n", inv).at(0).kind, ViolationKind::MalformedSeparator);
    EXPECT_EQ(validate_morpheme_format("a .", inv).at(0).kind, ViolationKind::MalformedSeparator);
    EXPECT_EQ(validate_morpheme_format("   ", inv).at(0).kind, ViolationKind::Empty);
    EXPECT_TRUE(validate_morpheme_format("t r a  .  n ə", inv).empty());
}

TEST(Segment, LongestMatchWithBacktracking) {
    PhonemeInventory inv;
    inv.consonants = {{"t", 1}, {"t͡ʃ", 1}, {"ʃ", 1}};
    inv.vowels = {{"a", 1}};
    EXPECT_EQ(segment("t͡ʃa", inv), (std::vector<std::string>{"t͡ʃ", "a"}));
    EXPECT_EQ(segment("tʃ", inv), (std::vector<std::string>{"t", "ʃ"}));
    EXPECT_TRUE(segment("x", inv).empty());
}

TEST(RefinementReport, ListsFusedClustersAndFrequencies) {
    auto g = welshish();
    std::vector<Morpheme> sample = {Morpheme::parse("a lf"), Morpheme::parse("m a"), Morpheme::parse("lf e")};
    auto text = build_refinement_report(g, sample, "Welsh");
    EXPECT_NE(text.find("lf"), std::string::npos);
    EXPECT_NE(text.find("(6 phoneme tokens)"), std::string::npos);
    EXPECT_NE(text.find("Welsh"), std::string::npos);

    auto freqs = phoneme_frequencies(sample);
    size_t total = 0;
    for (const auto& [p, c] : freqs) total += c;
    EXPECT_EQ(total, 6u);
    EXPECT_EQ(freqs[0].first, "a");
    EXPECT_EQ(freqs[0].second, 2u);
}
