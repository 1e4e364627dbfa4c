#include "conlang/pipeline.hpp"

#include <gtest/gtest.h>

#include <regex>

#include <json.hpp>

#include "conlang/fileio.hpp"
#include "conlang/utf8.hpp"

using namespace conlang;
using namespace conlang::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = CONLANG_SOURCE_DIR;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("conlang_pipe_" + name + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

json base_config(const fs::path& out) {
    return {{"build_id", "t"},
            {"grammar", (kRoot / "data/grammars/welshish.json").string()},
            {"feature_set", "turkish"},
            {"orthography", (kRoot / "data/orthography/latin.json").string()},
            {"seed", 11},
            {"prompt_dir", (kRoot / "prompts").string()},
            {"output_dir", out.string()},
            {"sources", (kRoot / "data/corpora/fixture_sources.jsonl").string()},
            {"sample_size", 500}};
}

ProjectConfig config(const json& j) { return ProjectConfig::from_json(j, kRoot); }

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    return out;
}

std::shared_ptr<llm::Client> scripted(std::vector<std::string> responses) {
    return std::make_shared<llm::Client>(llm::ClientOptions{llm::Mode::Live, "m", 1, {}},
                                         std::make_shared<llm::ScriptedProvider>(std::move(responses)), nullptr);
}

std::string first_lines(const fs::path& p, size_t n) {
    std::string out;
    std::istringstream in(read_file(p));
    std::string line;
    for (size_t i = 0; i < n && std::getline(in, line); ++i) out += line + "\n";
    return out;
}

}  // namespace

TEST(Config, ResolvesPathsAndRejectsTypos) {
    auto c = ProjectConfig::from_json({{"build_id", "x"},
                                       {"feature_set", "welsh"},
                                       {"orthography", "o.json"},
                                       {"seed", 1},
                                       {"prompt_dir", "p"},
                                       {"output_dir", "out"}},
                                      "/base/dir");
    EXPECT_EQ(c.orthography, fs::path("/base/dir/o.json"));
    EXPECT_EQ(c.build_dir(), fs::path("/base/dir/out/x"));
    EXPECT_FALSE(c.grammar);
    auto bad = base_config("/tmp");
    bad["seeds"] = 3;
    EXPECT_THROW(config(bad), ConfigError);
    auto missing = base_config("/tmp");
    missing.erase("seed");
    EXPECT_THROW(config(missing), ConfigError);
    auto gone = base_config("/tmp");
    gone["grammar"] = "nope.json";
    EXPECT_THROW(config(gone).check_paths(), ConfigError);
}

TEST(Pipeline, OfflineBuildIsDeterministicAndResumable) {
    TempDir a("det_a"), b("det_b");
    Pipeline pa(config(base_config(a.path)));
    Pipeline pb(config(base_config(b.path)));
    for (const auto& r : pa.build()) EXPECT_EQ(r.exit_code, kExitOk) << r.stage;
    for (const auto& r : pb.build()) EXPECT_EQ(r.exit_code, kExitOk) << r.stage;
    auto ta = tree(a.path / "t");
    auto tb = tree(b.path / "t");
    EXPECT_EQ(ta, tb);
    for (const char* f : {"grammar/grammar.json", "grammar/sample.txt", "glosses.jsonl", "lexicon.jsonl", "corpus.jsonl",
                          "handbook_prompt.txt", "reports/phonology.md"})
        EXPECT_TRUE(ta.count(f)) << f;

    for (const auto& r : pa.build()) EXPECT_TRUE(r.skipped) << r.stage;
    EXPECT_EQ(tree(a.path / "t"), ta);

    for (const auto& r : lexicon::load_corpus(a.path / "t/corpus.jsonl")) {
        EXPECT_FALSE(r.phonemic.empty());
        ASSERT_TRUE(r.orthographic);
        EXPECT_FALSE(gloss::serialize_gloss(r.gloss).empty());
    }
}

TEST(Pipeline, SeedChangesOutputs) {
    TempDir a("seed");
    auto j = base_config(a.path);
    Pipeline p1(config(j));
    p1.build();
    auto before = read_file(a.path / "t/lexicon.jsonl");
    j["seed"] = 12;
    Pipeline p2(config(j));
    auto results = p2.build();
    EXPECT_FALSE(results[2].skipped);
    EXPECT_NE(read_file(a.path / "t/lexicon.jsonl"), before);
}

TEST(Pipeline, HandGlossReferencesScoreZero) {
    TempDir d("refs");
    std::string src, refs;
    size_t i = 0;
    std::istringstream in(read_file(kRoot / "data/morphosyntax/eval_sentences.jsonl"));
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        auto j = json::parse(line);
        auto id = "e" + std::to_string(++i);
        src += json{{"id", id}, {"text", j["text"]}, {"source", j["source"]}}.dump() + "\n";
        refs += json{{"id", id}, {"gloss", j["glosses"]["turkish"]}}.dump() + "\n";
    }
    write_file_atomic(d.path / "src.jsonl", src);
    write_file_atomic(d.path / "refs.jsonl", refs);
    auto j = base_config(d.path);
    j["sources"] = (d.path / "src.jsonl").string();
    j["references"] = (d.path / "refs.jsonl").string();
    Pipeline p(config(j));
    auto r = p.morphosyntax();
    EXPECT_EQ(r.exit_code, kExitOk);
    auto scores = metrics::report_from_json(json::parse(read_file(d.path / "t/reports/morphosyntax_scores.json")));
    EXPECT_EQ(scores.sentences, i);
    EXPECT_DOUBLE_EQ(*scores.ser, 0.0);
    EXPECT_DOUBLE_EQ(*scores.mser, 0.0);
}

TEST(Pipeline, BadSentencesArePartialFailures) {
    TempDir d("partial");
    write_file_atomic(d.path / "src.jsonl", first_lines(kRoot / "data/corpora/fixture_sources.jsonl", 3) +
                                                R"({"id":"broken","text":"x","source":"[dog|SUBJ|head=9] ."})" "\n");
    auto j = base_config(d.path);
    j["sources"] = (d.path / "src.jsonl").string();
    Pipeline p(config(j));
    auto r = p.morphosyntax();
    EXPECT_EQ(r.exit_code, kExitPartial);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].rfind("broken:", 0), 0u);
    EXPECT_EQ(parse_glosses(read_file(d.path / "t/glosses.jsonl")).size(), 3u);
    EXPECT_NE(read_file(d.path / "t/reports/morphosyntax.md").find("broken"), std::string::npos);
}

TEST(Pipeline, MissingGrammarWithoutModelIsActionable) {
    TempDir d("nogrammar");
    auto j = base_config(d.path);
    j.erase("grammar");
    Pipeline p(config(j));
    try {
        p.phonology();
        FAIL();
    } catch (const PipelineError& e) {
        EXPECT_NE(std::string(e.what()).find("CONLANG_LLM"), std::string::npos);
    }
}

TEST(Pipeline, LexiconRebuildIsMonotone) {
    TempDir d("mono");
    write_file_atomic(d.path / "src.jsonl", first_lines(kRoot / "data/corpora/fixture_sources.jsonl", 200));
    auto j = base_config(d.path);
    j["sources"] = (d.path / "src.jsonl").string();
    Pipeline(config(j)).build();
    auto before = lexicon::load_lexicon(d.path / "t/lexicon.jsonl");
    write_file_atomic(d.path / "src.jsonl", first_lines(kRoot / "data/corpora/fixture_sources.jsonl", 205));
    auto results = Pipeline(config(j)).build();
    EXPECT_FALSE(results[1].skipped);
    auto after = lexicon::load_lexicon(d.path / "t/lexicon.jsonl");
    for (const auto& [k, e] : before.entries) {
        ASSERT_TRUE(after.entries.count(k)) << k.first;
        EXPECT_EQ(after.entries.at(k), e);
    }
    EXPECT_GE(after.entries.size(), before.entries.size());
}

TEST(Pipeline, InvalidMapIsFatal) {
    TempDir d("badmap");
    auto map = json::parse(read_file(kRoot / "data/orthography/latin.json"));
    map["mapping"]["b"] = map["mapping"]["p"];
    write_file_atomic(d.path / "map.json", map.dump());
    auto j = base_config(d.path);
    j["orthography"] = (d.path / "map.json").string();
    Pipeline p(config(j));
    p.phonology();
    p.morphosyntax();
    try {
        p.lexicon();
        FAIL();
    } catch (const PipelineError& e) {
        EXPECT_NE(std::string(e.what()).find("DuplicateGrapheme"), std::string::npos) << e.what();
    }
}

TEST(Pipeline, HandbookPromptIsFilled) {
    TempDir d("handbook");
    Pipeline p(config(base_config(d.path)));
    p.build();
    auto text = read_file(d.path / "t/handbook_prompt.txt");
    EXPECT_FALSE(std::regex_search(text, std::regex(R"(\{[a-z_]+\})")));
    auto g = phonotactics::load_grammar((kRoot / "data/grammars/welshish.json").string());
    auto line_after = [&](const std::string& heading) {
        auto pos = text.find(heading + "\n");
        auto start = pos + heading.size() + 1;
        return text.substr(start, text.find('\n', start) - start);
    };
    auto cons = utf8::split_whitespace(line_after("## Consonants"));
    auto vows = utf8::split_whitespace(line_after("## Vowels"));
    EXPECT_EQ(cons.size(), g.inventory.consonants.size());
    EXPECT_EQ(vows.size(), g.inventory.vowels.size());
    for (const auto& c : cons) EXPECT_TRUE(g.inventory.is_consonant(c)) << c;
    for (const auto& v : vows) EXPECT_TRUE(g.inventory.is_vowel(v)) << v;
}

TEST(Pipeline, TranslationGrowsLexiconOnlyForNewMorphemes) {
    TempDir d("translate");
    auto cfg = config(base_config(d.path));
    Pipeline(cfg).build();
    auto glosses = parse_glosses(read_file(d.path / "t/glosses.jsonl"));
    auto known = gloss::serialize_gloss(glosses[0].gloss);  // sheep-PLUR-NOM ...
    auto lex0 = lexicon::load_lexicon(d.path / "t/lexicon.jsonl");

    Pipeline same(cfg, scripted({"Gloss: " + known}));
    EXPECT_EQ(same.translate("The sheep did not help the fish in the village.").exit_code, kExitOk);
    EXPECT_EQ(lexicon::load_lexicon(d.path / "t/lexicon.jsonl").entries.size(), lex0.entries.size());

    auto novel = known;
    novel.replace(novel.find("sheep"), 5, "zebra");
    Pipeline one(cfg, scripted({novel}));
    one.translate("The zebras did not help the fish in the village.");
    auto lex1 = lexicon::load_lexicon(d.path / "t/lexicon.jsonl");
    EXPECT_EQ(lex1.count(lexicon::Kind::Stem), lex0.count(lexicon::Kind::Stem) + 1);
    EXPECT_EQ(lex1.entries.size(), lex0.entries.size() + 1);

    auto dual = known;
    dual.replace(dual.find("sheep-PLUR"), 10, "sheep-DUAL");
    Pipeline two(cfg, scripted({dual}));
    two.translate("The two sheep did not help the fish in the village.");
    auto lex2 = lexicon::load_lexicon(d.path / "t/lexicon.jsonl");
    ASSERT_TRUE(lex2.contains("DUAL", lexicon::Kind::Suffix));
    auto records = lexicon::load_corpus(d.path / "t/translations.jsonl");
    ASSERT_EQ(records.size(), 3u);
    auto dual_form = lex2.at("DUAL", lexicon::Kind::Suffix).phonemic.render();
    auto first_word = records[2].phonemic.substr(0, records[2].phonemic.find(" # "));
    EXPECT_NE(first_word.find(dual_form), std::string::npos);
    EXPECT_NE(read_file(d.path / "t/reports/translation_prompt.txt").find("The two sheep"), std::string::npos);
}

TEST(Pipeline, LlmGlossPathReplaysFromCassette) {
    TempDir d("llmgloss");
    write_file_atomic(d.path / "raw.txt", "The dogs slept.\nA bird sang.\n");
    auto j = base_config(d.path);
    j.erase("sources");
    j["raw_texts"] = (d.path / "raw.txt").string();
    j["cassette"] = (d.path / "cassette.jsonl").string();
    auto cfg = config(j);

    std::vector<std::string> script(200, "Output: dog-PLUR-NOM sleep-PAST-3PLNOM.");
    auto cassette = std::make_shared<llm::Cassette>(llm::Cassette::load(*cfg.cassette));
    auto rec = std::make_shared<llm::Client>(llm::ClientOptions{llm::Mode::Record, "m", 1, [] { return std::string("T"); }},
                                             std::make_shared<llm::ScriptedProvider>(script), cassette);
    Pipeline recorder(cfg, rec);
    EXPECT_EQ(recorder.morphosyntax().exit_code, kExitOk);
    auto recorded = read_file(d.path / "t/glosses.jsonl");
    EXPECT_NE(recorded.find("dog-PLUR-NOM sleep-PAST-3PLNOM."), std::string::npos);

    fs::remove_all(d.path / "t");
    auto replay = std::make_shared<llm::Client>(llm::ClientOptions{llm::Mode::Replay, "m", 1, {}}, nullptr,
                                                std::make_shared<llm::Cassette>(llm::Cassette::load(*cfg.cassette)));
    Pipeline replayer(cfg, replay);
    EXPECT_EQ(replayer.morphosyntax().exit_code, kExitOk);
    EXPECT_EQ(read_file(d.path / "t/glosses.jsonl"), recorded);
}

TEST(Pipeline, GrammarDraftingAddsRequiredPhonemeInSecondRound) {
    TempDir d("draft");
    auto g = json::parse(read_file(kRoot / "data/grammars/welshish.json"));
    auto without = g;
    without["consonants"].erase("ɬ");
    auto j = base_config(d.path);
    j.erase("grammar");
    j["required_phonemes"] = {"ɬ"};
    j["phonology_notes"] = "Welsh-like, with a voiceless lateral fricative.";
    Pipeline p(config(j), scripted({"Here is a draft:\n" + without.dump(), g.dump()}));
    auto r = p.phonology();
    EXPECT_EQ(r.exit_code, kExitOk);
    auto rounds = read_file(d.path / "t/reports/phonology_rounds.md");
    EXPECT_NE(rounds.find("## Round 2"), std::string::npos);
    EXPECT_EQ(rounds.find("## Round 3"), std::string::npos);
    EXPECT_NE(rounds.find("## Missing phonemes\nɬ"), std::string::npos);
    auto built = phonotactics::load_grammar((d.path / "t/grammar/grammar.json").string());
    EXPECT_TRUE(built.inventory.contains("ɬ"));
}

TEST(Experiment, IdentityScoresHundredAndTableHasThreeColumns) {
    auto row = score_condition("x", {"a b c d e .", "f g h i"}, {"a b c d e .", "f g h i"});
    EXPECT_DOUBLE_EQ(row.bigram, 100.0);
    EXPECT_DOUBLE_EQ(row.trigram, 100.0);
    EXPECT_DOUBLE_EQ(row.tetragram, 100.0);
    auto table = format_experiment_table({row});
    auto header = table.substr(0, table.find('\n'));
    EXPECT_EQ(header, "| Condition | Bigram BLEU | Trigram BLEU | Tetragram BLEU |");
}

TEST(Experiment, ReplayReproducesBleu) {
    TempDir d("exp");
    std::vector<std::string> refs = {"ku rera ku nu.", "sine cise an.", "kamuy ek ruwe ne.", "aynu utar e."};
    std::string items;
    for (size_t i = 0; i < refs.size(); ++i)
        items += json{{"id", "i" + std::to_string(i)}, {"source", "s" + std::to_string(i)}, {"annotation", "a"},
                      {"reference", refs[i]}}
                     .dump() +
                 "\n";
    write_file_atomic(d.path / "items.jsonl", items);
    auto j = base_config(d.path);
    j["experiment"] = {{"items", (d.path / "items.jsonl").string()}, {"runs", 2}};
    j["cassette"] = (d.path / "cas.jsonl").string();
    auto cfg = config(j);

    std::vector<std::string> script;
    for (int run = 0; run < 2; ++run) {
        for (const auto& r : refs) script.push_back("Translation: " + r.substr(0, r.find(' ')) + " x y.");
        for (const auto& r : refs) script.push_back(r);
    }
    auto cassette = std::make_shared<llm::Cassette>(llm::Cassette::load(*cfg.cassette));
    Pipeline rec(cfg, std::make_shared<llm::Client>(llm::ClientOptions{llm::Mode::Record, "m", 1, {}},
                                                    std::make_shared<llm::ScriptedProvider>(script), cassette));
    EXPECT_EQ(rec.experiment().exit_code, kExitOk);
    auto first = json::parse(read_file(d.path / "t/reports/experiment.json"));
    EXPECT_DOUBLE_EQ(first["mean"]["annotated"]["tetragram"].get<double>(), 100.0);
    EXPECT_LT(first["mean"]["unannotated"]["bigram"].get<double>(), 100.0);

    Pipeline rep(cfg, std::make_shared<llm::Client>(llm::ClientOptions{llm::Mode::Replay, "m", 1, {}}, nullptr,
                                                    std::make_shared<llm::Cassette>(llm::Cassette::load(*cfg.cassette))));
    rep.experiment();
    auto second = json::parse(read_file(d.path / "t/reports/experiment.json"));
    for (const char* c : {"annotated", "unannotated"})
        for (const char* k : {"bigram", "trigram", "tetragram"})
            EXPECT_NEAR(first["mean"][c][k].get<double>(), second["mean"][c][k].get<double>(), 1e-9);
}

TEST(Score, FilesRoundTrip) {
    TempDir d("score");
    write_file_atomic(d.path / "h.txt", "dog-PLUR sleep-PAST.\ncat eat-PRES fish.\n");
    write_file_atomic(d.path / "r.jsonl", R"({"gloss":"dog-PLUR sleep-PAST."})" "\n" R"({"gloss":"cat eat-PAST fish."})" "\n");
    auto r = score_files(d.path / "h.txt", d.path / "r.jsonl");
    EXPECT_EQ(r.sentences, 2u);
    EXPECT_GT(*r.mfer, 0.0);
    EXPECT_THROW(score_files(d.path / "h.txt", d.path / "missing"), Error);
}
