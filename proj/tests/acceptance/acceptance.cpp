#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "conlang/fileio.hpp"
#include "conlang/gloss.hpp"
#include "conlang/lexicon.hpp"
#include "conlang/llm.hpp"
#include "conlang/metrics.hpp"
#include "conlang/morphosyntax.hpp"
#include "conlang/ngram.hpp"
#include "conlang/orthography.hpp"
#include "conlang/phonotactics.hpp"
#include "conlang/pipeline.hpp"
#include "conlang/rng.hpp"
#include "conlang/soundchange.hpp"
#include "oracles.hpp"
#include "random_gloss.hpp"

using namespace conlang;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = CONLANG_SOURCE_DIR;

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Records the first failure only.
struct Check {
    Outcome out;
    void expect(bool cond, const std::string& what) {
        if (!cond && out.ok) {
            out.ok = false;
            out.detail = what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream o;
    o.precision(prec);
    o << std::fixed << v;
    return o.str();
}

std::vector<json> jsonl(const fs::path& p) {
    std::vector<json> out;
    std::ifstream in(p);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

phonotactics::PhonotacticGrammar grammar(const std::string& name) {
    return phonotactics::load_grammar((kRoot / "data/grammars" / (name + ".json")).string());
}

std::vector<gloss::GlossSentence> fixture_glosses(const std::string& set, size_t n) {
    auto spec = morphosyntax::load_feature_set(set);
    std::vector<gloss::GlossSentence> out;
    for (const auto& j : jsonl(kRoot / "data/corpora/fixture_sources.jsonl")) {
        if (out.size() == n) break;
        out.push_back(morphosyntax::transform(morphosyntax::parse_source(j["source"].get<std::string>()), spec));
    }
    return out;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    return out;
}

// ---------------------------------------------------------------------------

Outcome ter_worked_example() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    double v = metrics::ter({"the", "fat", "rat", "caught", "the", "cat"}, {"the", "cat", "caught", "the", "fat", "rat"});
    double dt = seconds_since(t0);
    c.expect(std::abs(v - 2.0 / 6.0) <= 1e-9, "TER = " + fmt(v, 12));
    c.expect(dt < 1e-3, "took " + fmt(dt * 1e3) + " ms");
    c.out.detail = c.out.ok ? "TER " + fmt(v, 6) + " in " + fmt(dt * 1e3, 3) + " ms" : c.out.detail;
    return c.out;
}

Outcome metric_identities() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(2024);
    std::vector<gloss::GlossSentence> sents;
    size_t rejected = 0;
    while (sents.size() < 500) {
        auto s = test_support::random_sentence(rng);
        if (gloss::strip_features(s).empty()) ++rejected;
        else sents.push_back(std::move(s));
    }
    for (const auto& s : sents) {
        auto text = gloss::serialize_gloss(s);
        c.expect(metrics::ter(s, s) == 0.0, "TER on " + text);
        c.expect(metrics::wer(s, s) == 0.0, "WER on " + text);
        c.expect(metrics::cer(s, s) == 0.0, "CER on " + text);
        c.expect(metrics::ser(s, s) == 0.0, "SER on " + text);
        c.expect(metrics::mfer(s, s) == 0.0, "MFER on " + text);
        c.expect(metrics::mser(metrics::ser(s, s), metrics::mfer(s, s)) == 0.0, "MSER on " + text);
        c.expect(metrics::lemma_f1(s, s).f1 == 1.0, "Lemma F1 on " + text);
    }
    auto report = metrics::score_corpus(sents, sents);
    c.expect(report.bleu && std::abs(*report.bleu - 100.0) < 1e-9, "BLEU " + fmt(report.bleu.value_or(-1)));
    c.expect(report.chrf_pp && std::abs(*report.chrf_pp - 100.0) < 1e-9, "ChrF++ " + fmt(report.chrf_pp.value_or(-1)));
    double dt = seconds_since(t0);
    c.expect(dt < 5.0, "took " + fmt(dt) + " s");
    if (c.out.ok) c.out.detail = "500 sentences (" + std::to_string(rejected) + " stemless draws skipped) in " + fmt(dt, 2) + " s";
    return c.out;
}

Outcome mfer_affix_order() {
    Check c;
    Rng rng(77);
    size_t permuted = 0;
    for (int i = 0; i < 200; ++i) {
        auto hyp = test_support::random_sentence(rng);
        auto ref = test_support::random_sentence(rng);
        auto perm = hyp;
        for (auto& w : perm.words) {
            if (w.suffixes.size() < 2) continue;
            std::reverse(w.suffixes.begin(), w.suffixes.end());
            std::rotate(w.suffixes.begin(), w.suffixes.begin() + 1, w.suffixes.end());
            ++permuted;
        }
        c.expect(metrics::mfer(perm, ref) == metrics::mfer(hyp, ref), "MFER changed for " + gloss::serialize_gloss(hyp));
        c.expect(metrics::mfer(perm, hyp) == 0.0, "self MFER after permutation " + gloss::serialize_gloss(perm));
    }
    c.expect(permuted > 100, "too few permutable words");
    if (c.out.ok) c.out.detail = "200 sentences, " + std::to_string(permuted) + " words permuted";
    return c.out;
}

Outcome mser_linearity() {
    Check c;
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        double s = rng.uniform() * 2, m = rng.uniform() * 2;
        for (double a : {0.0, 0.5, 1.0}) c.expect(metrics::mser(s, m, a) == a * s + (1 - a) * m, "alpha " + fmt(a));
    }
    c.expect(metrics::mser(0.2, 0.6) == 0.5 * 0.2 + 0.5 * 0.6, "default alpha is not 0.5");
    if (c.out.ok) c.out.detail = "exact at alpha 0, 0.5, 1";
    return c.out;
}

Outcome ter_wer_oracles() {
    Check c;
    Rng rng(1234);
    static const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
    auto draw = [&] {
        metrics::Tokens t(1 + rng.below(6));
        for (auto& w : t) w = words[rng.below(words.size())];
        return t;
    };
    size_t ter_equal = 0, wer_equal = 0;
    for (int i = 0; i < 300; ++i) {
        auto h = draw(), r = draw();
        size_t heuristic = metrics::ter_edits(h, r).total_edits;
        size_t exact = test_support::oracle_ter_edits(h, r);
        c.expect(heuristic >= exact, "heuristic TER undercounts");
        ter_equal += heuristic == exact;
        wer_equal += metrics::wer(h, r) * static_cast<double>(r.size()) ==
                     static_cast<double>(test_support::oracle_edit_distance(h, r));
    }
    c.expect(ter_equal >= 285, "TER agrees in " + std::to_string(ter_equal) + "/300");
    c.expect(wer_equal == 300, "WER agrees in " + std::to_string(wer_equal) + "/300");
    if (c.out.ok)
        c.out.detail = "TER exact in " + std::to_string(ter_equal) + "/300, WER " + std::to_string(wer_equal) + "/300";
    return c.out;
}

Outcome morphosyntax_engine() {
    using namespace morphosyntax;
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    auto fixture = jsonl(kRoot / "data/morphosyntax/eval_sentences.jsonl");
    c.expect(fixture.size() >= 20, "fixture has " + std::to_string(fixture.size()) + " sentences");
    size_t scored = 0, injections = 0;
    for (const auto& name : feature_set_names()) {
        auto spec = load_feature_set(name);
        std::vector<gloss::GlossSentence> hyps, refs;
        for (const auto& f : fixture) {
            hyps.push_back(transform(parse_source(f["source"].get<std::string>()), spec));
            refs.push_back(gloss::parse_gloss(f["glosses"][name].get<std::string>()));
        }
        auto report = metrics::score_corpus(hyps, refs);
        c.expect(report.mser && *report.mser == 0.0, name + ": MSER " + fmt(report.mser.value_or(-1)));
        scored += hyps.size();

        for (const auto& ref : refs) {
            for (size_t w = 0; w < ref.words.size(); ++w) {
                if (ref.words[w].is_feature_word) continue;
                auto bad = ref;
                auto& word = bad.words[w];
                if (word.suffixes.empty()) {
                    word.suffixes.emplace_back("DUAL");
                } else {
                    word.suffixes[0] = gloss::FeatureLabel(word.suffixes[0].text() == "DUAL" ? "PAUC" : "DUAL");
                }
                ++injections;
                c.expect(metrics::mfer(bad, ref) > 0.0, name + ": injection missed in " + gloss::serialize_gloss(bad));
            }
        }
    }

    size_t ergative_sentences = 0;
    auto sources = jsonl(kRoot / "data/morphosyntax/eval_sentences.jsonl");
    for (const auto& j : jsonl(kRoot / "data/corpora/fixture_sources.jsonl")) sources.push_back(j);
    for (const char* name : {"hard", "mizo"}) {
        auto spec = load_feature_set(name);
        for (const auto& j : sources) {
            auto src = parse_source(j["source"].get<std::string>());
            bool transitive = std::any_of(src.tokens.begin(), src.tokens.end(), [](const SourceToken& t) {
                return t.role == Role::Obj || t.feature("is_transitive_clause") == "true";
            });
            auto g = transform(src, spec);
            size_t erg = 0;
            for (const auto& w : g.words) {
                if (w.is_feature_word && w.stem == "ERG") ++erg;
                for (const auto* list : {&w.prefixes, &w.suffixes})
                    for (const auto& l : *list) erg += l.text() == "ERG";
            }
            if (!transitive) c.expect(erg == 0, std::string(name) + ": ERG in intransitive " + gloss::serialize_gloss(g));
            ergative_sentences += erg > 0;
        }
    }
    auto erg_spec = load_feature_set("hard");
    auto intr = transform(parse_source("[John|SUBJ|head=1] [sleep|VERB|tense_aspect=past] ."), erg_spec);
    auto tr = transform(parse_source("[John|SUBJ|head=1] [eat|VERB|tense_aspect=past] [fish|OBJ|head=1] ."), erg_spec);
    c.expect(gloss::serialize_gloss(intr).find("ERG") == std::string::npos, "intransitive subject marked ERG");
    c.expect(gloss::serialize_gloss(tr).find("ERG-John") != std::string::npos, "transitive subject not ERG");
    c.expect(ergative_sentences > 0, "no ergative marking seen");

    double dt = seconds_since(t0);
    c.expect(dt < 10.0, "took " + fmt(dt) + " s");
    if (c.out.ok)
        c.out.detail = std::to_string(scored) + " glosses at MSER 0, " + std::to_string(injections) +
                       " injections detected, " + fmt(dt, 2) + " s";
    return c.out;
}

Outcome phonotactic_statistics() {
    using namespace phonotactics;
    Check c;
    PhonotacticGrammar g;
    g.inventory.consonants = {{"p", 0.5}, {"t", 0.3}, {"k", 0.2}};
    g.inventory.vowels = {{"a", 1.0}};
    g.onset_clusters = {{{"C"}, 1.0}};
    g.nucleus_patterns = {{{"a"}, 1.0}};
    g.coda_clusters = {{{}, 1.0}};
    g.syllable_count_distribution = {{1, 1.0}};
    const size_t n = 100000;
    auto sample = sample_corpus(g, n, 9);
    std::map<std::string, double> counts;
    size_t invalid = 0;
    for (const auto& m : sample) {
        counts[m.phonemes.at(0)] += 1;
        invalid += !validate_morpheme_format(m.render(), g.inventory).empty();
    }
    std::string freqs;
    for (const auto& [ph, w] : g.inventory.consonants) {
        double f = counts[ph] / static_cast<double>(n);
        c.expect(std::abs(f - w) <= 0.02, ph + " at " + fmt(f));
        freqs += ph + "=" + fmt(f, 3) + " ";
    }
    c.expect(invalid == 0, std::to_string(invalid) + " malformed samples");
    if (c.out.ok) c.out.detail = freqs + "over 100k draws";
    return c.out;
}

Outcome perplexity_discrimination() {
    using namespace ngram;
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::string> names = {"welshish", "islandic", "steppe", "northern"};
    auto to_corpus = [](const std::vector<phonotactics::Morpheme>& ms, const std::string& tag) {
        EvalCorpus corpus;
        corpus.language_tag = tag;
        for (const auto& m : ms) corpus.entries.push_back(m.phonemes);
        return corpus;
    };
    std::vector<NgramModel> models;
    for (size_t i = 0; i < names.size(); ++i)
        models.push_back(NgramModel::train(to_corpus(phonotactics::sample_corpus(grammar(names[i]), 5000, 100 + i), names[i])));
    size_t top1 = 0, top2 = 0;
    std::string ranks;
    for (size_t i = 0; i < names.size(); ++i) {
        auto test = to_corpus(phonotactics::sample_corpus(grammar(names[i]), 2000, 900 + i), "?");
        size_t r = rank_of(rank_languages(test, models), names[i]);
        top1 += r == 1;
        top2 += r >= 1 && r <= 2;
        ranks += names[i] + "=" + std::to_string(r) + " ";
    }
    double dt = seconds_since(t0);
    c.expect(top1 >= 3, "top-1 " + std::to_string(top1) + "/4: " + ranks);
    c.expect(top2 == 4, "top-2 " + std::to_string(top2) + "/4: " + ranks);
    c.expect(dt < 60.0, "took " + fmt(dt) + " s");
    if (c.out.ok) c.out.detail = "ranks " + ranks + "in " + fmt(dt, 2) + " s";
    return c.out;
}

Outcome lexicon_constraints() {
    using namespace lexicon;
    Check c;
    auto g = grammar("welshish");
    size_t checked = 0;
    for (const char* set : {"turkish", "hard"}) {
        auto all = fixture_glosses(set, 220);
        c.expect(all.size() == 220, "fixture too small");
        std::vector<gloss::GlossSentence> first(all.begin(), all.begin() + 200);
        auto small = build_lexicon(first, g, {}, 5);
        std::map<Kind, std::set<std::string>> forms;
        for (const auto& [key, e] : small.entries) {
            size_t len = e.phonemic.phonemes.size();
            if (key.second == Kind::Stem) c.expect(len >= 5, "short stem " + key.first);
            else c.expect(len <= 3, "long affix " + key.first);
            c.expect(forms[key.second].insert(e.phonemic.render()).second, "duplicate form for " + key.first);
        }
        auto big = build_lexicon(all, g, {}, 5);
        Lexicon restricted = big;
        std::erase_if(restricted.entries, [&](const auto& kv) { return !small.entries.count(kv.first); });
        c.expect(format_lexicon(restricted) == format_lexicon(small), std::string(set) + ": prior entries changed");
        c.expect(big.entries.size() >= small.entries.size(), "lexicon shrank");
        checked += small.entries.size();
    }
    if (c.out.ok) c.out.detail = std::to_string(checked) + " entries checked across 2 feature sets";
    return c.out;
}

Outcome orthography_round_trip() {
    using namespace orthography;
    Check c;
    auto g = grammar("welshish");
    auto words = phonotactics::sample_corpus(g, 1000, 31);
    for (const char* name : {"latin", "cyrillic", "greek"}) {
        auto map = load_map(kRoot / "data/orthography" / (std::string(name) + ".json"));
        c.expect(validate_map(map, g.inventory).empty(), std::string(name) + ": map invalid");
        InverseMap inv;
        try {
            inv = invert(map);
        } catch (const Error& e) {
            c.expect(false, std::string(name) + ": " + e.what());
            continue;
        }
        for (const auto& w : words) {
            auto written = apply_orthography(w, map);
            c.expect(inv.decode(written) == w.phonemes, std::string(name) + ": " + w.render() + " -> " + written);
        }
        auto dup = map;
        dup.mapping["b"] = dup.mapping.at("p");
        auto violations = validate_map(dup, g.inventory);
        c.expect(std::any_of(violations.begin(), violations.end(),
                             [](const MapViolation& v) { return v.kind == ViolationKind::DuplicateGrapheme; }),
                 std::string(name) + ": injected duplicate not flagged");
    }
    if (c.out.ok) c.out.detail = "3 maps x 1000 words round-trip";
    return c.out;
}

Outcome sound_change() {
    using namespace soundchange;
    Check c;
    auto table = PhonemeFeatureTable::load(kRoot / "data/features/phoneme_features.tsv");
    auto rules = parse_rule_file(read_file(kRoot / "data/soundchange/lenition.rules"), &table);
    for (const auto& r : rules.rules) c.expect(!r.examples.empty(), "rule without examples");
    auto failures = check_rule_examples(rules);
    c.expect(failures.empty(), format_failures(rules, failures));
    auto lenited = apply_rule(rules.rules.at(0), phonotactics::Morpheme::parse("a t a")).render();
    c.expect(lenited == "a ð a", "a t a -> " + lenited);

    Rng rng(55);
    auto symbols = table.symbols();
    auto draw = [&](size_t n) {
        std::set<std::string> s;
        while (s.size() < n) s.insert(symbols[rng.below(symbols.size())]);
        return s;
    };
    auto brute = [&](const std::set<std::string>& a, const std::set<std::string>& b) {
        double total = 0;
        for (const auto& p : b) {
            int best = 1 << 30;
            for (const auto& q : a) {
                const auto& fp = table.features(p);
                const auto& fq = table.features(q);
                int d = 0;
                for (size_t i = 0; i < fp.size(); ++i) d += fp[i] != fq[i];
                best = std::min(best, d);
            }
            total += best;
        }
        return total + kCardinalityPenalty * std::abs(static_cast<double>(a.size()) - static_cast<double>(b.size()));
    };
    auto conlang = draw(12);
    std::vector<std::pair<std::string, std::set<std::string>>> candidates;
    for (int i = 0; i < 5; ++i) candidates.push_back({"inv" + std::to_string(i), draw(6 + rng.below(12))});
    std::vector<std::pair<double, std::string>> expected;
    for (const auto& [id, inv] : candidates) {
        c.expect(inventory_distance(inv, inv, table) == 0.0, id + ": distance to itself is not 0");
        expected.push_back({brute(conlang, inv), id});
    }
    std::sort(expected.begin(), expected.end());
    auto ranked = rank_inventories(conlang, candidates, table);
    c.expect(ranked.size() == expected.size(), "ranking size");
    for (size_t i = 0; i < ranked.size() && i < expected.size(); ++i) {
        c.expect(ranked[i].id == expected[i].second, "rank " + std::to_string(i) + " is " + ranked[i].id);
        c.expect(std::abs(ranked[i].distance - expected[i].first) < 1e-12, ranked[i].id + " distance differs");
    }
    if (c.out.ok) c.out.detail = std::to_string(rules.rules.size()) + " rules, 5 inventories ranked as brute force";
    return c.out;
}

Outcome pipeline_determinism() {
    using namespace pipeline;
    Check c;
    auto base = fs::temp_directory_path() / ("conlang_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);
    std::vector<json> means;
    std::vector<std::map<std::string, std::string>> trees;
    for (const char* run : {"a", "b"}) {
        auto cfg = ProjectConfig::load(kRoot / "data/configs/replay.json");
        cfg.output_dir = base / run;
        auto cassette = std::make_shared<llm::Cassette>(llm::Cassette::load(*cfg.cassette));
        auto client = std::make_shared<llm::Client>(llm::ClientOptions{llm::Mode::Replay, cfg.model_id, 4, {}}, nullptr,
                                                    cassette);
        Pipeline p(cfg, client);
        try {
            for (const auto& r : p.build()) c.expect(r.exit_code == kExitOk, r.stage + " exited " + std::to_string(r.exit_code));
            c.expect(p.experiment().exit_code == kExitOk, "experiment failed");
        } catch (const Error& e) {
            c.expect(false, e.what());
            break;
        }
        trees.push_back(tree(cfg.build_dir()));
        means.push_back(json::parse(read_file(p.out("reports/experiment.json")))["mean"]);
    }
    if (trees.size() == 2) {
        c.expect(trees[0] == trees[1], "output trees differ");
        c.expect(trees[0].count("handbook.md") && trees[0].count("grammar/grammar.json"), "missing outputs");
        for (const char* cond : {"annotated", "unannotated"})
            for (const char* k : {"bigram", "trigram", "tetragram"})
                c.expect(std::abs(means[0][cond][k].get<double>() - means[1][cond][k].get<double>()) <= 1e-9,
                         std::string("BLEU drift in ") + cond + " " + k);
    }
    std::vector<std::string> refs;
    for (const auto& j : jsonl(kRoot / "data/experiment/items.jsonl")) refs.push_back(j["reference"]);
    auto identity = score_condition("identity", refs, refs);
    c.expect(identity.bigram == 100.0 && identity.trigram == 100.0 && identity.tetragram == 100.0,
             "identity BLEU " + fmt(identity.tetragram));
    fs::remove_all(base);
    if (c.out.ok && !means.empty())
        c.out.detail = std::to_string(trees[0].size()) + " files identical; annotated tetragram BLEU " +
                       fmt(means[0]["annotated"]["tetragram"].get<double>(), 2);
    return c.out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"ter-worked-example", ter_worked_example},
        {"metric-identities", metric_identities},
        {"mfer-affix-order", mfer_affix_order},
        {"mser-linearity", mser_linearity},
        {"ter-wer-oracles", ter_wer_oracles},
        {"morphosyntax-engine", morphosyntax_engine},
        {"phonotactic-statistics", phonotactic_statistics},
        {"perplexity-discrimination", perplexity_discrimination},
        {"lexicon-constraints", lexicon_constraints},
        {"orthography-round-trip", orthography_round_trip},
        {"sound-change", sound_change},
        {"pipeline-determinism", pipeline_determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.ok;
        std::cout << (o.ok ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
