#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "conlang/error.hpp"
#include "conlang/gloss.hpp"

namespace conlang::metrics {

using Tokens = std::vector<std::string>;

class MetricError : public Error {
public:
    using Error::Error;
};

class EmptyReference : public MetricError {
public:
    using MetricError::MetricError;
};

class LengthMismatch : public MetricError {
public:
    using MetricError::MetricError;
};

struct EditScript {
    size_t insertions = 0;     // hypothesis tokens absent from the reference
    size_t deletions = 0;      // reference tokens missing from the hypothesis
    size_t substitutions = 0;
    size_t block_shifts = 0;
    size_t total_edits = 0;
};

/// Plain Levenshtein distance.
size_t edit_distance(const Tokens& a, const Tokens& b);

/// Greedy best-shift TER search (beam 1). Blocks up to kMaxShiftBlock tokens.
EditScript ter_edits(const Tokens& hyp, const Tokens& ref);

inline constexpr size_t kMaxShiftBlock = 10;

double ter(const Tokens& hyp, const Tokens& ref);
double wer(const Tokens& hyp, const Tokens& ref);
/// Levenshtein over code points divided by the reference length in code points.
double cer(std::string_view hyp, std::string_view ref);

/// Words of a gloss sentence as serialized tokens, trailing punctuation as a
/// separate token.
Tokens gloss_tokens(const gloss::GlossSentence& sentence);

double ter(const gloss::GlossSentence& hyp, const gloss::GlossSentence& ref);
double wer(const gloss::GlossSentence& hyp, const gloss::GlossSentence& ref);
double cer(const gloss::GlossSentence& hyp, const gloss::GlossSentence& ref);

/// TER over stems.
double ser(const gloss::GlossSentence& hyp, const gloss::GlossSentence& ref);

/// Morpheme edits between two words: stem mismatch plus multiset distances of
/// the prefix and suffix lists (order ignored).
size_t word_feature_distance(const gloss::GlossWord& hyp, const gloss::GlossWord& ref);

double mfer(const gloss::GlossSentence& hyp, const gloss::GlossSentence& ref);

double mser(double ser_value, double mfer_value, double alpha = 0.5);

struct PrecisionRecallF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

PrecisionRecallF1 lemma_f1(const gloss::GlossSentence& hyp, const gloss::GlossSentence& ref);

/// Corpus BLEU without smoothing, on [0, 100].
double bleu_corpus(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, int max_n = 4);

/// Mean of the character 1..6-gram F score (whitespace removed) and the word
/// 1..2-gram F score. Per-order precision and recall are averaged before the
/// F score is taken. On [0, 100].
double chrf_pp(std::string_view hyp, std::string_view ref, double beta = 1.0);
/// Same, with n-gram statistics summed over the corpus.
double chrf_pp_corpus(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                      double beta = 1.0);

struct MetricReport {
    std::optional<double> bleu;
    std::optional<double> chrf_pp;
    std::optional<double> wer;
    std::optional<double> cer;
    std::optional<double> ter;
    std::optional<double> ser;
    std::optional<double> mfer;
    std::optional<double> mser;
    std::optional<double> lemma_f1;
    size_t sentences = 0;
};

/// Sentence-averaged error rates and Lemma F1, corpus-level BLEU and ChrF++.
/// Pairs whose reference has no stems are skipped for the stem-based metrics.
MetricReport score_corpus(const std::vector<gloss::GlossSentence>& hyps,
                          const std::vector<gloss::GlossSentence>& refs, double alpha = 0.5, int bleu_max_n = 4);

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& doc);
/// Columns BLEU, ChrF++, WER, CER, TER, SER, MFER, MSER, LemF1; error rates
/// and Lemma F1 as percentages.
std::string format_report_table(const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace conlang::metrics
