#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "conlang/error.hpp"

namespace conlang::ngram {

class NgramError : public Error {
public:
    using Error::Error;
};

class EmptyCorpus : public NgramError {
public:
    using NgramError::NgramError;
};

class AllFiltered : public NgramError {
public:
    using NgramError::NgramError;
};

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

struct EvalCorpus {
    std::vector<std::vector<std::string>> entries;
    std::string language_tag;
};

/// One entry per line, phonemes separated by spaces, optional header
/// `#lang: <tag>`. Syllable separators "." are dropped and symbols are NFC
/// normalized. Other lines starting with '#' and blank lines are ignored.
EvalCorpus parse_corpus(std::string_view text);
EvalCorpus read_corpus(const std::string& path);
std::string format_corpus(const EvalCorpus& corpus);

/// Interpolated Witten-Bell trigram model over phoneme symbols. Every
/// distribution covers vocabulary ∪ {</s>, <unk>}.
class NgramModel {
public:
    static NgramModel train(const EvalCorpus& corpus);
    /// Assigns 1/|vocabulary ∪ {</s>, <unk>}| to every prediction.
    static NgramModel uniform(const std::set<std::string>& vocabulary, std::string language_tag = "uniform");

    /// P(w | h2 h1). Context symbols may be kBos; symbols outside the
    /// vocabulary are treated as kUnk.
    double prob(std::string_view h2, std::string_view h1, std::string_view w) const;
    /// Unsmoothed relative frequency c(h2 h1 w) / c(h2 h1); 0 for unseen contexts.
    double conditional_ml(std::string_view h2, std::string_view h1, std::string_view w) const;

    const std::string& language_tag() const { return tag_; }
    const std::set<std::string>& vocabulary() const { return vocab_; }
    bool in_vocabulary(std::string_view symbol) const;
    /// Vocabulary plus </s> and <unk>.
    std::vector<std::string> prediction_set() const;

    /// Versioned counts file. Only trigram counts are stored; lower orders
    /// are derived on load.
    void save(std::ostream& out) const;
    static NgramModel load(std::istream& in);
    void save_file(const std::string& path) const;
    static NgramModel load_file(const std::string& path);

    friend bool operator==(const NgramModel& a, const NgramModel& b);

private:
    using Key = std::uint64_t;

    std::uint32_t id(std::string_view symbol) const;
    double prob_ids(std::uint32_t h2, std::uint32_t h1, std::uint32_t w) const;
    void add(std::uint32_t h2, std::uint32_t h1, std::uint32_t w, std::uint64_t count);
    void rebuild_index();

    std::string tag_;
    std::set<std::string> vocab_;
    std::vector<std::string> symbols_;  // id -> symbol
    std::unordered_map<std::string, std::uint32_t> ids_;
    bool uniform_ = false;

    std::unordered_map<Key, std::uint64_t> c3_, c2_, c1_;
    std::unordered_map<Key, std::uint64_t> ctx2_, ctx1_;  // context totals
    std::unordered_map<Key, std::uint64_t> types2_, types1_;  // distinct followers
    std::uint64_t total_ = 0;
    std::uint64_t types0_ = 0;
};

double perplexity(const NgramModel& model, const EvalCorpus& corpus);

/// Fraction of symbol tokens (end markers excluded) outside the vocabulary.
double oov_rate(const NgramModel& model, const EvalCorpus& corpus);

struct RankedLanguage {
    std::string language_tag;
    double perplexity = 0.0;
    double oov_rate = 0.0;
};

inline constexpr double kDefaultMaxOov = 0.20;

/// Models whose OOV rate on `sample` is >= max_oov are dropped; the rest are
/// sorted by ascending perplexity, ties by tag.
std::vector<RankedLanguage> rank_languages(const EvalCorpus& sample, std::span<const NgramModel> models,
                                           double max_oov = kDefaultMaxOov);

/// 1-based rank of `tag`, or 0 if absent.
size_t rank_of(const std::vector<RankedLanguage>& ranking, std::string_view tag);

}  // namespace conlang::ngram
