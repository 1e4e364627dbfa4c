#include "conlang/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "conlang/utf8.hpp"

namespace conlang::ngram {

namespace {

constexpr std::uint32_t kBosId = 0;
constexpr std::uint32_t kEosId = 1;
constexpr std::uint32_t kUnkId = 2;
constexpr const char* kCountsMagic = "#conlang-ngram-counts 1";

std::uint64_t key3(std::uint32_t h2, std::uint32_t h1, std::uint32_t w) {
    return (std::uint64_t{h2} << 40) | (std::uint64_t{h1} << 20) | w;
}
std::uint64_t key2(std::uint32_t h1, std::uint32_t w) { return (std::uint64_t{h1} << 20) | w; }

std::uint64_t get(const std::unordered_map<std::uint64_t, std::uint64_t>& m, std::uint64_t k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
}

bool is_reserved(std::string_view s) { return s == kBos || s == kEos || s == kUnk; }

}  // namespace

EvalCorpus parse_corpus(std::string_view text) {
    EvalCorpus corpus;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = utf8::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        if (line.empty()) continue;
        if (line.rfind("#lang:", 0) == 0) {
            corpus.language_tag = std::string(utf8::trim(line.substr(6)));
            continue;
        }
        if (line.front() == '#') continue;
        std::vector<std::string> entry;
        for (auto& tok : utf8::split_whitespace(line)) {
            if (tok == ".") continue;
            entry.push_back(utf8::nfc(tok));
        }
        if (!entry.empty()) corpus.entries.push_back(std::move(entry));
    }
    return corpus;
}

EvalCorpus read_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NgramError("cannot open corpus " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str());
}

std::string format_corpus(const EvalCorpus& corpus) {
    std::string out;
    if (!corpus.language_tag.empty()) out += "#lang: " + corpus.language_tag + "\n";
    for (const auto& e : corpus.entries) out += utf8::join(e, " ") + "\n";
    return out;
}

void NgramModel::rebuild_index() {
    symbols_ = {std::string(kBos), std::string(kEos), std::string(kUnk)};
    symbols_.insert(symbols_.end(), vocab_.begin(), vocab_.end());
    if (symbols_.size() >= (1u << 20)) throw NgramError("vocabulary too large");
    ids_.clear();
    for (std::uint32_t i = 0; i < symbols_.size(); ++i) ids_[symbols_[i]] = i;
}

std::uint32_t NgramModel::id(std::string_view symbol) const {
    auto it = ids_.find(std::string(symbol));
    return it == ids_.end() ? kUnkId : it->second;
}

bool NgramModel::in_vocabulary(std::string_view symbol) const { return vocab_.count(std::string(symbol)) > 0; }

std::vector<std::string> NgramModel::prediction_set() const {
    std::vector<std::string> out(vocab_.begin(), vocab_.end());
    out.emplace_back(kEos);
    out.emplace_back(kUnk);
    return out;
}

void NgramModel::add(std::uint32_t h2, std::uint32_t h1, std::uint32_t w, std::uint64_t count) {
    if (count == 0) return;
    auto& t = c3_[key3(h2, h1, w)];
    if (t == 0) ++types2_[key2(h2, h1)];
    t += count;
    ctx2_[key2(h2, h1)] += count;
    auto& b = c2_[key2(h1, w)];
    if (b == 0) ++types1_[h1];
    b += count;
    ctx1_[h1] += count;
    auto& u = c1_[w];
    if (u == 0) ++types0_;
    u += count;
    total_ += count;
}

NgramModel NgramModel::train(const EvalCorpus& corpus) {
    if (corpus.entries.empty()) throw EmptyCorpus("cannot train on an empty corpus");
    NgramModel m;
    m.tag_ = corpus.language_tag;
    for (const auto& e : corpus.entries) {
        for (const auto& s : e) {
            if (is_reserved(s)) throw NgramError("corpus uses reserved symbol " + s);
            m.vocab_.insert(s);
        }
    }
    m.rebuild_index();
    for (const auto& e : corpus.entries) {
        std::uint32_t h2 = kBosId, h1 = kBosId;
        for (const auto& s : e) {
            std::uint32_t w = m.id(s);
            m.add(h2, h1, w, 1);
            h2 = h1;
            h1 = w;
        }
        m.add(h2, h1, kEosId, 1);
    }
    return m;
}

NgramModel NgramModel::uniform(const std::set<std::string>& vocabulary, std::string language_tag) {
    NgramModel m;
    m.tag_ = std::move(language_tag);
    for (const auto& s : vocabulary)
        if (is_reserved(s)) throw NgramError("vocabulary uses reserved symbol " + s);
    m.vocab_ = vocabulary;
    m.uniform_ = true;
    m.rebuild_index();
    return m;
}

double NgramModel::prob_ids(std::uint32_t h2, std::uint32_t h1, std::uint32_t w) const {
    if (w == kBosId) return 0.0;
    const double p0 = 1.0 / static_cast<double>(vocab_.size() + 2);
    if (uniform_ || total_ == 0) return p0;

    double p1 = (static_cast<double>(get(c1_, w)) + static_cast<double>(types0_) * p0) /
                static_cast<double>(total_ + types0_);

    double p2 = p1;
    if (std::uint64_t n = get(ctx1_, h1)) {
        double t = static_cast<double>(get(types1_, h1));
        p2 = (static_cast<double>(get(c2_, key2(h1, w))) + t * p1) / (static_cast<double>(n) + t);
    }

    double p3 = p2;
    if (std::uint64_t n = get(ctx2_, key2(h2, h1))) {
        double t = static_cast<double>(get(types2_, key2(h2, h1)));
        p3 = (static_cast<double>(get(c3_, key3(h2, h1, w))) + t * p2) / (static_cast<double>(n) + t);
    }
    return p3;
}

double NgramModel::prob(std::string_view h2, std::string_view h1, std::string_view w) const {
    return prob_ids(id(h2), id(h1), id(w));
}

double NgramModel::conditional_ml(std::string_view h2, std::string_view h1, std::string_view w) const {
    auto ctx = key2(id(h2), id(h1));
    std::uint64_t n = get(ctx2_, ctx);
    if (n == 0) return 0.0;
    return static_cast<double>(get(c3_, key3(id(h2), id(h1), id(w)))) / static_cast<double>(n);
}

void NgramModel::save(std::ostream& out) const {
    out << kCountsMagic << "\n";
    out << "#lang: " << tag_ << "\n";
    out << "#uniform: " << (uniform_ ? 1 : 0) << "\n";
    out << "#vocab:";
    for (const auto& s : vocab_) out << " " << s;
    out << "\n";
    std::vector<std::tuple<std::string, std::string, std::string, std::uint64_t>> rows;
    rows.reserve(c3_.size());
    for (const auto& [k, c] : c3_) {
        rows.emplace_back(symbols_[k >> 40], symbols_[(k >> 20) & 0xFFFFF], symbols_[k & 0xFFFFF], c);
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [a, b, w, c] : rows) out << a << "\t" << b << "\t" << w << "\t" << c << "\n";
}

NgramModel NgramModel::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCountsMagic) throw NgramError("not a counts file (bad header)");
    NgramModel m;
    auto header = [&](const std::string& prefix) {
        if (!std::getline(in, line) || line.rfind(prefix, 0) != 0)
            throw NgramError("counts file is missing the " + prefix + " line");
        return std::string(utf8::trim(std::string_view(line).substr(prefix.size())));
    };
    m.tag_ = header("#lang:");
    m.uniform_ = header("#uniform:") == "1";
    for (auto& s : utf8::split_whitespace(header("#vocab:"))) m.vocab_.insert(std::move(s));
    m.rebuild_index();
    size_t lineno = 4;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        size_t pos = 0;
        for (;;) {
            size_t tab = line.find('\t', pos);
            f.push_back(line.substr(pos, tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (f.size() != 4) throw NgramError("counts file line " + std::to_string(lineno) + ": expected 4 fields");
        for (int i = 0; i < 3; ++i)
            if (!m.ids_.count(f[i])) throw NgramError("counts file line " + std::to_string(lineno) + ": unknown symbol " + f[i]);
        std::uint64_t c = 0;
        try {
            c = std::stoull(f[3]);
        } catch (const std::exception&) {
            throw NgramError("counts file line " + std::to_string(lineno) + ": bad count");
        }
        m.add(m.ids_.at(f[0]), m.ids_.at(f[1]), m.ids_.at(f[2]), c);
    }
    return m;
}

void NgramModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NgramError("cannot write " + path);
    save(out);
}

NgramModel NgramModel::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NgramError("cannot open " + path);
    return load(in);
}

bool operator==(const NgramModel& a, const NgramModel& b) {
    return a.tag_ == b.tag_ && a.vocab_ == b.vocab_ && a.uniform_ == b.uniform_ && a.c3_ == b.c3_;
}

double perplexity(const NgramModel& model, const EvalCorpus& corpus) {
    double neg_log = 0.0;
    size_t tokens = 0;
    for (const auto& e : corpus.entries) {
        std::string_view h2 = kBos, h1 = kBos;
        for (const auto& s : e) {
            std::string_view w = model.in_vocabulary(s) ? std::string_view(s) : kUnk;
            neg_log -= std::log(model.prob(h2, h1, w));
            ++tokens;
            h2 = h1;
            h1 = w;
        }
        neg_log -= std::log(model.prob(h2, h1, kEos));
        ++tokens;
    }
    if (tokens == 0) throw EmptyCorpus("cannot score an empty corpus");
    return std::exp(neg_log / static_cast<double>(tokens));
}

double oov_rate(const NgramModel& model, const EvalCorpus& corpus) {
    size_t total = 0, unknown = 0;
    for (const auto& e : corpus.entries) {
        for (const auto& s : e) {
            ++total;
            unknown += !model.in_vocabulary(s);
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(unknown) / static_cast<double>(total);
}

std::vector<RankedLanguage> rank_languages(const EvalCorpus& sample, std::span<const NgramModel> models,
                                           double max_oov) {
    std::vector<RankedLanguage> out;
    for (const auto& m : models) {
        double rate = oov_rate(m, sample);
        if (rate >= max_oov) continue;
        out.push_back({m.language_tag(), perplexity(m, sample), rate});
    }
    if (out.empty()) throw AllFiltered("every model was excluded by the OOV filter");
    std::sort(out.begin(), out.end(), [](const RankedLanguage& a, const RankedLanguage& b) {
        if (a.perplexity != b.perplexity) return a.perplexity < b.perplexity;
        return a.language_tag < b.language_tag;
    });
    return out;
}

size_t rank_of(const std::vector<RankedLanguage>& ranking, std::string_view tag) {
    for (size_t i = 0; i < ranking.size(); ++i)
        if (ranking[i].language_tag == tag) return i + 1;
    return 0;
}

}  // namespace conlang::ngram
