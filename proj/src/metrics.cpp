#include "conlang/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <json.hpp>
#include <sstream>
#include <tuple>

#include "conlang/utf8.hpp"

namespace conlang::metrics {

using gloss::GlossSentence;
using gloss::GlossWord;

namespace {

template <class Seq>
size_t levenshtein(const Seq& a, const Seq& b) {
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Insert/delete/substitute counts from a full DP backtrace.
void count_edits(const Tokens& hyp, const Tokens& ref, EditScript& script) {
    const size_t n = hyp.size(), m = ref.size();
    std::vector<std::vector<size_t>> d(n + 1, std::vector<size_t>(m + 1));
    for (size_t i = 0; i <= n; ++i) d[i][0] = i;
    for (size_t j = 0; j <= m; ++j) d[0][j] = j;
    for (size_t i = 1; i <= n; ++i)
        for (size_t j = 1; j <= m; ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1)});
    size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1)) {
            script.substitutions += hyp[i - 1] != ref[j - 1];
            --i;
            --j;
        } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
            ++script.insertions;
            --i;
        } else {
            ++script.deletions;
            --j;
        }
    }
}

bool occurs_in(const Tokens& ref, Tokens::const_iterator first, Tokens::const_iterator last) {
    return std::search(ref.begin(), ref.end(), first, last) != ref.end();
}

void require_ref(bool non_empty, const char* what) {
    if (!non_empty) throw EmptyReference(std::string(what) + ": reference is empty");
}

}  // namespace

size_t edit_distance(const Tokens& a, const Tokens& b) { return levenshtein(a, b); }

EditScript ter_edits(const Tokens& hyp, const Tokens& ref) {
    require_ref(!ref.empty(), "ter");
    Tokens cur = hyp;
    EditScript script;
    size_t dist = levenshtein(cur, ref);
    const size_t n = cur.size();
    while (dist > 0) {
        size_t best_dist = dist;
        Tokens best;
        for (size_t i = 0; i < n; ++i) {
            for (size_t len = 1; len <= kMaxShiftBlock && i + len <= n; ++len) {
                if (!occurs_in(ref, cur.begin() + static_cast<long>(i), cur.begin() + static_cast<long>(i + len))) break;
                Tokens rest;
                rest.reserve(n);
                rest.insert(rest.end(), cur.begin(), cur.begin() + static_cast<long>(i));
                rest.insert(rest.end(), cur.begin() + static_cast<long>(i + len), cur.end());
                for (size_t j = 0; j <= rest.size(); ++j) {
                    if (j == i) continue;
                    Tokens cand;
                    cand.reserve(n);
                    cand.insert(cand.end(), rest.begin(), rest.begin() + static_cast<long>(j));
                    cand.insert(cand.end(), cur.begin() + static_cast<long>(i), cur.begin() + static_cast<long>(i + len));
                    cand.insert(cand.end(), rest.begin() + static_cast<long>(j), rest.end());
                    size_t d = levenshtein(cand, ref);
                    if (d < best_dist) {
                        best_dist = d;
                        best = std::move(cand);
                    }
                }
            }
        }
        // A shift costs one edit, so it must save at least two.
        if (best_dist + 1 >= dist) break;
        cur = std::move(best);
        dist = best_dist;
        ++script.block_shifts;
    }
    count_edits(cur, ref, script);
    script.total_edits = script.insertions + script.deletions + script.substitutions + script.block_shifts;
    return script;
}

double ter(const Tokens& hyp, const Tokens& ref) {
    return static_cast<double>(ter_edits(hyp, ref).total_edits) / static_cast<double>(ref.size());
}

double wer(const Tokens& hyp, const Tokens& ref) {
    require_ref(!ref.empty(), "wer");
    return static_cast<double>(levenshtein(hyp, ref)) / static_cast<double>(ref.size());
}

double cer(std::string_view hyp, std::string_view ref) {
    auto r = utf8::decode(ref);
    require_ref(!r.empty(), "cer");
    return static_cast<double>(levenshtein(utf8::decode(hyp), r)) / static_cast<double>(r.size());
}

Tokens gloss_tokens(const GlossSentence& s) {
    Tokens out;
    for (const auto& w : s.words) out.push_back(gloss::serialize_word(w));
    if (s.trailing_punct) out.push_back(*s.trailing_punct);
    return out;
}

double ter(const GlossSentence& hyp, const GlossSentence& ref) { return ter(gloss_tokens(hyp), gloss_tokens(ref)); }
double wer(const GlossSentence& hyp, const GlossSentence& ref) { return wer(gloss_tokens(hyp), gloss_tokens(ref)); }
double cer(const GlossSentence& hyp, const GlossSentence& ref) {
    return cer(gloss::serialize_gloss(hyp), gloss::serialize_gloss(ref));
}

double ser(const GlossSentence& hyp, const GlossSentence& ref) {
    auto r = gloss::strip_features(ref);
    require_ref(!r.empty(), "ser");
    return ter(gloss::strip_features(hyp), r);
}

namespace {

size_t multiset_distance(const std::vector<gloss::FeatureLabel>& a, const std::vector<gloss::FeatureLabel>& b) {
    std::map<std::string, long> counts;
    for (const auto& l : a) ++counts[l.text()];
    size_t common = 0;
    for (const auto& l : b) {
        auto it = counts.find(l.text());
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    return std::max(a.size(), b.size()) - common;
}

bool same_stem(const GlossWord& a, const GlossWord& b) { return a.stem == b.stem && a.is_feature_word == b.is_feature_word; }

}  // namespace

size_t word_feature_distance(const GlossWord& hyp, const GlossWord& ref) {
    return (same_stem(hyp, ref) ? 0 : 1) + multiset_distance(hyp.prefixes, ref.prefixes) +
           multiset_distance(hyp.suffixes, ref.suffixes);
}

double mfer(const GlossSentence& hyp, const GlossSentence& ref) {
    require_ref(!ref.words.empty(), "mfer");
    // (stem differs, distance, ref index, hyp index), taken greedily without reuse.
    std::vector<std::tuple<bool, size_t, size_t, size_t>> pairs;
    for (size_t r = 0; r < ref.words.size(); ++r)
        for (size_t h = 0; h < hyp.words.size(); ++h)
            pairs.emplace_back(!same_stem(hyp.words[h], ref.words[r]), word_feature_distance(hyp.words[h], ref.words[r]), r, h);
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> ref_used(ref.words.size()), hyp_used(hyp.words.size());
    size_t edits = 0, denominator = 0;
    for (const auto& [differs, dist, r, h] : pairs) {
        if (ref_used[r] || hyp_used[h]) continue;
        ref_used[r] = hyp_used[h] = true;
        edits += dist;
    }
    for (size_t r = 0; r < ref.words.size(); ++r) {
        denominator += ref.words[r].morpheme_count();
        if (!ref_used[r]) edits += ref.words[r].morpheme_count();
    }
    return static_cast<double>(edits) / static_cast<double>(denominator);
}

double mser(double ser_value, double mfer_value, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw MetricError("mser: alpha must be in [0, 1]");
    return alpha * ser_value + (1.0 - alpha) * mfer_value;
}

PrecisionRecallF1 lemma_f1(const GlossSentence& hyp, const GlossSentence& ref) {
    auto r = gloss::strip_features(ref);
    require_ref(!r.empty(), "lemma_f1");
    auto h = gloss::strip_features(hyp);
    std::map<std::string, long> bag;
    for (const auto& s : r) ++bag[s];
    size_t tp = 0;
    for (const auto& s : h) {
        auto it = bag.find(s);
        if (it != bag.end() && it->second > 0) {
            --it->second;
            ++tp;
        }
    }
    PrecisionRecallF1 out;
    out.precision = h.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(h.size());
    out.recall = static_cast<double>(tp) / static_cast<double>(r.size());
    double sum = out.precision + out.recall;
    out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
    return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts ngrams(const Tokens& toks, size_t n) {
    NgramCounts out;
    if (toks.size() < n) return out;
    for (size_t i = 0; i + n <= toks.size(); ++i) ++out[Tokens(toks.begin() + static_cast<long>(i), toks.begin() + static_cast<long>(i + n))];
    return out;
}

struct OrderStats {
    double match = 0, hyp_total = 0, ref_total = 0;
};

void accumulate(const Tokens& hyp, const Tokens& ref, size_t n, OrderStats& st) {
    auto h = ngrams(hyp, n), r = ngrams(ref, n);
    for (const auto& [g, c] : h) {
        st.hyp_total += static_cast<double>(c);
        auto it = r.find(g);
        if (it != r.end()) st.match += static_cast<double>(std::min(c, it->second));
    }
    for (const auto& [g, c] : r) st.ref_total += static_cast<double>(c);
}

}  // namespace

double bleu_corpus(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, int max_n) {
    if (hyps.size() != refs.size()) throw LengthMismatch("bleu: hypothesis and reference counts differ");
    if (max_n < 1 || max_n > 4) throw MetricError("bleu: max_n must be between 1 and 4");
    size_t hyp_len = 0, ref_len = 0;
    for (const auto& r : refs) ref_len += r.size();
    require_ref(ref_len > 0, "bleu");
    std::vector<OrderStats> stats(static_cast<size_t>(max_n));
    for (size_t i = 0; i < hyps.size(); ++i) {
        hyp_len += hyps[i].size();
        for (int n = 1; n <= max_n; ++n) accumulate(hyps[i], refs[i], static_cast<size_t>(n), stats[static_cast<size_t>(n - 1)]);
    }
    if (hyp_len == 0) return 0.0;
    double log_sum = 0.0;
    for (const auto& st : stats) {
        if (st.match == 0.0 || st.hyp_total == 0.0) return 0.0;
        log_sum += std::log(st.match / st.hyp_total);
    }
    double bp = hyp_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)) : 1.0;
    return 100.0 * bp * std::exp(log_sum / max_n);
}

namespace {

constexpr size_t kCharOrder = 6;
constexpr size_t kWordOrder = 2;

Tokens chars_without_space(std::string_view s) {
    Tokens out;
    for (auto& c : utf8::code_points(s))
        if (!(c.size() == 1 && std::isspace(static_cast<unsigned char>(c[0])))) out.push_back(std::move(c));
    return out;
}

struct ChrfStats {
    std::vector<OrderStats> chars = std::vector<OrderStats>(kCharOrder);
    std::vector<OrderStats> words = std::vector<OrderStats>(kWordOrder);
};

void add_chrf(std::string_view hyp, std::string_view ref, ChrfStats& st) {
    auto hc = chars_without_space(hyp), rc = chars_without_space(ref);
    for (size_t n = 1; n <= kCharOrder; ++n) accumulate(hc, rc, n, st.chars[n - 1]);
    auto hw = utf8::split_whitespace(hyp), rw = utf8::split_whitespace(ref);
    for (size_t n = 1; n <= kWordOrder; ++n) accumulate(hw, rw, n, st.words[n - 1]);
}

std::optional<double> f_score(const std::vector<OrderStats>& orders, double beta) {
    double p = 0, r = 0;
    size_t counted = 0;
    for (const auto& o : orders) {
        if (o.hyp_total == 0 && o.ref_total == 0) continue;
        p += o.hyp_total > 0 ? o.match / o.hyp_total : 0.0;
        r += o.ref_total > 0 ? o.match / o.ref_total : 0.0;
        ++counted;
    }
    if (counted == 0) return std::nullopt;
    p /= static_cast<double>(counted);
    r /= static_cast<double>(counted);
    double b2 = beta * beta;
    if (p + r == 0.0) return 0.0;
    return (1.0 + b2) * p * r / (b2 * p + r);
}

double chrf_from(const ChrfStats& st, double beta) {
    auto c = f_score(st.chars, beta), w = f_score(st.words, beta);
    if (!c && !w) throw EmptyReference("chrF++: reference is empty");
    double sum = 0;
    int parts = 0;
    for (const auto& part : {c, w})
        if (part) {
            sum += *part;
            ++parts;
        }
    return 100.0 * sum / parts;
}

}  // namespace

double chrf_pp(std::string_view hyp, std::string_view ref, double beta) {
    require_ref(!utf8::split_whitespace(ref).empty(), "chrF++");
    ChrfStats st;
    add_chrf(hyp, ref, st);
    return chrf_from(st, beta);
}

double chrf_pp_corpus(const std::vector<std::string>& hyps, const std::vector<std::string>& refs, double beta) {
    if (hyps.size() != refs.size()) throw LengthMismatch("chrF++: hypothesis and reference counts differ");
    ChrfStats st;
    for (size_t i = 0; i < hyps.size(); ++i) add_chrf(hyps[i], refs[i], st);
    return chrf_from(st, beta);
}

MetricReport score_corpus(const std::vector<GlossSentence>& hyps, const std::vector<GlossSentence>& refs, double alpha,
                          int bleu_max_n) {
    if (hyps.size() != refs.size()) throw LengthMismatch("score: hypothesis and reference counts differ");
    MetricReport rep;
    rep.sentences = refs.size();
    struct Mean {
        double sum = 0;
        size_t n = 0;
        void add(double v) {
            sum += v;
            ++n;
        }
        std::optional<double> get() const { return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt; }
    } m_wer, m_cer, m_ter, m_ser, m_mfer, m_f1;

    std::vector<Tokens> htoks, rtoks;
    std::vector<std::string> hstr, rstr;
    for (size_t i = 0; i < refs.size(); ++i) {
        auto ht = gloss_tokens(hyps[i]), rt = gloss_tokens(refs[i]);
        if (!rt.empty()) {
            m_wer.add(wer(ht, rt));
            m_ter.add(ter(ht, rt));
            m_cer.add(cer(hyps[i], refs[i]));
        }
        if (!gloss::strip_features(refs[i]).empty()) {
            m_ser.add(ser(hyps[i], refs[i]));
            m_mfer.add(mfer(hyps[i], refs[i]));
            m_f1.add(lemma_f1(hyps[i], refs[i]).f1);
        }
        htoks.push_back(std::move(ht));
        rtoks.push_back(std::move(rt));
        hstr.push_back(gloss::serialize_gloss(hyps[i]));
        rstr.push_back(gloss::serialize_gloss(refs[i]));
    }
    rep.wer = m_wer.get();
    rep.cer = m_cer.get();
    rep.ter = m_ter.get();
    rep.ser = m_ser.get();
    rep.mfer = m_mfer.get();
    rep.lemma_f1 = m_f1.get();
    if (rep.ser && rep.mfer) rep.mser = mser(*rep.ser, *rep.mfer, alpha);
    if (m_wer.n) {
        rep.bleu = bleu_corpus(htoks, rtoks, bleu_max_n);
        rep.chrf_pp = chrf_pp_corpus(hstr, rstr);
    }
    return rep;
}

namespace {

const std::vector<std::pair<const char*, std::optional<double> MetricReport::*>>& fields() {
    static const std::vector<std::pair<const char*, std::optional<double> MetricReport::*>> f = {
        {"bleu", &MetricReport::bleu}, {"chrf_pp", &MetricReport::chrf_pp}, {"wer", &MetricReport::wer},
        {"cer", &MetricReport::cer},   {"ter", &MetricReport::ter},         {"ser", &MetricReport::ser},
        {"mfer", &MetricReport::mfer}, {"mser", &MetricReport::mser},       {"lemma_f1", &MetricReport::lemma_f1}};
    return f;
}

}  // namespace

nlohmann::json report_to_json(const MetricReport& report) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [name, member] : fields()) {
        const auto& v = report.*member;
        doc[name] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    }
    doc["sentences"] = report.sentences;
    return doc;
}

MetricReport report_from_json(const nlohmann::json& doc) {
    MetricReport rep;
    for (const auto& [name, member] : fields()) {
        if (doc.contains(name) && !doc[name].is_null()) rep.*member = doc[name].get<double>();
    }
    rep.sentences = doc.value("sentences", size_t{0});
    return rep;
}

std::string format_report_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
    static const char* headers[] = {"BLEU", "ChrF++", "WER", "CER", "TER", "SER", "MFER", "MSER", "LemF1"};
    size_t name_w = 6;
    for (const auto& [name, r] : rows) name_w = std::max(name_w, name.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_w)) << "System";
    for (const char* h : headers) out << " | " << std::right << std::setw(7) << h;
    out << "\n" << std::string(name_w, '-');
    for (size_t i = 0; i < std::size(headers); ++i) out << "-|--------";
    out << "\n";
    for (const auto& [name, r] : rows) {
        out << std::left << std::setw(static_cast<int>(name_w)) << name;
        size_t k = 0;
        for (const auto& [field, member] : fields()) {
            const auto& v = r.*member;
            double scale = k < 2 ? 1.0 : 100.0;
            out << " | " << std::right << std::setw(7);
            if (v) {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(2) << (*v * scale);
                out << cell.str();
            } else {
                out << "-";
            }
            ++k;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace conlang::metrics
