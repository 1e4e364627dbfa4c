#include "conlang/soundchange.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <json.hpp>

#include "conlang/fileio.hpp"
#include "conlang/utf8.hpp"

namespace conlang::soundchange {

using phonotactics::Morpheme;

PhonemeFeatureTable::PhonemeFeatureTable(std::vector<std::string> feature_names,
                                         std::map<std::string, FeatureVector> rows)
    : names_(std::move(feature_names)) {
    std::set<std::string> unique(names_.begin(), names_.end());
    if (unique.size() != names_.size()) throw SoundChangeError("duplicate feature name");
    for (auto& [sym, v] : rows) {
        if (v.size() != names_.size())
            throw SoundChangeError("feature vector for '" + sym + "' has " + std::to_string(v.size()) + " values");
        for (char c : v)
            if (c != '+' && c != '-' && c != '0') throw SoundChangeError("bad feature value for '" + sym + "'");
        rows_.emplace(sym, std::move(v));
    }
}

PhonemeFeatureTable PhonemeFeatureTable::parse(std::string_view text) {
    std::vector<std::string> names;
    std::map<std::string, FeatureVector> rows;
    size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        size_t p = 0;
        while (true) {
            size_t tab = line.find('\t', p);
            cols.push_back(line.substr(p, tab == std::string::npos ? std::string::npos : tab - p));
            if (tab == std::string::npos) break;
            p = tab + 1;
        }
        if (names.empty()) {
            names.assign(cols.begin() + 1, cols.end());
            continue;
        }
        if (cols.size() != names.size() + 1)
            throw SoundChangeError("feature table line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(names.size() + 1) + " columns");
        FeatureVector v;
        for (size_t i = 1; i < cols.size(); ++i) {
            if (cols[i].size() != 1) throw SoundChangeError("feature table line " + std::to_string(line_no) + ": bad value");
            v.push_back(cols[i][0]);
        }
        auto sym = utf8::nfc(cols[0]);
        if (!rows.emplace(sym, std::move(v)).second)
            throw SoundChangeError("feature table line " + std::to_string(line_no) + ": duplicate segment " + sym);
    }
    if (names.empty()) throw SoundChangeError("feature table has no header");
    return PhonemeFeatureTable(std::move(names), std::move(rows));
}

PhonemeFeatureTable PhonemeFeatureTable::load(const std::filesystem::path& path) { return parse(read_file(path)); }

bool PhonemeFeatureTable::contains(std::string_view symbol) const { return rows_.find(symbol) != rows_.end(); }

const FeatureVector& PhonemeFeatureTable::features(std::string_view symbol) const {
    auto it = rows_.find(symbol);
    if (it == rows_.end()) throw UnknownPhoneme(std::string(symbol));
    return it->second;
}

size_t PhonemeFeatureTable::feature_index(std::string_view feature) const {
    auto it = std::find(names_.begin(), names_.end(), feature);
    if (it == names_.end()) throw SoundChangeError("unknown feature '" + std::string(feature) + "'");
    return static_cast<size_t>(it - names_.begin());
}

char PhonemeFeatureTable::value(std::string_view symbol, std::string_view feature) const {
    return features(symbol)[feature_index(feature)];
}

std::vector<std::string> PhonemeFeatureTable::symbols() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : rows_) out.push_back(k);
    return out;
}

std::optional<std::string> PhonemeFeatureTable::find(const FeatureVector& v) const {
    for (const auto& [k, row] : rows_)
        if (row == v) return k;
    return std::nullopt;
}

int phoneme_distance(std::string_view p, std::string_view q, const PhonemeFeatureTable& table) {
    const auto& a = table.features(p);
    const auto& b = table.features(q);
    int d = 0;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

double inventory_distance(const std::set<std::string>& conlang, const std::set<std::string>& candidate,
                          const PhonemeFeatureTable& table, double penalty) {
    for (const auto& p : conlang) table.features(p);
    double total = 0.0;
    for (const auto& q : candidate) {
        table.features(q);
        int best = std::numeric_limits<int>::max();
        for (const auto& p : conlang) best = std::min(best, phoneme_distance(p, q, table));
        if (!conlang.empty()) total += best;
    }
    double diff = static_cast<double>(conlang.size()) - static_cast<double>(candidate.size());
    return total + penalty * std::abs(diff);
}

std::vector<RankedInventory> rank_inventories(const std::set<std::string>& conlang,
                                              const std::vector<std::pair<std::string, std::set<std::string>>>& candidates,
                                              const PhonemeFeatureTable& table, double penalty) {
    std::vector<RankedInventory> out;
    for (const auto& [id, inv] : candidates) out.push_back({id, inventory_distance(conlang, inv, table, penalty)});
    std::sort(out.begin(), out.end(), [](const RankedInventory& a, const RankedInventory& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Rule notation

namespace {

std::string trim_copy(std::string_view s) { return std::string(utf8::trim(s)); }

struct Item {
    bool zero = false;
    bool boundary = false;
    std::optional<std::string> symbol;
    std::optional<std::string> cls;
    std::vector<std::pair<std::string, char>> matrix;
};

Item parse_item(const std::string& tok) {
    Item it;
    if (tok == "0" || tok == "∅") {
        it.zero = true;
        return it;
    }
    if (tok == "#") {
        it.boundary = true;
        return it;
    }
    auto open = tok.find('[');
    if (open == std::string::npos) {
        if (tok == "V" || tok == "C" || tok == "N")
            it.cls = tok;
        else
            it.symbol = utf8::nfc(tok);
        return it;
    }
    if (tok.back() != ']') throw RuleSyntaxError("unterminated feature matrix in '" + tok + "'");
    if (open > 0) {
        it.cls = tok.substr(0, open);
        if (*it.cls != "V" && *it.cls != "C" && *it.cls != "N") throw RuleSyntaxError("unknown class '" + *it.cls + "'");
    }
    std::string body = tok.substr(open + 1, tok.size() - open - 2);
    size_t p = 0;
    while (p <= body.size()) {
        size_t comma = body.find(',', p);
        auto f = trim_copy(std::string_view(body).substr(p, comma == std::string::npos ? std::string::npos : comma - p));
        p = comma == std::string::npos ? body.size() + 1 : comma + 1;
        if (f.empty()) continue;
        if (f[0] != '+' && f[0] != '-') throw RuleSyntaxError("feature '" + f + "' needs a + or - sign");
        it.matrix.emplace_back(f.substr(1), f[0]);
    }
    if (it.matrix.empty()) throw RuleSyntaxError("empty feature matrix in '" + tok + "'");
    return it;
}

bool in_class(const std::string& cls, const std::string& sym, const PhonemeFeatureTable& t) {
    char syl = t.value(sym, "syllabic");
    if (cls == "V") return syl == '+';
    if (cls == "C") return syl == '-';
    if (cls == "N") return syl == '-' && t.value(sym, "nasal") == '+';
    return false;
}

std::vector<std::string> expand(const Item& item, const PhonemeFeatureTable* table) {
    if (item.symbol) return {*item.symbol};
    if (!table) throw RuleSyntaxError("classes and feature matrices need a feature table");
    std::vector<std::string> out;
    for (const auto& sym : table->symbols()) {
        if (item.cls && !in_class(*item.cls, sym, *table)) continue;
        bool ok = true;
        for (const auto& [f, v] : item.matrix)
            if (table->value(sym, f) != v) ok = false;
        if (ok) out.push_back(sym);
    }
    return out;
}

std::vector<ContextElement> parse_context(const std::string& text, const PhonemeFeatureTable* table) {
    std::vector<ContextElement> out;
    for (const auto& tok : utf8::split_whitespace(text)) {
        Item it = parse_item(tok);
        if (it.zero) throw RuleSyntaxError("'0' is not allowed in a context");
        ContextElement e;
        e.boundary = it.boundary;
        if (!it.boundary) {
            auto syms = expand(it, table);
            e.symbols.insert(syms.begin(), syms.end());
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<std::string> split_on(std::string_view text, std::string_view sep) {
    std::vector<std::string> out;
    size_t p = 0;
    while (true) {
        size_t q = text.find(sep, p);
        out.push_back(std::string(text.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p)));
        if (q == std::string_view::npos) break;
        p = q + sep.size();
    }
    return out;
}

}  // namespace

SoundChangeRule parse_rule(std::string_view text, const PhonemeFeatureTable* table) {
    SoundChangeRule rule;
    rule.notation = trim_copy(text);
    auto bar = split_on(text, "|");
    if (bar.size() > 2) throw RuleSyntaxError("more than one '|' in rule: " + rule.notation);
    auto slash = split_on(bar[0], "/");
    if (slash.size() > 2) throw RuleSyntaxError("more than one '/' in rule: " + rule.notation);
    auto arrow = split_on(slash[0], "->");
    if (arrow.size() != 2) throw RuleSyntaxError("rule needs exactly one '->': " + rule.notation);

    std::vector<Item> lhs, rhs;
    for (const auto& t : utf8::split_whitespace(arrow[0])) lhs.push_back(parse_item(t));
    for (const auto& t : utf8::split_whitespace(arrow[1])) rhs.push_back(parse_item(t));
    if (lhs.empty() || rhs.empty()) throw RuleSyntaxError("empty side in rule: " + rule.notation);

    if (slash.size() == 2) {
        auto env = split_on(slash[1], "_");
        if (env.size() != 2) throw RuleSyntaxError("environment needs exactly one '_': " + rule.notation);
        rule.left = parse_context(env[0], table);
        rule.right = parse_context(env[1], table);
    }

    auto plain = [&](const Item& i) {
        if (i.boundary) throw RuleSyntaxError("'#' is only allowed in the environment: " + rule.notation);
    };
    for (const auto& i : lhs) plain(i);
    for (const auto& i : rhs) plain(i);

    if (lhs.size() == 1 && lhs[0].zero) {
        for (const auto& i : rhs) {
            if (!i.symbol) throw RuleSyntaxError("insertions must name symbols: " + rule.notation);
            rule.insertion.push_back(*i.symbol);
        }
        if (rule.context_free()) throw RuleSyntaxError("insertion without an environment: " + rule.notation);
    } else {
        auto map_item = [&](const Item& from, const Item& to) {
            for (const auto& sym : expand(from, table)) {
                if (to.zero) {
                    rule.mapping[sym] = {};
                } else if (to.symbol) {
                    rule.mapping[sym] = {*to.symbol};
                } else if (!to.matrix.empty() && !to.cls) {
                    auto v = table->features(sym);
                    for (const auto& [f, val] : to.matrix) v[table->feature_index(f)] = val;
                    if (auto hit = table->find(v)) rule.mapping[sym] = {*hit};
                } else {
                    throw RuleSyntaxError("replacement must be a symbol, 0 or a feature change: " + rule.notation);
                }
            }
        };
        if (lhs.size() == rhs.size()) {
            for (size_t i = 0; i < lhs.size(); ++i) map_item(lhs[i], rhs[i]);
        } else if (rhs.size() == 1) {
            for (const auto& l : lhs) map_item(l, rhs[0]);
        } else if (lhs.size() == 1) {
            std::vector<std::string> seq;
            for (const auto& r : rhs) {
                if (!r.symbol) throw RuleSyntaxError("sequence replacements must be symbols: " + rule.notation);
                seq.push_back(*r.symbol);
            }
            for (const auto& sym : expand(lhs[0], table)) rule.mapping[sym] = seq;
        } else {
            throw RuleSyntaxError("target and replacement lists differ in length: " + rule.notation);
        }
        if (rule.mapping.empty()) throw RuleSyntaxError("rule matches no phoneme: " + rule.notation);
    }

    if (bar.size() == 2)
        for (const auto& ex : split_on(bar[1], ";")) {
            if (trim_copy(ex).empty()) continue;
            auto io = split_on(ex, "=>");
            if (io.size() != 2) throw RuleSyntaxError("example needs '=>': " + ex);
            rule.examples.emplace_back(Morpheme::parse(utf8::nfc(io[0])), Morpheme::parse(utf8::nfc(io[1])));
        }
    return rule;
}

RuleSet parse_rule_file(std::string_view text, const PhonemeFeatureTable* table) {
    RuleSet rs;
    size_t line_no = 0;
    for (const auto& raw : split_on(text, "\n")) {
        ++line_no;
        auto line = trim_copy(raw);
        if (line.empty() || line[0] == '#') continue;
        try {
            rs.rules.push_back(parse_rule(line, table));
        } catch (const SoundChangeError& e) {
            throw RuleSyntaxError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rs;
}

// ---------------------------------------------------------------------------
// Application

namespace {

struct Seg {
    std::string ph;
    bool break_before = false;
};

std::vector<Seg> to_segs(const Morpheme& m) {
    std::vector<Seg> out;
    for (size_t i = 0; i < m.phonemes.size(); ++i) out.push_back({m.phonemes[i], i > 0 && m.syllable_breaks.count(i) > 0});
    return out;
}

Morpheme from_segs(const std::vector<Seg>& segs) {
    Morpheme m;
    for (size_t i = 0; i < segs.size(); ++i) {
        if (i > 0 && segs[i].break_before) m.syllable_breaks.insert(i);
        m.phonemes.push_back(segs[i].ph);
    }
    return m;
}

bool left_matches(const std::vector<ContextElement>& ctx, const std::vector<Seg>& s, size_t pos) {
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
        if (it->boundary) {
            if (pos != 0) return false;
            continue;
        }
        if (pos == 0 || !it->symbols.count(s[pos - 1].ph)) return false;
        --pos;
    }
    return true;
}

bool right_matches(const std::vector<ContextElement>& ctx, const std::vector<Seg>& s, size_t pos) {
    for (const auto& e : ctx) {
        if (e.boundary) {
            if (pos != s.size()) return false;
            continue;
        }
        if (pos >= s.size() || !e.symbols.count(s[pos].ph)) return false;
        ++pos;
    }
    return true;
}

}  // namespace

Morpheme apply_rule(const SoundChangeRule& rule, const Morpheme& m) {
    auto s = to_segs(m);
    if (!rule.insertion.empty()) {
        for (size_t p = 0; p <= s.size(); ++p) {
            if (!left_matches(rule.left, s, p) || !right_matches(rule.right, s, p)) continue;
            std::vector<Seg> ins;
            for (const auto& ph : rule.insertion) ins.push_back({ph, false});
            if (p < s.size()) {
                ins.front().break_before = s[p].break_before;
                s[p].break_before = false;
            }
            s.insert(s.begin() + static_cast<std::ptrdiff_t>(p), ins.begin(), ins.end());
            p += ins.size();
        }
        return from_segs(s);
    }
    size_t i = 0;
    while (i < s.size()) {
        auto hit = rule.mapping.find(s[i].ph);
        if (hit == rule.mapping.end() || !left_matches(rule.left, s, i) || !right_matches(rule.right, s, i + 1)) {
            ++i;
            continue;
        }
        bool brk = s[i].break_before;
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(i));
        if (hit->second.empty()) {
            if (i < s.size()) s[i].break_before = s[i].break_before || brk;
            continue;
        }
        std::vector<Seg> rep;
        for (const auto& ph : hit->second) rep.push_back({ph, false});
        rep.front().break_before = brk;
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(i), rep.begin(), rep.end());
        i += rep.size();
    }
    return from_segs(s);
}

Morpheme apply_rules(const RuleSet& rules, const Morpheme& m) {
    Morpheme cur = m;
    for (const auto& r : rules.rules) cur = apply_rule(r, cur);
    return cur;
}

std::set<std::string> propagate_inventory(const std::set<std::string>& parent, const RuleSet& rules) {
    std::set<std::string> cur = parent;
    for (const auto& r : rules.rules) {
        if (!r.insertion.empty()) {
            cur.insert(r.insertion.begin(), r.insertion.end());
            continue;
        }
        std::set<std::string> removed, added;
        for (const auto& [target, rep] : r.mapping) {
            if (!cur.count(target)) continue;
            if (r.context_free()) removed.insert(target);
            added.insert(rep.begin(), rep.end());
        }
        for (const auto& x : removed) cur.erase(x);
        cur.insert(added.begin(), added.end());
    }
    return cur;
}

std::vector<ExampleFailure> check_rule_examples(const RuleSet& rules) {
    std::vector<ExampleFailure> out;
    for (size_t i = 0; i < rules.rules.size(); ++i)
        for (const auto& [in, expected] : rules.rules[i].examples) {
            auto actual = apply_rule(rules.rules[i], in);
            if (actual != expected) out.push_back({i, in, expected, actual});
        }
    return out;
}

std::string format_failures(const RuleSet& rules, const std::vector<ExampleFailure>& failures) {
    if (failures.empty()) return "All rule examples pass.\n";
    std::string out = "## Rule examples that fail\n\n";
    for (const auto& f : failures) {
        out += "- rule " + std::to_string(f.rule_index + 1);
        if (f.rule_index < rules.rules.size()) out += " (`" + rules.rules[f.rule_index].notation + "`)";
        out += ": input \"" + f.input.render() + "\", expected \"" + f.expected.render() + "\", got \"" +
               f.actual.render() + "\"\n";
    }
    return out;
}

std::vector<DiachronicaEntry> parse_diachronica(std::string_view text, const PhonemeFeatureTable& table) {
    std::vector<DiachronicaEntry> out;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SoundChangeError(std::string("malformed inventory document: ") + e.what());
    }
    if (!doc.is_array()) throw SoundChangeError("inventory document must be a JSON array");
    std::set<std::string> ids;
    for (const auto& j : doc) {
        DiachronicaEntry e;
        try {
            e.language_id = j.at("language_id").get<std::string>();
            if (j.contains("parent_id") && !j["parent_id"].is_null()) e.parent_id = j["parent_id"].get<std::string>();
            if (j.contains("phonemes") && !j["phonemes"].is_null()) {
                std::set<std::string> inv;
                for (const auto& p : j["phonemes"]) inv.insert(utf8::nfc(p.get<std::string>()));
                e.phonemes = std::move(inv);
            }
            if (j.contains("rules"))
                for (const auto& r : j["rules"]) e.rules.rules.push_back(parse_rule(r.get<std::string>(), &table));
        } catch (const nlohmann::json::exception& ex) {
            throw SoundChangeError("inventory entry: " + std::string(ex.what()));
        }
        e.rules.source_id = e.parent_id.value_or("");
        e.rules.derived_id = e.language_id;
        if (!ids.insert(e.language_id).second) throw SoundChangeError("duplicate language id " + e.language_id);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<DiachronicaEntry> load_diachronica(const std::filesystem::path& path, const PhonemeFeatureTable& table) {
    return parse_diachronica(read_file(path), table);
}

void expand_inventories(std::vector<DiachronicaEntry>& entries) {
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < entries.size(); ++i) index[entries[i].language_id] = i;
    std::set<std::string> visiting;
    std::function<const std::set<std::string>&(size_t)> resolve = [&](size_t i) -> const std::set<std::string>& {
        auto& e = entries[i];
        if (e.phonemes) return *e.phonemes;
        if (!e.parent_id) throw SoundChangeError(e.language_id + " has neither phonemes nor a parent");
        auto p = index.find(*e.parent_id);
        if (p == index.end()) throw SoundChangeError(e.language_id + ": unknown parent " + *e.parent_id);
        if (!visiting.insert(e.language_id).second) throw SoundChangeError("parent cycle at " + e.language_id);
        auto derived = propagate_inventory(resolve(p->second), e.rules);
        visiting.erase(e.language_id);
        entries[i].phonemes = std::move(derived);
        return *entries[i].phonemes;
    };
    for (size_t i = 0; i < entries.size(); ++i) resolve(i);
}

}  // namespace conlang::soundchange
