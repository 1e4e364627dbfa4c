#include "conlang/llm.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <ctime>

#include "conlang/digest.hpp"
#include "conlang/fileio.hpp"

namespace conlang::llm {

using nlohmann::json;

ProviderError::ProviderError(int status, std::string body_excerpt, std::optional<double> retry_after)
    : LlmError("provider returned HTTP " + std::to_string(status) +
               (retry_after ? " (retry after " + std::to_string(static_cast<long>(*retry_after)) + "s)" : "") + ": " +
               body_excerpt),
      status_(status),
      body_(std::move(body_excerpt)),
      retry_after_(retry_after) {}

CassetteMiss::CassetteMiss(std::string hash)
    : LlmError("no recorded response for request " + hash), hash_(std::move(hash)) {}

RefinementError::RefinementError(size_t round, const std::string& cause)
    : LlmError("refinement round " + std::to_string(round) + ": " + cause), round_(round) {}

void CompletionRequest::validate() const {
    if (system_prompt.empty()) throw InvalidRequest("system prompt is empty");
    if (user_prompt.empty()) throw InvalidRequest("user prompt is empty");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw InvalidRequest("temperature " + std::to_string(temperature) + " outside [0, 2]");
    if (max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");
}

std::string CompletionRequest::canonical() const {
    json j = {{"max_tokens", max_tokens},
              {"model_id", model_id},
              {"system_prompt", system_prompt},
              {"temperature", temperature},
              {"user_prompt", user_prompt}};
    return j.dump();
}

std::string CompletionRequest::hash() const { return sha256_hex(canonical()); }

json CompletionRecord::to_json() const {
    return {{"request_hash", request_hash}, {"response", response}, {"timestamp", timestamp}, {"provider", provider}};
}

CompletionRecord CompletionRecord::from_json(const json& doc) {
    CompletionRecord r;
    r.request_hash = doc.at("request_hash").get<std::string>();
    r.response = doc.at("response").get<std::string>();
    r.timestamp = doc.value("timestamp", "");
    r.provider = doc.value("provider", "");
    return r;
}

std::string scrub(std::string text, const std::vector<std::string>& secrets) {
    for (const auto& s : secrets) {
        if (s.empty()) continue;
        size_t pos = 0;
        while ((pos = text.find(s, pos)) != std::string::npos) {
            text.replace(pos, s.size(), "[REDACTED]");
            pos += 10;
        }
    }
    return text;
}

// ---------------------------------------------------------------------------

namespace {

std::string env_or(const char* name, std::string fallback = "") {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::optional<double> parse_retry_after(const std::string& v) {
    if (v.empty()) return std::nullopt;
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used == v.size() && d >= 0) return d;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

OpenAICompatibleProvider::OpenAICompatibleProvider(std::string base_url, std::string api_key, int timeout_seconds)
    : api_key_(std::move(api_key)), timeout_(timeout_seconds) {
    while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
    auto scheme = base_url.find("://");
    if (scheme == std::string::npos) throw LlmError("base URL needs a scheme: " + base_url);
    auto slash = base_url.find('/', scheme + 3);
    scheme_host_ = base_url.substr(0, slash);
    path_prefix_ = slash == std::string::npos ? "" : base_url.substr(slash);
}

std::unique_ptr<OpenAICompatibleProvider> OpenAICompatibleProvider::from_env() {
    auto url = env_or("CONLANG_LLM_BASE_URL");
    if (url.empty()) throw LlmError("CONLANG_LLM_BASE_URL is not set");
    return std::make_unique<OpenAICompatibleProvider>(url, env_or("CONLANG_LLM_API_KEY"));
}

std::string OpenAICompatibleProvider::complete(const CompletionRequest& req) {
    json body = {{"model", req.model_id},
                 {"max_tokens", req.max_tokens},
                 {"temperature", req.temperature},
                 {"messages",
                  json::array({{{"role", "system"}, {"content", req.system_prompt}},
                               {{"role", "user"}, {"content", req.user_prompt}}})}};
    httplib::Client cli(scheme_host_);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(path_prefix_ + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw ProviderError(0, "transport error: " + httplib::to_string(res.error()));
    auto excerpt = scrub(res->body.substr(0, 300), secrets());
    if (res->status != 200) throw ProviderError(res->status, excerpt, parse_retry_after(res->get_header_value("Retry-After")));
    try {
        auto doc = json::parse(res->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ProviderError(res->status, "unexpected response shape: " + excerpt);
    }
}

std::string ScriptedProvider::complete(const CompletionRequest& req) {
    std::lock_guard lock(mu_);
    calls_.push_back(req);
    if (next_ >= responses_.size()) throw ProviderError(500, "scripted provider exhausted");
    return responses_[next_++];
}

// ---------------------------------------------------------------------------

Cassette::Cassette(std::filesystem::path path) : path_(std::move(path)) {}

Cassette Cassette::parse(std::string_view text) {
    Cassette c;
    size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            c.put(CompletionRecord::from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw LlmError("cassette line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

Cassette Cassette::load(const std::filesystem::path& path) {
    Cassette c;
    if (std::filesystem::exists(path)) c = parse(read_file(path));
    c.path_ = path;
    return c;
}

std::string Cassette::format() const {
    std::string out;
    for (const auto& [_, r] : records_) out += r.to_json().dump() + "\n";
    return out;
}

void Cassette::save() const {
    if (path_.empty()) throw LlmError("cassette has no path");
    write_file_atomic(path_, format());
}

std::optional<CompletionRecord> Cassette::find(const std::string& hash) const {
    auto it = records_.find(hash);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

void Cassette::put(CompletionRecord record) {
    auto key = record.request_hash;
    records_[key] = std::move(record);
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Live: return "live";
        case Mode::Record: return "record";
        case Mode::Replay: return "replay";
    }
    return "?";
}

Mode mode_from_string(std::string_view s) {
    if (s == "live") return Mode::Live;
    if (s == "record") return Mode::Record;
    if (s == "replay") return Mode::Replay;
    throw LlmError("unknown LLM mode '" + std::string(s) + "'");
}

ClientOptions options_from_env() {
    ClientOptions o;
    o.mode = mode_from_string(env_or("CONLANG_LLM_MODE", "replay"));
    o.default_model = env_or("CONLANG_LLM_MODEL");
    return o;
}

Client::Client(ClientOptions options, std::shared_ptr<Provider> provider, std::shared_ptr<Cassette> cassette)
    : opts_(std::move(options)), provider_(std::move(provider)), cassette_(std::move(cassette)) {
    if (opts_.mode != Mode::Replay && !provider_) throw LlmError(to_string(opts_.mode) + " mode needs a provider");
    if (opts_.mode != Mode::Live && !cassette_) throw LlmError(to_string(opts_.mode) + " mode needs a cassette");
    if (opts_.max_in_flight == 0) opts_.max_in_flight = 1;
    if (!opts_.clock) opts_.clock = utc_now;
}

std::string Client::complete(CompletionRequest req) {
    if (req.model_id.empty()) req.model_id = opts_.default_model;
    req.validate();
    auto hash = req.hash();
    {
        std::lock_guard lock(mu_);
        ++calls_;
        if (opts_.mode == Mode::Replay) {
            if (auto hit = cassette_->find(hash)) return hit->response;
            throw CassetteMiss(hash);
        }
    }

    {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return in_flight_ < opts_.max_in_flight; });
        ++in_flight_;
        peak_ = std::max(peak_, in_flight_);
    }
    std::string text;
    try {
        text = provider_->complete(req);
    } catch (...) {
        std::lock_guard lock(mu_);
        --in_flight_;
        cv_.notify_one();
        throw;
    }
    std::lock_guard lock(mu_);
    --in_flight_;
    cv_.notify_one();
    if (opts_.mode == Mode::Record) {
        auto secrets = provider_->secrets();
        cassette_->put({hash, scrub(text, secrets), opts_.clock(), provider_->name()});
        cassette_->save();
    }
    return text;
}

size_t Client::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

size_t Client::peak_in_flight() const {
    std::lock_guard lock(mu_);
    return peak_;
}

// ---------------------------------------------------------------------------

std::string refinement_prompt(const std::string& original, const std::string& previous_output,
                              const std::string& feedback) {
    return original + "\n\nYour previous answer was:\n\n" + previous_output +
           "\n\nPlease revise it. Problems found:\n\n" + feedback;
}

RefinementResult run_refinement_loop(Client& client, const CompletionRequest& initial,
                                     const std::function<Critique(const std::string&)>& critic, size_t max_rounds) {
    if (max_rounds == 0) throw LlmError("max_rounds must be at least 1");
    RefinementResult result;
    CompletionRequest req = initial;
    for (size_t round = 1; round <= max_rounds; ++round) {
        RoundTranscript t;
        t.round = round;
        t.prompt = req.user_prompt;
        try {
            t.output = client.complete(req);
        } catch (const std::exception& e) {
            throw RefinementError(round, e.what());
        }
        t.critique = critic(t.output);
        result.rounds.push_back(t);
        const auto& best = result.rounds[result.best_round == 0 ? 0 : result.best_round - 1];
        if (result.best_round == 0 || t.critique.violations <= best.critique.violations) result.best_round = round;
        if (t.critique.clean) {
            result.converged = true;
            result.best_round = round;
            break;
        }
        req.user_prompt = refinement_prompt(initial.user_prompt, t.output, t.critique.feedback);
    }
    result.text = result.rounds[result.best_round - 1].output;
    return result;
}

}  // namespace conlang::llm
