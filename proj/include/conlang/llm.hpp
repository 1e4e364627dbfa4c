#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conlang/error.hpp"

namespace conlang::llm {

class LlmError : public Error {
public:
    using Error::Error;
};

class InvalidRequest : public LlmError {
public:
    using LlmError::LlmError;
};

class ProviderError : public LlmError {
public:
    ProviderError(int status, std::string body_excerpt, std::optional<double> retry_after = std::nullopt);
    int status() const { return status_; }
    const std::string& body_excerpt() const { return body_; }
    /// Seconds from a Retry-After header, when the provider sent one.
    std::optional<double> retry_after() const { return retry_after_; }

private:
    int status_;
    std::string body_;
    std::optional<double> retry_after_;
};

class CassetteMiss : public LlmError {
public:
    explicit CassetteMiss(std::string hash);
    const std::string& hash() const { return hash_; }

private:
    std::string hash_;
};

class RefinementError : public LlmError {
public:
    RefinementError(size_t round, const std::string& cause);
    size_t round() const { return round_; }

private:
    size_t round_;
};

struct CompletionRequest {
    std::string system_prompt;
    std::string user_prompt;
    std::string model_id;
    int max_tokens = 2048;
    double temperature = 0.0;

    /// Throws InvalidRequest.
    void validate() const;
    /// Sorted keys, no whitespace.
    std::string canonical() const;
    std::string hash() const;
};

struct CompletionRecord {
    std::string request_hash;
    std::string response;
    std::string timestamp;
    std::string provider;

    nlohmann::json to_json() const;
    static CompletionRecord from_json(const nlohmann::json& doc);
};

/// Replaces every occurrence of each non-empty secret with "[REDACTED]".
std::string scrub(std::string text, const std::vector<std::string>& secrets);

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const CompletionRequest& req) = 0;
    /// Strings that must never be persisted.
    virtual std::vector<std::string> secrets() const { return {}; }
};

/// POST {base_url}/chat/completions with the OpenAI chat wire shape.
class OpenAICompatibleProvider : public Provider {
public:
    OpenAICompatibleProvider(std::string base_url, std::string api_key, int timeout_seconds = 120);

    /// CONLANG_LLM_BASE_URL, CONLANG_LLM_API_KEY. Throws LlmError if the URL is unset.
    static std::unique_ptr<OpenAICompatibleProvider> from_env();

    std::string name() const override { return "openai-compatible"; }
    std::string complete(const CompletionRequest& req) override;
    std::vector<std::string> secrets() const override { return {api_key_}; }

private:
    std::string scheme_host_;
    std::string path_prefix_;
    std::string api_key_;
    int timeout_;
};

/// Canned responses in call order; for tests and offline drafting.
class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(std::vector<std::string> responses) : responses_(std::move(responses)) {}
    std::string name() const override { return "scripted"; }
    std::string complete(const CompletionRequest& req) override;
    const std::vector<CompletionRequest>& calls() const { return calls_; }

private:
    std::vector<std::string> responses_;
    std::vector<CompletionRequest> calls_;
    size_t next_ = 0;
    std::mutex mu_;
};

/// JSONL file of CompletionRecord keyed by request hash.
class Cassette {
public:
    Cassette() = default;
    explicit Cassette(std::filesystem::path path);

    /// A missing file is an empty cassette.
    static Cassette load(const std::filesystem::path& path);
    static Cassette parse(std::string_view text);
    std::string format() const;
    void save() const;

    std::optional<CompletionRecord> find(const std::string& hash) const;
    void put(CompletionRecord record);
    size_t size() const { return records_.size(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::map<std::string, CompletionRecord> records_;
};

enum class Mode { Live, Record, Replay };
std::string to_string(Mode m);
Mode mode_from_string(std::string_view s);

struct ClientOptions {
    Mode mode = Mode::Replay;
    std::string default_model;
    size_t max_in_flight = 4;
    std::function<std::string()> clock;
};

/// CONLANG_LLM_MODE (live|record|replay, default replay), CONLANG_LLM_MODEL.
ClientOptions options_from_env();

class Client {
public:
    /// `provider` may be null in replay mode. The cassette is required for
    /// record and replay.
    Client(ClientOptions options, std::shared_ptr<Provider> provider, std::shared_ptr<Cassette> cassette);

    std::string complete(CompletionRequest req);
    Mode mode() const { return opts_.mode; }
    size_t calls() const;
    size_t peak_in_flight() const;

private:
    ClientOptions opts_;
    std::shared_ptr<Provider> provider_;
    std::shared_ptr<Cassette> cassette_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    size_t in_flight_ = 0;
    size_t peak_ = 0;
    size_t calls_ = 0;
};

struct Critique {
    bool clean = true;
    size_t violations = 0;
    std::string feedback;
};

struct RoundTranscript {
    size_t round = 0;
    std::string prompt;
    std::string output;
    Critique critique;
};

struct RefinementResult {
    std::string text;
    bool converged = false;
    size_t best_round = 0;
    std::vector<RoundTranscript> rounds;
};

std::string refinement_prompt(const std::string& original, const std::string& previous_output,
                              const std::string& feedback);

/// Stops at the first clean round. Otherwise returns the output with the
/// fewest violations (later round on ties) and converged = false.
RefinementResult run_refinement_loop(Client& client, const CompletionRequest& initial,
                                     const std::function<Critique(const std::string&)>& critic, size_t max_rounds);

}  // namespace conlang::llm
