#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kgen::agents {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 4096;
};

struct ChatReply {
    std::string content;
};

class ProviderError : public std::runtime_error {
public:
    ProviderError(const std::string& message, std::string transcript_ = "")
        : std::runtime_error(message), transcript(std::move(transcript_)) {}
    std::string transcript;
};

/// Stable key over the full request (model, messages, generation parameters);
/// replay fixtures are addressed by it.
std::uint64_t request_key(const ChatRequest& req);

std::string render_transcript(const std::vector<ChatMessage>& messages);

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string kind() const = 0;
    virtual ChatReply complete(const ChatRequest& req) = 0;
};

/// Deterministic provider for tests and offline runs. Two addressing modes:
/// replies mapped by request key (recorded transcripts), and an ordered
/// queue consumed when no key matches. Every exchange is recorded.
class ScriptedProvider : public ChatProvider {
public:
    std::string kind() const override { return "scripted"; }

    void push_reply(std::string reply);
    void map_reply(std::uint64_t key, std::string reply);

    ChatReply complete(const ChatRequest& req) override;

    /// Replay file: JSON {"entries": [{"key": "<hex>", "reply": "..."}]};
    /// entries with key "" feed the ordered queue.
    static std::unique_ptr<ScriptedProvider> from_replay_file(const std::filesystem::path& path);

    std::vector<std::pair<ChatRequest, std::string>> transcript() const;
    std::size_t calls() const;

private:
    mutable std::mutex mu_;
    std::map<std::uint64_t, std::string> keyed_;
    std::deque<std::string> queue_;
    std::vector<std::pair<ChatRequest, std::string>> transcript_;
};

/// Chat-completions HTTP client. Configuration carries the endpoint, the
/// environment variable holding the API key, and generation parameters.
struct HttpProviderConfig {
    std::string endpoint;     // e.g. https://host/v1
    std::string api_key_env;  // name of the env var with the bearer token
    std::string model;
    double temperature = 0.0;
    int max_tokens = 4096;
    int timeout_ms = 120'000;
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {}
    std::string kind() const override { return "http"; }
    ChatReply complete(const ChatRequest& req) override;

    const HttpProviderConfig& config() const { return cfg_; }

private:
    HttpProviderConfig cfg_;
};

/// Caps concurrent in-flight completions across threads.
class RateLimitedProvider : public ChatProvider {
public:
    RateLimitedProvider(ChatProvider& inner, int max_in_flight);
    std::string kind() const override { return inner_.kind(); }
    ChatReply complete(const ChatRequest& req) override;

private:
    ChatProvider& inner_;
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

}  // namespace kgen::agents
