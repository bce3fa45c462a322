#include "kgen/agents/provider.hpp"

#include <condition_variable>
#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "kgen/util/hash.hpp"
#include "kgen/util/text.hpp"

namespace kgen::agents {

using nlohmann::json;

std::uint64_t request_key(const ChatRequest& req) {
    std::ostringstream canon;
    canon << "model=" << req.model << "\x1f";
    char params[64];
    std::snprintf(params, sizeof(params), "t=%.6f;mt=%d", req.temperature, req.max_tokens);
    canon << params << "\x1f";
    for (const auto& m : req.messages) {
        canon << m.role << "\x1e" << m.content << "\x1f";
    }
    return util::fnv1a(canon.str());
}

std::string render_transcript(const std::vector<ChatMessage>& messages) {
    std::ostringstream os;
    for (const auto& m : messages) {
        os << "--- " << m.role << " ---\n" << m.content << "\n";
    }
    return os.str();
}

void ScriptedProvider::push_reply(std::string reply) {
    std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back(std::move(reply));
}

void ScriptedProvider::map_reply(std::uint64_t key, std::string reply) {
    std::lock_guard<std::mutex> lock(mu_);
    keyed_[key] = std::move(reply);
}

ChatReply ScriptedProvider::complete(const ChatRequest& req) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::uint64_t key = request_key(req);
    std::string reply;
    if (auto it = keyed_.find(key); it != keyed_.end()) {
        reply = it->second;
    } else if (!queue_.empty()) {
        reply = std::move(queue_.front());
        queue_.pop_front();
    } else {
        throw ProviderError("scripted provider has no reply for request key " + util::to_hex(key),
                            render_transcript(req.messages));
    }
    transcript_.emplace_back(req, reply);
    return ChatReply{std::move(reply)};
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_replay_file(
    const std::filesystem::path& path) {
    auto provider = std::make_unique<ScriptedProvider>();
    json j = json::parse(util::read_file(path));
    for (const auto& entry : j.at("entries")) {
        const std::string key = entry.value("key", "");
        const std::string reply = entry.at("reply").get<std::string>();
        if (key.empty()) {
            provider->push_reply(reply);
        } else {
            provider->map_reply(std::stoull(key, nullptr, 16), reply);
        }
    }
    return provider;
}

std::vector<std::pair<ChatRequest, std::string>> ScriptedProvider::transcript() const {
    std::lock_guard<std::mutex> lock(mu_);
    return transcript_;
}

std::size_t ScriptedProvider::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return transcript_.size();
}

ChatReply HttpChatProvider::complete(const ChatRequest& req) {
    json body;
    body["model"] = req.model.empty() ? cfg_.model : req.model;
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    body["messages"] = json::array();
    for (const auto& m : req.messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }

    httplib::Client client(cfg_.endpoint);
    client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    client.set_connection_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    auto res = client.Post("/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError("chat endpoint unreachable: " + cfg_.endpoint,
                            render_transcript(req.messages));
    }
    if (res->status != 200) {
        throw ProviderError("chat endpoint returned " + std::to_string(res->status) + ": " + res->body,
                            render_transcript(req.messages));
    }
    try {
        json out = json::parse(res->body);
        return ChatReply{out.at("choices").at(0).at("message").at("content").get<std::string>()};
    } catch (const std::exception& e) {
        throw ProviderError(std::string("malformed chat response: ") + e.what(), res->body);
    }
}

RateLimitedProvider::RateLimitedProvider(ChatProvider& inner, int max_in_flight)
    : inner_(inner), available_(max_in_flight > 0 ? max_in_flight : 1) {}

ChatReply RateLimitedProvider::complete(const ChatRequest& req) {
    {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    try {
        ChatReply reply = inner_.complete(req);
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++available_;
        }
        cv_.notify_one();
        return reply;
    } catch (...) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++available_;
        }
        cv_.notify_one();
        throw;
    }
}

}  // namespace kgen::agents
