#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "statfig/errors.hpp"
#include "statfig/jsonio.hpp"
#include "statfig/prompts.hpp"
#include "statfig/textutil.hpp"

namespace statfig {

struct Message {
  std::string role;
  std::string content;
};

struct CompletionRequest {
  std::string model_id;
  std::vector<Message> messages;
  double temperature = 0.5;
  int max_tokens = 1000;
  std::optional<int> seed;

  // Stage tag: set when the request was built through the prompt catalog.
  // The mock fingerprint is derived from it, so scripts can be written per
  // pipeline stage instead of per byte.
  std::optional<PromptId> template_id;
  std::map<std::string, std::string> bindings;
  std::string image_ref;  // forwarded opaquely to vision-capable backends
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct Completion {
  std::string text;  // verbatim backend output, untrimmed
  std::string model_id;
  TokenUsage usage;
  double latency_ms = 0.0;
};

enum class BackendKind { http_chat, scripted_mock };

struct MockScript {
  // exact fingerprint -> canned reply
  std::map<std::string, std::string> by_fingerprint;
  // stage fallback: template id name -> canned reply
  std::map<std::string, std::string> by_template;
};

struct BackendConfig {
  std::string name;
  BackendKind kind = BackendKind::scripted_mock;
  std::string endpoint;   // http_chat
  std::string auth_env;   // env var holding the credential; never the secret itself
  int max_attempts = 1;
  std::vector<int> backoff_ms;
  int timeout_ms = 30000;
  MockScript script;      // scripted_mock
};

/// Stable fingerprint of a request. Template-tagged requests hash the
/// template id, model, temperature, image ref and sorted bindings; untagged
/// requests hash the raw messages.
inline std::string request_fingerprint(const CompletionRequest& req) {
  uint64_t h = fnv1a64("statfig-request");
  auto mix = [&](const std::string& part) {
    h = fnv1a64(part, h);
    h = fnv1a64(std::string(1, '\x1f'), h);
  };
  mix(req.model_id);
  mix(format_number(req.temperature));
  mix(req.image_ref);
  if (req.template_id) {
    mix("tpl");
    mix(prompt_id_name(*req.template_id));
    for (const auto& [key, value] : req.bindings) {
      mix(key);
      mix(value);
    }
  } else {
    mix("msg");
    for (const auto& m : req.messages) {
      mix(m.role);
      mix(m.content);
    }
  }
  return hex64(h);
}

/// Builds a single-user-message request through the prompt catalog.
inline CompletionRequest make_request(const PromptCatalog& catalog, PromptId id,
                                      std::map<std::string, std::string> bindings,
                                      std::string model_id, double temperature = 0.5,
                                      int max_tokens = 1000, std::string image_ref = "") {
  CompletionRequest req;
  req.model_id = std::move(model_id);
  req.temperature = temperature;
  req.max_tokens = max_tokens;
  req.template_id = id;
  req.image_ref = std::move(image_ref);
  req.messages.push_back({"user", render_prompt(catalog, id, bindings)});
  req.bindings = std::move(bindings);
  return req;
}

struct GatewayStats {
  std::atomic<uint64_t> total_calls{0};
  std::atomic<uint64_t> mock_hits{0};
  std::atomic<uint64_t> http_attempts{0};
};

/// Uniform access to chat-completion backends. Stateless per request apart
/// from the shared stats counters and the global in-flight limit.
class Gateway {
 public:
  explicit Gateway(int concurrency_limit = 4)
      : limit_(concurrency_limit < 1 ? 1 : concurrency_limit) {}

  Completion complete(const BackendConfig& backend, const CompletionRequest& request) {
    validate_request(request);
    InflightGuard guard(*this);
    stats_.total_calls.fetch_add(1);
    switch (backend.kind) {
      case BackendKind::scripted_mock: return complete_mock(backend, request);
      case BackendKind::http_chat: return complete_http(backend, request);
    }
    throw Error("ConfigError", "unknown backend kind");
  }

  const GatewayStats& stats() const { return stats_; }

 private:
  static void validate_request(const CompletionRequest& req) {
    if (!std::isfinite(req.temperature) || req.temperature < 0) {
      throw Error("InvalidRequest", "temperature must be finite and >= 0");
    }
    if (req.max_tokens < 1) {
      throw Error("InvalidRequest", "max_tokens must be >= 1");
    }
  }

  Completion complete_mock(const BackendConfig& backend, const CompletionRequest& req) {
    const std::string fp = request_fingerprint(req);
    stats_.mock_hits.fetch_add(1);
    auto it = backend.script.by_fingerprint.find(fp);
    if (it != backend.script.by_fingerprint.end()) {
      return Completion{it->second, req.model_id, {}, 0.0};
    }
    if (req.template_id) {
      auto tit = backend.script.by_template.find(prompt_id_name(*req.template_id));
      if (tit != backend.script.by_template.end()) {
        return Completion{tit->second, req.model_id, {}, 0.0};
      }
    }
    throw NoScriptEntry(fp);
  }

  Completion complete_http(const BackendConfig& backend, const CompletionRequest& req) {
    if (!backend.auth_env.empty() && std::getenv(backend.auth_env.c_str()) == nullptr) {
      throw AuthMissing(backend.auth_env);
    }
    auto [base, path] = split_endpoint(backend.endpoint);
    json body = json::object();
    body["model"] = req.model_id;
    json messages = json::array();
    for (const auto& m : req.messages) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = messages;
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (req.seed) body["seed"] = *req.seed;
    if (!req.image_ref.empty()) body["image_ref"] = req.image_ref;
    const std::string payload = body.dump();

    const int attempts = backend.max_attempts < 1 ? 1 : backend.max_attempts;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      stats_.http_attempts.fetch_add(1);
      auto started = std::chrono::steady_clock::now();
      httplib::Client client(base);
      client.set_connection_timeout(backend.timeout_ms / 1000,
                                    (backend.timeout_ms % 1000) * 1000);
      client.set_read_timeout(backend.timeout_ms / 1000,
                              (backend.timeout_ms % 1000) * 1000);
      httplib::Headers headers;
      if (!backend.auth_env.empty()) {
        headers.emplace("Authorization",
                        std::string("Bearer ") + std::getenv(backend.auth_env.c_str()));
      }
      auto res = client.Post(path, headers, payload, "application/json");
      double elapsed_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - started)
                              .count();
      if (res && res->status == 200) {
        json reply = json::parse(res->body, nullptr, false);
        if (!reply.is_discarded()) {
          if (auto completion = parse_chat_reply(reply, req.model_id, elapsed_ms)) {
            return *completion;
          }
        }
        last_error = "unparseable completion body";
      } else if (res) {
        last_error = "status " + std::to_string(res->status);
      } else {
        last_error = httplib::to_string(res.error());
      }
      if (attempt < attempts) {
        int delay = 0;
        if (!backend.backoff_ms.empty()) {
          size_t k = static_cast<size_t>(attempt - 1);
          delay = backend.backoff_ms[std::min(k, backend.backoff_ms.size() - 1)];
        }
        if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
    }
    throw TransportError(last_error, attempts);
  }

  static std::optional<Completion> parse_chat_reply(const json& reply,
                                                    const std::string& model_id,
                                                    double latency_ms) {
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty()) {
      return std::nullopt;
    }
    const json& choice = reply["choices"][0];
    std::string text;
    if (choice.contains("message") && choice["message"].contains("content")) {
      text = choice["message"]["content"].get<std::string>();
    } else if (choice.contains("text")) {
      text = choice["text"].get<std::string>();
    } else {
      return std::nullopt;
    }
    Completion c;
    c.text = std::move(text);
    c.model_id = reply.contains("model") && reply["model"].is_string()
                     ? reply["model"].get<std::string>()
                     : model_id;
    if (reply.contains("usage") && reply["usage"].is_object()) {
      const json& u = reply["usage"];
      if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number())
        c.usage.prompt_tokens = u["prompt_tokens"].get<int>();
      if (u.contains("completion_tokens") && u["completion_tokens"].is_number())
        c.usage.completion_tokens = u["completion_tokens"].get<int>();
    }
    c.latency_ms = latency_ms;
    return c;
  }

  static std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    size_t scheme = endpoint.find("://");
    size_t path_start =
        endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) {
      return {endpoint, "/v1/chat/completions"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
  }

  // Counting guard for the global in-flight bound.
  class InflightGuard {
   public:
    explicit InflightGuard(Gateway& gw) : gw_(gw) {
      std::unique_lock<std::mutex> lock(gw_.mu_);
      gw_.cv_.wait(lock, [&] { return gw_.inflight_ < gw_.limit_; });
      ++gw_.inflight_;
    }
    ~InflightGuard() {
      {
        std::lock_guard<std::mutex> lock(gw_.mu_);
        --gw_.inflight_;
      }
      gw_.cv_.notify_one();
    }

   private:
    Gateway& gw_;
  };

  int limit_;
  int inflight_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
  GatewayStats stats_;
};

}  // namespace statfig
