#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vgb/benchmarks.hpp"
#include "vgb/prompts.hpp"

namespace vgb {

// Truth attached to a request so the oracle mock can answer it. Never sent to
// a provider and not part of the cache key.
struct AnswerKey {
  Task task = Task::CoNe;
  GroundTruth truth;
  int node_count = 0;
};

struct ChatRequest {
  std::string model;
  std::vector<Segment> segments;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::optional<AnswerKey> answer_key;
};

struct ChatResponse {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_ms = 0;
  bool cached = false;
  std::int64_t total_tokens() const { return input_tokens + output_tokens; }
};

ChatRequest make_chat_request(const PromptBundle &bundle, std::string model,
                              std::optional<AnswerKey> key = std::nullopt);

// ---- hashing and encoding ----------------------------------------------------

std::string sha256_hex(std::string_view bytes);
std::string base64_encode(std::span<const std::uint8_t> bytes);

// Canonical serialization of everything that determines a reply: backend id,
// model, sampling parameters and every segment (images by content digest).
std::string canonical_request(const ChatRequest &req, std::string_view backend_id);
std::string cache_key(const ChatRequest &req, std::string_view backend_id);

// ---- backends -----------------------------------------------------------------

class Backend {
public:
  virtual ~Backend() = default;
  // Identifies the source of replies; part of the cache key.
  virtual std::string id() const = 0;
  virtual ChatResponse complete(const ChatRequest &req) = 0;
  // False for backends whose calls cost nothing (mock, replay).
  virtual bool spends() const { return false; }
};

// Mock token accounting: ceil(chars / 4) per text segment plus a flat charge
// per image; output is ceil(chars / 4) of the reply.
inline constexpr std::int64_t kMockImageTokens = 85;
std::int64_t mock_text_tokens(std::string_view text);
std::int64_t mock_input_tokens(const ChatRequest &req);

// Answers from the attached AnswerKey in the ANSWER schema. Each witness
// element is independently replaced, with probability corruption_rate, by a
// different node ID. Deterministic per (request, seed).
class OracleMockBackend final : public Backend {
public:
  OracleMockBackend(double corruption_rate, std::uint64_t seed);
  std::string id() const override;
  ChatResponse complete(const ChatRequest &req) override;

private:
  double rate_;
  std::uint64_t seed_;
};

// Serves only what the cache already holds; `replays` is the id of the
// backend that filled it.
class ReplayBackend final : public Backend {
public:
  explicit ReplayBackend(std::string replays) : replays_(std::move(replays)) {}
  std::string id() const override { return replays_; }
  ChatResponse complete(const ChatRequest &req) override;

private:
  std::string replays_;
};

struct HttpConfig {
  std::string provider = "openai"; // key read from LLM_API_KEY_<PROVIDER>
  std::string api = "openai";      // wire format: "openai" or "anthropic"
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model;
  int max_retries = 3;
  double backoff_initial_ms = 1000;
  double backoff_factor = 2;
  double timeout_s = 120;
  double requests_per_minute = 0; // 0: no pacing
};

// Environment variable holding the key for a provider, e.g. LLM_API_KEY_OPENAI.
std::string api_key_variable(std::string_view provider);

class HttpBackend final : public Backend {
public:
  // Throws AuthError if the key variable is unset or empty, ConfigError for
  // an unusable endpoint or api.
  explicit HttpBackend(HttpConfig config);
  std::string id() const override;
  ChatResponse complete(const ChatRequest &req) override;
  bool spends() const override { return true; }

  // Provider request body, exposed for tests.
  std::string request_body(const ChatRequest &req) const;

private:
  void pace();

  HttpConfig cfg_;
  std::string key_;
  std::string origin_, path_;
  std::mutex pace_mu_;
  std::chrono::steady_clock::time_point next_slot_{};
};

// ---- cache and client -------------------------------------------------------------

// One JSON file per reply at <dir>/<key[0:2]>/<key>.json. Writes are
// serialized and atomic (temporary file plus rename).
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<ChatResponse> get(const std::string &key) const;
  void put(const std::string &key, const ChatResponse &resp, std::string_view backend_id,
           std::string_view model);
  std::filesystem::path path_for(const std::string &key) const;

private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

struct ClientStats {
  std::int64_t backend_calls = 0;
  std::int64_t cache_hits = 0;
};

// Thread-safe front end: cache lookup, then the backend under an in-flight
// limit. Responses served from the cache carry cached = true.
class LlmClient {
public:
  LlmClient(std::shared_ptr<Backend> backend, std::optional<std::filesystem::path> cache_dir,
            int max_in_flight = 4);
  ChatResponse send(const ChatRequest &req);
  ClientStats stats() const;
  const Backend &backend() const { return *backend_; }

private:
  std::shared_ptr<Backend> backend_;
  std::optional<ResponseCache> cache_;
  std::counting_semaphore<> slots_;
  std::mutex memo_mu_;
  std::map<std::string, ChatResponse> memo_; // used when there is no disk cache
  std::atomic<std::int64_t> calls_{0}, hits_{0};
};

} // namespace vgb
