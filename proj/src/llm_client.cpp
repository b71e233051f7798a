#include "vgb/llm_client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "vgb/error.hpp"
#include "vgb/render.hpp"
#include "vgb/rng.hpp"

namespace vgb {

using json = nlohmann::json;

ChatRequest make_chat_request(const PromptBundle &bundle, std::string model, std::optional<AnswerKey> key) {
  ChatRequest r;
  r.model = std::move(model);
  r.segments = bundle.segments;
  r.answer_key = std::move(key);
  return r;
}

// ---- hashing and encoding ----------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char *>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

namespace {

std::string_view bytes_view(const std::vector<std::uint8_t> &v) {
  return {reinterpret_cast<const char *>(v.data()), v.size()};
}

} // namespace

std::string canonical_request(const ChatRequest &req, std::string_view backend_id) {
  json segs = json::array();
  for (const auto &s : req.segments) {
    json j{{"role", to_string(s.role)}};
    if (s.kind == Segment::Kind::Image)
      j["image_sha256"] = sha256_hex(bytes_view(s.png));
    else
      j["text"] = s.text;
    segs.push_back(std::move(j));
  }
  // nlohmann objects keep keys sorted, so dump() is canonical.
  json j{{"backend", backend_id},
         {"model", req.model},
         {"temperature", req.temperature},
         {"max_tokens", req.max_tokens},
         {"segments", std::move(segs)}};
  return j.dump();
}

std::string cache_key(const ChatRequest &req, std::string_view backend_id) {
  return sha256_hex(canonical_request(req, backend_id));
}

// ---- oracle mock --------------------------------------------------------------

std::int64_t mock_text_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t mock_input_tokens(const ChatRequest &req) {
  std::int64_t t = 0;
  for (const auto &s : req.segments)
    t += s.kind == Segment::Kind::Image ? kMockImageTokens : mock_text_tokens(s.text);
  return t;
}

OracleMockBackend::OracleMockBackend(double corruption_rate, std::uint64_t seed)
    : rate_(corruption_rate), seed_(seed) {
  if (!(corruption_rate >= 0 && corruption_rate <= 1))
    throw ConfigError("corruption rate must lie in [0, 1]");
}

std::string OracleMockBackend::id() const {
  std::ostringstream o;
  o << "oracle-mock(rate=" << rate_ << ",seed=" << seed_ << ")";
  return o.str();
}

ChatResponse OracleMockBackend::complete(const ChatRequest &req) {
  if (!req.answer_key)
    throw ConfigError("the oracle mock needs an answer key on every request");
  const auto &key = *req.answer_key;
  // The draw stream ignores the rate, so the corrupted elements at a lower rate
  // are a subset of those at a higher one for the same seed.
  const std::string digest = sha256_hex(canonical_request(req, "oracle-mock"));
  Rng rng(std::stoull(digest.substr(0, 16), nullptr, 16) ^ (seed_ * 0x9e3779b97f4a7c15ULL));
  std::vector<NodeId> witness = key.truth.witness;
  for (auto &x : witness) {
    const double u = rng.uniform();
    const auto other = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(std::max(1, key.node_count - 1))));
    if (u < rate_ && key.node_count > 1)
      x = other >= x ? other + 1 : other;
  }
  ChatResponse r;
  r.text = "Answer derived from the reference solution.\n" + format_answer_line(key.truth.value, witness);
  r.input_tokens = mock_input_tokens(req);
  r.output_tokens = mock_text_tokens(r.text);
  return r;
}

ChatResponse ReplayBackend::complete(const ChatRequest &req) {
  throw ReplayMissError("no cached reply for request " + cache_key(req, replays_).substr(0, 16) + " from " +
                        replays_);
}

// ---- HTTP provider --------------------------------------------------------------

std::string api_key_variable(std::string_view provider) {
  std::string v = "LLM_API_KEY_";
  for (char c : provider)
    v += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : '_';
  return v;
}

HttpBackend::HttpBackend(HttpConfig config) : cfg_(std::move(config)) {
  if (cfg_.api != "openai" && cfg_.api != "anthropic")
    throw ConfigError("unknown provider api '" + cfg_.api + "'");
  if (cfg_.model.empty())
    throw ConfigError("no model configured for provider " + cfg_.provider);
  if (cfg_.max_retries < 0)
    throw ConfigError("max_retries must be non-negative");
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint, m, url))
    throw ConfigError("unusable endpoint '" + cfg_.endpoint + "'");
  origin_ = m[1];
  path_ = m[2].matched ? std::string(m[2]) : "/";
  const std::string var = api_key_variable(cfg_.provider);
  const char *key = std::getenv(var.c_str());
  if (key == nullptr || *key == '\0')
    throw AuthError("environment variable " + var + " is not set");
  key_ = key;
}

std::string HttpBackend::id() const { return cfg_.provider + "/" + cfg_.model; }

namespace {

// Consecutive segments of one role merged into a single message.
struct Turn {
  Role role;
  std::vector<const Segment *> parts;
};

std::vector<Turn> turns(const ChatRequest &req) {
  std::vector<Turn> out;
  for (const auto &s : req.segments) {
    if (out.empty() || out.back().role != s.role)
      out.push_back({s.role, {}});
    out.back().parts.push_back(&s);
  }
  return out;
}

std::string joined_text(const Turn &t) {
  std::string s;
  for (const Segment *p : t.parts)
    if (p->kind == Segment::Kind::Text)
      s += (s.empty() ? "" : "\n\n") + p->text;
  return s;
}

} // namespace

std::string HttpBackend::request_body(const ChatRequest &req) const {
  json messages = json::array();
  json system;
  for (const auto &t : turns(req)) {
    if (t.role == Role::System) {
      system = joined_text(t);
      if (cfg_.api == "openai")
        messages.push_back({{"role", "system"}, {"content", system}});
      continue;
    }
    json content = json::array();
    for (const Segment *p : t.parts) {
      if (p->kind == Segment::Kind::Text) {
        content.push_back({{"type", "text"}, {"text", p->text}});
      } else if (cfg_.api == "openai") {
        content.push_back(
            {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(p->png)}}}});
      } else {
        content.push_back({{"type", "image"},
                           {"source", {{"type", "base64"}, {"media_type", "image/png"}, {"data", base64_encode(p->png)}}}});
      }
    }
    messages.push_back({{"role", t.role == Role::User ? "user" : "assistant"}, {"content", std::move(content)}});
  }
  json body{{"model", req.model.empty() ? cfg_.model : req.model},
            {"max_tokens", req.max_tokens},
            {"temperature", req.temperature},
            {"messages", std::move(messages)}};
  if (cfg_.api == "anthropic" && !system.is_null())
    body["system"] = system;
  return body.dump();
}

void HttpBackend::pace() {
  if (cfg_.requests_per_minute <= 0)
    return;
  const auto gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / cfg_.requests_per_minute));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(pace_mu_);
    slot = std::max(next_slot_, std::chrono::steady_clock::now());
    next_slot_ = slot + gap;
  }
  std::this_thread::sleep_until(slot);
}

ChatResponse HttpBackend::complete(const ChatRequest &req) {
  const std::string body = request_body(req);
  httplib::Headers headers;
  if (cfg_.api == "openai") {
    headers.emplace("Authorization", "Bearer " + key_);
  } else {
    headers.emplace("x-api-key", key_);
    headers.emplace("anthropic-version", "2023-06-01");
  }

  std::string last_failure;
  bool rate_limited = false;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    double wait_ms = cfg_.backoff_initial_ms * std::pow(cfg_.backoff_factor, attempt);
    pace();
    httplib::Client cli(origin_);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(cfg_.timeout_s));
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    const auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post(path_, headers, body, "application/json");
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    if (!res) {
      last_failure = "transport failure: " + httplib::to_string(res.error());
      rate_limited = false;
    } else if (res->status == 401 || res->status == 403) {
      throw AuthError(id() + " rejected the credentials (HTTP " + std::to_string(res->status) + ")");
    } else if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      rate_limited = res->status == 429;
      if (res->has_header("Retry-After")) {
        const double s = std::atof(res->get_header_value("Retry-After").c_str());
        if (s > 0)
          wait_ms = std::max(wait_ms, 1000 * s);
      }
    } else if (res->status < 200 || res->status >= 300) {
      throw TransportError(id() + " returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
    } else {
      ChatResponse r;
      r.latency_ms = latency;
      try {
        const json j = json::parse(res->body);
        if (cfg_.api == "openai") {
          r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
          r.input_tokens = j.at("usage").at("prompt_tokens").get<std::int64_t>();
          r.output_tokens = j.at("usage").at("completion_tokens").get<std::int64_t>();
        } else {
          for (const auto &c : j.at("content"))
            if (c.value("type", "") == "text")
              r.text += c.at("text").get<std::string>();
          r.input_tokens = j.at("usage").at("input_tokens").get<std::int64_t>();
          r.output_tokens = j.at("usage").at("output_tokens").get<std::int64_t>();
        }
      } catch (const json::exception &e) {
        throw TransportError(id() + " sent an unreadable reply: " + e.what());
      }
      return r;
    }
    if (attempt < cfg_.max_retries)
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(wait_ms));
  }
  const std::string what = id() + ": giving up after " + std::to_string(cfg_.max_retries + 1) +
                           " attempts, last " + last_failure;
  if (rate_limited)
    throw RateLimitError(what);
  throw TransportError(what);
}

// ---- cache ----------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string &key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<ChatResponse> ResponseCache::get(const std::string &key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in)
    return std::nullopt;
  try {
    const json j = json::parse(in);
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.input_tokens = j.at("input_tokens").get<std::int64_t>();
    r.output_tokens = j.at("output_tokens").get<std::int64_t>();
    r.latency_ms = j.at("latency_ms").get<double>();
    r.cached = true;
    return r;
  } catch (const json::exception &) {
    return std::nullopt; // a damaged entry is refetched
  }
}

void ResponseCache::put(const std::string &key, const ChatResponse &resp, std::string_view backend_id,
                        std::string_view model) {
  const json j{{"backend", backend_id},    {"model", model},
               {"text", resp.text},        {"input_tokens", resp.input_tokens},
               {"output_tokens", resp.output_tokens}, {"latency_ms", resp.latency_ms}};
  const auto path = path_for(key);
  std::lock_guard lock(mu_);
  std::filesystem::create_directories(path.parent_path());
  write_file(path, j.dump(1) + "\n");
}

// ---- client ---------------------------------------------------------------------

LlmClient::LlmClient(std::shared_ptr<Backend> backend, std::optional<std::filesystem::path> cache_dir,
                     int max_in_flight)
    : backend_(std::move(backend)), slots_(std::max(1, max_in_flight)) {
  if (!backend_)
    throw ConfigError("no backend");
  if (cache_dir)
    cache_.emplace(*cache_dir);
}

ChatResponse LlmClient::send(const ChatRequest &req) {
  const std::string backend_id = backend_->id();
  const std::string key = cache_key(req, backend_id);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++hits_;
      return *hit;
    }
  } else {
    std::lock_guard lock(memo_mu_);
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++hits_;
      auto r = it->second;
      r.cached = true;
      return r;
    }
  }

  slots_.acquire();
  ChatResponse r;
  try {
    ++calls_;
    r = backend_->complete(req);
  } catch (...) {
    slots_.release();
    throw;
  }
  slots_.release();
  r.cached = false;
  if (cache_) {
    cache_->put(key, r, backend_id, req.model);
  } else {
    std::lock_guard lock(memo_mu_);
    memo_.emplace(key, r);
  }
  return r;
}

ClientStats LlmClient::stats() const { return {calls_.load(), hits_.load()}; }

} // namespace vgb
