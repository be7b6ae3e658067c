#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace synspace {

struct DecodingParams {
  std::string model = "default";
  double temperature = 0.0;
  int max_tokens = 256;
};

std::string llm_cache_key(const std::string& prompt, const DecodingParams& params);

struct LlmCacheEntry {
  std::string key;
  std::string prompt;
  DecodingParams params;
  std::string response;
  std::vector<std::string> candidates;
};

/// Append-only JSON-lines cache of LLM answers keyed by a SHA-256 of
/// (prompt, decoding params). Readers may run concurrently; appends are
/// serialized and rewrite the file through an atomic rename.
class LlmCache {
 public:
  /// An empty path gives a memory-only cache.
  explicit LlmCache(std::filesystem::path path = {});

  std::optional<std::vector<std::string>> lookup(const std::string& key) const;
  void append(LlmCacheEntry entry);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, LlmCacheEntry> entries_;
  std::string file_text_;
};

struct LlmEndpoint {
  std::string url;            // e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string api_key;        // sent as a bearer token when nonempty
  int max_retries = 3;        // retries after HTTP 429
  double max_retry_wait_s = 60.0;
};

/// Cache-first LLM client for OpenAI-compatible chat endpoints. Responses of
/// the form {"choices":[{"message":{"content":...}}]}, {"text":...} or
/// {"content":[{"text":...}]} are accepted.
class LlmClient {
 public:
  LlmClient(std::optional<LlmEndpoint> endpoint, std::shared_ptr<LlmCache> cache);

  std::vector<std::string> query(const std::string& prompt, const DecodingParams& params);

  std::size_t network_calls() const noexcept { return network_calls_; }
  std::size_t cache_hits() const noexcept { return cache_hits_; }

 private:
  std::string post(const std::string& prompt, const DecodingParams& params);

  std::optional<LlmEndpoint> endpoint_;
  std::shared_ptr<LlmCache> cache_;
  std::size_t network_calls_ = 0;
  std::size_t cache_hits_ = 0;
};

/// Extracts the answer text from a chat-completion style body; throws
/// ParseError carrying the raw body otherwise.
std::string extract_completion_text(const std::string& body);

}  // namespace synspace
