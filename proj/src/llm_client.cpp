#include "synspace/llm_client.hpp"

#include <chrono>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "synspace/embedding_io.hpp"
#include "synspace/error.hpp"
#include "synspace/hashing.hpp"
#include "synspace/textgen.hpp"

namespace synspace {
namespace {

using nlohmann::ordered_json;

ordered_json params_json(const DecodingParams& p) {
  ordered_json j;
  j["model"] = p.model;
  j["temperature"] = p.temperature;
  j["max_tokens"] = p.max_tokens;
  return j;
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidConfig, "endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string llm_cache_key(const std::string& prompt, const DecodingParams& params) {
  Sha256 h;
  h.update_field(prompt);
  h.update_field(params_json(params).dump());
  return h.hex_digest();
}

LlmCache::LlmCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  const auto bytes = read_file_bytes(path_);
  file_text_.assign(bytes.begin(), bytes.end());
  std::istringstream in(file_text_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LlmCacheEntry e;
      e.key = j.at("key").get<std::string>();
      e.prompt = j.at("prompt").get<std::string>();
      const auto& p = j.at("params");
      e.params.model = p.at("model").get<std::string>();
      e.params.temperature = p.at("temperature").get<double>();
      e.params.max_tokens = p.at("max_tokens").get<int>();
      e.response = j.at("response").get<std::string>();
      e.candidates = j.at("candidates").get<std::vector<std::string>>();
      entries_.insert_or_assign(e.key, std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ParseError, path_.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (!file_text_.empty() && file_text_.back() != '\n') file_text_.push_back('\n');
}

std::optional<std::vector<std::string>> LlmCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.candidates;
}

void LlmCache::append(LlmCacheEntry entry) {
  std::unique_lock lock(mutex_);
  ordered_json j;
  j["key"] = entry.key;
  j["prompt"] = entry.prompt;
  j["params"] = params_json(entry.params);
  j["response"] = entry.response;
  j["candidates"] = entry.candidates;
  std::string next = file_text_ + j.dump() + "\n";
  if (!path_.empty()) write_file_atomic(path_, next);
  file_text_ = std::move(next);
  entries_.insert_or_assign(entry.key, std::move(entry));
}

std::size_t LlmCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::string extract_completion_text(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    if (j.contains("choices")) return j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("text")) return j.at("text").get<std::string>();
    if (j.contains("content") && j.at("content").is_array()) return j.at("content").at(0).at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
  }
  throw Error(ErrorCode::ParseError, "unrecognised LLM response; raw body: " + body);
}

LlmClient::LlmClient(std::optional<LlmEndpoint> endpoint, std::shared_ptr<LlmCache> cache)
    : endpoint_(std::move(endpoint)), cache_(cache ? std::move(cache) : std::make_shared<LlmCache>()) {}

std::vector<std::string> LlmClient::query(const std::string& prompt, const DecodingParams& params) {
  const auto key = llm_cache_key(prompt, params);
  if (auto hit = cache_->lookup(key)) {
    ++cache_hits_;
    return *hit;
  }
  if (!endpoint_) throw Error(ErrorCode::NetworkError, "cache miss and no LLM endpoint configured for: " + prompt);
  const std::string body = post(prompt, params);
  const std::string text = extract_completion_text(body);
  auto candidates = parse_candidates(text);
  if (candidates.empty()) throw Error(ErrorCode::ParseError, "LLM answer has no candidates; raw body: " + body);
  cache_->append(LlmCacheEntry{key, prompt, params, text, candidates});
  return candidates;
}

std::string LlmClient::post(const std::string& prompt, const DecodingParams& params) {
  const auto url = split_url(endpoint_->url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!endpoint_->api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_->api_key);

  ordered_json req = params_json(params);
  req["messages"] = ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  const std::string payload = req.dump();

  for (int attempt = 0;; ++attempt) {
    ++network_calls_;
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) throw Error(ErrorCode::NetworkError, endpoint_->url + ": " + httplib::to_string(res.error()));
    if (res->status == 429) {
      double wait_s = 1.0;
      if (res->has_header("Retry-After")) {
        try {
          wait_s = std::stod(res->get_header_value("Retry-After"));
        } catch (const std::exception&) {
        }
      }
      if (attempt >= endpoint_->max_retries || wait_s > endpoint_->max_retry_wait_s) {
        throw Error(ErrorCode::RateLimited, endpoint_->url + " (retry-after " + std::to_string(wait_s) + "s)");
      }
      std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::NetworkError, endpoint_->url + " returned HTTP " + std::to_string(res->status));
    }
    return res->body;
  }
}

}  // namespace synspace
