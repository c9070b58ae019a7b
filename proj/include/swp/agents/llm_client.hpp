#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "swp/core/http.hpp"
#include <json.hpp>

#include "swp/core/error.hpp"
#include "swp/core/jsonl.hpp"

namespace swp::agents {

struct LlmParams {
  std::string model = "gpt-4-0613";
  double temperature = 0.8;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string auth_env = "OPENAI_API_KEY";  // name of the variable, never the secret
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{60};

  static LlmParams from_json(const nlohmann::json& j) {
    LlmParams p;
    p.model = j.value("model", p.model);
    p.temperature = j.value("temperature", p.temperature);
    p.endpoint = j.value("endpoint", p.endpoint);
    p.auth_env = j.value("auth_env", p.auth_env);
    p.max_retries = j.value("max_retries", p.max_retries);
    p.backoff = std::chrono::milliseconds(j.value("backoff_ms", static_cast<long>(p.backoff.count())));
    p.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(p.timeout.count())));
    if (p.temperature < 0.0) throw Error(Errc::invalid_config, "temperature must be >= 0");
    if (p.max_retries < 0) throw Error(Errc::invalid_config, "max_retries must be >= 0");
    return p;
  }
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// POST transport. Implementations throw Errc::transport_error when no HTTP
// response was obtained at all.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const httplib::Headers& headers, const std::string& body) = 0;
};

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::invalid_config, "endpoint is not a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(60)) : timeout_(timeout) {}

  HttpResponse post(const std::string& url, const httplib::Headers& headers, const std::string& body) override {
    const auto parts = split_url(url);
    httplib::Client client(parts.scheme_host_port);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    auto res = client.Post(parts.path, headers, body, "application/json");
    if (!res) throw Error(Errc::transport_error, "POST " + url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }

 private:
  std::chrono::seconds timeout_;
};

// Single-shot chat-completion client. Retries transport failures, 429 and
// 5xx with exponential backoff; auth failures surface immediately.
class LlmClient {
 public:
  LlmClient(LlmParams params, std::shared_ptr<HttpTransport> transport, std::shared_ptr<JsonlWriter> audit = {})
      : params_(std::move(params)), transport_(std::move(transport)), audit_(std::move(audit)) {
    const char* token = std::getenv(params_.auth_env.c_str());
    if (token == nullptr || *token == '\0')
      throw Error(Errc::invalid_config, "environment variable " + params_.auth_env + " is not set");
    token_ = token;
  }

  const LlmParams& params() const noexcept { return params_; }

  std::string complete(const std::string& prompt) {
    const nlohmann::json request = {
        {"model", params_.model},
        {"temperature", params_.temperature},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    };
    const std::string body = request.dump();
    const httplib::Headers headers = {{"Authorization", "Bearer " + token_}};

    std::string last_error;
    for (int attempt = 0; attempt <= params_.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(params_.backoff * (1 << (attempt - 1)));
      HttpResponse res;
      try {
        res = transport_->post(params_.endpoint, headers, body);
      } catch (const Error& e) {
        last_error = e.what();
        log(request, attempt, std::nullopt, last_error);
        continue;
      }
      log(request, attempt, res, {});
      if (res.status == 401 || res.status == 403)
        throw Error(Errc::auth_error, "endpoint rejected credentials (HTTP " + std::to_string(res.status) + ")");
      if (res.status == 429 || res.status >= 500) {
        last_error = "HTTP " + std::to_string(res.status);
        continue;
      }
      if (res.status < 200 || res.status >= 300)
        throw Error(Errc::transport_error, "HTTP " + std::to_string(res.status) + ": " + res.body);
      return extract_content(res.body);
    }
    throw Error(Errc::transport_error,
                "gave up after " + std::to_string(params_.max_retries + 1) + " attempts: " + last_error);
  }

 private:
  static std::string extract_content(const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw Error(Errc::malformed_response, "message content is not a string");
      return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::malformed_response, std::string("cannot read completion: ") + e.what());
    }
  }

  void log(const nlohmann::json& request, int attempt, const std::optional<HttpResponse>& res,
           const std::string& error) {
    if (!audit_) return;
    nlohmann::json rec = {{"request", request}, {"attempt", attempt}, {"endpoint", params_.endpoint}};
    if (res) {
      rec["status"] = res->status;
      rec["response"] = res->body;
    } else {
      rec["error"] = error;
    }
    audit_->write(rec);
  }

  LlmParams params_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<JsonlWriter> audit_;
  std::string token_;
};

}  // namespace swp::agents
