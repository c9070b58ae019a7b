#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>

#include "swp/core/http.hpp"
#include <json.hpp>

#include "swp/agents/human_bridge.hpp"
#include "swp/chain/coordinator.hpp"
#include "swp/core/error.hpp"
#include "swp/core/jsonl.hpp"
#include "swp/ratings/records.hpp"

namespace swp::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path state_dir = "state";
  std::filesystem::path instructions_dir;
  chain::ExperimentConfig experiment;

  static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& default_instructions) {
    ServiceConfig c;
    try {
      const auto s = j.value("service", nlohmann::json::object());
      c.host = s.value("host", c.host);
      c.port = s.value("port", c.port);
      c.state_dir = s.value("state_dir", c.state_dir.string());
      c.instructions_dir = s.value("instructions_dir", default_instructions.string());
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::invalid_config, std::string("service: ") + e.what());
    }
    c.experiment = chain::ExperimentConfig::from_json(j.value("experiment", nlohmann::json::object()));
    if (c.port < 0 || c.port > 65535) throw Error(Errc::invalid_config, "port out of range");
    return c;
  }
};

// File names inside the state directory. Every accepted transition is
// appended (and flushed) before the HTTP response goes out.
inline constexpr const char* kTrialLog = "trials.jsonl";
inline constexpr const char* kRatingLog = "ratings.jsonl";
inline constexpr const char* kSimilarityLog = "similarity.jsonl";
inline constexpr const char* kFeatureLog = "features.jsonl";

inline int http_status(Errc c) {
  switch (c) {
    case Errc::unknown_trial:
    case Errc::unknown_item: return 404;
    case Errc::trial_not_open:
    case Errc::chain_complete: return 409;
    case Errc::invalid_item:
    case Errc::schema_error:
    case Errc::parse_error: return 400;
    default: return 500;
  }
}

// The trial service: serves human participants from a chain-engine
// Coordinator and records judgment ratings. Refuses to start on a log it
// cannot replay; a restart resumes exactly where the logs end.
class TrialService {
 public:
  TrialService(ServiceConfig cfg, std::shared_ptr<const validation::Lexicons> lexicons) : cfg_(std::move(cfg)) {
    if (cfg_.experiment.domain != Domain::human)
      throw Error(Errc::invalid_config, "serve needs an experiment with domain \"human\"");
    std::filesystem::create_directories(cfg_.state_dir);
    coord_ = chain::Coordinator::open(cfg_.experiment, std::move(lexicons), cfg_.state_dir / kTrialLog);
    bridge_ = std::make_unique<agents::HumanBridge>(coord_);
    // reading the rating logs validates them before anything is served
    if (std::filesystem::exists(cfg_.state_dir / kRatingLog)) ratings::load_ratings(cfg_.state_dir / kRatingLog);
    if (std::filesystem::exists(cfg_.state_dir / kSimilarityLog))
      ratings::load_similarities(cfg_.state_dir / kSimilarityLog);
    if (std::filesystem::exists(cfg_.state_dir / kFeatureLog)) ratings::load_features(cfg_.state_dir / kFeatureLog);
    rating_log_ = std::make_shared<JsonlWriter>(cfg_.state_dir / kRatingLog);
    similarity_log_ = std::make_shared<JsonlWriter>(cfg_.state_dir / kSimilarityLog);
    feature_log_ = std::make_shared<JsonlWriter>(cfg_.state_dir / kFeatureLog);
    // httplib's default also sets SO_REUSEPORT, which would let a second
    // instance share the port silently
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    routes();
  }

  ~TrialService() { stop(); }
  TrialService(const TrialService&) = delete;
  TrialService& operator=(const TrialService&) = delete;

  // Binds and serves on a background thread. Returns the bound port.
  int start() {
    if (thread_.joinable()) return port_;
    if (cfg_.port == 0) {
      port_ = server_.bind_to_any_port(cfg_.host);
      if (port_ < 0) throw Error(Errc::port_in_use, "no free port on " + cfg_.host);
    } else {
      if (!server_.bind_to_port(cfg_.host, cfg_.port))
        throw Error(Errc::port_in_use, cfg_.host + ":" + std::to_string(cfg_.port) + " is not available");
      port_ = cfg_.port;
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  // Stops accepting connections and waits for in-flight handlers. State is
  // already on disk: each transition was flushed when it happened.
  void stop() {
    if (!thread_.joinable()) return;
    server_.stop();
    thread_.join();
  }

  int port() const noexcept { return port_; }
  chain::Coordinator& coordinator() noexcept { return *coord_; }
  const ServiceConfig& config() const noexcept { return cfg_; }

 private:
  static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, status, {{"error", code}, {"message", message}});
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    try {
      auto j = nlohmann::json::parse(req.body);
      if (!j.is_object()) throw Error(Errc::parse_error, "request body must be a JSON object");
      return j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, std::string("request body: ") + e.what());
    }
  }

  // Runs `fn`, turning library errors into JSON error responses.
  template <typename Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  }

  nlohmann::json progress(const std::string& participant) const {
    return coord_->inspect([&](const chain::Experiment& e) {
      auto it = e.ledger().find(participant);
      const std::size_t done = it == e.ledger().end() ? 0 : it->second.accepted;
      return nlohmann::json{{"completed", done}, {"quota", e.agent_quota(participant)}};
    });
  }

  static nlohmann::json trial_payload(const chain::Trial& t) {
    nlohmann::json j = {{"trial_id", t.trial_id},
                        {"chain_id", t.chain_id},
                        {"kind", std::string(to_string(t.kind))},
                        {"prompt", item_text(t.prompt)},
                        {"iteration", t.iteration},
                        {"attempts", t.attempts}};
    if (t.rejection_reason)
      j["last_rejection"] = {{"kind", std::string(validation::to_string(t.rejection_reason->kind))},
                             {"detail", t.rejection_reason->detail}};
    return j;
  }

  void routes() {
    server_.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        const auto snap = coord_->inspect([](const chain::Experiment& e) {
          return nlohmann::json{{"status", "ok"},
                                {"experiment_id", e.config().experiment_id},
                                {"chains", e.chains().size()},
                                {"accepted_trials", e.accepted_trials()},
                                {"complete", e.complete()}};
        });
        send_json(res, 200, snap);
      });
    });

    server_.Get("/api/participant/:id/next-trial", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto participant = req.path_params.at("id");
        std::optional<chain::Trial> trial;
        try {
          trial = bridge_->next_trial(participant);
        } catch (const Error& e) {
          if (e.code() != Errc::quota_exhausted) throw;
          send_json(res, 200, {{"state", "done"}, {"progress", progress(participant)}});
          return;
        }
        if (!trial) {
          const bool finished = coord_->complete();
          send_json(res, 200, {{"state", finished ? "done" : "waiting"}, {"progress", progress(participant)}});
          return;
        }
        send_json(res, 200, {{"state", "trial"}, {"trial", trial_payload(*trial)}, {"progress", progress(participant)}});
      });
    });

    server_.Post("/api/trial/:id/response", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto trial_id = req.path_params.at("id");
        const auto body = parse_body(req);
        if (!body.contains("response") || !body["response"].is_string())
          throw Error(Errc::parse_error, "body needs a string field 'response'");
        const auto t = coord_->trial(trial_id);
        if (body.contains("participant_id") && body["participant_id"] != t.agent_id) {
          send_error(res, 403, "wrong-participant", "trial " + trial_id + " belongs to another participant");
          return;
        }
        const auto out = bridge_->submit(trial_id, body["response"].get<std::string>());
        if (out.accepted) {
          send_json(res, 200, {{"accepted", true}, {"progress", progress(t.agent_id)}});
        } else {
          send_json(res, 422, {{"accepted", false},
                               {"kind", std::string(validation::to_string(out.rejection->kind))},
                               {"detail", out.rejection->detail}});
        }
      });
    });

    auto record_route = [this](const char* path, auto parse, std::shared_ptr<JsonlWriter>* log) {
      server_.Post(path, [this, parse, log](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
          const auto body = parse_body(req);
          const auto rec = [&] {
            try {
              return parse(body);
            } catch (const Error& e) {
              throw Error(Errc::invalid_item, e.what());
            }
          }();
          (*log)->write(ratings::to_json(rec));
          send_json(res, 201, {{"recorded", true}});
        });
      });
    };
    record_route("/api/rating", ratings::rating_from_json, &rating_log_);
    record_route("/api/similarity", ratings::similarity_from_json, &similarity_log_);
    record_route("/api/feature-rating", ratings::feature_from_json, &feature_log_);

    server_.Get("/api/instructions/:kind", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto kind = req.path_params.at("kind");
        static const std::regex ok("[a-z][a-z0-9-]*");
        const auto file = cfg_.instructions_dir / (kind + ".txt");
        std::ifstream in(file);
        if (!std::regex_match(kind, ok) || !in) {
          send_error(res, 404, "unknown-experiment-kind", "no instructions for '" + kind + "'");
          return;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        send_json(res, 200, {{"kind", kind}, {"text", ss.str()}});
      });
    });
  }

  ServiceConfig cfg_;
  std::shared_ptr<chain::Coordinator> coord_;
  std::unique_ptr<agents::HumanBridge> bridge_;
  std::shared_ptr<JsonlWriter> rating_log_, similarity_log_, feature_log_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace swp::service
