#include "ras/reward_service.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"

#include "ras/jsonw.hpp"
#include "ras/version.hpp"

namespace ras {

std::vector<ScoredItem> score_batch(const RewardRequest& req, const TokenizeOptions& opts) {
  if (req.items.empty()) fail(Errc::malformed_request, "request has no items");
  {
    std::unordered_set<std::string> seen;
    for (const RewardItem& item : req.items)
      if (!seen.insert(item.id).second)
        fail(Errc::malformed_request, "duplicate item id " + item.id);
  }
  const AlphaParam alpha = [&] {
    try {
      return AlphaParam(req.alpha);
    } catch (const Error& e) {
      fail(Errc::malformed_request, e.what());
    }
  }();

  std::vector<ScoredItem> out;
  out.reserve(req.items.size());
  for (const RewardItem& item : req.items) {
    ScoredItem scored;
    scored.id = item.id;
    try {
      scored.score =
          score_utterance(tokenize(item.ref, opts), tokenize(item.hyp, opts), alpha);
      scored.ok = true;
    } catch (const Error& e) {
      scored.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
    out.push_back(std::move(scored));
  }
  return out;
}

std::vector<GroupAdvantages> group_advantages(const AdvantageRequest& req) {
  if (req.groups.empty()) fail(Errc::malformed_request, "request has no groups");
  std::vector<GroupAdvantages> out;
  out.reserve(req.groups.size());
  for (const AdvantageGroup& g : req.groups) {
    if (g.rewards.empty()) fail(Errc::empty_group, "group " + g.group_id + " is empty");
    const auto n = static_cast<double>(g.rewards.size());
    double mean = 0.0;
    for (double r : g.rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : g.rewards) var += (r - mean) * (r - mean);
    const double std_dev = std::sqrt(var / n);

    GroupAdvantages ga;
    ga.group_id = g.group_id;
    ga.advantages.resize(g.rewards.size(), 0.0);
    if (std_dev < 1e-8) {
      ga.degenerate = true;  // identical samples are routine in RL loops
    } else {
      for (size_t i = 0; i < g.rewards.size(); ++i)
        ga.advantages[i] = (g.rewards[i] - mean) / std_dev;
    }
    out.push_back(std::move(ga));
  }
  return out;
}

namespace {

nlohmann::json parse_body(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_request, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string handle_score_json(const std::string& body, const ServiceConfig& cfg) {
  const nlohmann::json doc = parse_body(body);
  if (!doc.is_object() || !doc.contains("items") || !doc.at("items").is_array())
    fail(Errc::malformed_request, "expected {\"alpha\"?, \"items\": [...]}");

  RewardRequest req;
  req.alpha = cfg.default_alpha;
  if (doc.contains("alpha")) {
    if (!doc.at("alpha").is_number()) fail(Errc::malformed_request, "alpha must be a number");
    req.alpha = doc.at("alpha").get<double>();
  }
  if (static_cast<int64_t>(doc.at("items").size()) > cfg.max_batch)
    fail(Errc::malformed_request,
         "batch exceeds the configured maximum of " + std::to_string(cfg.max_batch));
  for (const auto& item : doc.at("items")) {
    if (!item.is_object() || !item.contains("id") || !item.at("id").is_string() ||
        !item.contains("ref") || !item.at("ref").is_string() || !item.contains("hyp") ||
        !item.at("hyp").is_string())
      fail(Errc::malformed_request, "each item needs string fields id, ref, hyp");
    req.items.push_back({item.at("id").get<std::string>(), item.at("ref").get<std::string>(),
                         item.at("hyp").get<std::string>()});
  }

  const std::vector<ScoredItem> scored = score_batch(req, cfg.tokenize);
  std::string out = "{\"alpha\":" + fixed6(req.alpha) + ",\"results\":[";
  for (size_t i = 0; i < scored.size(); ++i) {
    const ScoredItem& s = scored[i];
    if (i) out += ',';
    if (s.ok) {
      out += "{\"id\":" + json_str(s.id) + ",\"ras\":" + fixed6(s.score.ras) +
             ",\"usefulness\":" + fixed6(s.score.usefulness) +
             ",\"cost\":" + fixed6(s.score.cost) + "}";
    } else {
      out += "{\"id\":" + json_str(s.id) + ",\"error\":" + json_str(s.error) + "}";
    }
  }
  out += "]}";
  return out;
}

std::string handle_advantages_json(const std::string& body, const ServiceConfig& cfg) {
  (void)cfg;
  const nlohmann::json doc = parse_body(body);
  if (!doc.is_object() || !doc.contains("groups") || !doc.at("groups").is_array())
    fail(Errc::malformed_request, "expected {\"groups\": [...]}");

  AdvantageRequest req;
  for (const auto& g : doc.at("groups")) {
    if (!g.is_object() || !g.contains("group_id") || !g.at("group_id").is_string() ||
        !g.contains("rewards") || !g.at("rewards").is_array())
      fail(Errc::malformed_request, "each group needs group_id and a rewards array");
    AdvantageGroup group;
    group.group_id = g.at("group_id").get<std::string>();
    for (const auto& r : g.at("rewards")) {
      if (!r.is_number()) fail(Errc::malformed_request, "rewards must be numbers");
      group.rewards.push_back(r.get<double>());
    }
    req.groups.push_back(std::move(group));
  }

  const std::vector<GroupAdvantages> groups = group_advantages(req);
  std::string out = "{\"groups\":[";
  for (size_t i = 0; i < groups.size(); ++i) {
    const GroupAdvantages& g = groups[i];
    if (i) out += ',';
    out += "{\"group_id\":" + json_str(g.group_id) + ",\"advantages\":[";
    for (size_t k = 0; k < g.advantages.size(); ++k) {
      if (k) out += ',';
      out += fixed6(g.advantages[k]);
    }
    out += "],\"degenerate\":";
    out += g.degenerate ? "true" : "false";
    out += "}";
  }
  out += "]}";
  return out;
}

std::string health_json(const ServiceConfig& cfg) {
  return "{\"status\":\"ok\",\"version\":\"" + std::string(kVersion) +
         "\",\"default_alpha\":" + fixed6(cfg.default_alpha) + "}";
}

namespace {

void reply_json(httplib::Response& res, const std::string& body) {
  res.set_content(body, "application/json");
}

void reply_error(httplib::Response& res, int status, const Error& e) {
  res.status = status;
  reply_json(res, "{\"error\":" + json_str(std::string(errc_name(e.code())) + ": " + e.what()) +
                      "}");
}

std::atomic<httplib::Server*> g_server{nullptr};

}  // namespace

void register_routes(httplib::Server& server, const ServiceConfig& cfg) {
  server.set_payload_max_length(cfg.max_payload_bytes);
  server.Get("/health", [cfg](const httplib::Request&, httplib::Response& res) {
    reply_json(res, health_json(cfg));
  });
  server.Post("/score", [cfg](const httplib::Request& req, httplib::Response& res) {
    try {
      reply_json(res, handle_score_json(req.body, cfg));
    } catch (const Error& e) {
      reply_error(res, 400, e);
    }
  });
  server.Post("/advantages", [cfg](const httplib::Request& req, httplib::Response& res) {
    try {
      reply_json(res, handle_advantages_json(req.body, cfg));
    } catch (const Error& e) {
      reply_error(res, 400, e);
    }
  });
}

int run_server(const ServiceConfig& cfg) {
  httplib::Server server;
  register_routes(server, cfg);
  g_server.store(&server);
  std::fprintf(stderr, "ras serve: listening on http://%s:%d (alpha %s)\n", cfg.host.c_str(),
               cfg.port, fixed6(cfg.default_alpha).c_str());
  const bool ok = server.listen(cfg.host, cfg.port);  // true on graceful stop()
  g_server.store(nullptr);
  if (!ok) {
    std::fprintf(stderr, "ras serve: failed to bind %s:%d\n", cfg.host.c_str(), cfg.port);
    return 1;
  }
  return 0;
}

void stop_server() {
  if (httplib::Server* s = g_server.load()) s->stop();
}

}  // namespace ras
