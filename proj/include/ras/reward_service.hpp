#pragma once

#include <string>
#include <vector>

#include "ras/metric.hpp"
#include "ras/tokenize.hpp"
#include "ras/types.hpp"

namespace httplib {
class Server;
}

namespace ras {

struct RewardItem {
  std::string id;
  std::string ref;
  std::string hyp;
};

struct RewardRequest {
  double alpha = kDefaultAlpha;
  std::vector<RewardItem> items;
};

struct ScoredItem {
  std::string id;
  bool ok = false;
  RasScore score;
  std::string error;  // "<Code>: message" when !ok
};

struct AdvantageGroup {
  std::string group_id;
  std::vector<double> rewards;
};

struct AdvantageRequest {
  std::vector<AdvantageGroup> groups;
};

struct GroupAdvantages {
  std::string group_id;
  std::vector<double> advantages;
  bool degenerate = false;  // zero-variance group, advantages forced to 0
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8750;
  double default_alpha = kDefaultAlpha;
  int64_t max_batch = 10000;
  size_t max_payload_bytes = 32ull << 20;
  TokenizeOptions tokenize;
};

// Scores the batch in request order. Item-level failures come back inline;
// only a malformed request as a whole is an error.
std::vector<ScoredItem> score_batch(const RewardRequest& req,
                                    const TokenizeOptions& opts = {});

// Group-relative advantages: (r - mean) / population std per group. Groups
// with std below 1e-8 return all zeros and are flagged degenerate.
std::vector<GroupAdvantages> group_advantages(const AdvantageRequest& req);

// JSON body handlers backing the HTTP endpoints; also used directly by
// tests. Both throw Error(MalformedRequest) on bad input.
std::string handle_score_json(const std::string& body, const ServiceConfig& cfg);
std::string handle_advantages_json(const std::string& body, const ServiceConfig& cfg);
std::string health_json(const ServiceConfig& cfg);

void register_routes(httplib::Server& server, const ServiceConfig& cfg);

// Blocks until the server stops (stop_server() or listen failure).
int run_server(const ServiceConfig& cfg);
void stop_server();  // async-signal-usable stop for the running server

}  // namespace ras
