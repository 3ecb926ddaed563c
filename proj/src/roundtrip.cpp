#include "seqaug/roundtrip.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

std::string MockRoundTripClient::translate(const std::string& text, const std::string& from,
                                           const std::string& to) const {
  if (failing.contains(text)) throw TranslationError("mock transport failure for '" + text + "'");
  if (from == "en") return text;  // forward leg
  (void)to;
  if (auto it = sentence_map.find(text); it != sentence_map.end()) return it->second;
  auto tokens = split_whitespace(text);
  for (auto& t : tokens)
    if (auto it = token_map.find(t); it != token_map.end()) t = it->second;
  return join(tokens);
}

HttpClientConfig HttpClientConfig::from_env() {
  HttpClientConfig cfg;
  if (const char* e = std::getenv("SEQAUG_MT_ENDPOINT")) cfg.base_url = e;
  if (const char* t = std::getenv("SEQAUG_MT_TOKEN")) cfg.token = t;
  return cfg;
}

HttpRoundTripClient::HttpRoundTripClient(HttpClientConfig config) : config_(std::move(config)) {
  const auto& url = config_.base_url;
  auto scheme = url.find("://");
  if (url.empty() || scheme == std::string::npos)
    throw std::invalid_argument("round-trip endpoint must look like http://host[:port][/path]");
  auto slash = url.find('/', scheme + 3);
  scheme_host_port_ = url.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? std::string() : url.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpRoundTripClient::translate(const std::string& text, const std::string& from,
                                           const std::string& to) const {
  const nlohmann::json body = {{"q", text}, {"source", from}, {"target", to}};
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  int delay = config_.backoff_ms;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
    httplib::Client cli(scheme_host_port_);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    auto res = cli.Post(path_prefix_ + "/translate", headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw TranslationError("translation request rejected with status " + std::to_string(res->status));
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("translatedText").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TranslationError(std::string("malformed translation response: ") + e.what());
    }
  }
  throw TranslationError(last_error + " after " + std::to_string(config_.max_retries + 1) +
                         " attempt(s)");
}

RoundTripResult round_trip_augment(const RoundTripClient& client, std::span<const Sentence> informal,
                                   const SentenceScorer& formality_of, double sigma,
                                   const std::string& pivot, unsigned max_inflight) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("sigma must be in [0,1]");
  std::vector<std::optional<Sentence>> rewritten(informal.size());
  std::vector<std::string> errors(informal.size());
  parallel_for(informal.size(), std::max(1u, max_inflight), [&](std::size_t i) {
    try {
      rewritten[i] = tokenize(client.round_trip(informal[i].joined(), pivot));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  RoundTripResult result;
  std::vector<ParallelPair> pairs;
  std::vector<std::size_t> input_index;
  for (std::size_t i = 0; i < informal.size(); ++i) {
    if (!rewritten[i]) {
      result.failures.push_back({i, errors[i]});
      continue;
    }
    pairs.push_back({informal[i], *rewritten[i], Origin::augmented("f-dis"), 1.0});
    input_index.push_back(i);
  }
  auto filtered = formality_filter(pairs, formality_of, sigma);
  for (auto& d : filtered.decisions) d.index = input_index[d.index];
  result.decisions = std::move(filtered.decisions);
  result.corpus = std::move(filtered.retained);
  result.corpus.id = "f-dis";
  return result;
}

RoundTripResult round_trip_augment(const RoundTripClient& client, std::span<const Sentence> informal,
                                   const FormalityClassifier& clf, double sigma,
                                   const std::string& pivot, unsigned max_inflight) {
  return round_trip_augment(
      client, informal, [&clf](const Sentence& s) { return clf.prob(s); }, sigma, pivot,
      max_inflight);
}

}  // namespace seqaug
