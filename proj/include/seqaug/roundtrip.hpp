#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "seqaug/augmentor.hpp"
#include "seqaug/discriminator.hpp"

namespace seqaug {

/// Transport or service failure from a translation backend.
class TranslationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RoundTripClient {
 public:
  virtual ~RoundTripClient() = default;
  /// Must be safe to call concurrently. Throws TranslationError on failure.
  virtual std::string translate(const std::string& text, const std::string& from,
                                const std::string& to) const = 0;

  std::string round_trip(const std::string& text, const std::string& pivot,
                         const std::string& lang = "en") const {
    return translate(translate(text, lang, pivot), pivot, lang);
  }
};

/// Deterministic offline client. The forward leg is the identity; the return leg
/// rewrites whole sentences from `sentence_map`, then single tokens from
/// `token_map`. Sentences listed in `failing` raise TranslationError.
class MockRoundTripClient : public RoundTripClient {
 public:
  std::map<std::string, std::string> sentence_map;
  std::map<std::string, std::string> token_map;
  std::set<std::string> failing;

  std::string translate(const std::string& text, const std::string& from,
                        const std::string& to) const override;
};

struct HttpClientConfig {
  std::string base_url;      // scheme://host[:port][/prefix]
  std::string token;         // sent as "Authorization: Bearer <token>" when nonempty
  int timeout_ms = 10000;    // per request
  int max_retries = 3;       // extra attempts after the first
  int backoff_ms = 200;      // doubled after every failed attempt

  /// Reads SEQAUG_MT_ENDPOINT and SEQAUG_MT_TOKEN.
  static HttpClientConfig from_env();
};

/// POST {base_url}/translate with {"q","source","target"} and reads
/// {"translatedText"} back. Network errors and 5xx responses are retried.
class HttpRoundTripClient : public RoundTripClient {
 public:
  explicit HttpRoundTripClient(HttpClientConfig config);
  std::string translate(const std::string& text, const std::string& from,
                        const std::string& to) const override;

 private:
  HttpClientConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct RoundTripResult {
  Corpus corpus;                           // retained pairs, tagged augmented:f-dis
  std::vector<FilterDecision> decisions;   // only for sentences that translated
  std::vector<SkippedItem> failures;       // transport errors, by input index
};

/// Builds (s, round_trip(s)) for every informal sentence and keeps the pairs that
/// pass the formality filter at `sigma`. At most `max_inflight` requests run at once.
RoundTripResult round_trip_augment(const RoundTripClient& client, std::span<const Sentence> informal,
                                   const SentenceScorer& formality_of, double sigma,
                                   const std::string& pivot = "zh", unsigned max_inflight = 4);
RoundTripResult round_trip_augment(const RoundTripClient& client, std::span<const Sentence> informal,
                                   const FormalityClassifier& clf, double sigma,
                                   const std::string& pivot = "zh", unsigned max_inflight = 4);

}  // namespace seqaug
