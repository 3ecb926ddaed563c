#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqaug/corpus.hpp"

namespace seqaug {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

/// Anything that can score a token given its left context, in natural log.
/// The context is the full history; implementations truncate it themselves.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual double log_prob(std::string_view token, std::span<const std::string> context) const = 0;
};

/// Backoff n-gram model. Trained models are interpolated Kneser-Ney stored in
/// backoff form: every seen n-gram carries its full interpolated probability and
/// every seen context carries its interpolation weight, so scoring through the
/// ARPA tables reproduces the interpolated estimate exactly.
class NgramModel : public LanguageModel {
 public:
  struct Entry {
    double log_prob = 0.0;     // natural log
    double log_backoff = 0.0;  // natural log, 0 when the n-gram is never a context
    bool operator==(const Entry&) const = default;
  };
  using Key = std::vector<int>;

  NgramModel() = default;

  int order() const { return order_; }
  double discount() const { return discount_; }

  double log_prob(std::string_view token, std::span<const std::string> context) const override;
  double prob(std::string_view token, std::span<const std::string> context) const;

  /// Predictable events: every vocabulary type except <s>, including </s> and <unk>.
  std::vector<std::string> predictable_vocab() const;
  /// Every context (up to order-1 tokens) that occurs as a prefix in the tables.
  std::vector<std::vector<std::string>> contexts() const;
  std::size_t ngram_count(int k) const { return tables_.at(k - 1).size(); }

  void save_arpa(std::ostream& out) const;
  void save_binary(std::ostream& out) const;
  static NgramModel load_arpa(std::istream& in);
  static NgramModel load_binary(std::istream& in);

  bool operator==(const NgramModel& o) const {
    return order_ == o.order_ && discount_ == o.discount_ && vocab_ == o.vocab_ && tables_ == o.tables_;
  }

 private:
  friend NgramModel train_lm(const std::vector<Sentence>& sentences, int order, double discount);

  int intern(const std::string& token);
  int lookup(std::string_view token) const;

  int order_ = 0;
  double discount_ = 0.0;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::map<Key, Entry>> tables_;  // tables_[k-1] holds k-grams
};

/// Interpolated Kneser-Ney with a single discount. Sentences are padded with
/// <s> ... </s>. Throws DataError("empty LM corpus") when no sentence is given.
NgramModel train_lm(const std::vector<Sentence>& sentences, int order = 5, double discount = 0.75);

/// H(x) in nats over the tokens plus the end-of-sentence event (denominator |x|+1).
double entropy(const LanguageModel& lm, const Sentence& s);
/// f(x) = 1 / (1 + H(x)).
double fluency(const LanguageModel& lm, const Sentence& s);
inline double fluency_from_entropy(double h) { return 1.0 / (1.0 + h); }

/// Writes ARPA text, or the binary cache when `binary` is set.
void save_lm(const NgramModel& model, const std::filesystem::path& path, bool binary = false);
/// Detects binary cache vs ARPA by the file header.
NgramModel load_lm(const std::filesystem::path& path);

}  // namespace seqaug
