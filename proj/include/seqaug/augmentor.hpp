#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seqaug/corpus.hpp"
#include "seqaug/discriminator.hpp"
#include "seqaug/rewriter.hpp"

namespace seqaug {

/// Produces up to n source-side candidates for a target-side sentence, best first.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::vector<Sentence> generate(const Sentence& target, std::size_t n) const = 0;
};

/// Back-translation generator backed by a rewriter trained target -> source.
class RewriterGenerator : public Generator {
 public:
  RewriterGenerator(RuleTable table, DecodeConfig config, const LanguageModel* lm = nullptr)
      : table_(std::move(table)), config_(config), lm_(lm) {}

  /// Learns the reverse-direction table from gold pairs (source and target swapped).
  static RewriterGenerator from_gold(const Corpus& gold, DecodeConfig config,
                                     RuleOptions options = {});

  std::vector<Sentence> generate(const Sentence& target, std::size_t n) const override;

 private:
  RuleTable table_;
  DecodeConfig config_;
  const LanguageModel* lm_;
};

struct SkippedItem {
  std::size_t index = 0;
  std::string reason;
};

struct AugmentResult {
  Corpus corpus;
  std::vector<SkippedItem> skipped;  // per-sentence failures; the batch keeps going
};

/// For each target, asks the generator for n candidates and keeps the first one
/// that is strictly less fluent than the target. Output pairs are tagged
/// augmented:bt.
AugmentResult back_translate(const Generator& generator, std::span<const Sentence> targets,
                             std::size_t n, const SentenceScorer& fluency_of, unsigned threads = 1);
AugmentResult back_translate(const Generator& generator, std::span<const Sentence> targets,
                             std::size_t n, const LanguageModel& lm, unsigned threads = 1);

struct NoiserConfig {
  double article_drop = 0.0;
  double preposition_substitution = 0.0;
  double noun_number = 0.0;
  double verb_form = 0.0;
  double adjacent_swap = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Applies the five noise rules token by token. Pairs are (noised, correct),
/// tagged augmented:synth.
Corpus synthesize_errors(const NoiserConfig& noiser, std::span<const Sentence> correct);

/// Re-tags every pair as task:<task_name>. Throws DataError on an empty side.
Corpus ingest_multitask(const Corpus& other_task_corpus, const std::string& task_name);

/// Uniform sample of |orig| augmented pairs without replacement, kept in input order.
Corpus down_sample(const Corpus& aug, const Corpus& orig, std::uint64_t seed);
/// Original data repeated ceil(|aug|/|orig|) times, truncated to exactly |aug|.
Corpus up_sample(const Corpus& orig, const Corpus& aug);

enum class SliceRole { gold, augmented };

struct SliceSpec {
  std::string name;
  std::string path;
  SliceRole role = SliceRole::augmented;
  double weight = 1.0;
  Corpus corpus;
};

struct ManifestSlice {
  std::string name;
  std::string path;
  SliceRole role = SliceRole::augmented;
  double weight = 1.0;
  std::size_t size = 0;
  std::string checksum;

  bool operator==(const ManifestSlice&) const = default;
};

struct DataManifest {
  std::vector<ManifestSlice> slices;

  const ManifestSlice& gold() const;
  bool operator==(const DataManifest&) const = default;
};

std::string corpus_checksum(const Corpus& corpus);
void validate_manifest(const DataManifest& manifest);
/// Checks the single-gold rule and positive weights, records sizes and checksums.
DataManifest build_manifest(std::span<const SliceSpec> slices);

void save_manifest(const DataManifest& manifest, const std::filesystem::path& path);
DataManifest load_manifest(const std::filesystem::path& path);
std::string to_string(SliceRole role);
SliceRole parse_slice_role(const std::string& text);

/// Gold and augmented partitions after applying slice weights to pair weights.
struct TrainingData {
  Corpus gold;
  Corpus augmented;
};

/// Reads every slice (paths relative to base_dir) and verifies sizes and checksums.
TrainingData load_training_data(const DataManifest& manifest,
                                const std::filesystem::path& base_dir);
TrainingData assemble_training_data(const DataManifest& manifest,
                                    std::span<const Corpus> slice_corpora);

}  // namespace seqaug
