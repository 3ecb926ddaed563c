#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace seqaug {

/// A sentence as raw text plus its token sequence.
///
/// `raw` is kept verbatim; `tokens` is the tokenized form. Sentences built from
/// tokens (decoder output, noised text) use the space-joined tokens as `raw`.
struct Sentence {
  std::string raw;
  std::vector<std::string> tokens;

  static Sentence from_tokens(std::vector<std::string> toks);

  std::size_t length() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::string joined() const;

  bool operator==(const Sentence&) const = default;
};

/// Where a pair came from. Serialized as `gold`, `augmented:<method>` or `task:<name>`.
struct Origin {
  enum class Kind { gold, augmented, task };

  Kind kind = Kind::gold;
  std::string name;

  static Origin gold() { return {}; }
  static Origin augmented(std::string method) { return {Kind::augmented, std::move(method)}; }
  static Origin task(std::string task_name) { return {Kind::task, std::move(task_name)}; }

  static Origin parse(std::string_view text);
  std::string str() const;

  bool operator==(const Origin&) const = default;
};

struct ParallelPair {
  Sentence source;
  Sentence target;
  Origin origin;
  double weight = 1.0;

  bool operator==(const ParallelPair&) const = default;
};

/// Builds a pair from raw source/target text, tokenizing both sides.
ParallelPair make_pair(std::string_view source, std::string_view target,
                       Origin origin = Origin::gold(), double weight = 1.0);

struct Corpus {
  std::string id;
  std::vector<ParallelPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  bool operator==(const Corpus&) const = default;
};

/// Detaches . , ! ? ; : " ( ) from word starts and ends, then splits on whitespace.
/// Deterministic and idempotent on its own output. No case folding.
Sentence tokenize(std::string_view raw);

enum class CorpusFormat { tsv, jsonl };

/// Picks jsonl for `.jsonl`/`.json` extensions and tsv otherwise.
CorpusFormat format_for_path(const std::filesystem::path& path);

Corpus read_corpus(std::istream& in, CorpusFormat format, std::string id = {});
Corpus read_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus read_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out, CorpusFormat format);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// One sentence per line, tokenized. Blank lines are kept as empty sentences.
std::vector<Sentence> read_sentences(const std::filesystem::path& path);
std::vector<Sentence> read_sentences(std::istream& in);
void write_sentences(const std::vector<Sentence>& sentences, std::ostream& out);

/// Canonical serialization used for checksums (TSV, full precision weights).
std::string canonical_text(const Corpus& corpus);

}  // namespace seqaug
