#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "seqaug/corpus.hpp"

namespace seqaug {

/// Byte-pair-encoding merge table shared between source and target sides.
struct BpeModel {
  using Merge = std::pair<std::string, std::string>;

  std::vector<Merge> merges;  // priority order, first = most frequent
  std::size_t vocab_size_target = 0;
  std::string marker = "@@";  // suffix on every non-final piece of a word

  bool operator==(const BpeModel&) const = default;
};

/// Greedy most-frequent-pair learning over the word frequency table of both
/// corpus sides. Ties go to the lexicographically smallest pair. Stops early
/// once no word has two symbols left.
BpeModel learn_bpe(const Corpus& corpus, std::size_t num_merges);
BpeModel learn_bpe(const std::vector<std::pair<std::string, std::size_t>>& word_counts,
                   std::size_t num_merges);

std::vector<std::string> segment_word(const BpeModel& model, const std::string& word);
Sentence apply_bpe(const BpeModel& model, const Sentence& s);

/// Joins marker-suffixed pieces back into words. Inverse of apply_bpe for any
/// token that does not itself end in the marker.
std::vector<std::string> undo_bpe(const std::vector<std::string>& pieces,
                                  const std::string& marker = "@@");

void save_bpe(const BpeModel& model, std::ostream& out);
void save_bpe(const BpeModel& model, const std::filesystem::path& path);
BpeModel load_bpe(std::istream& in);
BpeModel load_bpe(const std::filesystem::path& path);

}  // namespace seqaug
