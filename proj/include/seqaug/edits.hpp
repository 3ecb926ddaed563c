#pragma once

#include <span>
#include <string>
#include <vector>

#include "seqaug/corpus.hpp"

namespace seqaug {

enum class EditKind { insertion, deletion, substitution };

/// Replacement of source tokens [begin, end) by `target`. Insertions have begin == end.
struct EditOp {
  EditKind kind = EditKind::substitution;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<std::string> source;
  std::vector<std::string> target;

  bool operator==(const EditOp&) const = default;
  auto operator<=>(const EditOp& o) const {
    if (auto c = begin <=> o.begin; c != 0) return c;
    if (auto c = end <=> o.end; c != 0) return c;
    if (auto c = source <=> o.source; c != 0) return c;
    return target <=> o.target;
  }
};

using Tokens = std::vector<std::string>;

/// Builds an op, deriving the kind from which side is empty.
EditOp make_edit(std::size_t begin, std::size_t end, Tokens source, Tokens target);

/// Unit-cost Levenshtein alignment, one op per non-matching step. On cost ties the
/// backtrace prefers substitute, then delete, then insert. The op count equals the
/// edit distance.
std::vector<EditOp> extract_token_edits(const Tokens& source, const Tokens& target);

/// Merges touching ops (one ends where the next begins) into phrase-level ops.
std::vector<EditOp> merge_adjacent(const std::vector<EditOp>& ops);

/// extract_token_edits followed by merge_adjacent.
std::vector<EditOp> extract_edits(const Tokens& source, const Tokens& target);
std::vector<EditOp> extract_edits(const Sentence& source, const Sentence& target);

/// Applies sorted, non-overlapping ops to `source`.
Tokens apply_edits(const Tokens& source, std::span<const EditOp> ops);

/// Every minimum-cost alignment (as token-level ops), up to `cap` of them, in a
/// deterministic order. The first one equals extract_token_edits.
std::vector<std::vector<EditOp>> minimal_alignments(const Tokens& source, const Tokens& target,
                                                    std::size_t cap = 64);

std::size_t count_kind(std::span<const EditOp> ops, EditKind kind);

}  // namespace seqaug
