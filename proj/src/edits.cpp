#include "seqaug/edits.hpp"

#include <algorithm>
#include <stdexcept>

namespace seqaug {

namespace {

using Table = std::vector<std::vector<std::size_t>>;

Table distance_table(const Tokens& s, const Tokens& t) {
  Table d(s.size() + 1, std::vector<std::size_t>(t.size() + 1));
  for (std::size_t i = 0; i <= s.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= t.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= s.size(); ++i)
    for (std::size_t j = 1; j <= t.size(); ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1), d[i - 1][j] + 1,
                          d[i][j - 1] + 1});
  return d;
}

struct Walker {
  const Tokens& s;
  const Tokens& t;
  const Table& d;
  std::size_t cap;
  std::vector<std::vector<EditOp>> paths;
  std::vector<EditOp> reversed;

  void walk(std::size_t i, std::size_t j) {
    if (paths.size() >= cap) return;
    if (i == 0 && j == 0) {
      paths.emplace_back(reversed.rbegin(), reversed.rend());
      return;
    }
    if (i > 0 && j > 0) {
      const bool same = s[i - 1] == t[j - 1];
      if (d[i][j] == d[i - 1][j - 1] + (same ? 0 : 1)) {
        if (!same) reversed.push_back(make_edit(i - 1, i, {s[i - 1]}, {t[j - 1]}));
        walk(i - 1, j - 1);
        if (!same) reversed.pop_back();
      }
    }
    if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      reversed.push_back(make_edit(i - 1, i, {s[i - 1]}, {}));
      walk(i - 1, j);
      reversed.pop_back();
    }
    if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      reversed.push_back(make_edit(i, i, {}, {t[j - 1]}));
      walk(i, j - 1);
      reversed.pop_back();
    }
  }
};

}  // namespace

EditOp make_edit(std::size_t begin, std::size_t end, Tokens source, Tokens target) {
  EditOp op;
  op.begin = begin;
  op.end = end;
  op.kind = source.empty() ? EditKind::insertion
            : target.empty() ? EditKind::deletion
                             : EditKind::substitution;
  op.source = std::move(source);
  op.target = std::move(target);
  return op;
}

std::vector<EditOp> extract_token_edits(const Tokens& source, const Tokens& target) {
  auto d = distance_table(source, target);
  std::vector<EditOp> rev;
  std::size_t i = source.size(), j = target.size();
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = source[i - 1] == target[j - 1];
      if (d[i][j] == d[i - 1][j - 1] + (same ? 0 : 1)) {
        if (!same) rev.push_back(make_edit(i - 1, i, {source[i - 1]}, {target[j - 1]}));
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      rev.push_back(make_edit(i - 1, i, {source[i - 1]}, {}));
      --i;
      continue;
    }
    rev.push_back(make_edit(i, i, {}, {target[j - 1]}));
    --j;
  }
  return {rev.rbegin(), rev.rend()};
}

std::vector<EditOp> merge_adjacent(const std::vector<EditOp>& ops) {
  std::vector<EditOp> out;
  for (const auto& op : ops) {
    if (!out.empty() && out.back().end == op.begin) {
      auto& last = out.back();
      Tokens src = last.source, tgt = last.target;
      src.insert(src.end(), op.source.begin(), op.source.end());
      tgt.insert(tgt.end(), op.target.begin(), op.target.end());
      last = make_edit(last.begin, op.end, std::move(src), std::move(tgt));
    } else {
      out.push_back(op);
    }
  }
  return out;
}

std::vector<EditOp> extract_edits(const Tokens& source, const Tokens& target) {
  return merge_adjacent(extract_token_edits(source, target));
}

std::vector<EditOp> extract_edits(const Sentence& source, const Sentence& target) {
  return extract_edits(source.tokens, target.tokens);
}

Tokens apply_edits(const Tokens& source, std::span<const EditOp> ops) {
  Tokens out;
  std::size_t pos = 0;
  for (const auto& op : ops) {
    if (op.begin < pos || op.end < op.begin || op.end > source.size())
      throw std::invalid_argument("apply_edits: ops overlap or fall outside the source");
    out.insert(out.end(), source.begin() + pos, source.begin() + op.begin);
    out.insert(out.end(), op.target.begin(), op.target.end());
    pos = op.end;
  }
  out.insert(out.end(), source.begin() + pos, source.end());
  return out;
}

std::vector<std::vector<EditOp>> minimal_alignments(const Tokens& source, const Tokens& target,
                                                    std::size_t cap) {
  auto d = distance_table(source, target);
  Walker w{source, target, d, std::max<std::size_t>(cap, 1), {}, {}};
  w.walk(source.size(), target.size());
  return w.paths;
}

std::size_t count_kind(std::span<const EditOp> ops, EditKind kind) {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [kind](const EditOp& op) { return op.kind == kind; }));
}

}  // namespace seqaug
