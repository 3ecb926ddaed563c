#include "seqaug/bpe.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "seqaug/util.hpp"

namespace seqaug {

namespace {

// Splits a word into UTF-8 code points so merges never cut a multibyte character.
std::vector<std::string> code_points(const std::string& word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, word.size() - i);
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

void merge_in_place(std::vector<std::string>& symbols, const BpeModel::Merge& m) {
  std::vector<std::string> merged;
  merged.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == m.first && symbols[i + 1] == m.second) {
      merged.push_back(symbols[i] + symbols[i + 1]);
      ++i;
    } else {
      merged.push_back(symbols[i]);
    }
  }
  symbols = std::move(merged);
}

}  // namespace

BpeModel learn_bpe(const std::vector<std::pair<std::string, std::size_t>>& word_counts,
                   std::size_t num_merges) {
  BpeModel model;
  model.vocab_size_target = num_merges;
  std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
  words.reserve(word_counts.size());
  for (const auto& [w, c] : word_counts) words.emplace_back(code_points(w), c);

  while (model.merges.size() < num_merges) {
    std::map<BpeModel::Merge, std::size_t> pair_counts;
    for (const auto& [symbols, count] : words)
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
        pair_counts[{symbols[i], symbols[i + 1]}] += count;
    if (pair_counts.empty()) break;
    // std::map iterates in lexicographic order, so the first maximum wins ties
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
      if (it->second > best->second) best = it;
    model.merges.push_back(best->first);
    for (auto& [symbols, count] : words) merge_in_place(symbols, best->first);
  }
  return model;
}

BpeModel learn_bpe(const Corpus& corpus, std::size_t num_merges) {
  std::map<std::string, std::size_t> freq;
  for (const auto& p : corpus.pairs) {
    for (const auto& t : p.source.tokens) ++freq[t];
    for (const auto& t : p.target.tokens) ++freq[t];
  }
  return learn_bpe(std::vector<std::pair<std::string, std::size_t>>(freq.begin(), freq.end()),
                   num_merges);
}

std::vector<std::string> segment_word(const BpeModel& model, const std::string& word) {
  auto symbols = code_points(word);
  std::map<BpeModel::Merge, std::size_t> rank;
  for (std::size_t i = 0; i < model.merges.size(); ++i) rank.emplace(model.merges[i], i);
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank.find({symbols[i], symbols[i + 1]});
      if (it != rank.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    merge_in_place(symbols, model.merges[best_rank]);
  }
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) symbols[i] += model.marker;
  return symbols;
}

Sentence apply_bpe(const BpeModel& model, const Sentence& s) {
  std::vector<std::string> pieces;
  for (const auto& tok : s.tokens) {
    auto seg = segment_word(model, tok);
    pieces.insert(pieces.end(), seg.begin(), seg.end());
  }
  return Sentence::from_tokens(std::move(pieces));
}

std::vector<std::string> undo_bpe(const std::vector<std::string>& pieces,
                                  const std::string& marker) {
  std::vector<std::string> out;
  std::string pending;
  bool open = false;
  for (const auto& p : pieces) {
    if (p.size() >= marker.size() && p.compare(p.size() - marker.size(), marker.size(), marker) == 0) {
      pending += p.substr(0, p.size() - marker.size());
      open = true;
    } else {
      out.push_back(pending + p);
      pending.clear();
      open = false;
    }
  }
  if (open) out.push_back(pending);
  return out;
}

void save_bpe(const BpeModel& model, std::ostream& out) {
  out << "#bpe v1\n";
  for (const auto& [l, r] : model.merges) out << l << ' ' << r << '\n';
}

void save_bpe(const BpeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_bpe(model, out);
}

BpeModel load_bpe(std::istream& in) {
  BpeModel model;
  std::string line;
  if (!std::getline(in, line) || line != "#bpe v1")
    throw DataError("line 1: expected header '#bpe v1'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto parts = split_whitespace(line);
    if (parts.size() != 2)
      throw DataError("line " + std::to_string(line_no) + ": expected 'left right'");
    model.merges.emplace_back(parts[0], parts[1]);
  }
  model.vocab_size_target = model.merges.size();
  return model;
}

BpeModel load_bpe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_bpe(in);
}

}  // namespace seqaug
