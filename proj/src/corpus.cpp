#include "seqaug/corpus.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

Sentence Sentence::from_tokens(std::vector<std::string> toks) {
  Sentence s;
  s.raw = join(toks);
  s.tokens = std::move(toks);
  return s;
}

std::string Sentence::joined() const { return join(tokens); }

Origin Origin::parse(std::string_view text) {
  if (text.empty() || text == "gold") return gold();
  auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    auto kind = text.substr(0, colon);
    auto name = std::string(text.substr(colon + 1));
    if (kind == "augmented") return augmented(std::move(name));
    if (kind == "task") return task(std::move(name));
  }
  throw DataError("unknown origin '" + std::string(text) + "'");
}

std::string Origin::str() const {
  switch (kind) {
    case Kind::gold:
      return "gold";
    case Kind::augmented:
      return "augmented:" + name;
    case Kind::task:
      return "task:" + name;
  }
  return "gold";
}

ParallelPair make_pair(std::string_view source, std::string_view target, Origin origin,
                       double weight) {
  return {tokenize(source), tokenize(target), std::move(origin), weight};
}

namespace {

constexpr std::string_view kDetached = ".,!?;:\"()";

bool detachable(char c) { return kDetached.find(c) != std::string_view::npos; }

void tokenize_word(std::string_view word, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end && detachable(word[begin])) {
    out.emplace_back(1, word[begin]);
    ++begin;
  }
  std::vector<std::string> trailing;
  while (end > begin && detachable(word[end - 1])) {
    trailing.emplace_back(1, word[end - 1]);
    --end;
  }
  if (end > begin) out.emplace_back(word.substr(begin, end - begin));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s, std::size_t line_no) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw DataError("line " + std::to_string(line_no) + ": dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default:
        throw DataError("line " + std::to_string(line_no) + ": unknown escape '\\" +
                        std::string(1, s[i]) + "'");
    }
  }
  return out;
}

std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

double parse_weight(std::string_view text, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw DataError("line " + std::to_string(line_no) + ": field 'weight' is not a number");
  if (value < 0) throw DataError("line " + std::to_string(line_no) + ": field 'weight' is negative");
  return value;
}

Origin parse_origin(std::string_view text, std::size_t line_no) {
  try {
    return Origin::parse(text);
  } catch (const DataError& e) {
    throw DataError("line " + std::to_string(line_no) + ": field 'origin': " + e.what());
  }
}

ParallelPair parse_tsv_line(std::string_view line, std::size_t line_no) {
  auto fields = split(line, "\t");
  if (fields.size() < 2)
    throw DataError("line " + std::to_string(line_no) + ": expected source<TAB>target, got " +
                    std::to_string(fields.size()) + " field(s)");
  if (fields.size() > 4)
    throw DataError("line " + std::to_string(line_no) + ": too many fields (" +
                    std::to_string(fields.size()) + ")");
  ParallelPair pair;
  pair.source = tokenize(unescape_field(fields[0], line_no));
  pair.source.raw = unescape_field(fields[0], line_no);
  pair.target = tokenize(unescape_field(fields[1], line_no));
  pair.target.raw = unescape_field(fields[1], line_no);
  if (fields.size() >= 3) pair.origin = parse_origin(fields[2], line_no);
  if (fields.size() == 4) pair.weight = parse_weight(fields[3], line_no);
  return pair;
}

ParallelPair parse_jsonl_line(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
  }
  if (!obj.is_object()) throw DataError("line " + std::to_string(line_no) + ": expected an object");
  auto text_field = [&](const char* key) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end())
      throw DataError("line " + std::to_string(line_no) + ": missing field '" + key + "'");
    if (!it->is_string())
      throw DataError("line " + std::to_string(line_no) + ": field '" + key + "' must be a string");
    return it->get<std::string>();
  };
  ParallelPair pair;
  pair.source = tokenize(text_field("source"));
  pair.target = tokenize(text_field("target"));
  if (obj.contains("origin")) pair.origin = parse_origin(text_field("origin"), line_no);
  if (auto it = obj.find("weight"); it != obj.end()) {
    if (!it->is_number())
      throw DataError("line " + std::to_string(line_no) + ": field 'weight' is not a number");
    pair.weight = it->get<double>();
    if (!std::isfinite(pair.weight) || pair.weight < 0)
      throw DataError("line " + std::to_string(line_no) + ": field 'weight' is negative");
  }
  return pair;
}

}  // namespace

Sentence tokenize(std::string_view raw) {
  Sentence s;
  s.raw = std::string(raw);
  for (const auto& word : split_whitespace(raw)) tokenize_word(word, s.tokens);
  return s;
}

CorpusFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? CorpusFormat::jsonl : CorpusFormat::tsv;
}

Corpus read_corpus(std::istream& in, CorpusFormat format, std::string id) {
  Corpus corpus;
  corpus.id = std::move(id);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    corpus.pairs.push_back(format == CorpusFormat::tsv ? parse_tsv_line(line, line_no)
                                                       : parse_jsonl_line(line, line_no));
  }
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path.string() + "'");
  try {
    return read_corpus(in, format, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Corpus read_corpus(const std::filesystem::path& path) {
  return read_corpus(path, format_for_path(path));
}

void write_corpus(const Corpus& corpus, std::ostream& out, CorpusFormat format) {
  for (const auto& p : corpus.pairs) {
    if (format == CorpusFormat::tsv) {
      out << escape_field(p.source.raw) << '\t' << escape_field(p.target.raw) << '\t'
          << p.origin.str() << '\t' << format_weight(p.weight) << '\n';
    } else {
      nlohmann::json obj = {{"source", p.source.raw},
                            {"target", p.target.raw},
                            {"origin", p.origin.str()},
                            {"weight", p.weight}};
      out << obj.dump() << '\n';
    }
  }
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus '" + path.string() + "'");
  write_corpus(corpus, out, format);
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_corpus(corpus, path, format_for_path(path));
}

std::vector<Sentence> read_sentences(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(tokenize(line));
  }
  return out;
}

std::vector<Sentence> read_sentences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_sentences(in);
}

void write_sentences(const std::vector<Sentence>& sentences, std::ostream& out) {
  for (const auto& s : sentences) out << s.joined() << '\n';
}

std::string canonical_text(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.pairs) {
    out += escape_field(p.source.raw);
    out += '\t';
    out += escape_field(p.target.raw);
    out += '\t';
    out += p.origin.str();
    out += '\t';
    out += format_weight(p.weight);
    out += '\n';
  }
  return out;
}

}  // namespace seqaug
