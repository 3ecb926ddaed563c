#include "seqaug/ngram_lm.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "seqaug/util.hpp"

namespace seqaug {

namespace {

constexpr int kBosId = 0;
constexpr int kEosId = 1;
constexpr int kUnkId = 2;
const double kLn10 = std::log(10.0);
// ARPA convention for <s>, which is never predicted.
const double kBosLogProb = -99.0 * kLn10;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("truncated binary LM");
  return v;
}

constexpr char kBinaryMagic[8] = {'S', 'Q', 'L', 'M', 'B', 'I', 'N', '1'};
constexpr std::uint32_t kBinaryVersion = 1;

}  // namespace

int NgramModel::intern(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<int>(vocab_.size()));
  if (inserted) vocab_.push_back(token);
  return it->second;
}

int NgramModel::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

double NgramModel::log_prob(std::string_view token, std::span<const std::string> context) const {
  if (order_ < 1) throw std::logic_error("NgramModel: empty model");
  Key hist;
  const std::size_t keep = std::min<std::size_t>(context.size(), order_ - 1);
  for (std::size_t i = context.size() - keep; i < context.size(); ++i)
    hist.push_back(lookup(context[i]));
  const int w = lookup(token);

  double acc = 0.0;
  for (std::size_t len = hist.size() + 1; len-- > 0;) {
    Key key(hist.end() - static_cast<std::ptrdiff_t>(len), hist.end());
    key.push_back(w);
    const auto& table = tables_[len];
    if (auto it = table.find(key); it != table.end()) return acc + it->second.log_prob;
    if (len > 0) {
      key.pop_back();
      const auto& ctx_table = tables_[len - 1];
      if (auto it = ctx_table.find(key); it != ctx_table.end()) acc += it->second.log_backoff;
    }
  }
  // only reachable for foreign ARPA files without <unk>
  return acc + kBosLogProb;
}

double NgramModel::prob(std::string_view token, std::span<const std::string> context) const {
  return std::exp(log_prob(token, context));
}

std::vector<std::string> NgramModel::predictable_vocab() const {
  std::vector<std::string> out;
  for (const auto& w : vocab_)
    if (w != kBos) out.push_back(w);
  return out;
}

std::vector<std::vector<std::string>> NgramModel::contexts() const {
  std::set<Key> seen;
  seen.insert(Key{});
  for (std::size_t k = 1; k < tables_.size(); ++k)
    for (const auto& [key, entry] : tables_[k]) seen.insert(Key(key.begin(), key.end() - 1));
  std::vector<std::vector<std::string>> out;
  for (const auto& key : seen) {
    std::vector<std::string> ctx;
    for (int id : key) ctx.push_back(vocab_[id]);
    out.push_back(std::move(ctx));
  }
  return out;
}

NgramModel train_lm(const std::vector<Sentence>& sentences, int order, double discount) {
  if (order < 1) throw std::invalid_argument("train_lm: order must be >= 1");
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("train_lm: discount must be in (0,1)");
  if (sentences.empty()) throw DataError("empty LM corpus");

  NgramModel m;
  m.order_ = order;
  m.discount_ = discount;
  m.intern(std::string(kBos));
  m.intern(std::string(kEos));
  m.intern(std::string(kUnk));

  using Key = NgramModel::Key;
  std::vector<std::map<Key, double>> raw(order);
  for (const auto& s : sentences) {
    Key seq{kBosId};
    for (const auto& t : s.tokens) seq.push_back(m.intern(t));
    seq.push_back(kEosId);
    for (std::size_t end = 1; end < seq.size(); ++end)
      for (int k = 1; k <= order && static_cast<std::size_t>(k) <= end + 1; ++k)
        raw[k - 1][Key(seq.begin() + (end + 1 - k), seq.begin() + end + 1)] += 1.0;
  }

  // Adjusted counts: raw at the top order and for n-grams opening with <s>,
  // distinct left-extension counts otherwise.
  std::vector<std::map<Key, double>> adjusted(order);
  adjusted[order - 1] = raw[order - 1];
  for (int k = order - 1; k >= 1; --k) {
    auto& level = adjusted[k - 1];
    for (const auto& [g, c] : raw[k - 1])
      if (g.front() == kBosId) level[g] = c;
    for (const auto& [g, c] : raw[k]) {
      Key suffix(g.begin() + 1, g.end());
      if (suffix.front() != kBosId) level[suffix] += 1.0;
    }
  }

  m.tables_.assign(order, {});
  const double d = discount;

  // unigrams, interpolated with the uniform distribution over predictable types
  {
    double total = 0.0, types = 0.0;
    for (const auto& [g, a] : adjusted[0]) {
      total += a;
      types += 1.0;
    }
    const double vocab = static_cast<double>(m.vocab_.size() - 1);
    const double floor_mass = d * types / total / vocab;
    auto& table = m.tables_[0];
    for (std::size_t id = 0; id < m.vocab_.size(); ++id) {
      NgramModel::Entry e;
      if (static_cast<int>(id) == kBosId) {
        e.log_prob = kBosLogProb;
      } else {
        auto it = adjusted[0].find(Key{static_cast<int>(id)});
        const double a = it == adjusted[0].end() ? 0.0 : it->second;
        e.log_prob = std::log(std::max(a - d, 0.0) / total + floor_mass);
      }
      table[Key{static_cast<int>(id)}] = e;
    }
  }

  for (int k = 2; k <= order; ++k) {
    std::map<Key, std::pair<double, double>> ctx_stats;  // total, distinct followers
    for (const auto& [g, a] : adjusted[k - 1]) {
      auto& st = ctx_stats[Key(g.begin(), g.end() - 1)];
      st.first += a;
      st.second += 1.0;
    }
    std::map<Key, double> gamma;
    for (const auto& [h, st] : ctx_stats) {
      gamma[h] = d * st.second / st.first;
      m.tables_[k - 2].at(h).log_backoff = std::log(gamma[h]);
    }
    auto& table = m.tables_[k - 1];
    for (const auto& [g, a] : adjusted[k - 1]) {
      Key h(g.begin(), g.end() - 1);
      const auto& st = ctx_stats[h];
      // lower-order interpolated probability of the same word given the shorter context
      std::vector<std::string> lower_ctx;
      for (std::size_t i = 1; i + 1 < g.size(); ++i) lower_ctx.push_back(m.vocab_[g[i]]);
      double lower = 0.0;
      {
        // tables_ above order k-1 are still empty, so this is the (k-1)-order estimate
        lower = std::exp(m.log_prob(m.vocab_[g.back()], lower_ctx));
      }
      table[g].log_prob = std::log((a - d) / st.first + gamma[h] * lower);
    }
  }
  return m;
}

double entropy(const LanguageModel& lm, const Sentence& s) {
  if (s.empty()) throw DataError("entropy of empty sentence");
  std::vector<std::string> ctx{std::string(kBos)};
  double sum = 0.0;
  for (const auto& t : s.tokens) {
    sum += lm.log_prob(t, ctx);
    ctx.push_back(t);
  }
  sum += lm.log_prob(kEos, ctx);
  return -sum / static_cast<double>(s.length() + 1);
}

double fluency(const LanguageModel& lm, const Sentence& s) {
  return fluency_from_entropy(entropy(lm, s));
}

void NgramModel::save_arpa(std::ostream& out) const {
  out << "# seqaug interpolated-kneser-ney order=" << order_ << " discount="
      << format_real(discount_) << "\n\n";
  out << "\\data\\\n";
  for (int k = 1; k <= order_; ++k) out << "ngram " << k << "=" << tables_[k - 1].size() << "\n";
  for (int k = 1; k <= order_; ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto& [key, e] : tables_[k - 1]) {
      out << (key == Key{kBosId} ? std::string("-99") : format_real(e.log_prob / kLn10)) << '\t';
      for (std::size_t i = 0; i < key.size(); ++i) out << (i ? " " : "") << vocab_[key[i]];
      if (e.log_backoff != 0.0) out << '\t' << format_real(e.log_backoff / kLn10);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

NgramModel NgramModel::load_arpa(std::istream& in) {
  NgramModel m;
  m.intern(std::string(kBos));
  m.intern(std::string(kEos));
  m.intern(std::string(kUnk));
  std::string line;
  std::size_t line_no = 0;
  bool in_data = false;
  int current = 0;
  std::vector<std::size_t> declared;
  auto fail = [&](const std::string& msg) {
    throw DataError("ARPA line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!in_data) {
      if (line.rfind("# seqaug", 0) == 0) {
        if (auto pos = line.find("discount="); pos != std::string::npos)
          m.discount_ = std::stod(line.substr(pos + 9));
      }
      if (line == "\\data\\") in_data = true;
      continue;
    }
    if (line == "\\end\\") break;
    if (line.rfind("ngram ", 0) == 0) {
      auto eq = line.find('=');
      if (eq == std::string::npos) fail("malformed count line");
      int k = std::stoi(line.substr(6, eq - 6));
      if (k != static_cast<int>(declared.size()) + 1) fail("n-gram orders out of sequence");
      declared.push_back(std::stoull(line.substr(eq + 1)));
      continue;
    }
    if (line.front() == '\\') {
      auto dash = line.find("-grams:");
      if (dash == std::string::npos) fail("unknown section '" + line + "'");
      current = std::stoi(line.substr(1, dash - 1));
      if (current < 1 || current > static_cast<int>(declared.size())) fail("undeclared order");
      if (m.tables_.size() < declared.size()) m.tables_.resize(declared.size());
      continue;
    }
    if (current == 0) fail("entry outside of an n-gram section");
    auto fields = split_whitespace(line);
    if (fields.size() != static_cast<std::size_t>(current) + 1 &&
        fields.size() != static_cast<std::size_t>(current) + 2)
      fail("expected " + std::to_string(current) + " tokens");
    Entry e;
    try {
      e.log_prob = std::stod(fields[0]) * kLn10;
      if (fields.size() == static_cast<std::size_t>(current) + 2)
        e.log_backoff = std::stod(fields.back()) * kLn10;
    } catch (const std::exception&) {
      fail("bad number");
    }
    Key key;
    for (int i = 1; i <= current; ++i) key.push_back(m.intern(fields[i]));
    if (current == 1 && key.front() == kBosId) e.log_prob = kBosLogProb;
    m.tables_[current - 1][key] = e;
  }
  if (declared.empty()) throw DataError("ARPA: missing \\data\\ section");
  m.order_ = static_cast<int>(declared.size());
  m.tables_.resize(m.order_);
  for (int k = 1; k <= m.order_; ++k)
    if (m.tables_[k - 1].size() != declared[k - 1])
      throw DataError("ARPA: " + std::to_string(k) + "-gram count mismatch");
  // keep the reserved types scorable even for foreign files
  if (!m.tables_[0].contains(Key{kBosId})) m.tables_[0][Key{kBosId}] = Entry{kBosLogProb, 0.0};
  return m;
}

void NgramModel::save_binary(std::ostream& out) const {
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  write_pod(out, kBinaryVersion);
  write_pod(out, static_cast<std::int32_t>(order_));
  write_pod(out, discount_);
  write_pod(out, static_cast<std::uint64_t>(vocab_.size()));
  for (const auto& w : vocab_) {
    write_pod(out, static_cast<std::uint32_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  for (const auto& table : tables_) {
    write_pod(out, static_cast<std::uint64_t>(table.size()));
    for (const auto& [key, e] : table) {
      for (int id : key) write_pod(out, static_cast<std::int32_t>(id));
      write_pod(out, e.log_prob);
      write_pod(out, e.log_backoff);
    }
  }
}

NgramModel NgramModel::load_binary(std::istream& in) {
  char magic[sizeof kBinaryMagic];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kBinaryMagic))
    throw DataError("not a seqaug binary LM");
  if (read_pod<std::uint32_t>(in) != kBinaryVersion) throw DataError("unsupported binary LM version");
  NgramModel m;
  m.order_ = read_pod<std::int32_t>(in);
  m.discount_ = read_pod<double>(in);
  auto vocab_size = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    auto len = read_pod<std::uint32_t>(in);
    std::string w(len, '\0');
    if (!in.read(w.data(), len)) throw DataError("truncated binary LM");
    m.intern(w);
  }
  m.tables_.resize(m.order_);
  for (int k = 1; k <= m.order_; ++k) {
    auto count = read_pod<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < count; ++i) {
      Key key;
      for (int j = 0; j < k; ++j) key.push_back(read_pod<std::int32_t>(in));
      Entry e;
      e.log_prob = read_pod<double>(in);
      e.log_backoff = read_pod<double>(in);
      m.tables_[k - 1].emplace(std::move(key), e);
    }
  }
  return m;
}

void save_lm(const NgramModel& model, const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot write LM '" + path.string() + "'");
  if (binary) model.save_binary(out);
  else model.save_arpa(out);
}

NgramModel load_lm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open LM '" + path.string() + "'");
  char head[sizeof kBinaryMagic] = {};
  in.read(head, sizeof head);
  in.clear();
  in.seekg(0);
  if (std::equal(head, head + sizeof head, kBinaryMagic)) return NgramModel::load_binary(in);
  return NgramModel::load_arpa(in);
}

}  // namespace seqaug
