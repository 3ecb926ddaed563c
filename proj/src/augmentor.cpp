#include "seqaug/augmentor.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>

#include "json.hpp"
#include "seqaug/util.hpp"

namespace seqaug {

RewriterGenerator RewriterGenerator::from_gold(const Corpus& gold, DecodeConfig config,
                                               RuleOptions options) {
  Corpus reversed;
  reversed.id = gold.id + "-reversed";
  for (const auto& p : gold.pairs) reversed.pairs.push_back({p.target, p.source, p.origin, p.weight});
  return RewriterGenerator(learn_rules(reversed, Phase::finetune, options), config);
}

std::vector<Sentence> RewriterGenerator::generate(const Sentence& target, std::size_t n) const {
  DecodeConfig cfg = config_;
  cfg.nbest = std::max<std::size_t>(n, 1);
  std::vector<Sentence> out;
  for (auto& c : decode(table_, lm_, target, cfg)) out.push_back(std::move(c.sentence));
  if (out.size() > n) out.resize(n);
  return out;
}

AugmentResult back_translate(const Generator& generator, std::span<const Sentence> targets,
                             std::size_t n, const SentenceScorer& fluency_of, unsigned threads) {
  if (n < 1) throw std::invalid_argument("back_translate: n must be >= 1");
  std::vector<std::optional<ParallelPair>> picked(targets.size());
  std::vector<std::string> reasons(targets.size());
  parallel_for(targets.size(), threads, [&](std::size_t i) {
    try {
      auto candidates = generator.generate(targets[i], n);
      if (candidates.size() > n) candidates.resize(n);
      picked[i] = select_from_nbest(targets[i], candidates, fluency_of);
      if (!picked[i]) reasons[i] = "no candidate less fluent than the target";
    } catch (const std::exception& e) {
      reasons[i] = std::string("generator failed: ") + e.what();
    }
  });
  AugmentResult result;
  result.corpus.id = "bt";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (picked[i]) {
      picked[i]->origin = Origin::augmented("bt");
      result.corpus.pairs.push_back(std::move(*picked[i]));
    } else {
      result.skipped.push_back({i, reasons[i]});
    }
  }
  return result;
}

AugmentResult back_translate(const Generator& generator, std::span<const Sentence> targets,
                             std::size_t n, const LanguageModel& lm, unsigned threads) {
  return back_translate(
      generator, targets, n, [&lm](const Sentence& s) { return fluency(lm, s); }, threads);
}

// --- synthetic noise -------------------------------------------------------------

namespace {

const std::set<std::string> kArticles{"a", "an", "the"};
const std::vector<std::string> kPrepositions{"about", "at", "by",   "for", "from",
                                             "in",    "of", "on",   "to",  "with"};
const std::vector<std::pair<std::string, std::string>> kVerbPairs{
    {"is", "are"}, {"was", "were"}, {"has", "have"}, {"does", "do"}, {"goes", "go"}};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool alphabetic(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c));
  });
}

std::optional<std::string> verb_toggle(const std::string& tok) {
  const auto l = lower(tok);
  for (const auto& [a, b] : kVerbPairs) {
    if (l == a) return b;
    if (l == b) return a;
  }
  return std::nullopt;
}

bool is_preposition(const std::string& l) {
  return std::find(kPrepositions.begin(), kPrepositions.end(), l) != kPrepositions.end();
}

std::optional<std::string> number_toggle(const std::string& tok, const std::string& prev) {
  const auto l = lower(tok);
  if (!alphabetic(tok) || kArticles.contains(l) || is_preposition(l) || verb_toggle(tok))
    return std::nullopt;
  if (tok.size() > 3 && tok.back() == 's' && tok[tok.size() - 2] != 's') {
    if (tok.size() > 4 && tok.ends_with("ies")) return tok.substr(0, tok.size() - 3) + "y";
    return tok.substr(0, tok.size() - 1);
  }
  if (kArticles.contains(lower(prev))) return tok + "s";
  return std::nullopt;
}

Tokens noise_tokens(const NoiserConfig& cfg, const Tokens& in, Rng& rng) {
  Tokens out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::string& tok = in[i];
    const std::string l = lower(tok);
    if (kArticles.contains(l) && rng.bernoulli(cfg.article_drop)) continue;
    if (is_preposition(l) && rng.bernoulli(cfg.preposition_substitution)) {
      auto pick = rng.below(kPrepositions.size() - 1);
      auto self = static_cast<std::size_t>(
          std::find(kPrepositions.begin(), kPrepositions.end(), l) - kPrepositions.begin());
      if (pick >= self) ++pick;
      out.push_back(kPrepositions[pick]);
      continue;
    }
    if (auto v = verb_toggle(tok); v && rng.bernoulli(cfg.verb_form)) {
      out.push_back(*v);
      continue;
    }
    const std::string prev = i > 0 ? in[i - 1] : std::string();
    if (auto n = number_toggle(tok, prev); n && rng.bernoulli(cfg.noun_number)) {
      out.push_back(*n);
      continue;
    }
    out.push_back(tok);
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (rng.bernoulli(cfg.adjacent_swap)) {
      std::swap(out[i], out[i + 1]);
      ++i;
    }
  }
  return out;
}

}  // namespace

void NoiserConfig::validate() const {
  for (double r : {article_drop, preposition_substitution, noun_number, verb_form, adjacent_swap})
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("noise rates must be in [0,1]");
}

Corpus synthesize_errors(const NoiserConfig& noiser, std::span<const Sentence> correct) {
  noiser.validate();
  Rng rng(noiser.seed);
  Corpus out;
  out.id = "synth";
  for (const auto& s : correct) {
    auto noised = Sentence::from_tokens(noise_tokens(noiser, s.tokens, rng));
    out.pairs.push_back({std::move(noised), s, Origin::augmented("synth"), 1.0});
  }
  return out;
}

Corpus ingest_multitask(const Corpus& other_task_corpus, const std::string& task_name) {
  if (task_name.empty()) throw std::invalid_argument("ingest_multitask: empty task name");
  Corpus out;
  out.id = other_task_corpus.id;
  for (std::size_t i = 0; i < other_task_corpus.size(); ++i) {
    const auto& p = other_task_corpus.pairs[i];
    if (p.source.empty() || p.target.empty())
      throw DataError("pair " + std::to_string(i) + ": empty " +
                      (p.source.empty() ? "source" : "target"));
    out.pairs.push_back({p.source, p.target, Origin::task(task_name), p.weight});
  }
  return out;
}

Corpus down_sample(const Corpus& aug, const Corpus& orig, std::uint64_t seed) {
  if (aug.size() < orig.size())
    throw DataError("down_sample: augmented corpus (" + std::to_string(aug.size()) +
                    ") is smaller than the original (" + std::to_string(orig.size()) + ")");
  std::vector<std::size_t> idx(aug.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  const std::size_t k = orig.size();
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  Corpus out;
  out.id = aug.id + "-down";
  for (auto i : idx) out.pairs.push_back(aug.pairs[i]);
  return out;
}

Corpus up_sample(const Corpus& orig, const Corpus& aug) {
  if (aug.size() <= orig.size()) return orig;
  if (orig.empty()) throw DataError("up_sample: original corpus is empty");
  Corpus out;
  out.id = orig.id + "-up";
  out.pairs.reserve(aug.size());
  while (out.pairs.size() < aug.size())
    for (const auto& p : orig.pairs) {
      if (out.pairs.size() == aug.size()) break;
      out.pairs.push_back(p);
    }
  return out;
}

// --- manifests -------------------------------------------------------------------

std::string to_string(SliceRole role) { return role == SliceRole::gold ? "gold" : "augmented"; }

SliceRole parse_slice_role(const std::string& text) {
  if (text == "gold") return SliceRole::gold;
  if (text == "augmented") return SliceRole::augmented;
  throw DataError("unknown slice role '" + text + "'");
}

std::string corpus_checksum(const Corpus& corpus) { return hex64(fnv1a64(canonical_text(corpus))); }

const ManifestSlice& DataManifest::gold() const {
  for (const auto& s : slices)
    if (s.role == SliceRole::gold) return s;
  throw DataError("manifest has no gold slice");
}

void validate_manifest(const DataManifest& manifest) {
  std::size_t gold = 0;
  std::set<std::string> names;
  for (const auto& s : manifest.slices) {
    if (s.role == SliceRole::gold) ++gold;
    if (!(s.weight > 0.0)) throw DataError("slice '" + s.name + "': weight must be > 0");
    if (!names.insert(s.name).second) throw DataError("duplicate slice name '" + s.name + "'");
  }
  if (gold != 1)
    throw DataError("manifest must have exactly one gold slice, found " + std::to_string(gold));
}

DataManifest build_manifest(std::span<const SliceSpec> slices) {
  DataManifest m;
  for (const auto& s : slices)
    m.slices.push_back({s.name, s.path, s.role, s.weight, s.corpus.size(), corpus_checksum(s.corpus)});
  validate_manifest(m);
  return m;
}

void save_manifest(const DataManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json j;
  j["slices"] = nlohmann::json::array();
  for (const auto& s : manifest.slices)
    j["slices"].push_back({{"name", s.name},
                           {"path", s.path},
                           {"role", to_string(s.role)},
                           {"weight", s.weight},
                           {"size", s.size},
                           {"checksum", s.checksum}});
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

DataManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  DataManifest m;
  try {
    auto j = nlohmann::json::parse(in);
    for (const auto& s : j.at("slices")) {
      ManifestSlice slice;
      slice.name = s.at("name").get<std::string>();
      slice.path = s.value("path", std::string());
      slice.role = parse_slice_role(s.at("role").get<std::string>());
      slice.weight = s.value("weight", 1.0);
      slice.size = s.value("size", std::size_t{0});
      slice.checksum = s.value("checksum", std::string());
      m.slices.push_back(std::move(slice));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  }
  validate_manifest(m);
  return m;
}

TrainingData assemble_training_data(const DataManifest& manifest,
                                    std::span<const Corpus> slice_corpora) {
  validate_manifest(manifest);
  if (slice_corpora.size() != manifest.slices.size())
    throw DataError("manifest/corpus count mismatch");
  TrainingData data;
  data.gold.id = "gold";
  data.augmented.id = "augmented";
  for (std::size_t i = 0; i < manifest.slices.size(); ++i) {
    const auto& slice = manifest.slices[i];
    auto& dst = slice.role == SliceRole::gold ? data.gold : data.augmented;
    for (auto p : slice_corpora[i].pairs) {
      p.weight *= slice.weight;
      dst.pairs.push_back(std::move(p));
    }
  }
  return data;
}

TrainingData load_training_data(const DataManifest& manifest,
                                const std::filesystem::path& base_dir) {
  validate_manifest(manifest);
  std::vector<Corpus> corpora;
  for (const auto& slice : manifest.slices) {
    std::filesystem::path p = slice.path;
    if (p.is_relative()) p = base_dir / p;
    auto c = read_corpus(p);
    if (c.size() != slice.size)
      throw DataError("slice '" + slice.name + "': size " + std::to_string(c.size()) +
                      " does not match manifest (" + std::to_string(slice.size) + ")");
    if (!slice.checksum.empty() && corpus_checksum(c) != slice.checksum)
      throw DataError("slice '" + slice.name + "': checksum mismatch");
    corpora.push_back(std::move(c));
  }
  return assemble_training_data(manifest, corpora);
}

}  // namespace seqaug
