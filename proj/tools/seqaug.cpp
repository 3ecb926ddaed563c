// seqaug command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqaug/augmentor.hpp"
#include "seqaug/bpe.hpp"
#include "seqaug/corpus.hpp"
#include "seqaug/discriminator.hpp"
#include "seqaug/experiment.hpp"
#include "seqaug/metrics.hpp"
#include "seqaug/ngram_lm.hpp"
#include "seqaug/rewriter.hpp"
#include "seqaug/roundtrip.hpp"
#include "seqaug/trainer.hpp"
#include "seqaug/util.hpp"

using namespace seqaug;
using nlohmann::json;

namespace {

struct Globals {
  bool json_out = false;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  bool quiet = false;
  std::vector<std::string> inputs;  // files hashed into the run fingerprint
};

Globals g;

std::string track(const std::string& path) {
  g.inputs.push_back(path);
  return path;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

void log_fingerprint(const CLI::App& app) {
  if (g.quiet) return;
  std::string material = app.config_to_str(true, false);
  std::string files;
  for (const auto& p : g.inputs) {
    auto sum = file_checksum(p);
    material += p + "=" + sum + "\n";
    files += " " + p + ":" + sum;
  }
  std::cerr << "[seqaug] fingerprint=" << hex64(fnv1a64(material)) << files << "\n";
}

// Output goes to `path`, or stdout for "" / "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw DataError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void write_corpus_to(const Corpus& c, const std::string& path) {
  if (path.empty() || path == "-") write_corpus(c, std::cout, CorpusFormat::tsv);
  else write_corpus(c, path);
}

void print_report(const MetricReport& rep) {
  if (g.json_out) {
    std::cout << rep.to_json().dump() << "\n";
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", rep.value);
  std::cout << rep.metric << "\t" << buf << "\n";
  for (const auto& [k, v] : rep.values) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    std::cout << k << "\t" << buf << "\n";
  }
  for (const auto& [k, v] : rep.counts) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    std::cout << k << "\t" << buf << "\n";
  }
}

void write_report_file(const std::vector<FilterDecision>& decisions, const std::string& path) {
  if (path.empty()) return;
  Output out(path);
  write_filter_report(decisions, out.stream());
}

// Several --ref files give several references per sentence.
std::vector<std::vector<Sentence>> read_references(const std::vector<std::string>& paths,
                                                   std::size_t expected) {
  std::vector<std::vector<Sentence>> refs(expected);
  for (const auto& p : paths) {
    auto s = read_sentences(p);
    if (s.size() != expected)
      throw DataError("reference file '" + p + "' has " + std::to_string(s.size()) +
                      " lines, expected " + std::to_string(expected));
    for (std::size_t i = 0; i < expected; ++i) refs[i].push_back(std::move(s[i]));
  }
  return refs;
}

json candidates_json(const Sentence& source, const std::vector<ScoredCandidate>& nbest) {
  json j;
  j["source"] = source.joined();
  j["candidates"] = json::array();
  for (const auto& c : nbest)
    j["candidates"].push_back({{"text", c.sentence.joined()},
                               {"model_score", c.model_score},
                               {"lm_score", c.lm_score},
                               {"score", c.score}});
  return j;
}

std::vector<RerankItem> read_nbest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<RerankItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      RerankItem item;
      item.source = tokenize(j.at("source").get<std::string>());
      for (const auto& c : j.at("candidates")) {
        ScoredCandidate sc;
        sc.sentence = tokenize(c.at("text").get<std::string>());
        sc.model_score = c.value("model_score", 0.0);
        sc.lm_score = c.value("lm_score", 0.0);
        sc.score = c.value("score", sc.model_score);
        item.candidates.push_back(std::move(sc));
      }
      if (item.candidates.empty())
        throw DataError("line " + std::to_string(line_no) + ": empty candidate list");
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

MockRoundTripClient load_mock_client(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  MockRoundTripClient client;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("mock map line lacks a tab: " + line);
    client.sentence_map[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return client;
}

PhaseConfig load_phase_config(const std::string& spec) {
  if (auto p = phase_preset(spec)) return *p;
  std::ifstream in(track(spec));
  if (!in) throw std::invalid_argument("unknown preset or unreadable config '" + spec + "'");
  try {
    auto j = json::parse(in);
    PhaseConfig c;
    c.lr_base = j.at("lr_base").get<double>();
    c.warmup_steps = j.at("warmup_steps").get<long>();
    c.total_steps = j.value("total_steps", c.total_steps);
    c.dropout = j.value("dropout", c.dropout);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw DataError("config '" + spec + "': " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqaug: data augmentation, training recipes and evaluation for sentence rewriting"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", g.json_out, "Machine-readable output");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_flag("-q,--quiet", g.quiet, "Do not log the run fingerprint");

  std::function<void()> action;

  // lm
  auto* lm_cmd = app.add_subcommand("lm", "Kneser-Ney language model")->require_subcommand(1);
  {
    auto* train = lm_cmd->add_subcommand("train", "Train an n-gram model on one sentence per line");
    static std::string input, out;
    static int order = 5;
    static double discount = 0.75;
    static bool binary = false;
    train->add_option("--input", input)->required();
    train->add_option("--out", out)->required();
    train->add_option("--order", order)->check(CLI::Range(1, 10));
    train->add_option("--discount", discount);
    train->add_flag("--binary", binary, "Write the binary cache format");
    train->callback([&] {
      action = [&] {
        auto model = train_lm(read_sentences(track(input)), order, discount);
        save_lm(model, out, binary);
        if (g.json_out) {
          json counts = json::array();
          for (int k = 1; k <= order; ++k) counts.push_back(model.ngram_count(k));
          std::cout << json{{"order", order}, {"ngrams", counts}}.dump() << "\n";
        }
      };
    });
    auto* score = lm_cmd->add_subcommand("score", "Entropy and fluency per input line");
    static std::string lm_path, score_in;
    score->add_option("--lm", lm_path)->required();
    score->add_option("--input", score_in)->required();
    score->callback([&] {
      action = [&] {
        auto model = load_lm(track(lm_path));
        for (const auto& s : read_sentences(track(score_in))) {
          if (s.empty()) {
            std::cout << (g.json_out ? json{{"error", "empty sentence"}}.dump() : "nan\tnan") << "\n";
            continue;
          }
          double h = entropy(model, s);
          if (g.json_out)
            std::cout << json{{"entropy", h}, {"fluency", fluency_from_entropy(h)}}.dump() << "\n";
          else
            std::printf("%.6f\t%.6f\n", h, fluency_from_entropy(h));
        }
      };
    });
  }

  // augment
  auto* aug_cmd = app.add_subcommand("augment", "Generate augmented pairs")->require_subcommand(1);
  {
    auto* bt = aug_cmd->add_subcommand("bt", "Back translation with fluency selection");
    static std::string gold, targets, lm_path, out, skipped;
    static std::size_t nbest = 10;
    bt->add_option("--gold", gold, "Gold pairs used to learn the reverse rewriter")->required();
    bt->add_option("--targets", targets, "Clean sentences, one per line")->required();
    bt->add_option("--lm", lm_path)->required();
    bt->add_option("--nbest", nbest)->check(CLI::PositiveNumber);
    bt->add_option("--out", out);
    bt->add_option("--skipped", skipped, "Write skipped targets with reasons (JSONL)");
    bt->callback([&] {
      action = [&] {
        auto model = load_lm(track(lm_path));
        DecodeConfig dc;
        dc.nbest = nbest;
        auto gen = RewriterGenerator::from_gold(read_corpus(track(gold)), dc);
        auto t = read_sentences(track(targets));
        auto res = back_translate(gen, t, nbest, model, g.threads);
        write_corpus_to(res.corpus, out);
        if (!skipped.empty()) {
          Output o(skipped);
          for (const auto& s : res.skipped)
            o.stream() << json{{"index", s.index}, {"reason", s.reason}}.dump() << "\n";
        }
        std::cerr << "[seqaug] kept " << res.corpus.size() << " of " << t.size() << "\n";
      };
    });

    auto* rt = aug_cmd->add_subcommand("roundtrip", "Round-trip translation with formality filter");
    static std::string rt_in, clf_path, rt_out, pivot = "zh", endpoint, token, mock, report;
    static double sigma = kDefaultSigma;
    static unsigned inflight = 4;
    rt->add_option("--input", rt_in, "Informal sentences, one per line")->required();
    rt->add_option("--classifier", clf_path)->required();
    rt->add_option("--sigma", sigma);
    rt->add_option("--pivot", pivot);
    rt->add_option("--endpoint", endpoint, "MT service base URL (default $SEQAUG_MT_ENDPOINT)");
    rt->add_option("--token", token, "Bearer token (default $SEQAUG_MT_TOKEN)");
    rt->add_option("--mock", mock, "Offline TSV map: sentence <tab> round-trip output");
    rt->add_option("--max-inflight", inflight)->check(CLI::Range(1u, 64u));
    rt->add_option("--out", rt_out);
    rt->add_option("--report", report);
    rt->callback([&] {
      action = [&] {
        auto clf = FormalityClassifier::load(std::filesystem::path(track(clf_path)));
        auto informal = read_sentences(track(rt_in));
        std::unique_ptr<RoundTripClient> client;
        if (!mock.empty()) {
          client = std::make_unique<MockRoundTripClient>(load_mock_client(track(mock)));
        } else {
          auto cfg = HttpClientConfig::from_env();
          if (!endpoint.empty()) cfg.base_url = endpoint;
          if (!token.empty()) cfg.token = token;
          if (cfg.base_url.empty())
            throw std::invalid_argument("no MT endpoint: pass --endpoint or set SEQAUG_MT_ENDPOINT");
          client = std::make_unique<HttpRoundTripClient>(cfg);
        }
        auto res = round_trip_augment(*client, informal, clf, sigma, pivot, inflight);
        write_corpus_to(res.corpus, rt_out);
        write_report_file(res.decisions, report);
        for (const auto& f : res.failures)
          std::cerr << "[seqaug] line " << f.index + 1 << ": " << f.reason << "\n";
      };
    });

    auto* noise = aug_cmd->add_subcommand("noise", "Rule-based synthetic errors");
    static std::string n_in, n_out;
    static NoiserConfig nc;
    noise->add_option("--input", n_in, "Correct sentences, one per line")->required();
    noise->add_option("--article-drop", nc.article_drop);
    noise->add_option("--preposition", nc.preposition_substitution);
    noise->add_option("--noun-number", nc.noun_number);
    noise->add_option("--verb-form", nc.verb_form);
    noise->add_option("--swap", nc.adjacent_swap);
    noise->add_option("--out", n_out);
    noise->callback([&] {
      action = [&] {
        nc.seed = g.seed;
        nc.validate();
        write_corpus_to(synthesize_errors(nc, read_sentences(track(n_in))), n_out);
      };
    });

    auto* mt = aug_cmd->add_subcommand("multitask", "Tag another task's corpus as pre-training data");
    static std::string m_in, m_out, task;
    mt->add_option("--input", m_in)->required();
    mt->add_option("--task", task)->required();
    mt->add_option("--out", m_out);
    mt->callback([&] {
      action = [&] { write_corpus_to(ingest_multitask(read_corpus(track(m_in)), task), m_out); };
    });
  }

  // filter
  auto* filter_cmd = app.add_subcommand("filter", "Discriminate augmented pairs")->require_subcommand(1);
  {
    auto* flu = filter_cmd->add_subcommand("fluency", "Keep pairs whose source is less fluent");
    static std::string in, lm_path, out, report;
    flu->add_option("--input", in)->required();
    flu->add_option("--lm", lm_path)->required();
    flu->add_option("--out", out);
    flu->add_option("--report", report, "Per-pair decisions (JSONL)");
    flu->callback([&] {
      action = [&] {
        auto model = load_lm(track(lm_path));
        auto c = read_corpus(track(in));
        auto res = fluency_filter(c.pairs, model, g.threads);
        write_corpus_to(res.retained, out);
        write_report_file(res.decisions, report);
      };
    });
    auto* form = filter_cmd->add_subcommand("formality", "Keep pairs with enough formality gain");
    static std::string f_in, clf_path, f_out, f_report;
    static double sigma = kDefaultSigma;
    form->add_option("--input", f_in)->required();
    form->add_option("--classifier", clf_path)->required();
    form->add_option("--sigma", sigma);
    form->add_option("--out", f_out);
    form->add_option("--report", f_report);
    form->callback([&] {
      action = [&] {
        auto clf = FormalityClassifier::load(std::filesystem::path(track(clf_path)));
        auto c = read_corpus(track(f_in));
        auto res = formality_filter(c.pairs, clf, sigma, g.threads);
        write_corpus_to(res.retained, f_out);
        write_report_file(res.decisions, f_report);
      };
    });
  }

  // classifier
  auto* clf_cmd = app.add_subcommand("classifier", "Formality classifier")->require_subcommand(1);
  {
    auto* train = clf_cmd->add_subcommand("train", "Train on formal and informal sentence files");
    static std::string formal, informal, out;
    static FormalityConfig fc;
    train->add_option("--formal", formal)->required();
    train->add_option("--informal", informal)->required();
    train->add_option("--iterations", fc.max_iterations);
    train->add_option("--lr", fc.learning_rate);
    train->add_option("--l2", fc.l2);
    train->add_option("--out", out)->required();
    train->callback([&] {
      action = [&] {
        auto clf = train_formality_classifier(read_sentences(track(formal)),
                                              read_sentences(track(informal)), fc);
        clf.save(std::filesystem::path(out));
      };
    });
  }

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Size-match gold and augmented data")->require_subcommand(1);
  {
    static std::string orig, aug, out;
    auto* up = sample_cmd->add_subcommand("up", "Repeat gold data to the augmented size");
    auto* down = sample_cmd->add_subcommand("down", "Subsample augmented data to the gold size");
    for (auto* sc : {up, down}) {
      sc->add_option("--orig", orig, "Gold corpus")->required();
      sc->add_option("--aug", aug, "Augmented corpus")->required();
      sc->add_option("--out", out);
    }
    up->callback([&] {
      action = [&] { write_corpus_to(up_sample(read_corpus(track(orig)), read_corpus(track(aug))), out); };
    });
    down->callback([&] {
      action = [&] {
        write_corpus_to(down_sample(read_corpus(track(aug)), read_corpus(track(orig)), g.seed), out);
      };
    });
  }

  // train
  auto* train_cmd = app.add_subcommand("train", "Run a training recipe (ST, ST_up, ST_down, PTFT)");
  {
    static std::string recipe_path, out, mode;
    static double gamma = -1;
    train_cmd->add_option("--recipe", recipe_path)->required();
    train_cmd->add_option("--out", out)->required();
    train_cmd->add_option("--mode", mode, "Override the recipe mode");
    train_cmd->add_option("--gamma", gamma, "Override the recipe gamma");
    train_cmd->callback([&] {
      action = [&] {
        auto recipe = load_recipe(track(recipe_path));
        if (!mode.empty()) recipe.mode = parse_recipe_mode(mode);
        if (gamma >= 0) recipe.gamma = gamma;
        auto base = std::filesystem::path(recipe_path).parent_path();
        for (const auto& s : recipe.manifest.slices) {
          auto mp = std::filesystem::path(recipe.manifest_path).parent_path();
          track((base / mp / s.path).string());
        }
        auto ckpt = run_recipe(recipe, base / std::filesystem::path(recipe.manifest_path).parent_path());
        save_checkpoint(ckpt, out);
        if (g.json_out)
          std::cout << json{{"mode", to_string(ckpt.mode)}, {"gamma", ckpt.gamma},
                            {"fingerprint", ckpt.fingerprint},
                            {"sources", ckpt.rules.entries().size()}}.dump()
                    << "\n";
      };
    });
  }

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "Rewrite sentences with a trained model");
  {
    static std::string model, in, out, lm_path, nbest_out;
    static DecodeConfig dc;
    static double gamma = -1;
    decode_cmd->add_option("--model", model, "Checkpoint written by train")->required();
    decode_cmd->add_option("--input", in)->required();
    decode_cmd->add_option("--out", out);
    decode_cmd->add_option("--nbest", dc.nbest)->check(CLI::PositiveNumber);
    decode_cmd->add_option("--nbest-out", nbest_out, "Write N-best lists (JSONL) for rerank");
    decode_cmd->add_option("--lm", lm_path);
    decode_cmd->add_option("--lm-weight", dc.lm_weight);
    decode_cmd->add_option("--gamma", gamma, "Override the checkpoint's blend weight");
    decode_cmd->add_option("--threshold", dc.edit_threshold);
    decode_cmd->add_option("--beam", dc.beam)->check(CLI::PositiveNumber);
    decode_cmd->callback([&] {
      action = [&] {
        auto ckpt = load_checkpoint(track(model));
        dc.blend = ckpt.blend();
        if (gamma >= 0) dc.blend.gamma = gamma;
        std::optional<NgramModel> lm;
        if (!lm_path.empty()) lm = load_lm(track(lm_path));
        if (dc.lm_weight != 0.0 && !lm) throw std::invalid_argument("--lm-weight needs --lm");
        auto src = read_sentences(track(in));
        std::vector<std::vector<ScoredCandidate>> lists(src.size());
        parallel_for(src.size(), g.threads, [&](std::size_t i) {
          lists[i] = decode(ckpt.rules, lm ? &*lm : nullptr, src[i], dc);
        });
        Output o(out);
        for (const auto& l : lists) o.stream() << l.front().sentence.joined() << "\n";
        if (!nbest_out.empty()) {
          Output nb(nbest_out);
          for (std::size_t i = 0; i < src.size(); ++i)
            nb.stream() << candidates_json(src[i], lists[i]).dump() << "\n";
        }
      };
    });
  }

  // rerank
  auto* rerank_cmd = app.add_subcommand("rerank", "Rerank N-best lists with edit and LM features");
  {
    static std::string nbest, lm_path, out;
    static RerankWeights w;
    rerank_cmd->add_option("--nbest", nbest, "JSONL written by decode --nbest-out")->required();
    rerank_cmd->add_option("--lm", lm_path);
    rerank_cmd->add_option("--w-model", w.w_model);
    rerank_cmd->add_option("--w-lm", w.w_lm);
    rerank_cmd->add_option("--w-ins", w.w_ins);
    rerank_cmd->add_option("--w-del", w.w_del);
    rerank_cmd->add_option("--w-sub", w.w_sub);
    rerank_cmd->add_option("--out", out);
    rerank_cmd->callback([&] {
      action = [&] {
        std::optional<NgramModel> lm;
        if (!lm_path.empty()) lm = load_lm(track(lm_path));
        if (w.w_lm != 0.0 && !lm) throw std::invalid_argument("--w-lm needs --lm");
        Output o(out);
        for (const auto& item : read_nbest_file(track(nbest)))
          o.stream() << rerank(item.candidates, item.source, lm ? &*lm : nullptr, w).sentence.joined()
                     << "\n";
      };
    });
  }

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score system output")->require_subcommand(1);
  {
    static std::string sys, gold, src;
    static std::vector<std::string> refs;
    static double beta = 0.5;
    auto* m2 = eval_cmd->add_subcommand("m2", "MaxMatch precision, recall and F");
    m2->add_option("--sys", sys)->required();
    m2->add_option("--gold", gold, "M2 annotation file")->required();
    m2->add_option("--beta", beta);
    m2->callback([&] {
      action = [&] {
        auto s = read_sentences(track(sys));
        auto gm = read_m2(track(gold));
        M2Config cfg;
        cfg.beta = beta;
        print_report(m2_score(s, gm, cfg));
      };
    });
    auto* gl = eval_cmd->add_subcommand("gleu", "GLEU against one or more references");
    gl->add_option("--sys", sys)->required();
    gl->add_option("--src", src)->required();
    gl->add_option("--ref", refs)->required();
    gl->callback([&] {
      action = [&] {
        auto s = read_sentences(track(sys));
        auto so = read_sentences(track(src));
        for (auto& r : refs) track(r);
        print_report(gleu(s, so, read_references(refs, s.size())));
      };
    });
    auto* bl = eval_cmd->add_subcommand("bleu", "Corpus BLEU-4");
    bl->add_option("--sys", sys)->required();
    bl->add_option("--ref", refs)->required();
    bl->callback([&] {
      action = [&] {
        auto s = read_sentences(track(sys));
        for (auto& r : refs) track(r);
        print_report(bleu(s, read_references(refs, s.size())));
      };
    });
  }

  // lr-curve
  auto* lr_cmd = app.add_subcommand("lr-curve", "Print the learning-rate schedule as CSV");
  {
    static std::string config = "gec-pretrain";
    static long steps = 0, every = 1;
    lr_cmd->add_option("--config", config, "Preset name or JSON phase config");
    lr_cmd->add_option("--steps", steps, "Last step (default: the phase's total)");
    lr_cmd->add_option("--every", every)->check(CLI::PositiveNumber);
    lr_cmd->callback([&] {
      action = [&] {
        auto cfg = load_phase_config(config);
        long last = steps > 0 ? steps : cfg.total_steps;
        std::cout << "step,lr\n";
        // step 1, every multiple of --every, and the last step
        for (long s = 1; s <= last; s = (s / every + 1) * every) std::printf("%ld,%.17g\n", s, lr_at(cfg, s));
        if (last % every != 0 && last > 1) std::printf("%ld,%.17g\n", last, lr_at(cfg, last));
      };
    });
  }

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Packaged experiments")->require_subcommand(1);
  {
    auto* st = exp_cmd->add_subcommand("stvsptft", "Pooled vs. two-phase training on synthetic data");
    static StVsPtftConfig ec;
    st->add_option("--gold-size", ec.gold_size)->check(CLI::PositiveNumber);
    st->add_option("--aug-size", ec.augmented_size)->check(CLI::PositiveNumber);
    st->add_option("--b-rate", ec.b_rate)->check(CLI::Range(0.0, 1.0));
    st->add_option("--probes", ec.probes)->check(CLI::PositiveNumber);
    st->add_option("--gamma", ec.gamma);
    st->callback([&] {
      action = [&] {
        ec.seed = g.seed;
        auto res = run_st_vs_ptft(ec);
        if (g.json_out) std::cout << res.to_json().dump(2) << "\n";
        else std::cout << format_table(res);
      };
    });
  }

  // bpe
  auto* bpe_cmd = app.add_subcommand("bpe", "Subword segmentation")->require_subcommand(1);
  {
    auto* learn = bpe_cmd->add_subcommand("learn", "Learn merges from a text file");
    static std::string in, out, model;
    static std::size_t merges = 1000;
    static bool undo = false;
    learn->add_option("--input", in)->required();
    learn->add_option("--merges", merges);
    learn->add_option("--out", out)->required();
    learn->callback([&] {
      action = [&] {
        std::map<std::string, std::size_t> counts;
        for (const auto& s : read_sentences(track(in)))
          for (const auto& t : s.tokens) ++counts[t];
        std::vector<std::pair<std::string, std::size_t>> wc(counts.begin(), counts.end());
        save_bpe(learn_bpe(wc, merges), std::filesystem::path(out));
      };
    });
    auto* apply = bpe_cmd->add_subcommand("apply", "Segment (or --undo) a text file");
    static std::string a_in, a_out;
    apply->add_option("--model", model)->required();
    apply->add_option("--input", a_in)->required();
    apply->add_option("--out", a_out);
    apply->add_flag("--undo", undo);
    apply->callback([&] {
      action = [&] {
        auto m = load_bpe(std::filesystem::path(track(model)));
        Output o(a_out);
        std::ifstream f(track(a_in));
        if (!f) throw DataError("cannot open '" + a_in + "'");
        std::string line;
        while (std::getline(f, line)) {
          auto toks = split_whitespace(line);
          if (undo) o.stream() << join(undo_bpe(toks, m.marker)) << "\n";
          else o.stream() << apply_bpe(m, Sentence::from_tokens(toks)).joined() << "\n";
        }
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!action) throw std::invalid_argument("no action selected");
    action();
    log_fingerprint(app);
  } catch (const DataError& e) {
    std::cerr << "seqaug: data error: " << e.what() << "\n";
    return 2;
  } catch (const TranslationError& e) {
    std::cerr << "seqaug: translation error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "seqaug: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "seqaug: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
