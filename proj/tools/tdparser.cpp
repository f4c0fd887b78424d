// Command-line front end: corpus generation, training, parsing, evaluation,
// oracle traces, and the training-procedure comparison matrix.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topdown/decode.hpp"
#include "topdown/evalf1.hpp"
#include "topdown/grammar.hpp"
#include "topdown/oracle.hpp"
#include "topdown/scorer.hpp"
#include "topdown/training.hpp"
#include "topdown/transition.hpp"
#include "topdown/tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace topdown;

namespace {

std::string report_line(const EpochRecord& r) {
  // wall time is intentionally left out so reruns are byte-identical
  json j;
  j["epoch"] = r.epoch;
  j["dev_f1"] = r.dev_f1;
  j["mean_train_cost"] = r.mean_train_cost;
  j["standardizer_count"] = r.standardizer_count;
  j["standardizer_mean"] = r.standardizer_mean;
  j["standardizer_stddev"] = r.standardizer_stddev;
  return j.dump();
}

void write_report(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  for (const EpochRecord& r : report.epochs) out << report_line(r) << '\n';
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct TrainArgs {
  std::string procedure = "likelihood";
  TrainConfig config;
  std::string train_path, dev_path, report_path, model_out;
};

void add_train_options(CLI::App* cmd, TrainArgs& a, bool required_io) {
  cmd->add_option("--procedure", a.procedure,
                  "likelihood|policy_gradient|likelihood_explore|smm|smm_explore")
      ->envname("TDP_PROCEDURE");
  cmd->add_option("--k", a.config.k, "candidates per sentence, gold included")
      ->envname("TDP_K");
  cmd->add_option("--epochs", a.config.epochs, "training epochs")->envname("TDP_EPOCHS");
  cmd->add_option("--batch-size", a.config.batch_size, "sentences per update")
      ->envname("TDP_BATCH_SIZE");
  cmd->add_option("--lr", a.config.lr, "learning rate")->envname("TDP_LR");
  cmd->add_option("--lr-decay", a.config.lr_decay, "inverse-time decay rate")
      ->envname("TDP_LR_DECAY");
  cmd->add_option("--seed", a.config.seed, "global seed (also the shared init)")
      ->envname("TDP_SEED");
  cmd->add_option("--dev-beam-width", a.config.dev_beam_width,
                  "beam width for dev evaluation (1 = greedy)")
      ->envname("TDP_DEV_BEAM_WIDTH");
  cmd->add_option("--margin", a.config.margin, "softmax-margin cost")
      ->envname("TDP_MARGIN");
  cmd->add_option("--train", a.train_path, "training corpus (bracketed trees)")
      ->required(required_io)
      ->envname("TDP_TRAIN");
  cmd->add_option("--dev", a.dev_path, "development corpus")->envname("TDP_DEV");
}

int run_train(const TrainArgs& a) {
  TrainConfig config = a.config;
  config.procedure = parse_procedure(a.procedure);
  Corpus train_corpus = load_corpus(a.train_path);
  Corpus dev_corpus = a.dev_path.empty() ? Corpus{} : load_corpus(a.dev_path);
  auto [params, report] = train(train_corpus, dev_corpus, config);
  if (!a.report_path.empty()) write_report(report, a.report_path);
  if (!a.model_out.empty()) save_params(params, a.model_out);
  for (const EpochRecord& r : report.epochs)
    std::cerr << "epoch " << r.epoch << " dev_f1 " << r.dev_f1 << " cost "
              << r.mean_train_cost << " (" << r.seconds << "s)\n";
  std::cout << "best_epoch\t" << report.best_epoch << "\nbest_dev_f1\t"
            << report.best_dev_f1 << "\n";
  return 0;
}

int run_parse(const std::string& model_path, const std::string& input_path,
              const std::string& output_path, const std::string& mode, int beam_width,
              std::uint64_t seed) {
  ScorerParams params = load_params(model_path);
  std::istream* in = &std::cin;
  std::ifstream fin;
  if (!input_path.empty() && input_path != "-") {
    fin.open(input_path);
    if (!fin) throw std::runtime_error("cannot open input: " + input_path);
    in = &fin;
  }
  std::ostream* out = &std::cout;
  std::ofstream fout;
  if (!output_path.empty() && output_path != "-") {
    fout.open(output_path);
    if (!fout) throw std::runtime_error("cannot write output: " + output_path);
    out = &fout;
  }
  std::string line;
  std::uint64_t index = 0;
  while (std::getline(*in, line)) {
    Sentence sent;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) sent.push_back(unescape_token(tok));
    if (sent.empty()) continue;
    Candidate c;
    if (mode == "greedy") {
      c = decode_greedy(sent, params);
    } else if (mode == "beam") {
      c = decode_beam(sent, params, beam_width);
    } else if (mode == "sample") {
      std::mt19937_64 rng = sentence_rng(seed, index, 0);
      c = sample_tree(sent, params, rng);
    } else {
      throw ConfigError("unknown mode: " + mode);
    }
    *out << write_bracketed(c.tree, sent) << '\n';
    ++index;
  }
  return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& gold_path,
                 const std::string& per_sentence_path, bool evalb_mode) {
  Corpus pred = load_corpus(pred_path);
  Corpus gold = load_corpus(gold_path);
  if (pred.size() != gold.size())
    throw UsageError("evaluate: corpora have different sizes");
  bool include_root = !evalb_mode;
  std::vector<std::pair<Tree, Tree>> pairs;
  std::ofstream tsv;
  if (!per_sentence_path.empty()) {
    tsv.open(per_sentence_path);
    if (!tsv) throw std::runtime_error("cannot write: " + per_sentence_path);
    tsv << "index\tprecision\trecall\tf1\tmatched\tpredicted\tgold\n";
  }
  for (size_t i = 0; i < pred.size(); ++i) {
    pairs.emplace_back(pred[i].second, gold[i].second);
    if (tsv.is_open()) {
      F1Score s = labeled_f1(pred[i].second, gold[i].second, include_root);
      tsv << i << '\t' << s.precision << '\t' << s.recall << '\t' << s.f1 << '\t'
          << s.matched << '\t' << s.predicted << '\t' << s.gold << '\n';
    }
  }
  F1Score s = corpus_f1(pairs, include_root);
  std::cout << std::fixed << std::setprecision(2) << "precision\t"
            << 100 * s.precision << "\nrecall\t" << 100 * s.recall << "\nf1\t"
            << 100 * s.f1 << "\n";
  std::cout << "matched\t" << s.matched << "\npredicted\t" << s.predicted
            << "\ngold\t" << s.gold << "\n";
  return 0;
}

std::string state_summary(const ParserState& s) {
  std::string out = "stack=[";
  for (size_t i = 0; i < s.stack.size(); ++i) {
    if (i) out += ' ';
    out += s.stack[i].label + "@" + std::to_string(s.stack[i].start);
  }
  out += "] shifted=" + std::to_string(s.shifted) + "/" + std::to_string(s.n);
  return out;
}

int run_oracle_trace(const std::string& gold_path, int index,
                     const std::string& prefix) {
  Corpus corpus = load_corpus(gold_path);
  if (index < 0 || index >= static_cast<int>(corpus.size()))
    throw UsageError("oracle-trace: tree index out of range");
  const auto& [sent, gold] = corpus[index];
  GoldIndex gidx = build_gold_index(gold);
  ParserState s = initial_state(sent);
  if (!prefix.empty()) {
    for (const Action& a : parse_actions(prefix)) {
      if (!action_legal(s, a))
        throw UsageError("oracle-trace: illegal prefix action " + a.str());
      s = apply(s, a);
    }
  }
  while (!s.finished) {
    OracleResult r = oracle_action(s, gidx);
    std::cout << state_summary(s) << "\t" << r.action.str() << "\trule=" << r.rule
              << "\n";
    s = apply(s, r.action);
  }
  std::cout << "final\t" << write_bracketed(*s.root, sent) << "\n";
  return 0;
}

int run_gen_corpus(const std::string& spec_path, int count, const std::string& out_path,
                   std::int64_t seed_override) {
  GrammarSpec spec = load_grammar_spec(spec_path);
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
  Corpus corpus = generate_corpus(spec, count);
  if (out_path.empty() || out_path == "-") {
    for (const auto& [sent, tree] : corpus)
      std::cout << write_bracketed(tree, sent) << '\n';
  } else {
    save_corpus(corpus, out_path);
  }
  return 0;
}

int run_matrix(const std::string& train_path, const std::string& dev_path,
               const std::string& test_path, const std::string& procedures,
               const std::string& k_values, const std::string& out_dir,
               TrainConfig base) {
  Corpus train_corpus = load_corpus(train_path);
  Corpus dev_corpus = dev_path.empty() ? Corpus{} : load_corpus(dev_path);
  Corpus test_corpus = test_path.empty() ? Corpus{} : load_corpus(test_path);
  fs::create_directories(out_dir);

  std::vector<Procedure> procs;
  for (const std::string& p : split_commas(procedures)) procs.push_back(parse_procedure(p));
  std::vector<int> ks;
  for (const std::string& k : split_commas(k_values)) ks.push_back(std::stoi(k));
  if (procs.empty() || ks.empty()) throw ConfigError("experiment-matrix: empty cell set");

  std::ofstream summary(out_dir + "/summary.tsv");
  summary << "procedure\tk\tbest_dev_f1\ttest_f1\n";
  summary << std::setprecision(6) << std::fixed;
  bool any_failed = false;
  for (Procedure proc : procs) {
    for (int k : ks) {
      if (uses_exploration(proc) && k < 2) continue;
      std::string cell = std::string(procedure_name(proc)) + "_k" + std::to_string(k);
      try {
        TrainConfig config = base;
        config.procedure = proc;
        config.k = k;
        auto [params, report] = train(train_corpus, dev_corpus, config);
        write_report(report, out_dir + "/" + cell + ".report.jsonl");
        save_params(params, out_dir + "/" + cell + ".model");
        {
          std::ofstream curve(out_dir + "/" + cell + ".curve.tsv");
          curve << "epoch\tdev_f1\tmean_train_cost\n" << std::setprecision(6)
                << std::fixed;
          for (const EpochRecord& r : report.epochs)
            curve << r.epoch << '\t' << r.dev_f1 << '\t' << r.mean_train_cost << '\n';
        }
        double test_f1 = 0;
        if (!test_corpus.empty()) test_f1 = evaluate_dev(params, test_corpus, config).f1;
        summary << procedure_name(proc) << '\t' << k << '\t' << report.best_dev_f1
                << '\t' << test_f1 << '\n';
        summary.flush();
        std::cerr << cell << ": best_dev_f1=" << report.best_dev_f1
                  << " test_f1=" << test_f1 << "\n";
      } catch (const std::exception& e) {
        any_failed = true;
        std::cerr << cell << " failed: " << e.what() << "\n";
      }
    }
  }
  return any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-down transition-based constituency parser trainer"};
  app.set_config("--config", "", "plain-text key=value config file");
  app.require_subcommand(1);

  // train
  TrainArgs targs;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  add_train_options(train_cmd, targs, true);
  train_cmd->add_option("--report", targs.report_path, "per-epoch JSON-lines report")
      ->envname("TDP_REPORT");
  train_cmd->add_option("--model-out", targs.model_out, "model output path")
      ->envname("TDP_MODEL_OUT");

  // parse
  std::string model_path, input_path, output_path, mode = "greedy";
  int beam_width = 10;
  std::uint64_t parse_seed = 1;
  auto* parse_cmd = app.add_subcommand("parse", "parse sentences, one per line");
  parse_cmd->add_option("--model", model_path)->required()->envname("TDP_MODEL");
  parse_cmd->add_option("--input", input_path, "default stdin")->envname("TDP_INPUT");
  parse_cmd->add_option("--output", output_path, "default stdout")
      ->envname("TDP_OUTPUT");
  parse_cmd->add_option("--mode", mode, "greedy|beam|sample")->envname("TDP_MODE");
  parse_cmd->add_option("--beam-width", beam_width)->envname("TDP_BEAM_WIDTH");
  parse_cmd->add_option("--seed", parse_seed, "sampling seed")->envname("TDP_SEED");

  // evaluate
  std::string pred_path, gold_path, per_sentence_path;
  bool evalb_mode = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "labeled bracketing P/R/F1");
  eval_cmd->add_option("--pred", pred_path)->required()->envname("TDP_PRED");
  eval_cmd->add_option("--gold", gold_path)->required()->envname("TDP_GOLD");
  eval_cmd->add_option("--per-sentence", per_sentence_path, "per-sentence TSV dump")
      ->envname("TDP_PER_SENTENCE");
  eval_cmd->add_flag("--evalb-mode", evalb_mode, "exclude the root bracket")
      ->envname("TDP_EVALB_MODE");

  // oracle-trace
  std::string trace_gold, trace_prefix;
  int trace_index = 0;
  auto* trace_cmd = app.add_subcommand("oracle-trace", "step the dynamic oracle");
  trace_cmd->add_option("--gold", trace_gold, "gold tree file")
      ->required()
      ->envname("TDP_GOLD");
  trace_cmd->add_option("--index", trace_index, "tree index in the file")
      ->envname("TDP_INDEX");
  trace_cmd->add_option("--prefix", trace_prefix,
                        "action prefix to perturb the state, e.g. 'NT(S) SHIFT'")
      ->envname("TDP_PREFIX");

  // gen-corpus
  std::string gen_spec, gen_out;
  int gen_count = 100;
  std::int64_t gen_seed = -1;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "generate a synthetic treebank");
  gen_cmd->add_option("--spec", gen_spec, "grammar spec (key=value)")
      ->required()
      ->envname("TDP_SPEC");
  gen_cmd->add_option("--count", gen_count)->envname("TDP_COUNT");
  gen_cmd->add_option("--out", gen_out, "default stdout")->envname("TDP_OUT");
  gen_cmd->add_option("--seed", gen_seed, "override the spec's seed")
      ->envname("TDP_SEED");

  // experiment-matrix
  TrainArgs margs;
  std::string m_test, m_procs =
      "likelihood,policy_gradient,likelihood_explore,smm,smm_explore";
  std::string m_ks = "10", m_out_dir = "matrix-out";
  auto* matrix_cmd =
      app.add_subcommand("experiment-matrix", "train every (procedure, k) cell "
                         "from a shared initialization");
  add_train_options(matrix_cmd, margs, true);
  matrix_cmd->add_option("--test", m_test, "test corpus")->envname("TDP_TEST");
  matrix_cmd->add_option("--procedures", m_procs, "comma-separated cell procedures")
      ->envname("TDP_PROCEDURES");
  matrix_cmd->add_option("--k-values", m_ks, "comma-separated candidate counts")
      ->envname("TDP_K_VALUES");
  matrix_cmd->add_option("--out-dir", m_out_dir)->envname("TDP_OUT_DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return run_train(targs);
    if (*parse_cmd)
      return run_parse(model_path, input_path, output_path, mode, beam_width,
                       parse_seed);
    if (*eval_cmd)
      return run_evaluate(pred_path, gold_path, per_sentence_path, evalb_mode);
    if (*trace_cmd) return run_oracle_trace(trace_gold, trace_index, trace_prefix);
    if (*gen_cmd) return run_gen_corpus(gen_spec, gen_count, gen_out, gen_seed);
    if (*matrix_cmd)
      return run_matrix(margs.train_path, margs.dev_path, m_test, m_procs, m_ks,
                        m_out_dir, margs.config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
