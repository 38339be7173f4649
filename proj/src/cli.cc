#include "lcrf/cli.h"

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "lcrf/corpus.h"
#include "lcrf/crf.h"
#include "lcrf/eval.h"
#include "lcrf/knowledge.h"
#include "lcrf/lifelong.h"

namespace lcrf {

namespace {

namespace fs = std::filesystem;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exclusive advisory lock on "<path>.lock"; released when the process
// exits, so a crash never leaves a stale lock behind.
class FileLock {
 public:
  explicit FileLock(const std::string& path) : lock_path_(path + ".lock") {
    fd_ = ::open(lock_path_.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw std::runtime_error("cannot open lock file " + lock_path_);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw InputError("knowledge file is locked by another process: " + path);
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
    std::error_code ec;
    fs::remove(lock_path_, ec);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  std::string lock_path_;
  int fd_ = -1;
};

void require_files(const std::vector<std::string>& paths) {
  for (const std::string& p : paths) {
    if (!fs::is_regular_file(p)) throw InputError("input file not found: " + p);
  }
}

std::vector<std::string> domain_names(const std::vector<std::string>& paths,
                                      const std::vector<std::string>& overrides) {
  if (!overrides.empty() && overrides.size() != paths.size()) {
    throw InputError("--domain-name needs one name per corpus (" + std::to_string(paths.size()) + " corpora, " +
                     std::to_string(overrides.size()) + " names)");
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    names.push_back(overrides.empty() ? fs::path(paths[i]).stem().string() : overrides[i]);
  }
  return names;
}

void write_aspects(const fs::path& path, const AspectSet& aspects) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const AspectPhrase& p : aspects) out << p.text() << '\n';
}

void write_predictions(const fs::path& path, const Corpus& corpus,
                       const std::vector<std::vector<SequenceLabel>>& labels) {
  // Re-encode through spans so the file always holds a valid BIO sequence.
  std::vector<std::vector<SequenceLabel>> normalized;
  normalized.reserve(labels.size());
  for (std::size_t s = 0; s < labels.size(); ++s) {
    normalized.push_back(labels_from_spans(labels[s].size(), spans_from_labels(corpus.sentences[s], labels[s])));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_corpus(out, corpus, &normalized);
}

std::vector<std::vector<SequenceLabel>> labels_of(const Corpus& corpus) {
  if (!corpus.labeled) throw ParseError(0, "prediction file '" + corpus.domain_name + "' has unlabeled tokens");
  std::vector<std::vector<SequenceLabel>> out;
  for (const Sentence& s : corpus.sentences) out.push_back(*s.gold_labels);
  return out;
}

struct TrainOptions {
  std::vector<std::string> train_paths;
  std::string model_path;
  std::string knowledge_path;
  int lambda = kDefaultThreshold;
  TrainingConfig config;
  std::string optimizer = "lbfgs";
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
  require_files(o.train_paths);
  TrainingConfig config = o.config;
  config.optimizer = optimizer_from_name(o.optimizer);
  config.validate();

  Corpus combined;
  combined.domain_name = "train";
  for (const std::string& p : o.train_paths) {
    Corpus c = read_corpus_file(p);
    if (!c.labeled) throw ParseError(0, "training corpus '" + p + "' has unlabeled sentences");
    for (Sentence& s : c.sentences) combined.sentences.push_back(std::move(s));
  }
  TrainPhaseResult trained = train_phase(combined, config, o.lambda);
  save_model_file(o.model_path, trained.state.model);
  save_knowledge_file(o.knowledge_path, trained.state.kb);

  const TrainingSummary& s = trained.summary;
  out << "sentences=" << combined.sentences.size() << " features=" << trained.state.model.feature_space.size()
      << " iterations=" << s.iterations << " initial_objective=" << s.initial_objective
      << " final_objective=" << s.final_objective << " converged=" << (s.converged ? 1 : 0)
      << " training_aspects=" << trained.state.kb.training_aspects().size() << '\n';
  return kExitOk;
}

struct ExtractOptions {
  std::vector<std::string> test_paths;
  std::vector<std::string> names;
  std::string model_path;
  std::string knowledge_path;
  std::string out_dir;
};

int cmd_extract(const ExtractOptions& o, std::ostream& out) {
  require_files({o.model_path, o.knowledge_path});
  require_files(o.test_paths);
  const auto names = domain_names(o.test_paths, o.names);
  const CrfModel model = load_model_file(o.model_path);
  const KnowledgeBase kb = load_knowledge_file(o.knowledge_path);
  fs::create_directories(o.out_dir);
  for (std::size_t i = 0; i < o.test_paths.size(); ++i) {
    const Corpus corpus = read_corpus_file(o.test_paths[i], names[i]);
    const auto labels = predict_labels(model, corpus, kb.training_aspects());
    const AspectSet aspects = aspects_from_labels(corpus, labels);
    write_predictions(fs::path(o.out_dir) / (names[i] + ".crf.conll"), corpus, labels);
    write_aspects(fs::path(o.out_dir) / (names[i] + ".crf.aspects"), aspects);
    out << "domain=" << names[i] << " sentences=" << corpus.sentences.size() << " aspects=" << aspects.size() << '\n';
  }
  return kExitOk;
}

struct LifelongOptions {
  std::vector<std::string> domain_paths;
  std::vector<std::string> names;
  std::string model_path;
  std::string knowledge_path;
  std::string out_dir;
  std::optional<int> lambda;
  int cap = kDefaultIterationCap;
  bool strict = false;
};

int cmd_lifelong(const LifelongOptions& o, std::ostream& out) {
  require_files({o.model_path, o.knowledge_path});
  require_files(o.domain_paths);
  const auto names = domain_names(o.domain_paths, o.names);
  FileLock lock(o.knowledge_path);

  LifelongState state;
  state.model = load_model_file(o.model_path);
  state.kb = load_knowledge_file(o.knowledge_path);
  if (o.lambda) state.kb.set_threshold(*o.lambda);
  state.iteration_cap = o.cap;

  std::set<std::string> seen;
  for (const std::string& name : names) {
    if (!seen.insert(name).second) throw DuplicateDomainError("domain '" + name + "' given more than once");
    if (state.kb.store().contains(name)) throw DuplicateDomainError("domain '" + name + "' has already been processed");
  }
  fs::create_directories(o.out_dir);

  bool all_converged = true;
  // One domain at a time, persisting after each, so an interrupted run keeps
  // every completed domain.
  for (std::size_t i = 0; i < o.domain_paths.size(); ++i) {
    const Corpus corpus = read_corpus_file(o.domain_paths[i], names[i]);
    const ExtractionResult r = extract_domain(state, corpus);
    all_converged = all_converged && r.converged;
    const fs::path base = fs::path(o.out_dir) / names[i];
    write_predictions(base.string() + ".lifelong.conll", corpus, r.labels);
    write_aspects(base.string() + ".lifelong.aspects", r.aspects);
    const std::string trace = format_trace(r);
    {
      std::ofstream t(base.string() + ".trace");
      t << trace;
    }
    out << trace;
    save_knowledge_file(o.knowledge_path, state.kb);
  }
  out << "reliable=" << state.kb.reliable().size() << " domains=" << state.kb.store().size() << '\n';
  if (o.strict && !all_converged) throw NotConverged("at least one domain hit the iteration cap");
  return kExitOk;
}

struct EvalOptions {
  std::string gold_path;
  std::string crf_path;
  std::string lifelong_path;
  std::string knowledge_path;
  std::string mode = "both";
  std::string domain;
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  std::vector<std::string> inputs = {o.gold_path, o.crf_path};
  if (!o.lifelong_path.empty()) inputs.push_back(o.lifelong_path);
  if (!o.knowledge_path.empty()) inputs.push_back(o.knowledge_path);
  require_files(inputs);

  std::vector<ScoringMode> modes;
  if (o.mode == "both") {
    modes = {ScoringMode::kOccurrence, ScoringMode::kType};
  } else {
    modes = {mode_from_name(o.mode)};
  }

  const Corpus gold = read_corpus_file(o.gold_path, o.domain.empty() ? std::nullopt : std::optional(o.domain));
  const auto gold_spans = gold_occurrences(gold);

  std::vector<std::pair<std::string, std::vector<std::vector<SequenceLabel>>>> systems;
  const Corpus crf = read_corpus_file(o.crf_path);
  check_alignment(gold, crf);
  systems.emplace_back("crf", labels_of(crf));
  if (!o.knowledge_path.empty()) {
    const KnowledgeBase kb = load_knowledge_file(o.knowledge_path);
    // Knowledge from past domains only.
    AspectStore past = kb.store();
    past.remove(gold.domain_name);
    const AspectSet dictionary = set_union(kb.training_aspects(), mine_reliable(past, kb.threshold()));
    systems.emplace_back("crf+r", crf_plus_r(systems.front().second, gold, dictionary));
  }
  if (!o.lifelong_path.empty()) {
    const Corpus lifelong = read_corpus_file(o.lifelong_path);
    check_alignment(gold, lifelong);
    systems.emplace_back("lifelong", labels_of(lifelong));
  }

  std::vector<ReportRow> rows;
  for (ScoringMode mode : modes) {
    for (const auto& [name, labels] : systems) {
      rows.push_back(ReportRow{gold.domain_name, name, mode,
                               evaluate(occurrences_from_labels(gold, labels), gold_spans, mode)});
    }
  }
  out << format_report_table(rows) << format_report_lines(rows);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lifelong CRF aspect extraction"};
  app.require_subcommand(1);

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "Train a CRF model and initialize the knowledge file");
  train->add_option("--train", train_opts.train_paths, "Labeled training corpora (combined)")->required();
  train->add_option("--model", train_opts.model_path, "Output model file")->required();
  train->add_option("--knowledge", train_opts.knowledge_path, "Output knowledge file")->required();
  train->add_option("--lambda", train_opts.lambda, "Domain frequency threshold")->check(CLI::PositiveNumber);
  train->add_option("--sigma", train_opts.config.l2_sigma, "Gaussian prior standard deviation")
      ->check(CLI::PositiveNumber);
  train->add_option("--max-iter", train_opts.config.max_iterations, "Optimizer iteration budget")
      ->check(CLI::PositiveNumber);
  train->add_option("--tol", train_opts.config.convergence_tol, "Relative objective tolerance")
      ->check(CLI::PositiveNumber);
  train->add_option("--optimizer", train_opts.optimizer, "lbfgs or sgd")->check(CLI::IsMember({"lbfgs", "sgd"}));
  train->add_option("--seed", train_opts.config.seed, "Seed for the stochastic optimizer");

  ExtractOptions extract_opts;
  auto* extract = app.add_subcommand("extract", "Single-pass CRF extraction with the training aspects");
  extract->add_option("--test", extract_opts.test_paths, "Corpora to label")->required();
  extract->add_option("--domain-name", extract_opts.names, "Domain names overriding the file stems");
  extract->add_option("--model", extract_opts.model_path, "Model file")->required();
  extract->add_option("--knowledge", extract_opts.knowledge_path, "Knowledge file (read only)")->required();
  extract->add_option("--out", extract_opts.out_dir, "Output directory")->required();

  LifelongOptions lifelong_opts;
  int lifelong_lambda = 0;
  auto* lifelong = app.add_subcommand("lifelong", "Lifelong extraction over a sequence of domains");
  lifelong->add_option("--domains", lifelong_opts.domain_paths, "Corpora in processing order")->required();
  lifelong->add_option("--domain-name", lifelong_opts.names, "Domain names overriding the file stems");
  lifelong->add_option("--model", lifelong_opts.model_path, "Model file")->required();
  lifelong->add_option("--knowledge", lifelong_opts.knowledge_path, "Knowledge file (updated in place)")->required();
  lifelong->add_option("--out", lifelong_opts.out_dir, "Output directory")->required();
  auto* lambda_opt = lifelong->add_option("--lambda", lifelong_lambda, "Override the stored frequency threshold")
                         ->check(CLI::PositiveNumber);
  lifelong->add_option("--max-iter", lifelong_opts.cap, "Iteration cap per domain")->check(CLI::PositiveNumber);
  lifelong->add_flag("--strict", lifelong_opts.strict, "Fail when a domain does not converge");

  EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "Score predictions against a gold corpus");
  eval->add_option("--test", eval_opts.gold_path, "Gold corpus")->required();
  eval->add_option("--crf", eval_opts.crf_path, "Plain CRF predictions")->required();
  eval->add_option("--lifelong", eval_opts.lifelong_path, "Lifelong predictions");
  eval->add_option("--knowledge", eval_opts.knowledge_path, "Knowledge file; enables the crf+r system");
  eval->add_option("--mode", eval_opts.mode, "occurrence, type or both")
      ->check(CLI::IsMember({"occurrence", "type", "both"}));
  eval->add_option("--domain-name", eval_opts.domain, "Domain name overriding the gold file stem");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_opts, out);
    if (*extract) return cmd_extract(extract_opts, out);
    if (*lifelong) {
      if (lambda_opt->count() > 0) lifelong_opts.lambda = lifelong_lambda;
      return cmd_lifelong(lifelong_opts, out);
    }
    if (*eval) return cmd_eval(eval_opts, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const DuplicateDomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ParseError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitFormatError;
  } catch (const ModelFormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitFormatError;
  } catch (const AlignmentError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitFormatError;
  } catch (const NotConverged& e) {
    err << "not converged: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitUsage;
}

}  // namespace lcrf
