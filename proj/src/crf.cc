#include "lcrf/crf.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "lcrf/lbfgs.h"

namespace lcrf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

void check_model(const CrfModel& model) {
  if (model.weights.size() != model.feature_space.size()) {
    throw ModelMismatchError("model has " + std::to_string(model.weights.size()) +
                             " weights but its feature space defines " +
                             std::to_string(model.feature_space.size()) + " features");
  }
}

// Emission and transition scores only; forward-backward is left to the caller.
LatticeScores fill_scores(const IndexedSentence& sentence, const FeatureSpace& space,
                          std::span<const double> weights) {
  const int num_labels = space.num_labels();
  const int num_obs = static_cast<int>(space.num_observations());
  LatticeScores lattice(sentence.size(), num_labels);
  for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
    for (int obs : sentence.observations[pos]) {
      if (obs < 0 || obs >= num_obs) {
        throw ModelMismatchError("observation id " + std::to_string(obs) + " outside feature space");
      }
      for (int y = 0; y < num_labels; ++y) lattice.emission(pos, y) += weights[space.emission_id(obs, y)];
    }
  }
  for (int p = 0; p < num_labels; ++p) {
    for (int n = 0; n < num_labels; ++n) lattice.transition(p, n) = weights[space.transition_id(p, n)];
  }
  return lattice;
}

LatticeScores build_lattice(const IndexedSentence& sentence, const FeatureSpace& space,
                            std::span<const double> weights) {
  LatticeScores lattice = fill_scores(sentence, space, weights);
  lattice.run_forward_backward();
  return lattice;
}

// Adds the expected-minus-empirical counts of one sentence to `gradient` and
// returns log p(gold | x).
double accumulate_sentence(const IndexedSentence& sentence, const FeatureSpace& space,
                           std::span<const double> weights, std::span<double> gradient) {
  if (!sentence.gold) throw std::invalid_argument("training sentence has no gold labels");
  const std::vector<int>& gold = *sentence.gold;
  if (gold.size() != sentence.size()) throw std::invalid_argument("gold label length mismatch");
  const LatticeScores lattice = build_lattice(sentence, space, weights);
  const int num_labels = space.num_labels();

  for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
    for (int obs : sentence.observations[pos]) {
      for (int y = 0; y < num_labels; ++y) {
        gradient[space.emission_id(obs, y)] += lattice.marginal(pos, y);
      }
      gradient[space.emission_id(obs, gold[pos])] -= 1.0;
    }
    if (pos + 1 < sentence.size()) {
      for (int p = 0; p < num_labels; ++p) {
        for (int n = 0; n < num_labels; ++n) {
          gradient[space.transition_id(p, n)] += lattice.pair_marginal(pos, p, n);
        }
      }
      gradient[space.transition_id(gold[pos], gold[pos + 1])] -= 1.0;
    }
  }
  return lattice.sequence_score(gold) - lattice.log_z();
}

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const char* end = text.data() + text.size();
  std::from_chars_result r;
  if constexpr (std::is_floating_point_v<T>) {
    r = std::from_chars(text.data(), end, value, std::chars_format::hex);
  } else {
    r = std::from_chars(text.data(), end, value);
  }
  if (r.ec != std::errc() || r.ptr != end) {
    throw ModelFormatError(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

std::string hex_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, r.ptr);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t tab = line.find('\t', begin);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

std::string_view value_of(std::string_view field, std::string_view key) {
  if (field.size() <= key.size() || field.substr(0, key.size()) != key || field[key.size()] != '=') {
    throw ModelFormatError("expected config field '" + std::string(key) + "'");
  }
  return field.substr(key.size() + 1);
}

CrfModel train_sgd(const std::vector<IndexedSentence>& data, const FeatureSpace& space,
                   const TrainingConfig& config, TrainingSummary& summary) {
  const std::size_t dim = space.size();
  const double n = static_cast<double>(data.size());
  const double reg = 1.0 / (config.l2_sigma * config.l2_sigma * n);
  constexpr double kEta0 = 0.1;

  std::vector<double> w(dim, 0.0), average(dim, 0.0), gradient(dim, 0.0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  auto full_objective = [&](const std::vector<double>& weights) {
    return objective_and_gradient(data, space, weights, config.l2_sigma).value;
  };
  double previous = full_objective(w);
  summary.initial_objective = previous;
  summary.final_objective = previous;

  std::uint64_t t = 0;
  for (int epoch = 1; epoch <= config.max_iterations; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const double eta = kEta0 / (1.0 + kEta0 * reg * static_cast<double>(t));
      std::fill(gradient.begin(), gradient.end(), 0.0);
      accumulate_sentence(data[idx], space, w, gradient);
      for (std::size_t k = 0; k < dim; ++k) w[k] -= eta * (gradient[k] + reg * w[k]);
      ++t;
      const double mix = 1.0 / static_cast<double>(t);
      for (std::size_t k = 0; k < dim; ++k) average[k] += mix * (w[k] - average[k]);
    }
    const double value = full_objective(average);
    if (!std::isfinite(value)) throw TrainingError("objective became non-finite");
    summary.iterations = epoch;
    summary.final_objective = value;
    if (std::abs(previous - value) / std::max(1.0, std::abs(value)) < config.convergence_tol) {
      summary.converged = true;
      break;
    }
    previous = value;
  }
  CrfModel model = make_model(space, config);
  model.weights = std::move(average);
  return model;
}

}  // namespace

std::string_view optimizer_name(Optimizer o) {
  return o == Optimizer::kLbfgs ? "lbfgs" : "sgd";
}

Optimizer optimizer_from_name(std::string_view name) {
  if (name == "lbfgs") return Optimizer::kLbfgs;
  if (name == "sgd") return Optimizer::kAveragedSgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected lbfgs or sgd)");
}

void TrainingConfig::validate() const {
  if (!(l2_sigma > 0.0) || !std::isfinite(l2_sigma)) throw std::invalid_argument("sigma must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max iterations must be positive");
  if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence tolerance must be positive");
}

CrfModel make_model(FeatureSpace space, TrainingConfig config) {
  CrfModel model;
  const int num_labels = space.num_labels();
  if (num_labels == kNumLabels) {
    for (int y = 0; y < kNumLabels; ++y) model.label_names.emplace_back(label_name(label_at(y)));
  } else {
    for (int y = 0; y < num_labels; ++y) model.label_names.push_back("L" + std::to_string(y));
  }
  model.weights.assign(space.size(), 0.0);
  model.feature_space = std::move(space);
  model.config = config;
  return model;
}

LatticeScores::LatticeScores(std::size_t length, int num_labels)
    : length_(length),
      num_labels_(num_labels),
      emission_(length * num_labels, 0.0),
      transition_(static_cast<std::size_t>(num_labels) * num_labels, 0.0),
      alpha_(length * num_labels, 0.0),
      beta_(length * num_labels, 0.0),
      marginal_(length * num_labels, 0.0),
      pair_(length > 0 ? (length - 1) * num_labels * num_labels : 0, 0.0) {}

double LatticeScores::sequence_score(std::span<const int> labels) const {
  double score = 0.0;
  for (std::size_t pos = 0; pos < labels.size(); ++pos) {
    score += emission(pos, labels[pos]);
    if (pos > 0) score += transition(labels[pos - 1], labels[pos]);
  }
  return score;
}

void LatticeScores::run_forward_backward() {
  const int Y = num_labels_;
  if (length_ == 0) {
    log_z_ = log_z_backward_ = 0.0;
    return;
  }
  std::vector<double> terms(Y);

  for (int y = 0; y < Y; ++y) alpha_[y] = emission(0, y);
  for (std::size_t pos = 1; pos < length_; ++pos) {
    for (int y = 0; y < Y; ++y) {
      for (int p = 0; p < Y; ++p) terms[p] = log_alpha(pos - 1, p) + transition(p, y);
      alpha_[pos * Y + y] = emission(pos, y) + log_sum_exp(terms);
    }
  }

  for (int y = 0; y < Y; ++y) beta_[(length_ - 1) * Y + y] = 0.0;
  for (std::size_t pos = length_ - 1; pos-- > 0;) {
    for (int y = 0; y < Y; ++y) {
      for (int n = 0; n < Y; ++n) terms[n] = transition(y, n) + emission(pos + 1, n) + log_beta(pos + 1, n);
      beta_[pos * Y + y] = log_sum_exp(terms);
    }
  }

  for (int y = 0; y < Y; ++y) terms[y] = log_alpha(length_ - 1, y);
  log_z_ = log_sum_exp(terms);
  for (int y = 0; y < Y; ++y) terms[y] = emission(0, y) + log_beta(0, y);
  log_z_backward_ = log_sum_exp(terms);

  for (std::size_t pos = 0; pos < length_; ++pos) {
    for (int y = 0; y < Y; ++y) {
      marginal_[pos * Y + y] = std::exp(log_alpha(pos, y) + log_beta(pos, y) - log_z_);
    }
  }
  for (std::size_t pos = 0; pos + 1 < length_; ++pos) {
    for (int p = 0; p < Y; ++p) {
      for (int n = 0; n < Y; ++n) {
        pair_[(pos * Y + p) * Y + n] = std::exp(log_alpha(pos, p) + transition(p, n) +
                                                emission(pos + 1, n) + log_beta(pos + 1, n) - log_z_);
      }
    }
  }
}

LatticeScores score_lattice(const IndexedSentence& sentence, const CrfModel& model) {
  check_model(model);
  return build_lattice(sentence, model.feature_space, model.weights);
}

LatticeScores score_lattice(const FeaturizedSentence& sentence, const CrfModel& model) {
  return score_lattice(index_sentence(sentence, model.feature_space), model);
}

ObjectiveResult objective_and_gradient(std::span<const IndexedSentence> corpus,
                                       const FeatureSpace& space, std::span<const double> weights,
                                       double l2_sigma) {
  if (weights.size() != space.size()) {
    throw ModelMismatchError("weight vector does not match feature space");
  }
  ObjectiveResult result;
  result.gradient.assign(weights.size(), 0.0);
  double log_likelihood = 0.0;
  for (const IndexedSentence& sentence : corpus) {
    log_likelihood += accumulate_sentence(sentence, space, weights, result.gradient);
  }
  const double inv_var = 1.0 / (l2_sigma * l2_sigma);
  double penalty = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    penalty += weights[k] * weights[k];
    result.gradient[k] += weights[k] * inv_var;
  }
  result.value = -log_likelihood + 0.5 * penalty * inv_var;
  return result;
}

ObjectiveResult objective_and_gradient(const std::vector<FeaturizedSentence>& corpus,
                                       const CrfModel& model) {
  check_model(model);
  std::vector<IndexedSentence> indexed;
  indexed.reserve(corpus.size());
  for (const FeaturizedSentence& s : corpus) indexed.push_back(index_sentence(s, model.feature_space));
  return objective_and_gradient(indexed, model.feature_space, model.weights, model.config.l2_sigma);
}

CrfModel train(const std::vector<FeaturizedSentence>& corpus, const FeatureSpace& space,
               const TrainingConfig& config, TrainingSummary* summary) {
  config.validate();
  std::vector<IndexedSentence> data;
  data.reserve(corpus.size());
  for (const FeaturizedSentence& s : corpus) {
    if (!s.gold_labels) throw std::invalid_argument("training corpus contains an unlabeled sentence");
    data.push_back(index_sentence(s, space));
  }

  TrainingSummary local;
  CrfModel model;
  if (config.optimizer == Optimizer::kAveragedSgd) {
    model = train_sgd(data, space, config, local);
  } else {
    model = make_model(space, config);
    bool first = true;
    auto f = [&](std::span<const double> x, std::span<double> gradient) {
      ObjectiveResult r = objective_and_gradient(data, space, x, config.l2_sigma);
      if (!std::isfinite(r.value)) throw TrainingError("objective became non-finite");
      std::copy(r.gradient.begin(), r.gradient.end(), gradient.begin());
      if (first) {
        local.initial_objective = r.value;
        first = false;
      }
      return r.value;
    };
    LbfgsOptions options;
    options.max_iterations = config.max_iterations;
    options.relative_tol = config.convergence_tol;
    const LbfgsResult r = minimize_lbfgs(f, model.weights, options);
    local.iterations = r.iterations;
    local.final_objective = r.value;
    local.converged = r.converged;
  }

  const ObjectiveResult final_state = objective_and_gradient(data, space, model.weights, config.l2_sigma);
  if (!std::isfinite(final_state.value)) throw TrainingError("objective became non-finite");
  for (double g : final_state.gradient) local.gradient_max_norm = std::max(local.gradient_max_norm, std::abs(g));
  local.final_objective = final_state.value;
  if (summary) *summary = local;
  return model;
}

std::vector<int> viterbi(const IndexedSentence& sentence, const CrfModel& model, double* best_score) {
  check_model(model);
  const LatticeScores lattice = fill_scores(sentence, model.feature_space, model.weights);

  const std::size_t length = sentence.size();
  const int Y = model.num_labels();
  if (length == 0) {
    if (best_score) *best_score = 0.0;
    return {};
  }
  std::vector<double> delta(length * Y);
  std::vector<int> back(length * Y, 0);
  for (int y = 0; y < Y; ++y) delta[y] = lattice.emission(0, y);
  for (std::size_t pos = 1; pos < length; ++pos) {
    for (int y = 0; y < Y; ++y) {
      int arg = 0;
      double best = delta[(pos - 1) * Y] + lattice.transition(0, y);
      for (int p = 1; p < Y; ++p) {
        const double s = delta[(pos - 1) * Y + p] + lattice.transition(p, y);
        if (s > best) {
          best = s;
          arg = p;
        }
      }
      delta[pos * Y + y] = best + lattice.emission(pos, y);
      back[pos * Y + y] = arg;
    }
  }
  int last = 0;
  for (int y = 1; y < Y; ++y) {
    if (delta[(length - 1) * Y + y] > delta[(length - 1) * Y + last]) last = y;
  }
  if (best_score) *best_score = delta[(length - 1) * Y + last];
  std::vector<int> path(length);
  path[length - 1] = last;
  for (std::size_t pos = length - 1; pos > 0; --pos) path[pos - 1] = back[pos * Y + path[pos]];
  return path;
}

std::vector<SequenceLabel> viterbi(const FeaturizedSentence& sentence, const CrfModel& model) {
  if (model.num_labels() != kNumLabels) throw ModelMismatchError("model is not a BIO aspect model");
  const std::vector<int> path = viterbi(index_sentence(sentence, model.feature_space), model);
  std::vector<SequenceLabel> out;
  out.reserve(path.size());
  for (int y : path) out.push_back(label_at(y));
  return out;
}

void save_model(std::ostream& out, const CrfModel& model) {
  check_model(model);
  const FeatureSpace& space = model.feature_space;
  const int Y = space.num_labels();
  if (static_cast<int>(model.label_names.size()) != Y) throw ModelMismatchError("label names do not match feature space");

  std::ostringstream body;
  body << "LCRF-MODEL\nversion\t" << kModelFormatVersion << "\nlabels";
  for (const std::string& name : model.label_names) body << '\t' << name;
  body << "\nconfig\tsigma=" << hex_double(model.config.l2_sigma)
       << "\tmax_iter=" << model.config.max_iterations << "\ttol=" << hex_double(model.config.convergence_tol)
       << "\toptimizer=" << optimizer_name(model.config.optimizer) << "\tseed=" << model.config.seed << '\n';
  body << "features\t" << space.size() << '\n';
  for (std::size_t obs = 0; obs < space.num_observations(); ++obs) {
    for (int y = 0; y < Y; ++y) {
      const std::size_t id = space.emission_id(static_cast<int>(obs), y);
      body << id << '\t' << hex_double(model.weights[id]) << "\tE\t" << model.label_names[y] << '\t'
           << space.observation(static_cast<int>(obs)) << '\n';
    }
  }
  for (int p = 0; p < Y; ++p) {
    for (int n = 0; n < Y; ++n) {
      const std::size_t id = space.transition_id(p, n);
      body << id << '\t' << hex_double(model.weights[id]) << "\tT:" << model.label_names[p] << ':'
           << model.label_names[n] << '\n';
    }
  }
  const std::string text = body.str();
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  out << text << "checksum\t" << checksum << '\n';
}

CrfModel load_model(std::istream& in) {
  std::uint64_t hash = fnv1a("");
  std::string line;
  auto next_line = [&](const char* what) -> std::string& {
    if (!std::getline(in, line)) throw ModelFormatError(std::string("truncated model file: missing ") + what);
    return line;
  };
  auto consume = [&] {
    hash = fnv1a(line, hash);
    hash = fnv1a("\n", hash);
  };

  if (next_line("header") != "LCRF-MODEL") throw ModelFormatError("not a model file (bad magic header)");
  consume();
  {
    const auto f = split_tabs(next_line("version"));
    if (f.size() != 2 || f[0] != "version") throw ModelFormatError("missing version line");
    const int version = parse_number<int>(f[1], "version");
    if (version != kModelFormatVersion) {
      throw ModelFormatError("unsupported model format version " + std::to_string(version) + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
    }
    consume();
  }
  std::vector<std::string> labels;
  {
    const auto f = split_tabs(next_line("labels"));
    if (f.size() < 2 || f[0] != "labels") throw ModelFormatError("missing labels line");
    for (std::size_t i = 1; i < f.size(); ++i) labels.emplace_back(f[i]);
    consume();
  }
  TrainingConfig config;
  {
    const auto f = split_tabs(next_line("config"));
    if (f.size() != 6 || f[0] != "config") throw ModelFormatError("malformed config line");
    config.l2_sigma = parse_number<double>(value_of(f[1], "sigma"), "sigma");
    config.max_iterations = parse_number<int>(value_of(f[2], "max_iter"), "max_iter");
    config.convergence_tol = parse_number<double>(value_of(f[3], "tol"), "tol");
    try {
      config.optimizer = optimizer_from_name(value_of(f[4], "optimizer"));
    } catch (const std::invalid_argument& e) {
      throw ModelFormatError(e.what());
    }
    config.seed = parse_number<std::uint64_t>(value_of(f[5], "seed"), "seed");
    consume();
  }
  const int Y = static_cast<int>(labels.size());
  std::size_t total = 0;
  {
    const auto f = split_tabs(next_line("feature count"));
    if (f.size() != 2 || f[0] != "features") throw ModelFormatError("missing features line");
    total = parse_number<std::size_t>(f[1], "feature count");
    consume();
  }
  const std::size_t transitions = static_cast<std::size_t>(Y) * Y;
  if (total < transitions || (total - transitions) % Y != 0) {
    throw ModelFormatError("feature count inconsistent with label count");
  }
  const std::size_t emissions = total - transitions;

  FeatureSpace space(Y);
  std::vector<double> weights(total);
  for (std::size_t id = 0; id < total; ++id) {
    const auto f = split_tabs(next_line("feature line"));
    if (f.size() < 3 || parse_number<std::size_t>(f[0], "feature id") != id) {
      throw ModelFormatError("feature line " + std::to_string(id) + " out of order");
    }
    weights[id] = parse_number<double>(f[1], "weight");
    if (!std::isfinite(weights[id])) throw ModelFormatError("non-finite weight");
    const int y = static_cast<int>(id % Y);
    if (id < emissions) {
      if (f.size() != 5 || f[2] != "E" || f[3] != labels[y]) throw ModelFormatError("malformed emission feature " + std::to_string(id));
      const std::string obs(f[4]);
      if (y == 0) {
        if (space.find_observation(obs)) throw ModelFormatError("duplicate feature '" + obs + "'");
        space.add_observation(obs);
      } else if (space.observation(static_cast<int>(id / Y)) != obs) {
        throw ModelFormatError("emission features of one observation are not contiguous");
      }
    } else {
      const std::size_t t = id - emissions;
      const std::string expected = "T:" + labels[t / Y] + ":" + labels[t % Y];
      if (f.size() != 3 || f[2] != expected) throw ModelFormatError("malformed transition feature " + std::to_string(id));
    }
    consume();
  }
  {
    const auto f = split_tabs(next_line("checksum"));
    if (f.size() != 2 || f[0] != "checksum") throw ModelFormatError("truncated model file: missing checksum");
    char expected[32];
    std::snprintf(expected, sizeof(expected), "%016llx", static_cast<unsigned long long>(hash));
    if (f[1] != expected) throw ModelFormatError("checksum mismatch");
  }

  CrfModel model;
  model.feature_space = std::move(space);
  model.label_names = std::move(labels);
  model.weights = std::move(weights);
  model.config = config;
  return model;
}

void save_model_file(const std::string& path, const CrfModel& model) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    save_model(out, model);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

CrfModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace lcrf
