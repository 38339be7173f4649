// First-order linear-chain CRF.
//
//   p(y | x) = exp(sum_l [ E_l(y_l) + T(y_{l-1}, y_l) ]) / Z(x)
//
// E_l(y) sums the weights of the emission features active at position l for
// label y; T is the label-pair transition weight (no transition into the
// first position). All inference runs in log space.

#ifndef LCRF_CRF_H_
#define LCRF_CRF_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcrf/feature_space.h"

namespace lcrf {

enum class Optimizer { kLbfgs, kAveragedSgd };

std::string_view optimizer_name(Optimizer o);
// Throws std::invalid_argument for unknown names.
Optimizer optimizer_from_name(std::string_view name);

struct TrainingConfig {
  double l2_sigma = 1.0;  // Gaussian prior standard deviation
  int max_iterations = 200;
  double convergence_tol = 1e-6;  // relative objective change
  Optimizer optimizer = Optimizer::kLbfgs;
  std::uint64_t seed = 1;  // shuffling order for the stochastic optimizer

  // Throws std::invalid_argument unless all fields are positive.
  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

struct CrfModel {
  FeatureSpace feature_space;
  std::vector<std::string> label_names;
  std::vector<double> weights;
  TrainingConfig config;

  int num_labels() const { return feature_space.num_labels(); }
  bool operator==(const CrfModel&) const = default;
};

// Zero-weight model over `space` with the default BIO label names (or
// "L0", "L1", ... for other label counts).
CrfModel make_model(FeatureSpace space, TrainingConfig config = {});

class ModelMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class LatticeScores {
 public:
  LatticeScores(std::size_t length, int num_labels);

  std::size_t length() const { return length_; }
  int num_labels() const { return num_labels_; }

  double& emission(std::size_t pos, int label) { return emission_[pos * num_labels_ + label]; }
  double emission(std::size_t pos, int label) const { return emission_[pos * num_labels_ + label]; }
  double& transition(int prev, int next) { return transition_[prev * num_labels_ + next]; }
  double transition(int prev, int next) const { return transition_[prev * num_labels_ + next]; }

  double log_alpha(std::size_t pos, int label) const { return alpha_[pos * num_labels_ + label]; }
  double log_beta(std::size_t pos, int label) const { return beta_[pos * num_labels_ + label]; }
  // P(y_pos = label | x)
  double marginal(std::size_t pos, int label) const { return marginal_[pos * num_labels_ + label]; }
  // P(y_pos = prev, y_{pos+1} = next | x), pos < length - 1.
  double pair_marginal(std::size_t pos, int prev, int next) const {
    return pair_[(pos * num_labels_ + prev) * num_labels_ + next];
  }

  double log_z() const { return log_z_; }
  // log Z recomputed from the backward recursion.
  double log_z_backward() const { return log_z_backward_; }

  // Unnormalized log score of a complete label sequence.
  double sequence_score(std::span<const int> labels) const;

  // Runs forward-backward over the current emission/transition scores.
  void run_forward_backward();

 private:
  std::size_t length_;
  int num_labels_;
  std::vector<double> emission_;
  std::vector<double> transition_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::vector<double> marginal_;
  std::vector<double> pair_;
  double log_z_ = 0.0;
  double log_z_backward_ = 0.0;
};

// Throws ModelMismatchError if the weight vector does not fit the feature
// space or an observation id is out of range.
LatticeScores score_lattice(const IndexedSentence& sentence, const CrfModel& model);
LatticeScores score_lattice(const FeaturizedSentence& sentence, const CrfModel& model);

struct ObjectiveResult {
  double value = 0.0;
  std::vector<double> gradient;
};

// Negative conditional log-likelihood plus ||w||^2 / (2 sigma^2), and its
// gradient (expected - empirical counts + w / sigma^2). Sentences are
// reduced in input order. Throws std::invalid_argument for unlabeled input.
ObjectiveResult objective_and_gradient(std::span<const IndexedSentence> corpus,
                                       const FeatureSpace& space, std::span<const double> weights,
                                       double l2_sigma);
ObjectiveResult objective_and_gradient(const std::vector<FeaturizedSentence>& corpus,
                                       const CrfModel& model);

struct TrainingSummary {
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double gradient_max_norm = 0.0;
  bool converged = false;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fits weights starting from zero. Deterministic for a fixed config and
// corpus order. Throws TrainingError on a non-finite objective.
CrfModel train(const std::vector<FeaturizedSentence>& corpus, const FeatureSpace& space,
               const TrainingConfig& config, TrainingSummary* summary = nullptr);

// Highest-scoring label sequence. Ties go to the lowest label index, both
// at the final position and at every backpointer.
std::vector<int> viterbi(const IndexedSentence& sentence, const CrfModel& model,
                         double* best_score = nullptr);
std::vector<SequenceLabel> viterbi(const FeaturizedSentence& sentence, const CrfModel& model);

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kModelFormatVersion = 1;

// Line-based text container: magic/version, label order, training config,
// one line per feature (id, hex-float weight, canonical feature string) and
// a trailing FNV-1a checksum. Weights round-trip bit-exactly.
void save_model(std::ostream& out, const CrfModel& model);
// Throws ModelFormatError on bad magic, version mismatch, truncation or
// checksum failure.
CrfModel load_model(std::istream& in);

void save_model_file(const std::string& path, const CrfModel& model);
CrfModel load_model_file(const std::string& path);

}  // namespace lcrf

#endif  // LCRF_CRF_H_
