// Training phase and lifelong prediction phase.
//
// Training featurizes the labeled corpus against the words of its own gold
// aspects, fits the CRF and seeds the knowledge base. Prediction on a new
// domain then iterates: featurize with the current reliable set K, decode,
// add the extracted aspects to the store, mine the reliable set again, and
// stop once mining returns the same set twice in a row. The CRF weights are
// never touched after training.

#ifndef LCRF_LIFELONG_H_
#define LCRF_LIFELONG_H_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcrf/corpus.h"
#include "lcrf/crf.h"
#include "lcrf/knowledge.h"

namespace lcrf {

inline constexpr int kDefaultIterationCap = 10;
inline constexpr int kDefaultThreshold = 2;

struct IterationRecord {
  int iteration = 0;
  std::size_t knowledge_size = 0;  // |K| used for featurization
  std::size_t aspect_count = 0;    // |A| extracted in this iteration
  std::size_t mined_size = 0;      // |mined reliable set| after adding A
  bool converged = false;
  // Mining returned the empty set on the first iteration, which matches
  // the initial empty previous set and ends the loop immediately.
  bool empty_first_mining = false;

  bool operator==(const IterationRecord&) const = default;
};

struct LifelongState {
  CrfModel model;
  KnowledgeBase kb;
  int iteration_cap = kDefaultIterationCap;
  std::map<std::string, std::vector<IterationRecord>> history;
};

struct ExtractionResult {
  std::string domain_name;
  AspectSet aspects;
  std::vector<std::vector<SequenceLabel>> labels;  // per sentence
  int iterations_used = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

class DuplicateDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrainPhaseResult {
  LifelongState state;
  TrainingSummary summary;
};

// Throws std::invalid_argument if the corpus is unlabeled or empty.
TrainPhaseResult train_phase(const Corpus& training_corpus, const TrainingConfig& config,
                             int threshold = kDefaultThreshold,
                             int iteration_cap = kDefaultIterationCap);

// One decoding pass: featurize every sentence against `knowledge` and run
// Viterbi. This is also the plain single-pass CRF baseline when called with
// the training aspects.
std::vector<std::vector<SequenceLabel>> predict_labels(const CrfModel& model, const Corpus& corpus,
                                                       const AspectSet& knowledge);

// Union of the (leniently decoded) spans of every sentence.
AspectSet aspects_from_labels(const Corpus& corpus,
                              const std::vector<std::vector<SequenceLabel>>& labels);

// Runs the lifelong loop on one new domain and commits its aspects to the
// store. Throws DuplicateDomainError if the domain is already stored.
ExtractionResult extract_domain(LifelongState& state, const Corpus& new_corpus);

// extract_domain over each corpus in order. Throws DuplicateDomainError
// before doing any work if names repeat or are already stored.
std::vector<ExtractionResult> run_sequence(LifelongState& state, const std::vector<Corpus>& corpora);

// Text trace: one "iteration=<i> K=<n> A=<n> mined=<n> converged=<0|1>"
// line per iteration, followed by a summary line.
std::string format_trace(const ExtractionResult& result);

}  // namespace lcrf

#endif  // LCRF_LIFELONG_H_
