// Dense indexing of CRF feature functions.
//
// Every observed "<template>=<value>" string becomes an observation id o;
// it owns one emission feature per label, with id o * |Y| + y. Transition
// features (prev, next) follow all emission features. Ids are assigned in
// first-seen order, so the mapping is a pure function of the input order.

#ifndef LCRF_FEATURE_SPACE_H_
#define LCRF_FEATURE_SPACE_H_

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcrf/features.h"

namespace lcrf {

class FeatureSpace {
 public:
  FeatureSpace() = default;
  explicit FeatureSpace(int num_labels);

  int num_labels() const { return num_labels_; }
  std::size_t num_observations() const { return observations_.size(); }
  // H, the total number of feature functions.
  std::size_t size() const;

  // Returns the id of an existing or newly added observation string.
  int add_observation(const std::string& rendered);
  std::optional<int> find_observation(const std::string& rendered) const;
  const std::string& observation(int id) const { return observations_.at(id); }

  std::size_t emission_id(int observation, int label) const {
    return static_cast<std::size_t>(observation) * num_labels_ + label;
  }
  std::size_t transition_id(int prev_label, int next_label) const {
    return num_observations() * num_labels_ + static_cast<std::size_t>(prev_label) * num_labels_ +
           next_label;
  }

  bool operator==(const FeatureSpace& other) const {
    return num_labels_ == other.num_labels_ && observations_ == other.observations_;
  }

 private:
  int num_labels_ = kNumLabels;
  std::vector<std::string> observations_;
  std::unordered_map<std::string, int> ids_;
};

// Observations of one sentence resolved against a feature space. Values
// the space has never seen are dropped.
struct IndexedSentence {
  std::vector<std::vector<int>> observations;
  std::optional<std::vector<int>> gold;

  std::size_t size() const { return observations.size(); }
};

// Throws std::invalid_argument for an empty corpus.
FeatureSpace build_feature_space(const std::vector<FeaturizedSentence>& corpus,
                                 int num_labels = kNumLabels);

IndexedSentence index_sentence(const FeaturizedSentence& sentence, const FeatureSpace& space);

inline int label_index(SequenceLabel label) { return static_cast<int>(label); }
inline SequenceLabel label_at(int index) { return static_cast<SequenceLabel>(index); }

}  // namespace lcrf

#endif  // LCRF_FEATURE_SPACE_H_
