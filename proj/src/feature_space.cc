#include "lcrf/feature_space.h"

#include <stdexcept>

namespace lcrf {

FeatureSpace::FeatureSpace(int num_labels) : num_labels_(num_labels) {
  if (num_labels < 1) throw std::invalid_argument("feature space needs at least one label");
}

std::size_t FeatureSpace::size() const {
  const auto y = static_cast<std::size_t>(num_labels_);
  return num_observations() * y + y * y;
}

int FeatureSpace::add_observation(const std::string& rendered) {
  const auto [it, inserted] = ids_.try_emplace(rendered, static_cast<int>(observations_.size()));
  if (inserted) observations_.push_back(rendered);
  return it->second;
}

std::optional<int> FeatureSpace::find_observation(const std::string& rendered) const {
  const auto it = ids_.find(rendered);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

FeatureSpace build_feature_space(const std::vector<FeaturizedSentence>& corpus, int num_labels) {
  if (corpus.empty()) throw std::invalid_argument("cannot build a feature space from an empty corpus");
  FeatureSpace space(num_labels);
  for (const FeaturizedSentence& sentence : corpus) {
    for (const auto& token : sentence.tokens) {
      for (const FeatureValue& v : token) space.add_observation(v.render());
    }
  }
  return space;
}

IndexedSentence index_sentence(const FeaturizedSentence& sentence, const FeatureSpace& space) {
  IndexedSentence out;
  out.observations.resize(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    for (const FeatureValue& v : sentence.tokens[i]) {
      if (auto id = space.find_observation(v.render())) out.observations[i].push_back(*id);
    }
  }
  if (sentence.gold_labels) {
    std::vector<int> gold;
    gold.reserve(sentence.gold_labels->size());
    for (SequenceLabel l : *sentence.gold_labels) gold.push_back(label_index(l));
    out.gold = std::move(gold);
  }
  return out;
}

}  // namespace lcrf
