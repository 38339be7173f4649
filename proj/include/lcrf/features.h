// Per-token feature extraction with the templates
//   G, W, -1W, +1W, P, -1P, +1P
// where G values are dependency patterns: a relation with positions
// removed, the current word replaced by a wildcard and the other word
// abstracted to A (known aspect word) or O plus its POS tag.

#ifndef LCRF_FEATURES_H_
#define LCRF_FEATURES_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lcrf/corpus.h"
#include "lcrf/knowledge.h"

namespace lcrf {

struct DependencyRelation {
  std::string rel_type;
  std::string gov_form;
  int gov_index = 0;  // 0 for ROOT
  std::string gov_pos;
  std::string dep_form;
  int dep_index = 1;
  std::string dep_pos;

  bool operator==(const DependencyRelation&) const = default;
};

enum class Role { kGovernor, kDependent };
enum class OtherLabel { kAspect, kOther };

struct DependencyPattern {
  std::string rel_type;
  Role current_role = Role::kDependent;
  OtherLabel other_label = OtherLabel::kOther;
  std::string other_pos;

  // "(type, A, POS, *)" when the current word is the dependent,
  // "(type, *, A, POS)" when it is the governor.
  std::string render() const;

  bool operator==(const DependencyPattern&) const = default;
};

enum class Template { kG, kW, kPrevW, kNextW, kP, kPrevP, kNextP };

inline constexpr Template kAllTemplates[] = {Template::kG,     Template::kW,    Template::kPrevW,
                                             Template::kNextW, Template::kP,    Template::kPrevP,
                                             Template::kNextP};

std::string_view template_name(Template t);
std::optional<Template> template_from_name(std::string_view name);

struct FeatureValue {
  Template templ = Template::kW;
  std::string value;

  // Canonical "<template>=<value>" string used as the feature-space key.
  std::string render() const;

  auto operator<=>(const FeatureValue&) const = default;
};

struct FeaturizedSentence {
  // One entry per token; G values are deduplicated and sorted.
  std::vector<std::vector<FeatureValue>> tokens;
  std::optional<std::vector<SequenceLabel>> gold_labels;

  std::size_t size() const { return tokens.size(); }
};

// All relations the token at 1-based `index` takes part in: the arc to its
// governor plus one arc per dependent, ordered by (dep_index, gov_index).
// The root arc uses governor "ROOT", index 0, and echoes the token's POS.
// Throws std::out_of_range for a bad index.
std::vector<DependencyRelation> relations_for_token(const Sentence& sentence, int index);

// Throws std::invalid_argument when current_index is on neither side.
DependencyPattern generalize_relation(const DependencyRelation& rel, int current_index,
                                      const WordSet& aspect_words);

FeaturizedSentence featurize(const Sentence& sentence, const WordSet& aspect_words);

std::vector<FeaturizedSentence> featurize_corpus(const Corpus& corpus,
                                                 const WordSet& aspect_words);

}  // namespace lcrf

#endif  // LCRF_FEATURES_H_
