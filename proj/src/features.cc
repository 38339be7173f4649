#include "lcrf/features.h"

#include <algorithm>
#include <stdexcept>

namespace lcrf {

namespace {

constexpr std::string_view kRootForm = "ROOT";

DependencyRelation arc(const Sentence& sentence, const Token& dependent) {
  DependencyRelation rel;
  rel.rel_type = dependent.dep_type;
  rel.dep_form = dependent.form;
  rel.dep_index = dependent.index;
  rel.dep_pos = dependent.pos;
  rel.gov_index = dependent.head;
  if (dependent.head == 0) {
    rel.gov_form = kRootForm;
    rel.gov_pos = dependent.pos;
  } else {
    const Token& governor = sentence.at(dependent.head);
    rel.gov_form = governor.form;
    rel.gov_pos = governor.pos;
  }
  return rel;
}

}  // namespace

std::string DependencyPattern::render() const {
  const char* label = other_label == OtherLabel::kAspect ? "A" : "O";
  std::string out = "(" + rel_type + ", ";
  if (current_role == Role::kDependent) {
    out += label;
    out += ", " + other_pos + ", *)";
  } else {
    out += "*, ";
    out += label;
    out += ", " + other_pos + ")";
  }
  return out;
}

std::string_view template_name(Template t) {
  switch (t) {
    case Template::kG:
      return "G";
    case Template::kW:
      return "W";
    case Template::kPrevW:
      return "-1W";
    case Template::kNextW:
      return "+1W";
    case Template::kP:
      return "P";
    case Template::kPrevP:
      return "-1P";
    case Template::kNextP:
      return "+1P";
  }
  return "W";
}

std::optional<Template> template_from_name(std::string_view name) {
  for (Template t : kAllTemplates) {
    if (template_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string FeatureValue::render() const {
  std::string out(template_name(templ));
  out += '=';
  out += value;
  return out;
}

std::vector<DependencyRelation> relations_for_token(const Sentence& sentence, int index) {
  if (index < 1 || static_cast<std::size_t>(index) > sentence.size()) {
    throw std::out_of_range("token index " + std::to_string(index) + " outside sentence of length " +
                            std::to_string(sentence.size()));
  }
  std::vector<DependencyRelation> out;
  out.push_back(arc(sentence, sentence.at(index)));
  for (const Token& t : sentence.tokens) {
    if (t.head == index) out.push_back(arc(sentence, t));
  }
  std::sort(out.begin(), out.end(), [](const DependencyRelation& a, const DependencyRelation& b) {
    if (a.dep_index != b.dep_index) return a.dep_index < b.dep_index;
    return a.gov_index < b.gov_index;
  });
  return out;
}

DependencyPattern generalize_relation(const DependencyRelation& rel, int current_index,
                                      const WordSet& aspect_words) {
  DependencyPattern pattern;
  pattern.rel_type = rel.rel_type;
  const std::string* other_form = nullptr;
  if (current_index == rel.dep_index) {
    pattern.current_role = Role::kDependent;
    pattern.other_pos = rel.gov_pos;
    // ROOT is not a word, so it can never be an aspect.
    if (rel.gov_index != 0) other_form = &rel.gov_form;
  } else if (current_index == rel.gov_index && current_index != 0) {
    pattern.current_role = Role::kGovernor;
    pattern.other_pos = rel.dep_pos;
    other_form = &rel.dep_form;
  } else {
    throw std::invalid_argument("token " + std::to_string(current_index) +
                                " is not part of relation " + rel.rel_type);
  }
  const bool is_aspect = other_form && aspect_words.contains(normalize_form(*other_form));
  pattern.other_label = is_aspect ? OtherLabel::kAspect : OtherLabel::kOther;
  return pattern;
}

FeaturizedSentence featurize(const Sentence& sentence, const WordSet& aspect_words) {
  FeaturizedSentence out;
  out.gold_labels = sentence.gold_labels;
  const std::size_t length = sentence.size();
  out.tokens.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    const Token& token = sentence.tokens[i];
    auto& values = out.tokens[i];

    std::vector<std::string> patterns;
    for (const DependencyRelation& rel : relations_for_token(sentence, token.index)) {
      patterns.push_back(generalize_relation(rel, token.index, aspect_words).render());
    }
    std::sort(patterns.begin(), patterns.end());
    patterns.erase(std::unique(patterns.begin(), patterns.end()), patterns.end());
    for (std::string& p : patterns) values.push_back({Template::kG, std::move(p)});

    values.push_back({Template::kW, token.form});
    if (i > 0) values.push_back({Template::kPrevW, sentence.tokens[i - 1].form});
    if (i + 1 < length) values.push_back({Template::kNextW, sentence.tokens[i + 1].form});
    values.push_back({Template::kP, token.pos});
    if (i > 0) values.push_back({Template::kPrevP, sentence.tokens[i - 1].pos});
    if (i + 1 < length) values.push_back({Template::kNextP, sentence.tokens[i + 1].pos});
  }
  return out;
}

std::vector<FeaturizedSentence> featurize_corpus(const Corpus& corpus,
                                                 const WordSet& aspect_words) {
  std::vector<FeaturizedSentence> out;
  out.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) out.push_back(featurize(s, aspect_words));
  return out;
}

}  // namespace lcrf
