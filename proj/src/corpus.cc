#include "lcrf/corpus.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lcrf {

namespace {

constexpr std::string_view kUnlabeled = "_";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t tab = line.find('\t', begin);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

bool is_aspect(SequenceLabel label) { return label != SequenceLabel::kOther; }

// Accumulates the lines of one sentence block and validates it on close.
class SentenceBuilder {
 public:
  bool empty() const { return sentence_.tokens.empty(); }

  void add(std::size_t line_no, std::string_view line) {
    const auto fields = split_tabs(line);
    if (fields.size() != 6) {
      throw ParseError(line_no, "expected 6 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    }
    Token token;
    const auto index = parse_int(fields[0]);
    if (!index || *index < 1) throw ParseError(line_no, "invalid token index '" + std::string(fields[0]) + "'");
    const int expected = static_cast<int>(sentence_.tokens.size()) + 1;
    if (*index < expected) {
      throw ParseError(line_no, "duplicate token index " + std::to_string(*index));
    }
    if (*index > expected) {
      throw ParseError(line_no, "token index " + std::to_string(*index) + " out of sequence (expected " +
                                    std::to_string(expected) + ")");
    }
    token.index = *index;
    if (fields[1].empty()) throw ParseError(line_no, "empty word form");
    token.form = fields[1];
    token.pos = fields[2];
    const auto head = parse_int(fields[3]);
    if (!head || *head < 0) throw ParseError(line_no, "invalid head '" + std::string(fields[3]) + "'");
    if (*head == token.index) throw ParseError(line_no, "token is its own head");
    token.head = *head;
    token.dep_type = fields[4];

    if (fields[5] == kUnlabeled) {
      unlabeled_lines_.push_back(line_no);
    } else {
      try {
        labels_.push_back(label_from_name(fields[5]));
      } catch (const std::invalid_argument&) {
        throw ParseError(line_no, "invalid aspect label '" + std::string(fields[5]) + "'");
      }
      labeled_lines_.push_back(line_no);
    }
    lines_.push_back(line_no);
    sentence_.tokens.push_back(std::move(token));
  }

  Sentence finish() {
    const int length = static_cast<int>(sentence_.tokens.size());
    int roots = 0;
    for (std::size_t i = 0; i < sentence_.tokens.size(); ++i) {
      const Token& token = sentence_.tokens[i];
      if (token.head > length) {
        throw ParseError(lines_[i], "head index " + std::to_string(token.head) +
                                        " out of range (sentence has " + std::to_string(length) +
                                        " tokens)");
      }
      if (token.head == 0) ++roots;
    }
    if (roots != 1) {
      throw ParseError(lines_.front(), "sentence must have exactly one root token, found " +
                                           std::to_string(roots));
    }
    if (!labeled_lines_.empty() && !unlabeled_lines_.empty()) {
      throw ParseError(unlabeled_lines_.front(), "sentence mixes labeled and unlabeled tokens");
    }
    if (!labels_.empty()) {
      if (const auto bad = find_bio_violation(labels_)) {
        throw ParseError(lines_[*bad], "invalid BIO transition: I-ASP must follow B-ASP or I-ASP");
      }
      sentence_.gold_labels = std::move(labels_);
    }
    Sentence done = std::move(sentence_);
    *this = SentenceBuilder();
    return done;
  }

 private:
  Sentence sentence_;
  std::vector<SequenceLabel> labels_;
  std::vector<std::size_t> lines_;
  std::vector<std::size_t> labeled_lines_;
  std::vector<std::size_t> unlabeled_lines_;
};

}  // namespace

std::string_view label_name(SequenceLabel label) {
  switch (label) {
    case SequenceLabel::kBeginAspect:
      return "B-ASP";
    case SequenceLabel::kInsideAspect:
      return "I-ASP";
    case SequenceLabel::kOther:
      return "O";
  }
  return "O";
}

SequenceLabel label_from_name(std::string_view name) {
  if (name == "B-ASP") return SequenceLabel::kBeginAspect;
  if (name == "I-ASP") return SequenceLabel::kInsideAspect;
  if (name == "O") return SequenceLabel::kOther;
  throw std::invalid_argument("unknown label: " + std::string(name));
}

std::string normalize_form(std::string_view form) {
  std::string out(form);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

AspectPhrase::AspectPhrase(std::string_view text) {
  std::string normalized;
  std::istringstream words{std::string(text)};
  std::string word;
  while (words >> word) {
    if (!normalized.empty()) normalized += ' ';
    normalized += normalize_form(word);
  }
  if (normalized.empty()) throw std::invalid_argument("empty aspect phrase");
  text_ = std::move(normalized);
}

std::vector<std::string> AspectPhrase::words() const {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (begin <= text_.size()) {
    const std::size_t space = text_.find(' ', begin);
    if (space == std::string::npos) {
      out.push_back(text_.substr(begin));
      break;
    }
    out.push_back(text_.substr(begin, space - begin));
    begin = space + 1;
  }
  return out;
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

Corpus parse_corpus(std::istream& input, std::string domain_name) {
  Corpus corpus;
  corpus.domain_name = std::move(domain_name);
  SentenceBuilder builder;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (builder.empty()) return;
    corpus.sentences.push_back(builder.finish());
  };

  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    builder.add(line_no, line);
  }
  flush();

  for (const Sentence& s : corpus.sentences) {
    if (!s.gold_labels) {
      corpus.labeled = false;
      break;
    }
  }
  return corpus;
}

Corpus read_corpus_file(const std::string& path, std::optional<std::string> domain_name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::string name =
      domain_name ? *std::move(domain_name) : std::filesystem::path(path).stem().string();
  return parse_corpus(in, std::move(name));
}

void write_corpus(std::ostream& output, const Corpus& corpus,
                  const std::vector<std::vector<SequenceLabel>>* labels) {
  if (labels && labels->size() != corpus.sentences.size()) {
    throw std::invalid_argument("label sequences do not match sentence count");
  }
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const Sentence& sentence = corpus.sentences[s];
    const std::vector<SequenceLabel>* row = labels ? &(*labels)[s]
                                            : sentence.gold_labels ? &*sentence.gold_labels
                                                                   : nullptr;
    if (row && row->size() != sentence.size()) {
      throw std::invalid_argument("label sequence length mismatch in sentence " +
                                  std::to_string(s + 1));
    }
    if (s > 0) output << '\n';
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      const Token& t = sentence.tokens[i];
      output << t.index << '\t' << t.form << '\t' << t.pos << '\t' << t.head << '\t'
             << t.dep_type << '\t' << (row ? label_name((*row)[i]) : kUnlabeled) << '\n';
    }
  }
}

std::optional<std::size_t> find_bio_violation(const std::vector<SequenceLabel>& labels) {
  SequenceLabel previous = SequenceLabel::kOther;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == SequenceLabel::kInsideAspect && !is_aspect(previous)) return i;
    previous = labels[i];
  }
  return std::nullopt;
}

std::vector<AspectSpan> spans_from_labels(const Sentence& sentence,
                                          const std::vector<SequenceLabel>& labels) {
  if (labels.size() != sentence.size()) {
    throw std::invalid_argument("label sequence has " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(sentence.size()) + " tokens");
  }
  std::vector<AspectSpan> spans;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (!is_aspect(labels[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < labels.size() && labels[j] == SequenceLabel::kInsideAspect) ++j;
    std::string text;
    for (std::size_t k = i; k < j; ++k) {
      if (k > i) text += ' ';
      text += sentence.tokens[k].form;
    }
    spans.push_back(AspectSpan{AspectPhrase(text), static_cast<int>(i) + 1,
                               static_cast<int>(j - i)});
    i = j;
  }
  return spans;
}

std::vector<SequenceLabel> labels_from_spans(std::size_t length,
                                             const std::vector<AspectSpan>& spans) {
  std::vector<SequenceLabel> labels(length, SequenceLabel::kOther);
  for (const AspectSpan& span : spans) {
    if (span.start < 1 || static_cast<std::size_t>(span.end() - 1) > length) {
      throw std::out_of_range("span outside sentence");
    }
    labels[span.start - 1] = SequenceLabel::kBeginAspect;
    for (int k = span.start; k < span.end() - 1; ++k) labels[k] = SequenceLabel::kInsideAspect;
  }
  return labels;
}

AspectSet gold_aspects(const Corpus& corpus) {
  if (!corpus.labeled) {
    throw std::invalid_argument("corpus '" + corpus.domain_name + "' is not labeled");
  }
  AspectSet out;
  for (const Sentence& sentence : corpus.sentences) {
    for (AspectSpan& span : spans_from_labels(sentence, *sentence.gold_labels)) {
      out.insert(std::move(span.phrase));
    }
  }
  return out;
}

}  // namespace lcrf
