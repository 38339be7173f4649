// Review corpora: tokens with POS tags, dependency arcs and optional BIO
// aspect annotations, plus the extended CoNLL reader/writer.

#ifndef LCRF_CORPUS_H_
#define LCRF_CORPUS_H_

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lcrf {

// Token labels. The numeric order is the label order used everywhere
// (feature indexing, Viterbi tie-breaking, model files).
enum class SequenceLabel : int { kBeginAspect = 0, kInsideAspect = 1, kOther = 2 };

inline constexpr int kNumLabels = 3;

std::string_view label_name(SequenceLabel label);
// Throws std::invalid_argument for anything other than B-ASP, I-ASP, O.
SequenceLabel label_from_name(std::string_view name);

struct Token {
  int index = 0;  // 1-based
  std::string form;
  std::string pos;
  int head = 0;  // 0 = ROOT
  std::string dep_type;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::optional<std::vector<SequenceLabel>> gold_labels;

  std::size_t size() const { return tokens.size(); }
  // Token by 1-based index.
  const Token& at(int index) const { return tokens.at(index - 1); }

  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  std::string domain_name;
  std::vector<Sentence> sentences;
  bool labeled = true;

  bool operator==(const Corpus&) const = default;
};

// Lowercases ASCII letters; other bytes (including UTF-8 sequences) are
// passed through untouched.
std::string normalize_form(std::string_view form);

// A case-normalized, single-space-joined aspect phrase.
class AspectPhrase {
 public:
  // Normalizes case and whitespace. Throws std::invalid_argument if the
  // result is empty.
  explicit AspectPhrase(std::string_view text);

  const std::string& text() const { return text_; }
  // The individual words of the phrase.
  std::vector<std::string> words() const;

  auto operator<=>(const AspectPhrase&) const = default;

 private:
  std::string text_;
};

using AspectSet = std::set<AspectPhrase>;

// A phrase together with where it occurs: 1-based start token index and
// length in tokens.
struct AspectSpan {
  AspectPhrase phrase;
  int start = 1;
  int length = 1;

  int end() const { return start + length; }  // exclusive
  auto operator<=>(const AspectSpan&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reads the extended CoNLL format:
//   INDEX FORM POS HEAD DEPREL ASPECT
// tab-separated, one token per line, blank line between sentences, '#'
// comment lines. ASPECT is B-ASP, I-ASP, O, or "_" for unlabeled tokens.
// Throws ParseError naming the offending line.
Corpus parse_corpus(std::istream& input, std::string domain_name);

// Reads a corpus file; the domain name defaults to the file stem.
// Throws std::runtime_error if the file cannot be opened.
Corpus read_corpus_file(const std::string& path,
                        std::optional<std::string> domain_name = std::nullopt);

// Writes the corpus in the extended CoNLL format. When `labels` is given it
// must hold one label sequence per sentence and replaces the ASPECT column;
// otherwise gold labels (or "_") are written.
void write_corpus(std::ostream& output, const Corpus& corpus,
                  const std::vector<std::vector<SequenceLabel>>* labels = nullptr);

// Checks the strict BIO rule (no I-ASP at sentence start or after O).
// Returns the 0-based position of the first violation, if any.
std::optional<std::size_t> find_bio_violation(const std::vector<SequenceLabel>& labels);

// Decodes maximal B-ASP/I-ASP runs into phrases. An I-ASP without a
// preceding B-ASP/I-ASP opens a new span. Throws std::invalid_argument on a
// length mismatch.
std::vector<AspectSpan> spans_from_labels(const Sentence& sentence,
                                          const std::vector<SequenceLabel>& labels);

// Inverse of spans_from_labels for non-overlapping spans.
std::vector<SequenceLabel> labels_from_spans(std::size_t length,
                                             const std::vector<AspectSpan>& spans);

// Set of all gold aspect phrases. Throws std::invalid_argument if the
// corpus is not labeled.
AspectSet gold_aspects(const Corpus& corpus);

}  // namespace lcrf

#endif  // LCRF_CORPUS_H_
