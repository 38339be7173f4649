// Aspect-level precision/recall/F1 and the dictionary baseline (CRF+R).

#ifndef LCRF_EVAL_H_
#define LCRF_EVAL_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lcrf/corpus.h"

namespace lcrf {

enum class ScoringMode {
  kOccurrence,  // exact (sentence, start, length) spans
  kType,        // distinct normalized phrases
};

std::string_view mode_name(ScoringMode mode);
ScoringMode mode_from_name(std::string_view name);

struct SpanOccurrence {
  int sentence = 0;  // 0-based sentence position in the corpus
  AspectSpan span;

  auto operator<=>(const SpanOccurrence&) const = default;
};

// Spans of every sentence, decoded leniently.
std::vector<SpanOccurrence> occurrences_from_labels(const Corpus& corpus,
                                                    const std::vector<std::vector<SequenceLabel>>& labels);
// Gold spans; throws std::invalid_argument if the corpus is unlabeled.
std::vector<SpanOccurrence> gold_occurrences(const Corpus& corpus);

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positive = 0;
  std::size_t predicted_count = 0;
  std::size_t gold_count = 0;
};

EvalReport evaluate(const std::vector<SpanOccurrence>& predicted, const std::vector<SpanOccurrence>& gold,
                    ScoringMode mode);

class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws AlignmentError unless both corpora have the same sentences with
// the same token counts.
void check_alignment(const Corpus& gold, const Corpus& predicted);
// Same check for a bare label matrix.
void check_alignment(const Corpus& corpus, const std::vector<std::vector<SequenceLabel>>& labels);

// Adds dictionary matches of `dictionary` to the CRF output: scanning each
// sentence left to right, the longest phrase of the dictionary starting at
// a token not covered by an existing span is added, provided it overlaps no
// existing span. CRF spans are never removed.
std::vector<std::vector<SequenceLabel>> crf_plus_r(const std::vector<std::vector<SequenceLabel>>& crf_labels,
                                                   const Corpus& corpus, const AspectSet& dictionary);

struct ReportRow {
  std::string domain;
  std::string system;  // crf, crf+r, lifelong
  ScoringMode mode = ScoringMode::kOccurrence;
  EvalReport report;
};

// domain=<d> P=<p> R=<r> F1=<f> mode=<m> system=<s>, one line per row.
std::string format_report_lines(const std::vector<ReportRow>& rows);
// Aligned table: one line per (domain, mode) with P/R/F1 per system, in
// percentages.
std::string format_report_table(const std::vector<ReportRow>& rows);

}  // namespace lcrf

#endif  // LCRF_EVAL_H_
