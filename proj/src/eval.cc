#include "lcrf/eval.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace lcrf {

namespace {

template <typename Key>
std::size_t intersection_size(const std::set<Key>& a, const std::set<Key>& b) {
  std::size_t n = 0;
  for (const Key& k : a) n += b.count(k);
  return n;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view mode_name(ScoringMode mode) {
  return mode == ScoringMode::kOccurrence ? "occurrence" : "type";
}

ScoringMode mode_from_name(std::string_view name) {
  if (name == "occurrence") return ScoringMode::kOccurrence;
  if (name == "type") return ScoringMode::kType;
  throw std::invalid_argument("unknown scoring mode '" + std::string(name) + "'");
}

std::vector<SpanOccurrence> occurrences_from_labels(const Corpus& corpus,
                                                    const std::vector<std::vector<SequenceLabel>>& labels) {
  check_alignment(corpus, labels);
  std::vector<SpanOccurrence> out;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    for (AspectSpan& span : spans_from_labels(corpus.sentences[s], labels[s])) {
      out.push_back(SpanOccurrence{static_cast<int>(s), std::move(span)});
    }
  }
  return out;
}

std::vector<SpanOccurrence> gold_occurrences(const Corpus& corpus) {
  if (!corpus.labeled) throw std::invalid_argument("gold corpus '" + corpus.domain_name + "' is not labeled");
  std::vector<std::vector<SequenceLabel>> labels;
  labels.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) labels.push_back(*s.gold_labels);
  return occurrences_from_labels(corpus, labels);
}

EvalReport evaluate(const std::vector<SpanOccurrence>& predicted, const std::vector<SpanOccurrence>& gold,
                    ScoringMode mode) {
  EvalReport r;
  if (mode == ScoringMode::kOccurrence) {
    using Key = std::tuple<int, int, int>;
    auto keys = [](const std::vector<SpanOccurrence>& v) {
      std::set<Key> out;
      for (const SpanOccurrence& o : v) out.emplace(o.sentence, o.span.start, o.span.length);
      return out;
    };
    const auto p = keys(predicted), g = keys(gold);
    r.true_positive = intersection_size(p, g);
    r.predicted_count = p.size();
    r.gold_count = g.size();
  } else {
    auto types = [](const std::vector<SpanOccurrence>& v) {
      AspectSet out;
      for (const SpanOccurrence& o : v) out.insert(o.span.phrase);
      return out;
    };
    const auto p = types(predicted), g = types(gold);
    r.true_positive = intersection_size(p, g);
    r.predicted_count = p.size();
    r.gold_count = g.size();
  }
  r.precision = r.predicted_count ? static_cast<double>(r.true_positive) / r.predicted_count : 0.0;
  r.recall = r.gold_count ? static_cast<double>(r.true_positive) / r.gold_count : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

void check_alignment(const Corpus& gold, const Corpus& predicted) {
  if (gold.sentences.size() != predicted.sentences.size()) {
    throw AlignmentError("sentence count mismatch: gold has " + std::to_string(gold.sentences.size()) +
                         ", predictions have " + std::to_string(predicted.sentences.size()));
  }
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const Sentence& a = gold.sentences[s];
    const Sentence& b = predicted.sentences[s];
    if (a.size() != b.size()) {
      throw AlignmentError("sentence " + std::to_string(s + 1) + ": gold has " + std::to_string(a.size()) +
                           " tokens, predictions have " + std::to_string(b.size()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a.tokens[i].form != b.tokens[i].form) {
        throw AlignmentError("sentence " + std::to_string(s + 1) + " token " + std::to_string(i + 1) +
                             ": '" + a.tokens[i].form + "' vs '" + b.tokens[i].form + "'");
      }
    }
  }
}

void check_alignment(const Corpus& corpus, const std::vector<std::vector<SequenceLabel>>& labels) {
  if (labels.size() != corpus.sentences.size()) {
    throw AlignmentError("sentence count mismatch: corpus has " + std::to_string(corpus.sentences.size()) +
                         ", predictions have " + std::to_string(labels.size()));
  }
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (labels[s].size() != corpus.sentences[s].size()) {
      throw AlignmentError("sentence " + std::to_string(s + 1) + ": " + std::to_string(corpus.sentences[s].size()) +
                           " tokens but " + std::to_string(labels[s].size()) + " labels");
    }
  }
}

std::vector<std::vector<SequenceLabel>> crf_plus_r(const std::vector<std::vector<SequenceLabel>>& crf_labels,
                                                   const Corpus& corpus, const AspectSet& dictionary) {
  check_alignment(corpus, crf_labels);
  std::set<std::vector<std::string>> phrases;
  std::size_t longest = 0;
  for (const AspectPhrase& p : dictionary) {
    auto words = p.words();
    longest = std::max(longest, words.size());
    phrases.insert(std::move(words));
  }

  std::vector<std::vector<SequenceLabel>> out;
  out.reserve(crf_labels.size());
  for (std::size_t s = 0; s < crf_labels.size(); ++s) {
    const Sentence& sentence = corpus.sentences[s];
    std::vector<AspectSpan> spans = spans_from_labels(sentence, crf_labels[s]);
    std::vector<bool> covered(sentence.size(), false);
    for (const AspectSpan& span : spans) {
      for (int k = span.start; k < span.end(); ++k) covered[k - 1] = true;
    }
    std::vector<std::string> forms;
    forms.reserve(sentence.size());
    for (const Token& t : sentence.tokens) forms.push_back(normalize_form(t.form));

    std::size_t i = 0;
    while (i < forms.size()) {
      std::size_t match = 0;
      const std::size_t max_len = std::min(longest, forms.size() - i);
      for (std::size_t len = max_len; len >= 1 && match == 0; --len) {
        bool free = true;
        for (std::size_t k = i; k < i + len && free; ++k) free = !covered[k];
        if (!free) continue;
        std::vector<std::string> window(forms.begin() + i, forms.begin() + i + len);
        if (phrases.contains(window)) match = len;
      }
      if (match == 0) {
        ++i;
        continue;
      }
      std::string text;
      for (std::size_t k = i; k < i + match; ++k) {
        if (k > i) text += ' ';
        text += sentence.tokens[k].form;
        covered[k] = true;
      }
      spans.push_back(AspectSpan{AspectPhrase(text), static_cast<int>(i) + 1, static_cast<int>(match)});
      i += match;
    }
    out.push_back(labels_from_spans(sentence.size(), spans));
  }
  return out;
}

std::string format_report_lines(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  for (const ReportRow& row : rows) {
    out << "domain=" << row.domain << " P=" << fixed(row.report.precision, 4) << " R=" << fixed(row.report.recall, 4)
        << " F1=" << fixed(row.report.f1, 4) << " mode=" << mode_name(row.mode) << " system=" << row.system << '\n';
  }
  return out.str();
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
  std::vector<std::string> systems;
  std::vector<std::pair<std::string, ScoringMode>> keys;
  std::map<std::pair<std::string, ScoringMode>, std::map<std::string, EvalReport>> cells;
  for (const ReportRow& row : rows) {
    if (std::find(systems.begin(), systems.end(), row.system) == systems.end()) systems.push_back(row.system);
    const auto key = std::make_pair(row.domain, row.mode);
    if (!cells.contains(key)) keys.push_back(key);
    cells[key][row.system] = row.report;
  }
  std::size_t domain_width = 6;
  for (const auto& [domain, mode] : keys) domain_width = std::max(domain_width, domain.size());

  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  auto lpad = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
  std::ostringstream out;
  out << pad("Domain", domain_width) << "  " << pad("Mode", 10);
  for (const std::string& sys : systems) out << " | " << pad(sys, 20);
  out << '\n' << pad("", domain_width) << "  " << pad("", 10);
  for (std::size_t i = 0; i < systems.size(); ++i) out << " | " << lpad("P", 6) << ' ' << lpad("R", 6) << ' ' << lpad("F1", 6);
  out << '\n';
  for (const auto& key : keys) {
    out << pad(key.first, domain_width) << "  " << pad(std::string(mode_name(key.second)), 10);
    for (const std::string& sys : systems) {
      const auto it = cells[key].find(sys);
      if (it == cells[key].end()) {
        out << " | " << pad("-", 20);
        continue;
      }
      const EvalReport& r = it->second;
      out << " | " << lpad(fixed(100 * r.precision, 1), 6) << ' ' << lpad(fixed(100 * r.recall, 1), 6) << ' '
          << lpad(fixed(100 * r.f1, 1), 6);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace lcrf
