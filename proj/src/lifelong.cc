#include "lcrf/lifelong.h"

#include <set>
#include <sstream>

#include "lcrf/feature_space.h"
#include "lcrf/features.h"

namespace lcrf {

TrainPhaseResult train_phase(const Corpus& training_corpus, const TrainingConfig& config, int threshold,
                             int iteration_cap) {
  if (iteration_cap < 1) throw std::invalid_argument("iteration cap must be >= 1");
  AspectSet training_aspects = gold_aspects(training_corpus);
  if (training_corpus.sentences.empty()) throw std::invalid_argument("training corpus is empty");

  const std::vector<FeaturizedSentence> featurized =
      featurize_corpus(training_corpus, token_vocabulary(training_aspects));
  const FeatureSpace space = build_feature_space(featurized);

  TrainPhaseResult result;
  result.state.model = train(featurized, space, config, &result.summary);
  result.state.kb = KnowledgeBase(std::move(training_aspects), threshold);
  result.state.iteration_cap = iteration_cap;
  return result;
}

std::vector<std::vector<SequenceLabel>> predict_labels(const CrfModel& model, const Corpus& corpus,
                                                       const AspectSet& knowledge) {
  const WordSet words = token_vocabulary(knowledge);
  std::vector<std::vector<SequenceLabel>> out;
  out.reserve(corpus.sentences.size());
  for (const Sentence& sentence : corpus.sentences) out.push_back(viterbi(featurize(sentence, words), model));
  return out;
}

AspectSet aspects_from_labels(const Corpus& corpus, const std::vector<std::vector<SequenceLabel>>& labels) {
  if (labels.size() != corpus.sentences.size()) throw std::invalid_argument("label/sentence count mismatch");
  AspectSet out;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    for (AspectSpan& span : spans_from_labels(corpus.sentences[s], labels[s])) out.insert(std::move(span.phrase));
  }
  return out;
}

ExtractionResult extract_domain(LifelongState& state, const Corpus& new_corpus) {
  const std::string& domain = new_corpus.domain_name;
  if (state.kb.store().contains(domain)) {
    throw DuplicateDomainError("domain '" + domain + "' has already been processed");
  }
  const int threshold = state.kb.threshold();
  const AspectSet& training = state.kb.training_aspects();
  AspectStore store = state.kb.store();

  ExtractionResult result;
  result.domain_name = domain;

  AspectSet knowledge = state.kb.reliable();
  AspectSet previous_mined;
  for (int iteration = 1; iteration <= state.iteration_cap; ++iteration) {
    result.labels = predict_labels(state.model, new_corpus, knowledge);
    result.aspects = aspects_from_labels(new_corpus, result.labels);
    result.iterations_used = iteration;

    store.upsert(domain, result.aspects);
    AspectSet mined = mine_reliable(store, threshold);

    IterationRecord record;
    record.iteration = iteration;
    record.knowledge_size = knowledge.size();
    record.aspect_count = result.aspects.size();
    record.mined_size = mined.size();
    if (mined == previous_mined) {
      record.converged = true;
      record.empty_first_mining = iteration == 1 && mined.empty();
      result.trace.push_back(record);
      result.converged = true;
      break;
    }
    result.trace.push_back(record);
    knowledge = set_union(training, mined);
    previous_mined = std::move(mined);
    store.remove(domain);
  }
  // On hitting the cap the last extraction is committed.
  if (!result.converged) store.upsert(domain, result.aspects);

  state.kb.set_store(std::move(store));
  state.history[domain] = result.trace;
  return result;
}

std::vector<ExtractionResult> run_sequence(LifelongState& state, const std::vector<Corpus>& corpora) {
  std::set<std::string> names;
  for (const Corpus& c : corpora) {
    if (!names.insert(c.domain_name).second) {
      throw DuplicateDomainError("domain '" + c.domain_name + "' appears more than once");
    }
    if (state.kb.store().contains(c.domain_name)) {
      throw DuplicateDomainError("domain '" + c.domain_name + "' has already been processed");
    }
  }
  std::vector<ExtractionResult> results;
  results.reserve(corpora.size());
  for (const Corpus& c : corpora) results.push_back(extract_domain(state, c));
  return results;
}

std::string format_trace(const ExtractionResult& result) {
  std::ostringstream out;
  for (const IterationRecord& r : result.trace) {
    out << "domain=" << result.domain_name << " iteration=" << r.iteration << " K=" << r.knowledge_size
        << " A=" << r.aspect_count << " mined=" << r.mined_size << " converged=" << (r.converged ? 1 : 0);
    if (r.empty_first_mining) out << " note=empty-first-mining";
    out << '\n';
  }
  out << "domain=" << result.domain_name << " iterations=" << result.iterations_used
      << " aspects=" << result.aspects.size() << " converged=" << (result.converged ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace lcrf
