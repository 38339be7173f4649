// Past knowledge for lifelong extraction: the training aspects, the
// per-domain store of extracted aspects and the reliable set mined from it.

#ifndef LCRF_KNOWLEDGE_H_
#define LCRF_KNOWLEDGE_H_

#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lcrf/corpus.h"

namespace lcrf {

using WordSet = std::set<std::string>;

class AspectStore {
 public:
  struct Entry {
    std::string domain_name;
    AspectSet aspects;

    bool operator==(const Entry&) const = default;
  };

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& domain_name) const;
  // nullptr when absent.
  const AspectSet* find(const std::string& domain_name) const;

  // Replaces an existing entry in place, otherwise appends.
  void upsert(const std::string& domain_name, AspectSet aspects);
  // No-op when absent.
  void remove(const std::string& domain_name);

  bool operator==(const AspectStore&) const = default;

 private:
  std::vector<Entry> entries_;
};

// Phrases that occur in at least `threshold` distinct domains. Throws
// std::invalid_argument if threshold < 1.
AspectSet mine_reliable(const AspectStore& store, int threshold);

// Word-level view of a phrase set: every word of every phrase.
WordSet token_vocabulary(const AspectSet& aspects);

AspectSet set_union(const AspectSet& a, const AspectSet& b);

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  // Starts with reliable = training_aspects and an empty store.
  KnowledgeBase(AspectSet training_aspects, int threshold);

  const AspectSet& training_aspects() const { return training_; }
  const AspectStore& store() const { return store_; }
  const AspectSet& reliable() const { return reliable_; }
  int threshold() const { return threshold_; }

  // Replaces the store and recomputes the reliable set.
  void set_store(AspectStore store);
  void set_threshold(int threshold);

  bool operator==(const KnowledgeBase&) const = default;

 private:
  void refresh();

  AspectSet training_;
  AspectStore store_;
  AspectSet reliable_;
  int threshold_ = 2;
};

// Knowledge file:
//   [meta]
//   lambda=<int>
//   [training]
//   <phrase per line, sorted>
//   [domain <name>]
//   <phrase per line, sorted>
// Domain sections follow store order.
void save_knowledge(std::ostream& out, const KnowledgeBase& kb);
// Throws ParseError on malformed input.
KnowledgeBase load_knowledge(std::istream& in);

// Write-to-temporary-then-rename, so readers never observe a partial file.
void save_knowledge_file(const std::string& path, const KnowledgeBase& kb);
KnowledgeBase load_knowledge_file(const std::string& path);

}  // namespace lcrf

#endif  // LCRF_KNOWLEDGE_H_
