#include "lcrf/knowledge.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace lcrf {

bool AspectStore::contains(const std::string& domain_name) const {
  return find(domain_name) != nullptr;
}

const AspectSet* AspectStore::find(const std::string& domain_name) const {
  for (const Entry& e : entries_) {
    if (e.domain_name == domain_name) return &e.aspects;
  }
  return nullptr;
}

void AspectStore::upsert(const std::string& domain_name, AspectSet aspects) {
  for (Entry& e : entries_) {
    if (e.domain_name == domain_name) {
      e.aspects = std::move(aspects);
      return;
    }
  }
  entries_.push_back(Entry{domain_name, std::move(aspects)});
}

void AspectStore::remove(const std::string& domain_name) {
  std::erase_if(entries_, [&](const Entry& e) { return e.domain_name == domain_name; });
}

AspectSet mine_reliable(const AspectStore& store, int threshold) {
  if (threshold < 1) throw std::invalid_argument("frequency threshold must be >= 1");
  // Each entry holds a set, so counting entries counts distinct domains.
  std::map<AspectPhrase, int> domain_counts;
  for (const auto& entry : store.entries()) {
    for (const AspectPhrase& phrase : entry.aspects) ++domain_counts[phrase];
  }
  AspectSet out;
  for (const auto& [phrase, count] : domain_counts) {
    if (count >= threshold) out.insert(phrase);
  }
  return out;
}

WordSet token_vocabulary(const AspectSet& aspects) {
  WordSet words;
  for (const AspectPhrase& phrase : aspects) {
    for (std::string& w : phrase.words()) words.insert(std::move(w));
  }
  return words;
}

AspectSet set_union(const AspectSet& a, const AspectSet& b) {
  AspectSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

KnowledgeBase::KnowledgeBase(AspectSet training_aspects, int threshold)
    : training_(std::move(training_aspects)), threshold_(threshold) {
  if (threshold < 1) throw std::invalid_argument("frequency threshold must be >= 1");
  refresh();
}

void KnowledgeBase::set_store(AspectStore store) {
  store_ = std::move(store);
  refresh();
}

void KnowledgeBase::set_threshold(int threshold) {
  if (threshold < 1) throw std::invalid_argument("frequency threshold must be >= 1");
  threshold_ = threshold;
  refresh();
}

void KnowledgeBase::refresh() { reliable_ = set_union(training_, mine_reliable(store_, threshold_)); }

void save_knowledge(std::ostream& out, const KnowledgeBase& kb) {
  out << "[meta]\nlambda=" << kb.threshold() << "\n[training]\n";
  for (const AspectPhrase& p : kb.training_aspects()) out << p.text() << '\n';
  for (const auto& entry : kb.store().entries()) {
    out << "[domain " << entry.domain_name << "]\n";
    for (const AspectPhrase& p : entry.aspects) out << p.text() << '\n';
  }
}

KnowledgeBase load_knowledge(std::istream& in) {
  enum class Section { kNone, kMeta, kTraining, kDomain };
  Section section = Section::kNone;
  std::optional<int> threshold;
  AspectSet training;
  AspectStore store;
  std::string domain;
  AspectSet domain_aspects;
  bool seen_training = false;

  auto close_domain = [&] {
    if (section == Section::kDomain) store.upsert(domain, std::move(domain_aspects));
    domain_aspects.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      close_domain();
      const std::string header = line.substr(1, line.size() - 2);
      if (header == "meta") {
        section = Section::kMeta;
      } else if (header == "training") {
        section = Section::kTraining;
        seen_training = true;
      } else if (header.rfind("domain ", 0) == 0 && header.size() > 7) {
        section = Section::kDomain;
        domain = header.substr(7);
        if (store.contains(domain)) throw ParseError(line_no, "duplicate domain '" + domain + "'");
      } else {
        throw ParseError(line_no, "unknown section [" + header + "]");
      }
      continue;
    }
    switch (section) {
      case Section::kNone:
        throw ParseError(line_no, "content before first section");
      case Section::kMeta: {
        if (line.rfind("lambda=", 0) != 0) throw ParseError(line_no, "unknown meta key");
        try {
          std::size_t used = 0;
          threshold = std::stoi(line.substr(7), &used);
          if (used != line.size() - 7 || *threshold < 1) throw std::invalid_argument("lambda");
        } catch (const std::exception&) {
          throw ParseError(line_no, "invalid lambda value");
        }
        break;
      }
      case Section::kTraining:
        training.insert(AspectPhrase(line));
        break;
      case Section::kDomain:
        domain_aspects.insert(AspectPhrase(line));
        break;
    }
  }
  close_domain();
  if (!threshold) throw ParseError(line_no, "missing [meta] lambda");
  if (!seen_training) throw ParseError(line_no, "missing [training] section");
  KnowledgeBase kb(std::move(training), *threshold);
  kb.set_store(std::move(store));
  return kb;
}

void save_knowledge_file(const std::string& path, const KnowledgeBase& kb) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    save_knowledge(out, kb);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

KnowledgeBase load_knowledge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open knowledge file: " + path);
  return load_knowledge(in);
}

}  // namespace lcrf
