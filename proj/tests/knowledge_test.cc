#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "lcrf/knowledge.h"
#include "test_util.h"

using namespace lcrf;

namespace {

AspectSet phrases(std::initializer_list<const char*> texts) {
  AspectSet out;
  for (const char* t : texts) out.insert(AspectPhrase(t));
  return out;
}

AspectStore three_domain_store() {
  AspectStore s;
  s.upsert("Camera", phrases({"price", "my wife", "battery life", "picture"}));
  s.upsert("Cellphone", phrases({"picture", "husband", "battery life", "expensive"}));
  s.upsert("Washer", phrases({"price", "water", "customer", "shoes"}));
  return s;
}

AspectStore random_store(std::mt19937& rng, int domains) {
  static const char* pool[] = {"price", "battery", "battery life", "screen", "picture", "water", "lens", "menu"};
  AspectStore s;
  for (int d = 0; d < domains; ++d) {
    AspectSet set;
    for (const char* p : pool) {
      if (rng() % 3 == 0) set.insert(AspectPhrase(p));
    }
    s.upsert("d" + std::to_string(d), std::move(set));
  }
  return s;
}

}  // namespace

TEST_CASE("mine_reliable") {
  SUBCASE("three-domain example at threshold 2") {
    CHECK(mine_reliable(three_domain_store(), 2) == phrases({"price", "battery life", "picture"}));
  }
  SUBCASE("threshold 1 is the union") {
    const AspectStore store = three_domain_store();
    AspectSet all;
    for (const auto& e : store.entries()) all.insert(e.aspects.begin(), e.aspects.end());
    CHECK(mine_reliable(three_domain_store(), 1) == all);
  }
  SUBCASE("single domain at threshold 2") {
    AspectStore s;
    s.upsert("Camera", phrases({"price", "lens"}));
    CHECK(mine_reliable(s, 2).empty());
  }
  SUBCASE("empty store") { CHECK(mine_reliable(AspectStore(), 2).empty()); }
  SUBCASE("threshold must be positive") { CHECK_THROWS_AS(mine_reliable(AspectStore(), 0), std::invalid_argument); }
}

TEST_CASE("token_vocabulary") {
  CHECK(token_vocabulary(phrases({"battery life", "price"})) == WordSet{"battery", "life", "price"});
  CHECK(token_vocabulary({}).empty());
  CHECK(token_vocabulary(phrases({"battery", "battery life"})) == WordSet{"battery", "life"});
}

TEST_CASE("store upsert and remove") {
  SUBCASE("upsert then remove restores the store") {
    const AspectStore original = three_domain_store();
    AspectStore s = original;
    s.upsert("Tablet", phrases({"screen"}));
    s.remove("Tablet");
    CHECK(s == original);
  }
  SUBCASE("upsert of an existing domain replaces its set") {
    AspectStore s = three_domain_store();
    s.upsert("Cellphone", phrases({"screen"}));
    CHECK(s.size() == 3);
    CHECK(*s.find("Cellphone") == phrases({"screen"}));
    CHECK(s.entries()[1].domain_name == "Cellphone");
  }
  SUBCASE("remove from empty store") {
    AspectStore s;
    s.remove("Camera");
    CHECK(s.empty());
  }
}

TEST_CASE("property: mining is monotone and order invariant") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const AspectStore store = random_store(rng, 1 + static_cast<int>(rng() % 5));
    const int threshold = 1 + static_cast<int>(rng() % 3);
    const AspectSet mined = mine_reliable(store, threshold);

    AspectStore bigger = store;
    bigger.upsert("extra", random_store(rng, 1).entries()[0].aspects);
    const AspectSet grown = mine_reliable(bigger, threshold);
    CHECK(std::includes(grown.begin(), grown.end(), mined.begin(), mined.end()));

    const AspectSet stricter = mine_reliable(store, threshold + 1);
    CHECK(std::includes(mined.begin(), mined.end(), stricter.begin(), stricter.end()));

    auto entries = store.entries();
    std::shuffle(entries.begin(), entries.end(), rng);
    AspectStore shuffled;
    for (auto& e : entries) shuffled.upsert(e.domain_name, e.aspects);
    CHECK(mine_reliable(shuffled, threshold) == mined);
  }
}

TEST_CASE("property: token_vocabulary distributes over union") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const AspectStore s = random_store(rng, 2);
    const AspectSet& a = s.entries()[0].aspects;
    const AspectSet& b = s.entries()[1].aspects;
    WordSet expected = token_vocabulary(a);
    const WordSet vb = token_vocabulary(b);
    expected.insert(vb.begin(), vb.end());
    CHECK(token_vocabulary(set_union(a, b)) == expected);
  }
}

TEST_CASE("KnowledgeBase keeps reliable = training + mined") {
  KnowledgeBase kb(phrases({"battery", "camera"}), 2);
  CHECK(kb.reliable() == phrases({"battery", "camera"}));
  CHECK(kb.store().empty());
  kb.set_store(three_domain_store());
  CHECK(kb.reliable() == phrases({"battery", "camera", "price", "battery life", "picture"}));
  kb.set_threshold(3);
  CHECK(kb.reliable() == phrases({"battery", "camera"}));
  CHECK_THROWS_AS(KnowledgeBase({}, 0), std::invalid_argument);
}

TEST_CASE("knowledge file round trip and format") {
  KnowledgeBase kb(phrases({"camera", "battery"}), 2);
  AspectStore s;
  s.upsert("Washer", phrases({"water", "price"}));
  s.upsert("Camera", {});
  kb.set_store(s);

  std::ostringstream out;
  save_knowledge(out, kb);
  CHECK(out.str() ==
        "[meta]\nlambda=2\n[training]\nbattery\ncamera\n[domain Washer]\nprice\nwater\n[domain Camera]\n");
  std::istringstream in(out.str());
  CHECK(load_knowledge(in) == kb);
}

TEST_CASE("malformed knowledge files are rejected") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return load_knowledge(in);
  };
  CHECK_THROWS_AS(load("[training]\nprice\n"), ParseError);
  CHECK_THROWS_AS(load("[meta]\nlambda=0\n[training]\n"), ParseError);
  CHECK_THROWS_AS(load("price\n"), ParseError);
  CHECK_THROWS_AS(load("[meta]\nlambda=2\n[training]\n[bogus]\n"), ParseError);
  CHECK_THROWS_AS(load("[meta]\nlambda=2\n[training]\n[domain A]\n[domain A]\n"), ParseError);
}

TEST_CASE("save_knowledge_file replaces the file atomically") {
  testing::TempDir dir;
  const std::string path = dir.file("kb.txt");
  KnowledgeBase kb(phrases({"battery"}), 2);
  save_knowledge_file(path, kb);
  CHECK(load_knowledge_file(path) == kb);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}
