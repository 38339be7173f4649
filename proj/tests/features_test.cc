#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include "lcrf/feature_space.h"
#include "lcrf/features.h"
#include "test_util.h"

using namespace lcrf;

namespace {

Sentence camera_review() {
  std::istringstream in(testing::kCameraReviewConll);
  return parse_corpus(in, "t").sentences[0];
}

const WordSet kBatteryCamera = {"battery", "camera"};

std::set<std::string> values_of(const std::vector<FeatureValue>& values, Template t) {
  std::set<std::string> out;
  for (const FeatureValue& v : values) {
    if (v.templ == t) out.insert(v.value);
  }
  return out;
}

DependencyRelation rel(std::string type, std::string gov, int gi, std::string gp, std::string dep, int di,
                       std::string dp) {
  return {std::move(type), std::move(gov), gi, std::move(gp), std::move(dep), di, std::move(dp)};
}

}  // namespace

TEST_CASE("relations_for_token lists the arcs of each word in the camera review") {
  const Sentence s = camera_review();
  SUBCASE("camera") {
    const auto r = relations_for_token(s, 5);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == rel("case", "camera", 5, "NN", "of", 3, "IN"));
    CHECK(r[1] == rel("det", "camera", 5, "NN", "this", 4, "DT"));
    CHECK(r[2] == rel("nmod", "battery", 2, "NN", "camera", 5, "NN"));
  }
  SUBCASE("The") {
    const auto r = relations_for_token(s, 1);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == rel("det", "battery", 2, "NN", "The", 1, "DT"));
  }
  SUBCASE("great carries the root arc with its own POS echoed") {
    const auto r = relations_for_token(s, 7);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == rel("nsubj", "great", 7, "JJ", "battery", 2, "NN"));
    CHECK(r[1] == rel("cop", "great", 7, "JJ", "is", 6, "VBZ"));
    CHECK(r[2] == rel("root", "ROOT", 0, "JJ", "great", 7, "JJ"));
  }
  SUBCASE("single-token sentence") {
    Sentence one;
    one.tokens.push_back(Token{1, "Great", "JJ", 0, "root"});
    const auto r = relations_for_token(one, 1);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == rel("root", "ROOT", 0, "JJ", "Great", 1, "JJ"));
  }
  SUBCASE("index out of range") {
    CHECK_THROWS_AS(relations_for_token(s, 0), std::out_of_range);
    CHECK_THROWS_AS(relations_for_token(s, 8), std::out_of_range);
  }
}

TEST_CASE("generalize_relation") {
  const auto nmod = rel("nmod", "battery", 2, "NN", "camera", 5, "NN");
  CHECK(generalize_relation(nmod, 5, kBatteryCamera).render() == "(nmod, A, NN, *)");
  CHECK(generalize_relation(nmod, 2, kBatteryCamera).render() == "(nmod, *, A, NN)");
  CHECK(generalize_relation(rel("det", "camera", 5, "NN", "this", 4, "DT"), 5, {}).render() == "(det, *, O, DT)");

  const DependencyPattern p = generalize_relation(nmod, 5, kBatteryCamera);
  CHECK(p.current_role == Role::kDependent);
  CHECK(p.other_label == OtherLabel::kAspect);
  CHECK(p.other_pos == "NN");

  SUBCASE("membership is case-insensitive") {
    CHECK(generalize_relation(rel("nmod", "Battery", 2, "NN", "camera", 5, "NN"), 5, {"battery"}).other_label ==
          OtherLabel::kAspect);
  }
  SUBCASE("ROOT is never an aspect") {
    CHECK(generalize_relation(rel("root", "ROOT", 0, "JJ", "great", 7, "JJ"), 7, {"root"}).render() ==
          "(root, O, JJ, *)");
  }
  SUBCASE("current index on neither side") {
    CHECK_THROWS_AS(generalize_relation(nmod, 3, kBatteryCamera), std::invalid_argument);
  }
}

TEST_CASE("featurize") {
  const Sentence s = camera_review();
  const FeaturizedSentence fs = featurize(s, kBatteryCamera);
  REQUIRE(fs.size() == 7);
  CHECK(fs.gold_labels == s.gold_labels);

  SUBCASE("camera") {
    const auto& camera = fs.tokens[4];
    CHECK(values_of(camera, Template::kG) ==
          std::set<std::string>{"(case, *, O, IN)", "(det, *, O, DT)", "(nmod, A, NN, *)"});
    CHECK(values_of(camera, Template::kW) == std::set<std::string>{"camera"});
    CHECK(values_of(camera, Template::kP) == std::set<std::string>{"NN"});
    CHECK(values_of(camera, Template::kPrevW) == std::set<std::string>{"this"});
    CHECK(values_of(camera, Template::kNextW) == std::set<std::string>{"is"});
    CHECK(values_of(camera, Template::kPrevP) == std::set<std::string>{"DT"});
    CHECK(values_of(camera, Template::kNextP) == std::set<std::string>{"VBZ"});
  }
  SUBCASE("battery") {
    CHECK(values_of(fs.tokens[1], Template::kG) ==
          std::set<std::string>{"(nsubj, O, JJ, *)", "(det, *, O, DT)", "(nmod, *, A, NN)"});
  }
  SUBCASE("boundaries") {
    CHECK(values_of(fs.tokens[0], Template::kPrevW).empty());
    CHECK(values_of(fs.tokens[0], Template::kPrevP).empty());
    CHECK(values_of(fs.tokens[6], Template::kNextW).empty());
    CHECK(values_of(fs.tokens[6], Template::kNextP).empty());
  }
  SUBCASE("aspect words only flip A/O slots") {
    const FeaturizedSentence plain = featurize(s, {});
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (Template t : kAllTemplates) {
        if (t == Template::kG) continue;
        CHECK(values_of(plain.tokens[i], t) == values_of(fs.tokens[i], t));
      }
    }
    CHECK(values_of(plain.tokens[4], Template::kG) ==
          std::set<std::string>{"(case, *, O, IN)", "(det, *, O, DT)", "(nmod, O, NN, *)"});
  }
}

TEST_CASE("rendered feature strings") {
  CHECK(FeatureValue{Template::kPrevW, "this"}.render() == "-1W=this");
  CHECK(FeatureValue{Template::kG, "(det, *, O, DT)"}.render() == "G=(det, *, O, DT)");
  for (Template t : kAllTemplates) CHECK(template_from_name(template_name(t)) == t);
  CHECK_FALSE(template_from_name("X").has_value());
}

TEST_CASE("build_feature_space") {
  SUBCASE("one W value, three labels") {
    FeaturizedSentence fs;
    fs.tokens = {{FeatureValue{Template::kW, "battery"}}};
    const FeatureSpace space = build_feature_space({fs}, 3);
    CHECK(space.num_observations() == 1);
    CHECK(space.size() == 12);
    std::set<std::size_t> ids;
    for (int y = 0; y < 3; ++y) ids.insert(space.emission_id(0, y));
    for (int p = 0; p < 3; ++p) {
      for (int n = 0; n < 3; ++n) ids.insert(space.transition_id(p, n));
    }
    CHECK(ids.size() == 12);
    CHECK(*ids.rbegin() == 11);
  }
  SUBCASE("unseen values are dropped at indexing time") {
    FeaturizedSentence train;
    train.tokens = {{FeatureValue{Template::kW, "battery"}}};
    const FeatureSpace space = build_feature_space({train});
    FeaturizedSentence test;
    test.tokens = {{FeatureValue{Template::kW, "warranty"}, FeatureValue{Template::kW, "battery"}}};
    const IndexedSentence indexed = index_sentence(test, space);
    CHECK(indexed.observations[0] == std::vector<int>{0});
  }
  SUBCASE("identical values share one observation") {
    FeaturizedSentence fs;
    fs.tokens = {{FeatureValue{Template::kP, "NN"}}, {FeatureValue{Template::kP, "NN"}}};
    CHECK(build_feature_space({fs}).num_observations() == 1);
  }
  SUBCASE("ids follow first-seen order") {
    const FeatureSpace a = build_feature_space({featurize(camera_review(), kBatteryCamera)});
    const FeatureSpace b = build_feature_space({featurize(camera_review(), kBatteryCamera)});
    CHECK(a == b);
    CHECK(a.observation(0) == "G=(det, A, NN, *)");
  }
  SUBCASE("empty corpus") { CHECK_THROWS_AS(build_feature_space({}), std::invalid_argument); }
}

TEST_CASE("property: arc coverage and pattern structure") {
  std::mt19937 rng(3);
  const WordSet vocab = {"battery", "screen", "price"};
  for (int trial = 0; trial < 200; ++trial) {
    const Sentence s = testing::random_sentence(rng, 1 + static_cast<int>(rng() % 8));

    std::map<std::tuple<int, int, std::string>, int> arcs;
    for (int i = 1; i <= static_cast<int>(s.size()); ++i) {
      for (const DependencyRelation& r : relations_for_token(s, i)) {
        ++arcs[{r.gov_index, r.dep_index, r.rel_type}];
        const DependencyPattern p = generalize_relation(r, i, vocab);
        // Components are exactly (type, *, label, pos) or (type, label, pos, *).
        const std::string label = p.other_label == OtherLabel::kAspect ? "A" : "O";
        const std::string expected = p.current_role == Role::kDependent
                                         ? "(" + r.rel_type + ", " + label + ", " + p.other_pos + ", *)"
                                         : "(" + r.rel_type + ", *, " + label + ", " + p.other_pos + ")";
        CHECK(p.render() == expected);
        CHECK((p.other_pos == r.gov_pos || p.other_pos == r.dep_pos));
      }
    }
    for (const auto& [key, count] : arcs) {
      // The root arc has only one real endpoint.
      CHECK(count == (std::get<0>(key) == 0 ? 1 : 2));
    }

    const FeaturizedSentence with = featurize(s, vocab);
    const FeaturizedSentence without = featurize(s, {});
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto strip = [](std::set<std::string> v) {
        std::multiset<std::string> out;
        for (std::string x : v) {
          for (char& c : x) {
            if (c == 'A') c = 'O';
          }
          out.insert(x);
        }
        return out;
      };
      // Flipping A back to O gives the plain patterns (modulo dedup).
      const auto a = strip(values_of(with.tokens[i], Template::kG));
      const auto b = strip(values_of(without.tokens[i], Template::kG));
      CHECK(std::set<std::string>(a.begin(), a.end()) == std::set<std::string>(b.begin(), b.end()));
      CHECK(relations_for_token(s, static_cast<int>(i) + 1).size() >= values_of(with.tokens[i], Template::kG).size());
    }
  }
}

TEST_CASE("property: pattern rendering is injective") {
  std::set<std::string> rendered;
  int count = 0;
  for (const std::string type : {"det", "nmod", "case", "nsubj"}) {
    for (Role role : {Role::kGovernor, Role::kDependent}) {
      for (OtherLabel label : {OtherLabel::kAspect, OtherLabel::kOther}) {
        for (const std::string pos : {"NN", "DT", "JJ", "IN"}) {
          rendered.insert(DependencyPattern{type, role, label, pos}.render());
          ++count;
        }
      }
    }
  }
  CHECK(rendered.size() == static_cast<std::size_t>(count));
}
