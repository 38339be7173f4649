#include <doctest.h>

#include <random>
#include <sstream>

#include "lcrf/corpus.h"
#include "test_util.h"

using namespace lcrf;

namespace {

constexpr SequenceLabel B = SequenceLabel::kBeginAspect;
constexpr SequenceLabel I = SequenceLabel::kInsideAspect;
constexpr SequenceLabel O = SequenceLabel::kOther;

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in, "test");
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("parse_corpus reads the camera review sentence") {
  const Corpus c = parse(testing::kCameraReviewConll);
  REQUIRE(c.sentences.size() == 1);
  CHECK(c.labeled);
  const Sentence& s = c.sentences[0];
  REQUIRE(s.size() == 7);
  const Token& battery = s.at(2);
  CHECK(battery.form == "battery");
  CHECK(battery.pos == "NN");
  CHECK(battery.head == 7);
  CHECK(battery.dep_type == "nsubj");
  CHECK(s.at(7).head == 0);
  CHECK(*s.gold_labels == std::vector<SequenceLabel>{O, B, O, O, B, O, O});
}

TEST_CASE("empty input yields an empty, vacuously labeled corpus") {
  const Corpus c = parse("");
  CHECK(c.sentences.empty());
  CHECK(c.labeled);
  CHECK(c.domain_name == "test");
}

TEST_CASE("comments, CRLF and multiple blank lines are tolerated") {
  const Corpus c = parse("# header\r\n1\tgood\tJJ\t0\troot\tO\r\n\n\n# between\n1\tfine\tJJ\t0\troot\t_\n");
  REQUIRE(c.sentences.size() == 2);
  CHECK_FALSE(c.labeled);
  CHECK(c.sentences[0].gold_labels.has_value());
  CHECK_FALSE(c.sentences[1].gold_labels.has_value());
}

TEST_CASE("parse errors name the offending line") {
  SUBCASE("I-ASP after O") {
    CHECK(error_line("1\tthe\tDT\t2\tdet\tO\n2\tlife\tNN\t3\tnsubj\tO\n3\tlife\tNN\t0\troot\tI-ASP\n") == 3);
  }
  SUBCASE("I-ASP at sentence start") {
    CHECK(error_line("# c\n1\tlife\tNN\t0\troot\tI-ASP\n") == 2);
  }
  SUBCASE("wrong column count") {
    CHECK(error_line("1\tthe\tDT\t2\tdet\n") == 1);
  }
  SUBCASE("head out of range") {
    CHECK(error_line("1\tthe\tDT\t5\tdet\tO\n2\tend\tNN\t0\troot\tO\n") == 1);
  }
  SUBCASE("duplicate token index") {
    CHECK(error_line("1\tthe\tDT\t2\tdet\tO\n1\tend\tNN\t0\troot\tO\n") == 2);
  }
  SUBCASE("two roots") {
    CHECK(error_line("\n1\ta\tDT\t0\troot\tO\n2\tb\tNN\t0\troot\tO\n") == 2);
  }
  SUBCASE("self head") {
    CHECK(error_line("1\ta\tDT\t1\tdet\tO\n") == 1);
  }
  SUBCASE("mixed labeled and unlabeled tokens") {
    CHECK(error_line("1\ta\tDT\t2\tdet\tO\n2\tb\tNN\t0\troot\t_\n") == 2);
  }
  SUBCASE("unknown label") {
    CHECK(error_line("1\ta\tNN\t0\troot\tB-XYZ\n") == 1);
  }
}

TEST_CASE("AspectPhrase normalizes case and whitespace") {
  CHECK(AspectPhrase("  Battery   Life ").text() == "battery life");
  CHECK(AspectPhrase("Battery Life") == AspectPhrase("battery life"));
  CHECK(AspectPhrase("battery life").words() == std::vector<std::string>{"battery", "life"});
  CHECK_THROWS_AS(AspectPhrase("   "), std::invalid_argument);
}

TEST_CASE("gold_aspects") {
  SUBCASE("case variants collapse") {
    const Corpus c = parse(
        "1\tbattery\tNN\t2\tcompound\tB-ASP\n2\tlife\tNN\t0\troot\tI-ASP\n\n"
        "1\tBattery\tNN\t2\tcompound\tB-ASP\n2\tLife\tNN\t0\troot\tI-ASP\n");
    CHECK(gold_aspects(c) == AspectSet{AspectPhrase("battery life")});
  }
  SUBCASE("all O") {
    CHECK(gold_aspects(parse("1\tgood\tJJ\t0\troot\tO\n")).empty());
  }
  SUBCASE("camera review sentence") {
    CHECK(gold_aspects(parse(testing::kCameraReviewConll)) == AspectSet{AspectPhrase("battery"), AspectPhrase("camera")});
  }
  SUBCASE("unlabeled corpus is rejected") {
    CHECK_THROWS_AS(gold_aspects(parse("1\tgood\tJJ\t0\troot\t_\n")), std::invalid_argument);
  }
}

TEST_CASE("spans_from_labels") {
  const Sentence review = parse(testing::kCameraReviewConll).sentences[0];
  SUBCASE("camera review labels") {
    const auto spans = spans_from_labels(review, {O, B, O, O, B, O, O});
    REQUIRE(spans.size() == 2);
    CHECK(spans[0] == AspectSpan{AspectPhrase("battery"), 2, 1});
    CHECK(spans[1] == AspectSpan{AspectPhrase("camera"), 5, 1});
  }
  SUBCASE("all O") {
    CHECK(spans_from_labels(review, std::vector<SequenceLabel>(7, O)).empty());
  }
  SUBCASE("single maximal run") {
    const Sentence s = parse(
        "1\tbattery\tNN\t3\tcompound\tO\n2\tlife\tNN\t3\tcompound\tO\n3\tindicator\tNN\t0\troot\tO\n")
                           .sentences[0];
    const auto spans = spans_from_labels(s, {B, I, I});
    REQUIRE(spans.size() == 1);
    CHECK(spans[0] == AspectSpan{AspectPhrase("battery life indicator"), 1, 3});
  }
  SUBCASE("orphan I-ASP opens a span") {
    const auto spans = spans_from_labels(review, {O, I, I, O, B, I, O});
    REQUIRE(spans.size() == 2);
    CHECK(spans[0] == AspectSpan{AspectPhrase("battery of"), 2, 2});
    CHECK(spans[1] == AspectSpan{AspectPhrase("camera is"), 5, 2});
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(spans_from_labels(review, {O, B}), std::invalid_argument);
  }
}

TEST_CASE("property: BIO round trip on random valid label sequences") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int length = 1 + static_cast<int>(rng() % 9);
    const Sentence s = testing::random_sentence(rng, length);
    std::vector<SequenceLabel> labels;
    for (int i = 0; i < length; ++i) {
      const int r = static_cast<int>(rng() % 3);
      SequenceLabel l = r == 0 ? B : r == 1 ? I : O;
      if (l == I && (labels.empty() || labels.back() == O)) l = O;
      labels.push_back(l);
    }
    REQUIRE_FALSE(find_bio_violation(labels).has_value());
    CHECK(labels_from_spans(s.size(), spans_from_labels(s, labels)) == labels);
  }
}

TEST_CASE("property: every gold aspect occurs as a contiguous token run") {
  const Corpus c = testing::load_fixture("lifelong/train.conll");
  for (const AspectPhrase& phrase : gold_aspects(c)) {
    const auto words = phrase.words();
    bool found = false;
    for (const Sentence& s : c.sentences) {
      for (std::size_t i = 0; i + words.size() <= s.size() && !found; ++i) {
        bool match = true;
        for (std::size_t k = 0; k < words.size() && match; ++k) {
          match = normalize_form(s.tokens[i + k].form) == words[k];
        }
        found = match;
      }
    }
    CHECK_MESSAGE(found, phrase.text());
  }
}

TEST_CASE("parsing is deterministic and write_corpus round-trips") {
  const Corpus a = testing::load_fixture("lifelong/train.conll");
  const Corpus b = testing::load_fixture("lifelong/train.conll");
  CHECK(a == b);
  std::ostringstream out;
  write_corpus(out, a);
  std::istringstream in(out.str());
  CHECK(parse_corpus(in, a.domain_name) == a);
}

TEST_CASE("read_corpus_file takes the domain name from the file stem") {
  CHECK(testing::load_fixture("lifelong/d4_tablet.conll").domain_name == "d4_tablet");
  CHECK(read_corpus_file(testing::fixture_path("camera_review.conll"), "Camera").domain_name == "Camera");
  CHECK_THROWS(read_corpus_file("/nonexistent/file.conll"));
}
