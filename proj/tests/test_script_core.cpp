#include <doctest.h>

#include <map>
#include <set>

#include "scriptqa/corpus.hpp"
#include "scriptqa/generate.hpp"
#include "test_data.hpp"

using namespace scriptqa;

namespace {

struct CondRef {
  int stories;
  int props;
  const char* sha;
};

struct ScriptRef {
  CondRef unrestricted, restricted, violation;
};

// Reference values produced by tools/enumeration_oracle.py from the same
// data files (independent implementation).
const std::map<std::string, ScriptRef> kRef = {
    {"airport",
     {{720, 5040, "0e17b0b7de356d86a2b0fb7976cb07a639901b7056bf33430014825562fbba78"},
      {448, 3136, "20fa4d146f7906b71e014d3d0e56d2ea03888b87ded006a1a8ea9d0b13fbf166"},
      {16, 112, "ad9d3097b07ad86c5c7f33941659b80530339848a8ded68b6101b286a81f00b1"}}},
    {"bar",
     {{360, 2520, "eef5880261cd29f4cbdb6bc370af3de97faa06d412f0814b62647de4b278f179"},
      {224, 1568, "7cd1fde5178562c22b2ad51aa177ba600c9ba47453bb197280d2599d8a05e5b1"},
      {8, 56, "fdbb5f7f50df7868b3facac976a9ee8e037b26d7ea3bbaa02e47a4d3e7d87597"}}},
    {"beach",
     {{1200, 11480, "3b80c9eda41f1a9e23a544918a445c3a8ec1d82ae77c4fd5d4d19d2ea23f6abf"},
      {900, 8610, "a937c4dd6312706d54848305f11bdfa5a42e3e3f0f60305739d813224d8550ad"},
      {300, 2870, "940c562ba47deb92c687f1a334d0272c90e70247ff60bed92131a0f4d93d9b8c"}}},
    {"park",
     {{2880, 25920, "858b3853ea83391a696235894a3ddea811d9e5d97701e32f4a26bcd5728ec313"},
      {1792, 16128, "cc35ec8428a069f974f594a000dd5850be78ef8e87e5d3335fcc4fbd1de45548"},
      {64, 576, "3cc639ff8d725a3e4c98b886fc69177370b586ecb1d19ab0ab1224d3385f5754"}}},
    {"restaurant",
     {{2160, 15120, "099cfe82b320e65aafa3a10e095529a1db1020fa4216fc4432cc5197f80f7825"},
      {1344, 9408, "7e0a87eef08839e04558686dca69b9e8b42bfe33d53082569c080bdea038f83b"},
      {48, 336, "2e2d647bfcacb20777bd629255adffe8ebf73dfc007cc28ab66651b089485bc4"}}},
};

int total_props(const std::vector<Story>& stories) {
  int n = 0;
  for (const auto& s : stories) n += static_cast<int>(s.props.size());
  return n;
}

}  // namespace

TEST_CASE("bank layout matches the documented widths") {
  const auto& inv = test::inventory();
  CHECK(inv.bank_size(Bank::Agents) == 20);
  CHECK(inv.bank_size(Bank::Topics) == 34);
  CHECK(inv.bank_size(Bank::PatientsThemes) == 34);
  CHECK(inv.bank_size(Bank::RecipientsDestinations) == 23);
  CHECK(inv.bank_size(Bank::Locations) == 6);
  CHECK(inv.bank_size(Bank::Manners) == 10);
  CHECK(inv.bank_size(Bank::Attributes) == 10);
  CHECK(inv.prop_units() == 137);
  CHECK(inv.question_units() == 34);
  CHECK(inv.bank_offset(Bank::Agents) == 0);
  CHECK(inv.bank_offset(Bank::Topics) == 20);
  CHECK(inv.bank_offset(Bank::PatientsThemes) == 54);
  CHECK(inv.bank_offset(Bank::RecipientsDestinations) == 88);
  CHECK(inv.bank_offset(Bank::Locations) == 111);
  CHECK(inv.bank_offset(Bank::Manners) == 117);
  CHECK(inv.bank_offset(Bank::Attributes) == 127);
}

TEST_CASE("vocabulary is bank words plus aliases plus specials") {
  const auto& inv = test::inventory();
  CHECK(inv.num_words() == 98);  // unique concept strings across banks
  CHECK(inv.vocab_size() == 105);
  CHECK(inv.vocab_word(inv.vocab_none()) == "NONE");
  CHECK(inv.vocab_word(inv.vocab_q()) == "Q");
  CHECK(inv.vocab_word(inv.vocab_go()) == "GO");
  CHECK(inv.vocab_go() == 104);
  CHECK(inv.pad_id() == 105);
  CHECK(inv.vocab_id("expensive-wine") >= 98);
  CHECK(inv.vocab_id("cheap-wine") >= 98);
  CHECK(inv.vocab_id("polite") >= 98);
  CHECK(inv.vocab_id("obnoxious") >= 98);
  // Aliases resolve to bank concepts.
  CHECK(inv.resolve("expensive-wine") == inv.id("prosecco"));
  CHECK(inv.resolve("cheap-wine") == inv.id("chardonnay"));
  CHECK(inv.resolve("polite") == inv.id("politely"));
  CHECK(inv.resolve("obnoxious") == inv.id("obnoxiously"));
  // Every concept string has a vocabulary slot.
  for (int sid = 0; sid < inv.num_words(); ++sid) {
    CHECK(inv.vocab_of_sid(sid) >= 0);
    CHECK(inv.vocab_word(inv.vocab_of_sid(sid)) == inv.word(sid));
  }
}

TEST_CASE("entity domains and properties") {
  const auto& inv = test::inventory();
  REQUIRE(inv.persons().size() == 10);
  REQUIRE(inv.vehicles().size() == 4);
  int males = 0, rich = 0;
  for (const auto& p : inv.persons()) {
    males += p.male;
    rich += p.rich;
  }
  CHECK(males == 5);
  CHECK(rich == 6);
  CHECK(inv.person_has(inv.id("Albert"), "male"));
  CHECK(inv.person_has(inv.id("Albert"), "rich"));
  CHECK(inv.person_has(inv.id("Jolene"), "female"));
  CHECK(inv.person_has(inv.id("Jolene"), "cheap"));
  CHECK(inv.word(inv.pronoun(true)) == "he");
  CHECK(inv.word(inv.pronoun(false)) == "she");
  CHECK(inv.is_vehicle(inv.id("Camaro")));
  CHECK_FALSE(inv.is_person(inv.id("waiter")));
}

TEST_CASE("all five scripts parse with their restrictions and rules") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  REQUIRE(set.scripts.size() == 5);
  CHECK(set.scripts[0].name == "airport");
  CHECK(set.scripts[1].name == "bar");
  CHECK(set.scripts[2].name == "beach");
  CHECK(set.scripts[3].name == "park");
  CHECK(set.scripts[4].name == "restaurant");

  const auto& restaurant = set.by_name("restaurant");
  CHECK(restaurant.vars.size() == 3);
  CHECK(restaurant.restricted_concepts ==
        std::vector<int>{inv.id("Lois"), inv.id("Albert")});
  CHECK(restaurant.rule.ant_topic == inv.id("quality"));
  CHECK(restaurant.rule.cons_topic == inv.id("distance"));
  CHECK(restaurant.rule.apply(inv.id("expensive")) == inv.id("far"));
  CHECK(restaurant.rule.apply(inv.id("cheap")) == inv.id("near"));
  CHECK(restaurant.rule.flip(inv.id("far")) == inv.id("near"));

  const auto& beach = set.by_name("beach");
  CHECK(beach.restricted_concepts == std::vector<int>{inv.id("Camaro")});
  CHECK(beach.restricted_roles == std::vector<int>{3, 4});
  CHECK(beach.rule.ant_topic == inv.id("weather"));
  CHECK(beach.rule.cons_topic == inv.id("mood"));

  const auto& bar = set.by_name("bar");
  CHECK(bar.rule.ant_topic == inv.id("gave"));
  CHECK(bar.rule.cons_topic == inv.id("rubbed"));
  CHECK(bar.rule.ant_role == 3);
  CHECK(bar.rule.cons_role == 3);
}

TEST_CASE("binding enumeration respects domains and distinctness") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  // restaurant: 10*9 ordered pairs x 2 actor picks
  CHECK(enumerate_bindings(set.by_name("restaurant"), inv,
                           Condition::Unrestricted).size() == 180);
  // restricted: 8*7 pairs x 2
  CHECK(enumerate_bindings(set.by_name("restaurant"), inv,
                           Condition::Restricted).size() == 112);
  // violation: the two restricted people in both orders x 2
  CHECK(enumerate_bindings(set.by_name("restaurant"), inv,
                           Condition::Violation).size() == 4);
  // park: 90 pairs x 4 vehicles
  CHECK(enumerate_bindings(set.by_name("park"), inv,
                           Condition::Unrestricted).size() == 360);
  // beach violation: 10 agents x Camaro only
  CHECK(enumerate_bindings(set.by_name("beach"), inv,
                           Condition::Violation).size() == 10);
  for (const auto& b : enumerate_bindings(set.by_name("restaurant"), inv,
                                          Condition::Unrestricted)) {
    CHECK(b[0] != b[1]);
    CHECK((b[2] == b[0] || b[2] == b[1]));
  }
}

TEST_CASE("exhaustive enumeration matches the reference enumerator") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  for (const auto& sc : set.scripts) {
    const ScriptRef& ref = kRef.at(sc.name);
    for (auto [cond, cref] :
         {std::pair{Condition::Unrestricted, ref.unrestricted},
          std::pair{Condition::Restricted, ref.restricted},
          std::pair{Condition::Violation, ref.violation}}) {
      CAPTURE(sc.name);
      auto stories = enumerate_stories(sc, inv, set, cond);
      CHECK(static_cast<int>(stories.size()) == cref.stories);
      CHECK(total_props(stories) == cref.props);
      CHECK(story_digest(inv, set, stories) == cref.sha);
    }
  }
}

TEST_CASE("union corpora match the reference digests") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  auto u = enumerate_all(set, inv, Condition::Unrestricted);
  CHECK(u.size() == 7320);
  CHECK(story_digest(inv, set, u) ==
        "279392d24040aad535624dd56068c3cef424f364edfc6115552b03fb6905f546");
  auto r = enumerate_all(set, inv, Condition::Restricted);
  CHECK(r.size() == 4708);
  CHECK(story_digest(inv, set, r) ==
        "dd1fe8e960f08e0e96cab12e9c78baf2cd5d0ffb365e61093e8b0860bd8e3643");
  auto v = enumerate_all(set, inv, Condition::Violation);
  CHECK(v.size() == 436);
  CHECK(story_digest(inv, set, v) ==
        "f0e3cdc7c7b298e4b2436b7d55e23819f9b1ed2926de5019d2680c4ecb92b623");
}

TEST_CASE("every enumerated story is unique") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  auto stories = enumerate_all(set, inv, Condition::Unrestricted);
  std::set<std::string> lines;
  for (const auto& s : stories) lines.insert(serialize_story(inv, set, s));
  CHECK(lines.size() == stories.size());
}

TEST_CASE("serialization round-trips") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  auto stories = enumerate_stories(set.by_name("beach"), inv, set,
                                   Condition::Unrestricted);
  for (std::size_t i = 0; i < stories.size(); i += 97) {
    auto line = serialize_story(inv, set, stories[i]);
    CHECK(parse_story(inv, set, line) == stories[i]);
  }
  QAItem item{stories[0], stories[0].props[2][kTopicRole], stories[0].props[2]};
  CHECK(parse_item(inv, set, serialize_item(inv, set, item)) == item);
}

TEST_CASE("sampling is deterministic, valid, and follows branch weights") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) {
    Story sa = sample_story(a, set, inv, Condition::Unrestricted);
    Story sb = sample_story(b, set, inv, Condition::Unrestricted);
    CHECK(sa == sb);
  }
  Rng rng(7);
  int bar_kiss = 0, bar_total = 0;
  const auto& bar = set.by_name("bar");
  for (int i = 0; i < 4000; ++i) {
    Story s = sample_story(rng, bar, inv, set, Condition::Restricted);
    validate_story(inv, bar, s, Condition::Restricted);
    for (const auto& p : s.props) {
      if (p[kTopicRole] == inv.id("gave")) {
        ++bar_total;
        bar_kiss += p[3] == inv.id("kiss");
      }
    }
  }
  CHECK(bar_total == 4000);
  // P(kiss) = 0.5*0.7 + 0.5*0.3 = 0.5
  CHECK(bar_kiss > 1800);
  CHECK(bar_kiss < 2200);
}

TEST_CASE("sampled restricted stories never contain restricted concepts") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    Story s = sample_story(rng, set, inv, Condition::Restricted);
    const auto& sc = set.scripts[s.script];
    for (const auto& p : s.props) {
      for (int r = 0; r < kNumRoles; ++r) {
        if (p[r] >= 0) CHECK_FALSE(sc.is_restricted_concept(p[r]));
      }
    }
  }
}

TEST_CASE("deterministic rules hold in every enumerated story") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  for (const auto& sc : set.scripts) {
    for (const auto& s : enumerate_stories(sc, inv, set, Condition::Unrestricted)) {
      const Prop* ant = nullptr;
      const Prop* cons = nullptr;
      for (const auto& p : s.props) {
        if (p[kTopicRole] == sc.rule.ant_topic) ant = &p;
        if (p[kTopicRole] == sc.rule.cons_topic) cons = &p;
      }
      REQUIRE(ant != nullptr);
      REQUIRE(cons != nullptr);
      CHECK(sc.rule.apply((*ant)[sc.rule.ant_role]) == (*cons)[sc.rule.cons_role]);
    }
  }
}

TEST_CASE("validation rejects malformed stories") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  const auto& sc = set.by_name("restaurant");
  auto stories = enumerate_stories(sc, inv, set, Condition::Unrestricted);
  Story good = stories[0];

  Story repeated = good;
  repeated.props.push_back(repeated.props[0]);
  CHECK_THROWS(validate_story(inv, sc, repeated, Condition::Unrestricted));

  Story broken_rule = good;
  for (auto& p : broken_rule.props) {
    if (p[kTopicRole] == sc.rule.cons_topic) {
      p[sc.rule.cons_role] = sc.rule.flip(p[sc.rule.cons_role]);
    }
  }
  CHECK_THROWS(validate_story(inv, sc, broken_rule, Condition::Unrestricted));

  Story wrong_bank = good;
  wrong_bank.props[0][5] = inv.id("frisbee");  // not a location
  CHECK_THROWS(validate_story(inv, sc, wrong_bank, Condition::Unrestricted));
}

TEST_CASE("pronoun and alias instantiation in generated stories") {
  const auto& inv = test::inventory();
  const auto& set = test::scripts();
  const auto& park = set.by_name("park");
  for (const auto& s : enumerate_stories(park, inv, set, Condition::Unrestricted)) {
    for (const auto& p : s.props) {
      if (p[kTopicRole] == inv.id("threw")) {
        bool agent1_male = inv.person_has(s.props[0][0], "male");
        CHECK(p[0] == inv.pronoun(agent1_male));
      }
    }
  }
  const auto& restaurant = set.by_name("restaurant");
  int chardonnay = 0, prosecco = 0;
  for (const auto& s :
       enumerate_stories(restaurant, inv, set, Condition::Unrestricted)) {
    for (const auto& p : s.props) {
      if (p[kTopicRole] == inv.id("ordered")) {
        chardonnay += p[3] == inv.id("chardonnay");
        prosecco += p[3] == inv.id("prosecco");
      }
    }
  }
  CHECK(chardonnay == 1080);
  CHECK(prosecco == 1080);
}
