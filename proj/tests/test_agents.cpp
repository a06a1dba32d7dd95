#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gamelab/agents.hpp"
#include "gamelab/backend.hpp"
#include "gamelab/games.hpp"
#include "gamelab/render.hpp"
#include "gamelab/serialize.hpp"

using namespace gamelab;

namespace {

const std::vector<int> kEleven20 = {11, 12, 13, 14, 15, 16, 17, 18, 19, 20};

GameSpec ar_basic() {
  return {11, 20, 1, 20, PointsRule::kN, BonusRule::kGapLower};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Counts how often the inner backend is actually consulted.
class CountingBackend : public ChatBackend {
 public:
  explicit CountingBackend(ChatBackend* inner) : inner_(inner) {}
  std::string name() const override { return inner_->name(); }
  std::string complete(const std::vector<ChatMessage>& messages,
                       double temperature, std::uint64_t seed) override {
    ++calls;
    return inner_->complete(messages, temperature, seed);
  }
  int calls = 0;

 private:
  ChatBackend* inner_;
};

FixtureBackend scripted_backend(std::vector<std::string> answers) {
  FixtureBackend fb;
  fb.add_script("Reason out", {"Everyone aims high, so undercutting pays."});
  fb.add_script("What amount of money", std::move(answers));
  return fb;
}

AgentModel persona_model(const std::string& body) {
  AgentModel m;
  m.kind = AgentKind::kBackendPersona;
  m.name = "test-persona";
  m.prompt.preamble = "You are a human being.";
  m.prompt.persona = body;
  return m;
}

}  // namespace

TEST_CASE("parse_response keeps the last in-range whole number") {
  CHECK(parse_response("17", kEleven20) == 17);
  CHECK(parse_response("I pick 17.", kEleven20) == 17);
  CHECK(parse_response("maybe 12, no, 13", kEleven20) == 13);
  CHECK(parse_response("I considered 18 but choose 12", kEleven20) == 12);
  CHECK(parse_response("21", kEleven20) == std::nullopt);
  CHECK(parse_response("", kEleven20) == std::nullopt);
  CHECK(parse_response("no numbers here", kEleven20) == std::nullopt);

  // Decimals never count, in either direction of the point.
  CHECK(parse_response("about 19.5", kEleven20) == std::nullopt);
  CHECK(parse_response("about 19.5 then", {1, 5, 19}) == std::nullopt);
  CHECK(parse_response("rate it 4.20 but request 19", kEleven20) == 19);
  CHECK(parse_response("request 12 then rate 4.20", kEleven20) == 12);

  // Overlong digit runs are ignored rather than overflowing.
  CHECK(parse_response("id 123456789012 then 15", kEleven20) == 15);
  CHECK(parse_response("12345678901", kEleven20) == std::nullopt);

  // A leading minus binds to the number.
  CHECK(parse_response("-15", kEleven20) == std::nullopt);
  CHECK(parse_response("go -3 now", {-3, 2}) == -3);
}

TEST_CASE("settings hash their content") {
  Setting a = make_setting("pick a number", {1, 2, 3});
  Setting b = make_setting("pick a number", {1, 2, 3});
  CHECK(a.id == b.id);
  CHECK_FALSE(a.id.empty());
  CHECK_FALSE(a.game.has_value());
  CHECK(make_setting("pick a number!", {1, 2, 3}).id != a.id);
  CHECK(make_setting("pick a number", {1, 2, 4}).id != a.id);

  Setting g = setting_for_game(ar_basic());
  CHECK(g.actions == kEleven20);
  CHECK(g.instruction_text == render_instructions(ar_basic()));
  REQUIRE(g.game.has_value());
  CHECK(g.game->lower == 11);
  CHECK(g.id == setting_for_game(ar_basic()).id);
}

TEST_CASE("prompt text substitutes trait slots") {
  PromptSpec p;
  p.preamble = "You are a participant.";
  p.persona = "Your efficiency level is: {eff}. Your greed level is: {greed}.";
  p.explanation = "Answer with one number.";
  p.traits = {{"eff", 7}, {"greed", 2}};
  CHECK(p.text() ==
        "You are a participant. Your efficiency level is: 7. "
        "Your greed level is: 2. Answer with one number.");

  PromptSpec bare;
  bare.persona = "You are Caesar.";
  CHECK(bare.text() == "You are Caesar.");
  CHECK_FALSE(bare.digest().empty());
  CHECK(bare.digest() != p.digest());

  PromptSpec missing;
  missing.persona = "level {eff} person";
  CHECK_THROWS(missing.text());
}

TEST_CASE("instruction template data file matches the builtin") {
  std::string want = canonical_dump(template_to_json(builtin_template_v1()));
  std::string got = slurp("data/templates/instructions_v1.json");
  CHECK(got == want);

  InstructionTemplate back = template_from_json(Json::parse(got));
  CHECK(render_instructions(ar_basic(), back) == render_instructions(ar_basic()));
}

TEST_CASE("fixture backend replays exact and scripted replies") {
  FixtureBackend fb;
  std::vector<ChatMessage> msgs{{"system", "sys"}, {"user", "hello there"}};
  fb.add_exact(transcript_digest("fixture", msgs, 1.0, 7), "recorded");
  CHECK(fb.complete(msgs, 1.0, 7) == "recorded");
  // A different seed is a different transcript.
  CHECK_THROWS(fb.complete(msgs, 1.0, 8));

  fb.add_script("hello", {"a", "b", "c"});
  CHECK(fb.complete(msgs, 1.0, 9) == fb.complete(msgs, 1.0, 9));
  CHECK(fb.complete(msgs, 1.0, 3) == "a");
  CHECK(fb.complete(msgs, 1.0, 4) == "b");
  // Exact entries still win over scripts.
  CHECK(fb.complete(msgs, 1.0, 7) == "recorded");

  std::vector<ChatMessage> other{{"user", "unmatched text"}};
  CHECK_THROWS(fb.complete(other, 1.0, 0));
}

TEST_CASE("uniform and random-pure elicitation") {
  Setting s = make_setting("pick one", kEleven20);
  AgentModel uni;
  uni.kind = AgentKind::kUniform;
  ResponseDistribution d = elicit_distribution(uni, s, 20000, 5);
  CHECK(d.total == 20000);
  CHECK(d.setting_id == s.id);
  for (double p : d.probs) CHECK(p == doctest::Approx(0.1).epsilon(0.15));

  ResponseDistribution again = elicit_distribution(uni, s, 20000, 5);
  CHECK(again.counts == d.counts);

  AgentModel pure;
  pure.kind = AgentKind::kRandomPure;
  ResponseDistribution one = elicit_distribution(pure, s, 50, 12);
  int support = 0;
  for (double c : one.counts)
    if (c > 0) ++support;
  CHECK(support == 1);
  CHECK(one.total == 50);

  CHECK_THROWS(elicit_distribution(uni, s, 0, 5));
}

TEST_CASE("mechanical level-k ladder") {
  SymmetricGame g = payoff_matrix(ar_basic());
  auto top = [&](const ResponseDistribution& d) {
    int best = 0;
    for (int i = 1; i < int(d.probs.size()); ++i)
      if (d.probs[i] > d.probs[best]) best = i;
    return kEleven20[best];
  };
  ResponseDistribution l0 = mechanical_levelk(g, 0, Level0Rule::kMaxGuaranteed);
  CHECK(top(l0) == 20);
  CHECK(l0.probs[9] == doctest::Approx(1.0));
  CHECK(top(mechanical_levelk(g, 1, Level0Rule::kMaxGuaranteed)) == 19);
  CHECK(top(mechanical_levelk(g, 2, Level0Rule::kMaxGuaranteed)) == 18);
  CHECK(top(mechanical_levelk(g, 3, Level0Rule::kMaxGuaranteed)) == 17);

  ResponseDistribution u0 = mechanical_levelk(g, 0, Level0Rule::kUniform);
  for (double p : u0.probs) CHECK(p == doctest::Approx(0.1));
  // Against uniform play, requesting 19 earns 19 + 20/10 and beats all else.
  CHECK(top(mechanical_levelk(g, 1, Level0Rule::kUniform)) == 19);

  AgentModel lk;
  lk.kind = AgentKind::kMechanicalLevelK;
  lk.level = 2;
  ResponseDistribution via = elicit_distribution(lk, setting_for_game(ar_basic()), 70, 0);
  CHECK(via.total == 70);
  CHECK(via.counts[7] == doctest::Approx(70));
  CHECK_THROWS(elicit_distribution(lk, make_setting("no game", kEleven20), 10, 0));
}

TEST_CASE("tabulated agents return their stored row") {
  Setting s = make_setting("tab", {1, 2});
  AgentModel tab;
  tab.kind = AgentKind::kTabulated;
  tab.table[s.id] = distribution_from_counts(s.id, {3, 1});
  ResponseDistribution d = elicit_distribution(tab, s, 99, 4);
  CHECK(d.probs[0] == doctest::Approx(0.75));
  Setting other = make_setting("other", {1, 2});
  CHECK_THROWS(elicit_distribution(tab, other, 99, 4));
}

TEST_CASE("mixture distributions blend linearly") {
  ResponseDistribution a = distribution_from_counts("s", {1, 0, 0});
  ResponseDistribution b = distribution_from_counts("s", {0, 0, 1});
  ResponseDistribution mix = mixture_distribution({a, b}, {0.3, 0.7});
  CHECK(mix.probs[0] == doctest::Approx(0.3));
  CHECK(mix.probs[1] == doctest::Approx(0.0));
  CHECK(mix.probs[2] == doctest::Approx(0.7));

  ResponseDistribution same = mixture_distribution({a}, {1.0});
  CHECK(same.probs == a.probs);

  CHECK_THROWS(mixture_distribution({a, b}, {0.3, 0.6}));
  CHECK_THROWS(mixture_distribution({a}, {0.5, 0.5}));
}

TEST_CASE("population apportionment uses largest remainders") {
  std::vector<double> w = {0.065, 0, 0, 0, 0, 0.469, 0.013, 0.339, 0.114, 0};
  std::vector<int> seats = scale_mixture_to_population(w, 100);
  CHECK(seats == std::vector<int>{7, 0, 0, 0, 0, 47, 1, 34, 11, 0});

  CHECK(scale_mixture_to_population({0.5, 0.5}, 3) == std::vector<int>{2, 1});
  std::vector<int> tiny = scale_mixture_to_population(w, 7);
  int total = 0;
  for (int s : tiny) total += s;
  CHECK(total == 7);
}

TEST_CASE("backend personas follow the two-step protocol") {
  Setting s = setting_for_game(ar_basic());
  AgentModel m = persona_model("You always aim one below the crowd.");

  FixtureBackend fb = scripted_backend({"I shall request 17"});
  ResponseDistribution d = elicit_distribution(m, s, 25, 99, &fb);
  CHECK(d.total == 25);
  CHECK(d.counts[6] == doctest::Approx(25));

  ResponseDistribution again = elicit_distribution(m, s, 25, 99, &fb);
  CHECK(again.counts == d.counts);

  // Invalid replies are dropped without resampling.
  FixtureBackend mixed = scripted_backend({"I shall request 17", "mumble"});
  ResponseDistribution part = elicit_distribution(m, s, 60, 7, &mixed);
  CHECK(part.total > 0);
  CHECK(part.total < 60);
  CHECK(part.counts[6] == doctest::Approx(part.total));

  FixtureBackend bad = scripted_backend({"mumble"});
  CHECK_THROWS(elicit_distribution(m, s, 10, 1, &bad));
  CHECK_THROWS(elicit_distribution(m, s, 10, 1, nullptr));
}

TEST_CASE("cached backend never recontacts on a warm cache") {
  Setting s = setting_for_game(ar_basic());
  AgentModel m = persona_model("You like the number seventeen.");

  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "gamelab-cache-test";
  std::filesystem::remove_all(dir);
  {
    FixtureBackend fb = scripted_backend({"17"});
    CountingBackend counting(&fb);
    ResponseCache cache(dir.string());
    CachedBackend cached(&counting, &cache);

    ResponseDistribution first = elicit_distribution(m, s, 12, 3, &cached);
    CHECK(first.counts[6] == doctest::Approx(12));
    int cold_calls = counting.calls;
    CHECK(cold_calls == 24);  // two steps per draw

    ResponseDistribution warm = elicit_distribution(m, s, 12, 3, &cached);
    CHECK(counting.calls == cold_calls);
    CHECK(warm.counts == first.counts);

    // A different seed is new work.
    elicit_distribution(m, s, 12, 4, &cached);
    CHECK(counting.calls > cold_calls);
  }
  {
    // A fresh process sees the same cache files.
    FixtureBackend fb = scripted_backend({"17"});
    CountingBackend counting(&fb);
    ResponseCache cache(dir.string());
    CachedBackend cached(&counting, &cache);
    elicit_distribution(m, s, 12, 3, &cached);
    CHECK(counting.calls == 0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("bundled persona mixtures load and round-trip") {
  for (const std::string name :
       {"strategic_personas", "historical_personas", "mbti_personas",
        "always_pick_n"}) {
    Json j = read_json_file("data/agents/" + name + ".json");
    AgentModel m = agent_from_json(j);
    CHECK(m.kind == AgentKind::kMixture);
    REQUIRE(m.components.size() == m.weights.size());
    CHECK(m.components.size() >= 10);
    double wsum = 0;
    for (double w : m.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& c : m.components) {
      CHECK(c.kind == AgentKind::kBackendPersona);
      CHECK_FALSE(c.prompt.text().empty());
    }
    CHECK(canonical_dump(agent_to_json(m)) ==
          canonical_dump(agent_to_json(agent_from_json(agent_to_json(m)))));
  }
}
