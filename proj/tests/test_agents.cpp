#include <gtest/gtest.h>

#include <cstdlib>
#include <deque>
#include <set>

#include "support.hpp"
#include "swp/agents/agent.hpp"
#include "swp/agents/llm_client.hpp"
#include "swp/agents/prompt.hpp"
#include "swp/agents/response_parser.hpp"
#include "swp/agents/synthetic_joint.hpp"
#include "swp/validation/filters.hpp"

using namespace swp;
using namespace swp::agents;

namespace {

std::vector<Tone> tones(std::initializer_list<const char*> xs) {
  std::vector<Tone> out;
  for (auto x : xs) out.push_back(Tone::make(x));
  return out;
}

std::vector<Sentence> sentences(std::size_t n) {
  auto all = default_synthetic_sentences();
  all.erase(all.begin() + static_cast<std::ptrdiff_t>(n), all.end());
  return all;
}

// Pearson chi-square statistic of observed counts against probabilities.
double chi_square(const std::vector<int>& observed, const Eigen::VectorXd& p) {
  double n = 0;
  for (int o : observed) n += o;
  double x2 = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = n * p(static_cast<Eigen::Index>(i));
    x2 += (observed[i] - e) * (observed[i] - e) / e;
  }
  return x2;
}

class StubTransport : public HttpTransport {
 public:
  std::deque<HttpResponse> queue;
  std::vector<std::string> bodies;
  std::vector<httplib::Headers> headers;
  bool fail_transport = false;

  HttpResponse post(const std::string&, const httplib::Headers& h, const std::string& body) override {
    bodies.push_back(body);
    headers.push_back(h);
    if (fail_transport) throw Error(Errc::transport_error, "connection refused");
    if (queue.empty()) return {500, "empty"};
    auto r = queue.front();
    queue.pop_front();
    return r;
  }
};

HttpResponse completion(const std::string& content) {
  return {200, json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump()};
}

LlmParams fast_params() {
  LlmParams p;
  p.backoff = std::chrono::milliseconds(0);
  p.auth_env = "SWP_TEST_TOKEN";
  return p;
}

struct TokenEnv {
  TokenEnv() { setenv("SWP_TEST_TOKEN", "sk-test", 1); }
  ~TokenEnv() { unsetenv("SWP_TEST_TOKEN"); }
};

}  // namespace

TEST(SyntheticJoint, ValidatesInvariants) {
  auto t = tones({"polite", "sad"});
  auto s = sentences(2);
  Eigen::MatrixXd ok(2, 2);
  ok << 0.25, 0.25, 0.25, 0.25;
  EXPECT_NO_THROW(SyntheticJoint(t, s, ok));
  Eigen::MatrixXd neg = ok;
  neg(0, 0) = -0.25;
  neg(0, 1) = 0.75;
  EXPECT_THROW(SyntheticJoint(t, s, neg), Error);
  Eigen::MatrixXd sum = ok * 1.01;
  EXPECT_THROW(SyntheticJoint(t, s, sum), Error);
  Eigen::MatrixXd zero_row(2, 2);
  zero_row << 0.5, 0.5, 0.0, 0.0;
  try {
    SyntheticJoint(t, s, zero_row);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_ergodic_joint);
  }
  EXPECT_THROW(SyntheticJoint(t, sentences(3), ok), Error);
}

TEST(SyntheticJoint, JsonRoundTrip) {
  Rng rng(2);
  auto j = SyntheticJoint::random(tones({"polite", "sad", "angry"}), sentences(4), rng);
  const auto back = SyntheticJoint::from_json(j.to_json());
  EXPECT_TRUE(back.probs().isApprox(j.probs(), 1e-15));
  EXPECT_EQ(back.tones(), j.tones());
}

TEST(SyntheticAnswer, DegenerateConditional) {
  auto t = tones({"polite", "sad"});
  auto s = sentences(2);
  Eigen::MatrixXd p(2, 2);
  p << 0.5, 0.0, 0.0, 0.5;
  SyntheticJoint j(t, s, p);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(synthetic_answer_T(j, s[0], rng), t[0]);
    EXPECT_EQ(synthetic_answer_S(j, t[1], rng), s[1]);
  }
}

TEST(SyntheticAnswer, UniformFrequencies) {
  auto t = tones({"polite", "sad"});
  auto s2 = sentences(2);
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(2, 2, 0.25);
  SyntheticJoint j(t, s2, p);
  Rng rng(4);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += synthetic_answer_T(j, s2[1], rng) == t[0];
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);

  auto s4 = sentences(4);
  SyntheticJoint j4(t, s4, Eigen::MatrixXd::Constant(2, 4, 0.125));
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10000; ++i) ++counts[j4.sentence_index(synthetic_answer_S(j4, t[0], rng))];
  for (int c : counts) EXPECT_NEAR(c / 10000.0, 0.25, 0.02);
}

TEST(SyntheticAnswer, ChiSquareAgainstConditionals) {
  Rng rng(99);
  auto j = SyntheticJoint::random(tones({"polite", "sad", "angry"}), sentences(4), rng);
  for (std::size_t s = 0; s < 4; ++s) {
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 50000; ++i) ++counts[j.tone_index(synthetic_answer_T(j, j.sentences()[s], rng))];
    EXPECT_LT(chi_square(counts, j.tone_given_sentence(s)), 9.210) << "sentence " << s;
  }
  for (std::size_t t = 0; t < 3; ++t) {
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 50000; ++i) ++counts[j.sentence_index(synthetic_answer_S(j, j.tones()[t], rng))];
    EXPECT_LT(chi_square(counts, j.sentence_given_tone(t)), 11.345) << "tone " << t;
  }
}

TEST(SyntheticAnswer, UnknownItems) {
  Rng rng(1);
  auto j = SyntheticJoint::random(tones({"polite", "sad"}), sentences(2), rng);
  try {
    synthetic_answer_T(j, Sentence::make("this sentence is not in the joint"), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_sentence);
  }
  try {
    synthetic_answer_S(j, Tone::make("curious"), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_tone);
  }
}

TEST(SyntheticAnswer, DefaultVocabularyPassesFilters) {
  const auto& lex = *test::lexicons();
  for (const auto& t : default_synthetic_tones())
    for (const auto& s : default_synthetic_sentences()) {
      EXPECT_FALSE(validation::validate_sentence(s.text(), t.text(), lex)) << t.text() << " | " << s.text();
      EXPECT_FALSE(validation::validate_tone(t.text(), s.text(), lex)) << t.text() << " | " << s.text();
    }
}

TEST(Prompts, ShippedLibraryRenders) {
  const auto lib = PromptLibrary::load(test::data_dir() / "prompts");
  EXPECT_EQ(lib.all().size(), 5u);
  const auto out = render_prompt(lib.get("tone_from_sentence"), {{"sentence", "I love this!"}});
  EXPECT_NE(out.find("I love this!"), std::string::npos);
  EXPECT_NE(out.find("Respond using only an adjective."), std::string::npos);
  EXPECT_EQ(out.find('{'), std::string::npos);
  try {
    render_prompt(lib.get("quality_of_fit"), {{"tone", "polite"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_slot);
  }
}

TEST(Prompts, ZeroSlotAndUndeclared) {
  PromptTemplate plain("p", "No slots {here}? Only {Literal} braces.", {"here"}, ResponseFormat::sentence);
  EXPECT_EQ(render_prompt(plain, {{"here", "x"}}), "No slots x? Only {Literal} braces.");
  PromptTemplate none("n", "Nothing to fill.", {}, ResponseFormat::sentence);
  EXPECT_EQ(render_prompt(none, {}), "Nothing to fill.");
  EXPECT_THROW(PromptTemplate("bad", "Hello {who}", {}, ResponseFormat::sentence), Error);
  // Bound values are not rescanned.
  PromptTemplate two("t", "{a}|{b}", {"a", "b"}, ResponseFormat::sentence);
  EXPECT_EQ(render_prompt(two, {{"a", "{b}"}, {"b", "y"}}), "{b}|y");
}

TEST(Prompts, InjectiveOverToneBindings) {
  const auto lib = PromptLibrary::load(test::data_dir() / "prompts");
  std::vector<std::string> words(test::lexicons()->adjectives.words().begin(),
                                 test::lexicons()->adjectives.words().end());
  std::sort(words.begin(), words.end());
  words.resize(40);
  std::set<std::string> seen;
  for (const auto& a : words)
    for (const auto& b : words) EXPECT_TRUE(seen.insert(render_prompt(lib.get("tone_similarity"),
                                                                      {{"tone_a", a}, {"tone_b", b}})).second);
  std::set<std::string> single;
  for (const auto& a : words) {
    EXPECT_TRUE(single.insert(render_prompt(lib.get("sentence_from_tone"), {{"tone", a}})).second);
    for (auto f : kFeatures)
      EXPECT_TRUE(single.insert(render_prompt(lib.get("tone_feature"),
                                              {{"feature_definition", std::string(feature_definition(f))},
                                               {"feature", std::string(feature_phrase(f))},
                                               {"tone", a}}))
                      .second);
  }
}

TEST(Parse, Examples) {
  EXPECT_EQ(std::get<int>(parse_response(ResponseFormat::integer_1_to_5, " 4 ")), 4);
  EXPECT_THROW(parse_response(ResponseFormat::integer_1_to_5, "6"), Error);
  EXPECT_THROW(parse_response(ResponseFormat::integer_1_to_5, "four"), Error);
  EXPECT_THROW(parse_response(ResponseFormat::integer_1_to_5, "4.5"), Error);
  EXPECT_EQ(std::get<Tone>(parse_response(ResponseFormat::adjective, "Excited.")).text(), "excited");
  EXPECT_THROW(parse_response(ResponseFormat::adjective, "very excited"), Error);
  EXPECT_DOUBLE_EQ(std::get<double>(parse_response(ResponseFormat::number_0_to_1, "0.75")), 0.75);
  EXPECT_THROW(parse_response(ResponseFormat::number_0_to_1, "1.2"), Error);
  EXPECT_THROW(parse_response(ResponseFormat::number_0_to_1, "nan"), Error);
  EXPECT_EQ(std::get<std::string>(parse_response(ResponseFormat::sentence, " As is. ")), " As is. ");
}

TEST(Parse, AdjectiveStripTableIsIdempotent) {
  const std::vector<std::pair<std::string, std::string>> table = {
      {"Excited.", "excited"},     {"excited", "excited"},         {" excited ", "excited"},
      {"EXCITED!", "excited"},     {"\"excited\"", "excited"},     {"'excited'", "excited"},
      {"excited,", "excited"},     {"(excited)", "excited"},       {"[excited]", "excited"},
      {"{excited}", "excited"},    {"*excited*", "excited"},       {"_excited_", "excited"},
      {"excited...", "excited"},   {"excited?!", "excited"},       {"<excited>", "excited"},
      {"`excited`", "excited"},    {"excited;", "excited"},        {"excited:", "excited"},
      {"Polite", "polite"},        {"polite.\n", "polite"},        {"\tpolite\t", "polite"},
      {"well-meaning", "well-meaning"}, {"Well-Meaning.", "well-meaning"}, {"\"Grateful.\"", "grateful"},
      {"**Grateful**", "grateful"}, {"Sarcastic!!!", "sarcastic"}, {"(Curious)", "curious"},
      {"'Anxious.'", "anxious"},   {"angry\r\n", "angry"},         {" sad. ", "sad"},
      {"Happy;", "happy"},         {"calm:", "calm"},              {"Friendly,", "friendly"},
      {"_Formal_", "formal"},      {"[Bored].", "bored"},          {"Cheerful!", "cheerful"},
      {"\"Apologetic\"", "apologetic"}, {"Hopeful?", "hopeful"},   {"Nervous...", "nervous"},
      {"`Playful`", "playful"},    {"<Proud>", "proud"},           {"{Thankful}", "thankful"},
      {"Joyful. ", "joyful"},      {"  Pleased  ", "pleased"},     {"Neutral.", "neutral"},
      {"Encouraging!", "encouraging"}, {"Frustrated.", "frustrated"}, {"Sympathetic,", "sympathetic"},
      {"Confident.", "confident"}, {"Assertive!", "assertive"},
  };
  ASSERT_EQ(table.size(), 50u);
  for (const auto& [raw, want] : table) {
    const auto once = parse_adjective(raw).text();
    EXPECT_EQ(once, want) << raw;
    EXPECT_EQ(parse_adjective(once).text(), once) << raw;
  }
}

TEST(Parse, RoundTripOnCanonicalOutputs) {
  for (int v = 1; v <= 5; ++v)
    EXPECT_EQ(std::get<int>(parse_response(ResponseFormat::integer_1_to_5, std::to_string(v))), v);
  for (double v : {0.0, 0.125, 0.5, 1.0}) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    EXPECT_EQ(std::get<double>(parse_response(ResponseFormat::number_0_to_1, os.str())), v);
  }
  for (const auto& w : test::lexicons()->adjectives.words())
    EXPECT_EQ(std::get<Tone>(parse_response(ResponseFormat::adjective, w)).text(), w);
}

TEST(LlmClient, MissingTokenNamesVariable) {
  unsetenv("SWP_TEST_TOKEN");
  try {
    LlmClient c(fast_params(), std::make_shared<StubTransport>());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_config);
    EXPECT_NE(std::string(e.what()).find("SWP_TEST_TOKEN"), std::string::npos);
  }
}

TEST(LlmClient, EchoAndRequestShape) {
  TokenEnv env;
  auto t = std::make_shared<StubTransport>();
  t->queue.push_back(completion("excited"));
  const auto dir = test::scratch_dir("llm");
  auto audit = std::make_shared<JsonlWriter>(dir / "audit.jsonl");
  LlmClient c(fast_params(), t, audit);
  EXPECT_EQ(c.complete("hello"), "excited");
  const auto body = json::parse(t->bodies.at(0));
  EXPECT_EQ(body.at("model"), "gpt-4-0613");
  EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.8);
  EXPECT_EQ(body.at("messages").at(0).at("content"), "hello");
  EXPECT_EQ(t->headers.at(0).find("Authorization")->second, "Bearer sk-test");
  int lines = 0;
  for_each_jsonl(dir / "audit.jsonl", [&](const json& j, std::size_t) {
    ++lines;
    EXPECT_EQ(j.dump().find("sk-test"), std::string::npos);
  });
  EXPECT_EQ(lines, 1);
}

TEST(LlmClient, RetriesServerErrors) {
  TokenEnv env;
  auto t = std::make_shared<StubTransport>();
  t->queue = {{500, "boom"}, {503, "busy"}, completion("calm")};
  LlmClient c(fast_params(), t);
  EXPECT_EQ(c.complete("x"), "calm");
  EXPECT_EQ(t->bodies.size(), 3u);
}

TEST(LlmClient, AuthErrorIsNotRetried) {
  TokenEnv env;
  auto t = std::make_shared<StubTransport>();
  t->queue = {{401, "nope"}, completion("calm")};
  LlmClient c(fast_params(), t);
  try {
    c.complete("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::auth_error);
  }
  EXPECT_EQ(t->bodies.size(), 1u);
}

TEST(LlmClient, TransportExhaustionAndMalformed) {
  TokenEnv env;
  auto t = std::make_shared<StubTransport>();
  t->fail_transport = true;
  LlmClient c(fast_params(), t);
  try {
    c.complete("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::transport_error);
  }
  EXPECT_EQ(t->bodies.size(), 4u);

  auto m = std::make_shared<StubTransport>();
  m->queue = {{200, "{\"choices\": []}"}};
  LlmClient c2(fast_params(), m);
  try {
    c2.complete("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_response);
  }
}

TEST(LlmAgent, ParsesAndPassesThrough) {
  TokenEnv env;
  auto t = std::make_shared<StubTransport>();
  t->queue = {completion(" Excited. "), completion("very very happy"),
              completion("  Thank you so much for helping me today  ")};
  auto client = std::make_shared<LlmClient>(fast_params(), t);
  const auto lib = PromptLibrary::load(test::data_dir() / "prompts");
  LlmAgent agent(client, lib);
  const TrialRequest tr{"t1", "c", TrialKind::T, Sentence::make("We won the game last night, finally!"), 1, "a", 0};
  EXPECT_EQ(agent.respond(tr), "excited");
  EXPECT_EQ(agent.respond(tr), "very very happy");
  const TrialRequest sr{"t2", "c", TrialKind::S, Tone::make("grateful"), 0, "a", 0};
  EXPECT_EQ(agent.respond(sr), "Thank you so much for helping me today");
  EXPECT_NE(json::parse(t->bodies.at(2)).at("messages").at(0).at("content").get<std::string>().find("grateful"),
            std::string::npos);
}

TEST(LlmRater, MapsScalesAndGivesUp) {
  TokenEnv env;
  auto t = std::make_shared<StubTransport>();
  t->queue = {completion("4"), completion("0.5"), completion("seven"), completion("9"), completion("x")};
  auto client = std::make_shared<LlmClient>(fast_params(), t);
  LlmRater rater(client, PromptLibrary::load(test::data_dir() / "prompts"));
  const auto s = Sentence::make("Thank you so much for helping me today");
  EXPECT_EQ(rater.rate_fit(Tone::make("grateful"), s, "r"), 4);
  EXPECT_DOUBLE_EQ(rater.rate_similarity(Tone::make("sad"), Tone::make("angry"), "r"), 3.0);
  try {
    rater.rate_feature(Tone::make("sad"), Feature::aroused, "r");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::agent_failure);
  }
}

TEST(SyntheticAgent, DeterministicPerCoordinates) {
  Rng rng(3);
  auto joint = std::make_shared<const SyntheticJoint>(
      SyntheticJoint::random(default_synthetic_tones(), default_synthetic_sentences(), rng));
  SyntheticAgent a(joint, 17), b(joint, 17);
  const TrialRequest r{"t", "chain-001", TrialKind::S, Tone::make("polite"), 4, "agent", 0};
  EXPECT_EQ(a.respond(r), b.respond(r));
  EXPECT_EQ(a.respond(r), a.respond(r));
}

TEST(SyntheticRater, RatingsTrackJoint) {
  Rng rng(8);
  auto joint = std::make_shared<const SyntheticJoint>(
      SyntheticJoint::random(default_synthetic_tones(), default_synthetic_sentences(), rng, 0.0));
  SyntheticRater rater(joint, 5, 0.0);
  for (std::size_t j = 0; j < joint->sentences().size(); ++j) {
    const Eigen::VectorXd cond = joint->tone_given_sentence(j);
    Eigen::Index best = 0;
    cond.maxCoeff(&best);
    EXPECT_EQ(rater.rate_fit(joint->tones()[best], joint->sentences()[j], "r"), 5);
  }
  const auto& ts = joint->tones();
  EXPECT_EQ(rater.rate_similarity(ts[0], ts[0], "r"), 5.0);
  EXPECT_EQ(rater.rate_similarity(ts[0], ts[1], "r"), rater.rate_similarity(ts[1], ts[0], "r"));
  for (auto f : kFeatures) {
    const int v = rater.rate_feature(ts[2], f, "r");
    EXPECT_GE(v, 1);
    EXPECT_LE(v, 5);
    EXPECT_EQ(v, rater.rate_feature(ts[2], f, "other"));
  }
}

// Noisy similarity answers depend only on (seed, pair, rater): two rater
// objects agree, the pair order does not matter, and the noise varies.
TEST(SyntheticRater, NoisySimilarityIsReproducible) {
  Rng rng(8);
  auto joint = std::make_shared<const SyntheticJoint>(
      SyntheticJoint::random(default_synthetic_tones(), default_synthetic_sentences(), rng));
  SyntheticRater a(joint, 5, 1.0), b(joint, 5, 1.0);
  const auto& ts = joint->tones();
  std::set<double> seen;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < ts.size(); ++j)
      for (const char* r : {"rater-0", "rater-1", "rater-2"}) {
        const double v = a.rate_similarity(ts[i], ts[j], r);
        EXPECT_EQ(v, b.rate_similarity(ts[i], ts[j], r));
        EXPECT_EQ(v, b.rate_similarity(ts[j], ts[i], r));
        seen.insert(v);
      }
  EXPECT_GE(seen.size(), 3u);
}
