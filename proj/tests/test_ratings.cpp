#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "support.hpp"
#include "swp/agents/agent.hpp"
#include "swp/core/csv.hpp"
#include "swp/ratings/aggregate.hpp"
#include "swp/ratings/collect.hpp"
#include "swp/ratings/export.hpp"
#include "swp/ratings/records.hpp"
#include "swp/ratings/schedule.hpp"

using namespace swp;
using namespace swp::ratings;

namespace {

std::vector<Tone> make_tones(std::size_t n) {
  std::vector<std::string> words(test::lexicons()->adjectives.words().begin(),
                                 test::lexicons()->adjectives.words().end());
  std::sort(words.begin(), words.end());
  std::vector<Tone> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Tone::make(words[i]));
  return out;
}

std::vector<Sentence> make_sentences(std::size_t n) {
  std::vector<Sentence> out;
  for (std::size_t j = 0; j < n; ++j)
    out.push_back(Sentence::make("this is synthetic sentence number " + std::to_string(j)));
  return out;
}

}  // namespace

TEST(Schedule, PaperScaleSlotCount) {
  const auto plan = schedule_rating_plan(40, 80, 5);
  EXPECT_EQ(plan.size(), 16000u);
  std::map<std::pair<std::size_t, std::size_t>, int> seen;
  for (const auto& s : plan) ++seen[{s.tone, s.sentence}];
  EXPECT_EQ(seen.size(), 3200u);
  for (const auto& [k, v] : seen) EXPECT_EQ(v, 5);
}

TEST(Schedule, SingleSlot) {
  const auto plan = schedule_rating_plan(1, 1, 1);
  ASSERT_EQ(plan.size(), 1u);
  EXPECT_EQ(plan[0].tone, 0u);
  EXPECT_EQ(plan[0].sentence, 0u);
}

TEST(Schedule, ExhaustiveSmallPlans) {
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t n = 1; n <= 5; ++n)
      for (std::size_t rep = 1; rep <= 4; ++rep)
        for (std::size_t size : {1u, 3u, 12u})
          for (bool shuffle : {false, true}) {
            const auto plan = schedule_rating_plan(m, n, rep, size, std::nullopt,
                                                   shuffle ? std::optional<std::uint64_t>(m * 100 + n) : std::nullopt);
            ASSERT_EQ(plan.size(), m * n * rep);
            std::map<std::pair<std::size_t, std::size_t>, int> per_pair;
            std::map<std::size_t, std::set<std::pair<std::size_t, std::size_t>>> per_session;
            std::map<std::size_t, std::size_t> session_len;
            for (const auto& s : plan) {
              ++per_pair[{s.tone, s.sentence}];
              EXPECT_TRUE(per_session[s.session].insert({s.tone, s.sentence}).second)
                  << "duplicate pair in session " << s.session;
              ++session_len[s.session];
            }
            for (const auto& [k, v] : per_pair) EXPECT_EQ(v, static_cast<int>(rep));
            for (const auto& [k, v] : session_len) EXPECT_LE(v, size);
          }
}

TEST(Schedule, TwoByTwoByThree) {
  const auto plan = schedule_rating_plan(2, 2, 3);
  EXPECT_EQ(plan.size(), 12u);
  std::set<std::size_t> sessions;
  for (const auto& s : plan) sessions.insert(s.session);
  EXPECT_EQ(sessions.size(), 3u);
}

TEST(Schedule, Infeasible) {
  try {
    schedule_rating_plan(40, 80, 5, 12, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::infeasible_plan);
  }
  EXPECT_NO_THROW(schedule_rating_plan(40, 80, 5, 12, 1334));
  EXPECT_THROW(schedule_rating_plan(2, 2, 0), Error);
}

TEST(Aggregate, CellMean) {
  const auto tones = make_tones(1);
  const auto sentences = make_sentences(1);
  std::vector<RatingRecord> recs;
  int r = 0;
  for (int v : {2, 3, 4, 5, 1}) recs.push_back({tones[0], sentences[0], "r" + std::to_string(r++), v});
  const auto rm = aggregate_matrix(recs, tones, sentences);
  EXPECT_DOUBLE_EQ(rm.means(0, 0), 3.0);
  EXPECT_EQ(rm.counts(0, 0), 5);
}

TEST(Aggregate, MissingPolicyAndUnknown) {
  const auto tones = make_tones(2);
  const auto sentences = make_sentences(2);
  std::vector<RatingRecord> recs{{tones[0], sentences[0], "r", 4}};
  try {
    aggregate_matrix(recs, tones, sentences);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_cell);
  }
  const auto rm = aggregate_matrix(recs, tones, sentences, MissingPolicy::fill_midpoint);
  EXPECT_DOUBLE_EQ(rm.means(1, 1), 3.0);
  EXPECT_DOUBLE_EQ(rm.means(0, 0), 4.0);
  recs.push_back({Tone::make("zany"), sentences[0], "r", 4});
  try {
    aggregate_matrix(recs, tones, sentences, MissingPolicy::fill_midpoint);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_item);
  }
}

TEST(Aggregate, FullMatrixMatchesBruteForceAndIsOrderInvariant) {
  const auto tones = make_tones(40);
  const auto sentences = make_sentences(80);
  Rng rng(4);
  std::vector<RatingRecord> recs;
  for (const auto& s : schedule_rating_plan(40, 80, 5))
    recs.push_back({tones[s.tone], sentences[s.sentence], "r" + std::to_string(s.session),
                    static_cast<int>(1 + rng.index(5))});
  // a surplus of ratings on one cell is accepted
  recs.push_back({tones[3], sentences[7], "extra", 5});
  const auto rm = aggregate_matrix(recs, tones, sentences);

  std::map<std::pair<std::string, std::string>, std::pair<double, int>> brute;
  for (const auto& r : recs) {
    auto& cell = brute[{r.tone.text(), r.sentence.text()}];
    cell.first += r.value;
    cell.second += 1;
  }
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 80; ++j) {
      const auto& cell = brute.at({tones[i].text(), sentences[j].text()});
      EXPECT_DOUBLE_EQ(rm.means(i, j), cell.first / cell.second);
      EXPECT_EQ(rm.counts(i, j), cell.second);
    }
  rng.shuffle(recs);
  EXPECT_EQ(aggregate_matrix(recs, tones, sentences).means, rm.means);
}

TEST(Similarity, AffineEndpointsAndMean) {
  const auto tones = make_tones(3);
  std::vector<SimilarityRecord> recs;
  recs.push_back({tones[0], tones[1], "r", 5});
  recs.push_back({tones[0], tones[2], "r", 1});
  for (double v : {3, 3, 4, 2, 3}) recs.push_back({tones[2], tones[1], "r", v});  // reversed order pools
  const auto sm = aggregate_similarity(recs, tones, false);
  EXPECT_DOUBLE_EQ(sm.values(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(sm.values(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(sm.values(1, 2), 0.5);
  EXPECT_TRUE(sm.values.isApprox(sm.values.transpose()));
  for (int i = 0; i < 3; ++i) EXPECT_EQ(sm.values(i, i), 1.0);
}

TEST(Similarity, MissingPairAndPaperCount) {
  const auto tones = make_tones(40);
  EXPECT_EQ(similarity_pairs(40).size(), 820u);
  std::vector<SimilarityRecord> recs;
  for (const auto& [i, j] : similarity_pairs(40)) recs.push_back({tones[i], tones[j], "r", 2});
  const auto sm = aggregate_similarity(recs, tones);
  EXPECT_EQ(sm.values(7, 7), 1.0);
  EXPECT_DOUBLE_EQ(sm.self_similarity(7), 0.25);
  EXPECT_DOUBLE_EQ(sm.values(3, 9), 0.25);
  // dropping a self pair fails coverage unless self pairs are optional
  auto no_self = recs;
  no_self.erase(no_self.begin());
  EXPECT_THROW(aggregate_similarity(no_self, tones), Error);
  EXPECT_NO_THROW(aggregate_similarity(no_self, tones, false));
  recs.erase(recs.begin() + 1);
  try {
    aggregate_similarity(recs, tones);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_pair);
  }
}

TEST(Similarity, MappingPreservesOrder) {
  const auto tones = make_tones(8);
  Rng rng(9);
  std::vector<SimilarityRecord> recs;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, int>> raw;
  for (const auto& [i, j] : similarity_pairs(8))
    for (int k = 0; k < 4; ++k) {
      const double v = 1.0 + 4.0 * rng.uniform();
      recs.push_back({tones[i], tones[j], "r", v});
      raw[{i, j}].first += v;
      raw[{i, j}].second += 1;
    }
  const auto sm = aggregate_similarity(recs, tones);
  for (const auto& [p, a] : raw)
    for (const auto& [q, b] : raw)
      if (p.first != p.second && q.first != q.second)
      EXPECT_EQ(a.first / a.second < b.first / b.second, sm.values(p.first, p.second) < sm.values(q.first, q.second));
}

TEST(Features, PaperCountAndMeans) {
  const auto tones = make_tones(40);
  std::vector<FeatureRecord> recs;
  Rng rng(2);
  for (const auto& t : tones)
    for (auto f : kFeatures)
      for (int k = 0; k < 5; ++k) recs.push_back({t, f, "r" + std::to_string(k), static_cast<int>(1 + rng.index(5))});
  EXPECT_EQ(recs.size(), 800u);
  for (auto& r : recs)
    if (r.tone == tones[0] && r.feature == Feature::aroused) r.value = 5;
  const auto fm = aggregate_features(recs, tones);
  EXPECT_EQ(fm.means.rows(), 40);
  EXPECT_EQ(fm.means.cols(), 4);
  EXPECT_EQ(fm.counts.sum(), 800);
  EXPECT_DOUBLE_EQ(fm.means(0, 1), 5.0);
  std::map<std::pair<std::string, Feature>, std::pair<double, int>> brute;
  for (const auto& r : recs) {
    brute[{r.tone.text(), r.feature}].first += r.value;
    brute[{r.tone.text(), r.feature}].second += 1;
  }
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t f = 0; f < 4; ++f) {
      const auto& c = brute.at({tones[i].text(), kFeatures[f]});
      EXPECT_DOUBLE_EQ(fm.means(i, f), c.first / c.second);
    }
  recs.erase(std::remove_if(recs.begin(), recs.end(),
                            [&](const FeatureRecord& r) { return r.tone == tones[5] && r.feature == Feature::relational; }),
             recs.end());
  try {
    aggregate_features(recs, tones);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_cell);
  }
}

TEST(Records, JsonRoundTripAndValidation) {
  const RatingRecord r{Tone::make("calm"), Sentence::make("one two three four five six"), "x", 4};
  const auto back = rating_from_json(to_json(r));
  EXPECT_EQ(back.tone, r.tone);
  EXPECT_EQ(back.value, 4);
  auto bad = to_json(r);
  bad["value"] = 6;
  EXPECT_THROW(rating_from_json(bad), Error);
  bad["value"] = 2.5;
  EXPECT_THROW(rating_from_json(bad), Error);
  const FeatureRecord f{Tone::make("calm"), Feature::valence_positive, "x", 2};
  EXPECT_EQ(feature_from_json(to_json(f)).feature, Feature::valence_positive);
  EXPECT_EQ(to_json(f).at("feature"), "valence-positive");
  const SimilarityRecord s{Tone::make("calm"), Tone::make("sad"), "x", 3.5};
  EXPECT_DOUBLE_EQ(similarity_from_json(to_json(s)).value, 3.5);
}

TEST(Export, CsvRoundTrip) {
  const auto dir = test::scratch_dir("ratings");
  const auto tones = make_tones(3);
  std::vector<Sentence> sentences = {Sentence::make("Well, that is \"great\", said the man"),
                                     Sentence::make("one two three four five six")};
  RatingMatrix rm{tones, sentences, Eigen::MatrixXd(3, 2), Eigen::MatrixXi::Ones(3, 2), Domain::human};
  rm.means << 1.2, 3.0, 4.0 / 3.0, 5, 2.5, 1;
  write_rating_matrix(dir, "human_ratings", rm);
  const auto back = read_rating_matrix(dir, "human_ratings", Domain::human);
  EXPECT_EQ(back.means, rm.means);
  EXPECT_EQ(back.sentences, rm.sentences);
  EXPECT_EQ(back.tones, rm.tones);

  std::ofstream(dir / "bad.csv") << "tone,s001\ncalm,1.0\nsad,oops\n";
  try {
    csv::read_matrix(dir / "bad.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::schema_error);
    EXPECT_NE(std::string(e.what()).find("line 3 column 's001'"), std::string::npos) << e.what();
  }
}

TEST(Csv, QuotedFieldsAndRaggedRows) {
  std::istringstream in("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\"multi\nline\",2\n");
  const auto t = csv::read(in);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x, y");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.rows[1][0], "multi\nline");
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(csv::read(ragged), Error);
}

TEST(Collect, SyntheticRaterFillsPlans) {
  Rng rng(1);
  auto joint = std::make_shared<const agents::SyntheticJoint>(agents::SyntheticJoint::random(
      agents::default_synthetic_tones(), agents::default_synthetic_sentences(), rng));
  agents::SyntheticRater rater(joint, 3);
  CollectOptions opt;
  const auto fit = collect_fit_ratings(rater, joint->tones(), joint->sentences(), opt);
  EXPECT_EQ(fit.size(), 8u * 12u * 5u);
  const auto rm = aggregate_matrix(fit, joint->tones(), joint->sentences());
  EXPECT_TRUE((rm.counts.array() == 5).all());
  const auto sims = collect_similarities(rater, joint->tones(), opt);
  EXPECT_EQ(sims.size(), 36u * 5u);
  EXPECT_NO_THROW(aggregate_similarity(sims, joint->tones()));
  const auto feats = collect_features(rater, joint->tones(), opt);
  EXPECT_EQ(feats.size(), 8u * 4u * 5u);
  EXPECT_NO_THROW(aggregate_features(feats, joint->tones()));
}
