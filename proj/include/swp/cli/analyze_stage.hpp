#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "swp/analysis/biplot.hpp"
#include "swp/analysis/bootstrap.hpp"
#include "swp/analysis/correlation.hpp"
#include "swp/analysis/histogram.hpp"
#include "swp/analysis/mds.hpp"
#include "swp/analysis/nn.hpp"
#include "swp/analysis/tfidf.hpp"
#include "swp/cli/collect_stages.hpp"
#include "swp/core/matrix_csv.hpp"

namespace swp::cli {

inline constexpr std::string_view kReportSchemaVersion = "1.0.0";

// One analyzed input directory.
struct DomainData {
  std::filesystem::path dir;
  std::string tag;  // domain name, suffixed #a/#b when both inputs share it
  ElicitData elicit;
  ItemSet items;
  std::vector<ratings::RatingRecord> fit;
  std::vector<ratings::SimilarityRecord> similarity;
  std::vector<ratings::FeatureRecord> features;
  ratings::RatingMatrix rm;
  ratings::SimilarityMatrix sm;
  ratings::FeatureRatingMatrix fm;
};

// Lists every missing or empty input across all directories at once.
inline void check_analyze_inputs(const std::vector<std::filesystem::path>& inputs) {
  const std::vector<std::pair<const char*, Stage>> needed = {{kTrialsFile, Stage::elicit},
                                                             {kItemsFile, Stage::rate},
                                                             {kRatingsFile, Stage::rate},
                                                             {kSimilarityFile, Stage::similarity},
                                                             {kFeaturesFile, Stage::features}};
  std::string missing;
  for (const auto& dir : inputs) {
    if (!std::filesystem::exists(manifest_path(dir, Stage::elicit)))
      missing += "\n  " + dir.string() + ": " + manifest_path(dir, Stage::elicit).filename().string() + " (stage elicit)";
    for (const auto& [file, stage] : needed) {
      const auto p = dir / file;
      std::error_code ec;
      if (!std::filesystem::exists(p) || std::filesystem::file_size(p, ec) == 0)
        missing += "\n  " + dir.string() + ": " + file + " missing or empty (stage " + std::string(to_string(stage)) + ")";
    }
  }
  if (!missing.empty()) throw Error(Errc::io_error, "analyze is missing inputs:" + missing);
}

inline DomainData load_domain(const RunContext& ctx, const std::filesystem::path& dir) {
  DomainData d;
  d.dir = dir;
  d.elicit = load_elicit(dir);
  d.items = load_items(dir);
  d.items.domain = d.elicit.domain;
  d.fit = ratings::load_ratings(dir / kRatingsFile);
  d.similarity = ratings::load_similarities(dir / kSimilarityFile);
  d.features = ratings::load_features(dir / kFeaturesFile);
  d.rm = ratings::aggregate_matrix(d.fit, d.items.tones, d.items.sentences, missing_policy(ctx), d.elicit.domain);
  d.sm = ratings::aggregate_similarity(d.similarity, d.items.tones);
  d.fm = ratings::aggregate_features(d.features, d.items.tones);
  d.tag = std::string(to_string(d.elicit.domain));
  return d;
}

// Tag as used in file names ("synthetic#a" -> "synthetic-a").
inline std::string file_tag(const std::string& tag) {
  std::string t = tag;
  std::replace(t.begin(), t.end(), '#', '-');
  return t;
}

inline analysis::BootstrapOptions boot_options(const RunContext& ctx, std::string_view what, std::size_t idx) {
  const auto a = ctx.section("analysis");
  analysis::BootstrapOptions o;
  o.n_boot = a.value("n_boot", analysis::kDefaultBootstrap);
  o.level = a.value("level", o.level);
  o.threads = a.value("threads", 0u);
  o.seed = derive_seed(ctx.seed, hash_string(what), idx);
  return o;
}

// Runs `fn` and returns its JSON, or {"error": ...} when the statistic is
// undefined for this data (too few units, constant rows).
template <typename Fn>
nlohmann::json optional_stat(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::insufficient_units:
      case Errc::degenerate_variance:
      case Errc::degenerate_row:
      case Errc::empty_histogram:
      case Errc::rank_deficient:
      case Errc::missing_counterpart:
      case Errc::missing_cell:
        return {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
      default:
        throw;
    }
  }
}

inline ratings::RatingMatrix restrict(const ratings::RatingMatrix& rm, const std::vector<std::string>& tones,
                                      const std::vector<std::string>& sentences) {
  ratings::RatingMatrix out;
  out.domain = rm.domain;
  out.means.resize(static_cast<Eigen::Index>(tones.size()), static_cast<Eigen::Index>(sentences.size()));
  out.counts.resize(out.means.rows(), out.means.cols());
  auto find = [](const auto& items, const std::string& s) {
    return static_cast<Eigen::Index>(
        std::find_if(items.begin(), items.end(), [&](const auto& x) { return x.text() == s; }) - items.begin());
  };
  for (std::size_t i = 0; i < tones.size(); ++i) {
    const auto r = find(rm.tones, tones[i]);
    out.tones.push_back(rm.tones[static_cast<std::size_t>(r)]);
    for (std::size_t j = 0; j < sentences.size(); ++j) {
      const auto c = find(rm.sentences, sentences[j]);
      if (i == 0) out.sentences.push_back(rm.sentences[static_cast<std::size_t>(c)]);
      out.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rm.means(r, c);
      out.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rm.counts(r, c);
    }
  }
  return out;
}

inline void write_histogram_csv(const std::filesystem::path& p, const analysis::ToneHistogram& h) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::io_error, "cannot write " + p.string());
  csv::write_row(out, {"tone", "count"});
  for (const auto& [tone, n] : h.ranked()) csv::write_row(out, {tone, std::to_string(n)});
}

inline nlohmann::json top_terms(const analysis::TermScores& scores, std::size_t k) {
  std::vector<std::pair<std::string, double>> v(scores.begin(), scores.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size() && i < k; ++i) out.push_back({{"term", v[i].first}, {"score", v[i].second}});
  return out;
}

// Every analysis over one or two pipeline directories. Cross-domain parts
// need two inputs and run on the tones and sentences they share.
inline nlohmann::json cmd_analyze(const RunContext& ctx, const std::vector<std::filesystem::path>& inputs) {
  if (inputs.empty() || inputs.size() > 2) throw Error(Errc::invalid_parameter, "analyze takes one or two inputs");
  check_analyze_inputs(inputs);
  std::vector<DomainData> doms;
  for (const auto& dir : inputs) doms.push_back(load_domain(ctx, dir));
  if (doms.size() == 2 && doms[0].tag == doms[1].tag) {
    doms[0].tag += "#a";
    doms[1].tag += "#b";
  }
  const auto acfg = ctx.section("analysis");
  const auto top_k = acfg.value("top_k", std::size_t{10});
  std::filesystem::create_directories(ctx.out);
  std::vector<std::string> outputs;

  nlohmann::json domains = nlohmann::json::array();
  std::vector<analysis::ToneHistogram> hists;
  std::map<std::string, std::vector<std::string>> tfidf_docs;
  for (std::size_t k = 0; k < doms.size(); ++k) {
    const auto& d = doms[k];
    const auto h = analysis::tone_histogram(d.elicit.tones);
    hists.push_back(h);
    nlohmann::json entropy = optional_stat([&] {
      return to_json(analysis::bootstrap_ci(
          d.elicit.tones, [](const std::vector<Tone>& s) { return analysis::entropy_bits(analysis::tone_histogram(s)); },
          boot_options(ctx, "entropy", k)));
    });
    std::vector<std::string> tone_texts;
    for (const auto& t : d.elicit.tones) tone_texts.push_back(t.text());
    nlohmann::json reliability = {
        {"histogram", optional_stat([&] {
           return to_json(analysis::split_half_histogram(tone_texts, boot_options(ctx, "reliability-histogram", k)));
         })},
        {"similarity", optional_stat([&] {
           return to_json(analysis::split_half_similarity(d.similarity, boot_options(ctx, "reliability-similarity", k)));
         })},
        {"rating_matrix", optional_stat([&] {
           return to_json(analysis::split_half_matrix(d.rm, boot_options(ctx, "reliability-matrix", k)));
         })},
        {"partition_units", {{"histogram", "trials"}, {"similarity", "per-pair-ratings"}, {"rating_matrix", "sentences"}}}};
    nlohmann::json intra = optional_stat([&] { return to_json(analysis::intra_correlation(d.rm)); });
    if (!intra.contains("error")) {
      const auto c = analysis::intra_correlation(d.rm);
      csv::write_matrix(ctx.out / ("intra_" + file_tag(d.tag) + ".csv"), "tone", c.rows, c.cols, c.values);
      outputs.push_back("intra_" + file_tag(d.tag) + ".csv");
    }
    write_histogram_csv(ctx.out / ("histogram_" + file_tag(d.tag) + ".csv"), h);
    outputs.push_back("histogram_" + file_tag(d.tag) + ".csv");
    nlohmann::json sim_labels = nlohmann::json::array();
    for (const auto& t : d.sm.tones) sim_labels.push_back(t.text());
    nlohmann::json sim_values = nlohmann::json::array();
    for (Eigen::Index i = 0; i < d.sm.values.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < d.sm.values.cols(); ++j) row.push_back(d.sm.values(i, j));
      sim_values.push_back(row);
    }
    for (const auto& s : d.elicit.sentences) tfidf_docs[d.tag].push_back(s.text());
    domains.push_back({{"tag", d.tag},
                       {"domain", std::string(to_string(d.elicit.domain))},
                       {"input", d.dir.string()},
                       {"accepted_tone_trials", d.elicit.tones.size()},
                       {"accepted_sentence_trials", d.elicit.sentences.size()},
                       {"histogram", h.to_json()},
                       {"entropy_bits", entropy},
                       {"reliability", reliability},
                       {"intra_correlation", intra},
                       {"similarity_matrix", {{"labels", sim_labels}, {"values", sim_values}}}});
  }

  nlohmann::json taxonomy = nlohmann::json::array();
  if (hists.size() == 2) {
    for (const auto& t : analysis::select_taxonomy(hists[0], hists[1], top_k)) taxonomy.push_back(t);
  } else {
    const auto r = hists[0].ranked();
    for (std::size_t i = 0; i < r.size() && i < top_k; ++i) taxonomy.push_back(r[i].first);
  }

  const auto tf = analysis::tfidf(tfidf_docs);
  nlohmann::json tfidf_json = nlohmann::json::object();
  for (const auto& [dom, scores] : tf) tfidf_json[dom] = top_terms(scores, acfg.value("tfidf_top", std::size_t{25}));

  nlohmann::json cross = nullptr;
  nlohmann::json notes = nlohmann::json::array();
  if (doms.size() == 2) {
    std::vector<std::string> tones, sentences;
    std::set<std::string> tb, sb;
    for (const auto& t : doms[1].rm.tones) tb.insert(t.text());
    for (const auto& s : doms[1].rm.sentences) sb.insert(s.text());
    for (const auto& t : doms[0].rm.tones)
      if (tb.count(t.text())) tones.push_back(t.text());
    for (const auto& s : doms[0].rm.sentences)
      if (sb.count(s.text())) sentences.push_back(s.text());
    if (tones.size() < 3 || sentences.size() < 3) {
      notes.push_back("cross-domain analyses skipped: the inputs share " + std::to_string(tones.size()) + " tones and " +
                      std::to_string(sentences.size()) + " sentences (need 3 of each)");
    } else {
      const auto a = restrict(doms[0].rm, tones, sentences), b = restrict(doms[1].rm, tones, sentences);
      const auto xc = analysis::cross_correlation(a, b);
      csv::write_matrix(ctx.out / "cross_correlation.csv", "tone", xc.rows, xc.cols, xc.values);
      const auto comb = analysis::combined_matrix(a, b);
      csv::write_matrix(ctx.out / "combined_correlation.csv", "label", comb.rows, comb.cols, comb.values);
      analysis::MdsOptions mo;
      mo.dim = acfg.value("mds_dim", 2);
      const auto sol = analysis::mds_from_correlation(comb, mo);
      {
        std::ofstream out(ctx.out / "mds_points.csv");
        csv::Row header{"label"};
        for (int c = 0; c < mo.dim; ++c) header.push_back("dim" + std::to_string(c + 1));
        csv::write_row(out, header);
        for (std::size_t i = 0; i < sol.labels.size(); ++i) {
          csv::Row r{sol.labels[i]};
          for (int c = 0; c < mo.dim; ++c) r.push_back(csv::format_double(sol.points(static_cast<Eigen::Index>(i), c)));
          csv::write_row(out, r);
        }
      }
      nlohmann::json arrows = nlohmann::json::object();
      for (const auto& d : doms)
        arrows[d.tag] = optional_stat([&] {
          nlohmann::json arr = nlohmann::json::array();
          for (const auto& ar : analysis::biplot_arrows(sol, d.fm, d.tag)) arr.push_back(to_json(ar));
          return arr;
        });
      nlohmann::json same = optional_stat([&] {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : analysis::same_tone_distances(sol)) arr.push_back({{"tone", t.tone}, {"distance", t.distance}});
        return arr;
      });
      const auto space = analysis::nn_space_from_string(acfg.value("nn_space", std::string("correlation")));
      const auto nn = analysis::nn_matching(a, b, boot_options(ctx, "nn", 0), space, mo);
      {
        std::ofstream out(ctx.out / "nn_graph.csv");
        csv::write_row(out, {"direction", "source", "target", "frequency"});
        for (const auto& e : nn.a_to_b) csv::write_row(out, {"a_to_b", e.source, e.target, csv::format_double(e.frequency)});
        for (const auto& e : nn.b_to_a) csv::write_row(out, {"b_to_a", e.source, e.target, csv::format_double(e.frequency)});
      }
      outputs.insert(outputs.end(), {"cross_correlation.csv", "combined_correlation.csv", "mds_points.csv", "nn_graph.csv"});
      cross = {{"tones", tones},
               {"sentences", sentences.size()},
               {"cross_correlation", to_json(xc)},
               {"combined_correlation", to_json(comb)},
               {"mds", to_json(sol)},
               {"arrows", arrows},
               {"same_tone_distances", same},
               {"nn_graph", to_json(nn)}};
    }
  }

  nlohmann::json report = {{"schema_version", std::string(kReportSchemaVersion)},
                           {"experiment_id", ctx.experiment_id()},
                           {"config_hash", ctx.config_hash()},
                           {"seed", ctx.seed},
                           {"n_boot", acfg.value("n_boot", analysis::kDefaultBootstrap)},
                           {"domains", domains},
                           {"taxonomy", taxonomy},
                           {"tfidf", tfidf_json},
                           {"cross", cross},
                           {"notes", notes}};
  write_json_file(ctx.out / "report.json", report);
  outputs.insert(outputs.begin(), "report.json");
  auto m = make_manifest(ctx, Stage::analyze);
  for (const auto& d : inputs) m.inputs.push_back(d.string());
  m.outputs = outputs;
  write_manifest(ctx.out, m);
  return report;
}

}  // namespace swp::cli
