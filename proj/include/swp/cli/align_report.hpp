#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "swp/alignment/benchmark.hpp"
#include "swp/alignment/fixture.hpp"
#include "swp/chain/experiment.hpp"
#include "swp/cli/analyze_stage.hpp"
#include "swp/cli/context.hpp"
#include "swp/core/jsonl.hpp"
#include "swp/core/matrix_csv.hpp"
#include "swp/ratings/records.hpp"

namespace swp::cli {

// ---- align ----

struct AlignInputs {
  std::optional<std::filesystem::path> x, y, truth;
  std::optional<std::size_t> seeds;
  bool fixture = false;
};

inline alignment::BenchmarkOptions benchmark_options(const RunContext& ctx, std::optional<std::size_t> seeds) {
  const auto a = ctx.section("alignment");
  alignment::BenchmarkOptions o;
  o.seeds = seeds.value_or(a.value("seeds", o.seeds));
  o.base_seed = ctx.seed;
  o.threads = a.value("threads", 0u);
  o.include_random_baseline = a.value("random_baseline", true);
  const auto g = a.value("gwot", nlohmann::json::object());
  o.gwot.epsilon = g.value("epsilon", o.gwot.epsilon);
  o.gwot.max_outer = g.value("max_outer", o.gwot.max_outer);
  o.gwot.inner_sinkhorn_iters = g.value("inner_sinkhorn_iters", o.gwot.inner_sinkhorn_iters);
  o.gwot.tol = g.value("tol", o.gwot.tol);
  o.gwot.require_convergence = g.value("require_convergence", o.gwot.require_convergence);
  const auto b = a.value("bli", nlohmann::json::object());
  o.bli.k_neighbors = b.value("k_neighbors", o.bli.k_neighbors);
  const auto dir = b.value("direction", std::string("backward"));
  if (dir != "backward" && dir != "forward") throw Error(Errc::invalid_config, "alignment.bli.direction must be backward|forward");
  o.bli.direction = dir == "backward" ? alignment::BliDirection::backward : alignment::BliDirection::forward;
  o.bli.max_em_iters = b.value("max_em_iters", o.bli.max_em_iters);
  o.bli.restarts = b.value("restarts", o.bli.restarts);
  o.bli.keep_incumbent = b.value("keep_incumbent", o.bli.keep_incumbent);
  o.bli.restart_noise = b.value("restart_noise", o.bli.restart_noise);
  if (o.seeds < 1) throw Error(Errc::invalid_config, "alignment.seeds must be >= 1");
  if (!(o.gwot.epsilon > 0.0)) throw Error(Errc::invalid_config, "alignment.gwot.epsilon must be > 0");
  return o;
}

// Index of each wanted label in `have`; schema_error names the first one
// that is missing.
inline std::vector<Eigen::Index> reorder(const std::vector<std::string>& have, const std::vector<std::string>& want,
                                         const std::string& where) {
  std::map<std::string, Eigen::Index> idx;
  for (std::size_t i = 0; i < have.size(); ++i)
    if (!idx.emplace(have[i], static_cast<Eigen::Index>(i)).second)
      throw Error(Errc::schema_error, where + ": duplicate label '" + have[i] + "'");
  std::vector<Eigen::Index> out;
  for (const auto& w : want) {
    auto it = idx.find(w);
    if (it == idx.end()) throw Error(Errc::schema_error, where + ": no entry for tone '" + w + "'");
    out.push_back(it->second);
  }
  if (have.size() != want.size())
    throw Error(Errc::schema_error, where + ": expected " + std::to_string(want.size()) + " labels, found " +
                                        std::to_string(have.size()));
  return out;
}

struct AlignData {
  std::vector<std::string> x_labels, y_labels;
  Eigen::MatrixXd x, y, truth;
};

// Embedding CSVs as written by the rate stage (tones x sentence ids) and a
// ground-truth cross matrix as written by analyze (x tones x y tones).
inline AlignData load_align_inputs(const std::filesystem::path& xp, const std::filesystem::path& yp,
                                   const std::filesystem::path& tp) {
  auto x = csv::read_matrix(xp), y = csv::read_matrix(yp), t = csv::read_matrix(tp);
  if (x.cols.size() != y.cols.size())
    throw Error(Errc::schema_error, yp.string() + ": " + std::to_string(y.cols.size()) + " sentence columns, " +
                                        xp.string() + " has " + std::to_string(x.cols.size()));
  if (x.rows.size() != y.rows.size())
    throw Error(Errc::schema_error, yp.string() + ": " + std::to_string(y.rows.size()) + " tones, " + xp.string() +
                                        " has " + std::to_string(x.rows.size()));
  const auto ri = reorder(t.rows, x.rows, tp.string() + " rows");
  const auto ci = reorder(t.cols, y.rows, tp.string() + " columns");
  AlignData d{x.rows, y.rows, x.values, y.values, Eigen::MatrixXd(t.values.rows(), t.values.cols())};
  for (std::size_t i = 0; i < ri.size(); ++i)
    for (std::size_t j = 0; j < ci.size(); ++j)
      d.truth(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.values(ri[i], ci[j]);
  return d;
}

inline std::vector<std::string> numbered(const char* prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

inline alignment::BenchmarkReport cmd_align(const RunContext& ctx, const AlignInputs& in) {
  const auto opt = benchmark_options(ctx, in.seeds);
  std::filesystem::create_directories(ctx.out);
  AlignData d;
  auto m = make_manifest(ctx, Stage::align);
  if (in.fixture) {
    const auto f = ctx.section("alignment").value("fixture", nlohmann::json::object());
    alignment::FixtureOptions fo;
    fo.tones = f.value("tones", fo.tones);
    fo.sentences = f.value("sentences", fo.sentences);
    fo.permuted_share = f.value("permuted_share", fo.permuted_share);
    fo.noise = f.value("noise", fo.noise);
    fo.seed = ctx.seed;
    const auto fx = alignment::make_fixture(fo);
    d = {numbered("a", fx.x.rows()), numbered("b", fx.y.rows()), fx.x, fx.y, fx.ground_truth};
    const auto cols = numbered("s", fx.x.cols());
    csv::write_matrix(ctx.out / "fixture_x.csv", "tone", d.x_labels, cols, d.x);
    csv::write_matrix(ctx.out / "fixture_y.csv", "tone", d.y_labels, cols, d.y);
    csv::write_matrix(ctx.out / "fixture_truth.csv", "tone", d.x_labels, d.y_labels, d.truth);
    m.outputs = {"fixture_x.csv", "fixture_y.csv", "fixture_truth.csv"};
    m.extra["fixture"] = {{"tones", fo.tones}, {"sentences", fo.sentences}, {"permuted_share", fo.permuted_share}};
  } else {
    if (!in.x || !in.y || !in.truth)
      throw Error(Errc::invalid_parameter, "align needs --x, --y and --truth (or --fixture)");
    d = load_align_inputs(*in.x, *in.y, *in.truth);
    m.inputs = {in.x->string(), in.y->string(), in.truth->string()};
  }
  auto rep = alignment::run_benchmark(d.x, d.y, d.truth, opt);
  rep.metadata["x_labels"] = d.x_labels.size();
  write_benchmark(ctx.out, "benchmark", rep);
  m.outputs.insert(m.outputs.begin(), {"benchmark.csv", "benchmark.json"});
  m.extra["seeds"] = opt.seeds;
  write_manifest(ctx.out, m);
  return rep;
}

// ---- report ----

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  std::string missing;
  for (auto k : keys)
    if (!j.contains(k)) missing += (missing.empty() ? "" : ", ") + std::string(k);
  if (!missing.empty()) throw Error(Errc::schema_error, where + ": missing keys " + missing);
}

inline std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(prec);
  s << v;
  return s.str();
}

inline std::string ci_text(const nlohmann::json& r) {
  if (r.contains("error")) return "n/a (" + r.at("error").get<std::string>() + ")";
  return fmt(r.at("estimate").get<double>()) + " [" + fmt(r.at("ci_low").get<double>()) + ", " +
         fmt(r.at("ci_high").get<double>()) + "]";
}

// Markdown summary of report.json, plus benchmark.json when one sits next
// to it.
inline std::string render_report(const nlohmann::json& rep, const std::optional<nlohmann::json>& bench) {
  std::ostringstream md;
  md << "# Report: " << rep.at("experiment_id").get<std::string>() << "\n\n";
  md << "Seed " << rep.at("seed") << ", " << rep.at("n_boot") << " bootstrap replicates, config "
     << rep.at("config_hash").get<std::string>() << ".\n\n";
  md << "## Domains\n\n| domain | tone trials | sentence trials | entropy (bits) | reliability: histogram | "
        "similarity | rating matrix |\n|---|---|---|---|---|---|---|\n";
  for (const auto& d : rep.at("domains")) {
    const auto& r = d.at("reliability");
    md << "| " << d.at("tag").get<std::string>() << " | " << d.at("accepted_tone_trials") << " | "
       << d.at("accepted_sentence_trials") << " | " << ci_text(d.at("entropy_bits")) << " | "
       << ci_text(r.at("histogram")) << " | " << ci_text(r.at("similarity")) << " | " << ci_text(r.at("rating_matrix"))
       << " |\n";
  }
  md << "\n## Most frequent tones\n\n";
  for (const auto& d : rep.at("domains")) {
    md << "- " << d.at("tag").get<std::string>() << ":";
    std::size_t k = 0;
    for (const auto& h : d.at("histogram")) {
      if (k++ == 10) break;
      md << " " << h.at("tone").get<std::string>() << " (" << h.at("count") << ")";
    }
    md << "\n";
  }
  md << "\nTaxonomy:";
  for (const auto& t : rep.at("taxonomy")) md << " " << t.get<std::string>();
  md << "\n\n## Distinctive words (TF-IDF)\n\n";
  for (const auto& [dom, terms] : rep.at("tfidf").items()) {
    md << "- " << dom << ":";
    std::size_t k = 0;
    for (const auto& t : terms) {
      if (k++ == 10) break;
      md << " " << t.at("term").get<std::string>();
    }
    md << "\n";
  }
  const auto& cross = rep.at("cross");
  if (!cross.is_null()) {
    md << "\n## Cross-domain\n\n" << cross.at("tones").size() << " shared tones, " << cross.at("sentences")
       << " shared sentences. MDS stress " << fmt(cross.at("mds").value("stress", 0.0), 4) << ".\n\n";
    const auto& same = cross.at("same_tone_distances");
    if (same.is_array()) {
      md << "Largest same-tone distances:";
      std::size_t k = 0;
      for (const auto& s : same) {
        if (k++ == 5) break;
        md << " " << s.at("tone").get<std::string>() << " (" << fmt(s.at("distance").get<double>()) << ")";
      }
      md << "\n";
    }
  }
  for (const auto& n : rep.at("notes")) md << "\nNote: " << n.get<std::string>() << "\n";
  if (bench) {
    md << "\n## Alignment benchmark\n\n| method | similarity recovery | preservation A | preservation B | kNN k=1 | "
          "runs | failed |\n|---|---|---|---|---|---|---|\n";
    for (const auto& m : bench->at("methods")) {
      auto cell = [](const nlohmann::json& s) {
        if (s.at("n").get<std::size_t>() == 0) return std::string("NA");
        return fmt(s.at("mean").get<double>()) + " [" + fmt(s.at("ci_low").get<double>()) + ", " +
               fmt(s.at("ci_high").get<double>()) + "]";
      };
      md << "| " << m.at("method").get<std::string>() << " | " << cell(m.at("similarity_recovery")) << " | "
         << cell(m.at("preservation_a")) << " | " << cell(m.at("preservation_b")) << " | "
         << cell(m.at("knn_matching").at("1")) << " | " << m.at("runs") << " | " << m.at("failed_seeds").size() << " |\n";
    }
  }
  return md.str();
}

inline std::string cmd_report(const RunContext& ctx, const std::filesystem::path& input) {
  require_stages(input, Stage::report);
  const auto p = input / "report.json";
  const auto rep = read_json_file(p, Errc::schema_error);
  require_keys(rep, {"schema_version", "experiment_id", "config_hash", "seed", "n_boot", "domains", "taxonomy", "tfidf",
                     "cross", "notes"},
               p.string());
  const auto ver = rep.at("schema_version").get<std::string>();
  if (ver.substr(0, ver.find('.')) != std::string(kReportSchemaVersion).substr(0, 1))
    throw Error(Errc::schema_error, p.string() + ": unsupported schema_version " + ver);
  std::optional<nlohmann::json> bench;
  if (std::filesystem::exists(input / "benchmark.json")) {
    bench = read_json_file(input / "benchmark.json", Errc::schema_error);
    require_keys(*bench, {"methods", "metadata"}, (input / "benchmark.json").string());
  }
  const auto md = render_report(rep, bench);
  std::filesystem::create_directories(ctx.out);
  std::ofstream(ctx.out / "report.md") << md;
  auto m = make_manifest(ctx, Stage::report);
  m.inputs = {p.string()};
  if (bench) m.inputs.push_back((input / "benchmark.json").string());
  m.outputs = {"report.md"};
  write_manifest(ctx.out, m);
  return md;
}

// ---- ingest ----

// Looks up the configured column for `key` in a mapping object.
struct ColumnMap {
  const csv::Table* table;
  nlohmann::json mapping;
  std::string source;

  std::optional<std::size_t> find(const char* key) const {
    if (!mapping.contains(key)) return std::nullopt;
    return csv::column(*table, mapping.at(key).get<std::string>(), source);
  }
  std::size_t need(const char* key) const {
    if (!mapping.contains(key)) throw Error(Errc::invalid_config, source + ": column mapping needs '" + key + "'");
    return *find(key);
  }
};

inline std::string at_row(const std::string& source, const csv::Table& t, std::size_t r) {
  return source + " line " + std::to_string(t.line_numbers[r]);
}

inline int likert_cell(const std::string& v, const std::string& where) {
  const double x = csv::parse_double(v, where);
  if (x != std::floor(x) || x < 1 || x > 5) throw Error(Errc::invalid_item, where + ": not a 1..5 rating: '" + v + "'");
  return static_cast<int>(x);
}

// Turns a released-data CSV export into the files the pipeline stages
// write, so analyze and align run on it unchanged. Column names come from
// the config section "ingest"; see data/config/ingest.example.json.
inline nlohmann::json cmd_ingest(const RunContext& ctx, const nlohmann::json& spec, const std::filesystem::path& base) {
  const Domain domain = domain_from_string(spec.value("domain", std::string("human")));
  auto resolve = [&](const nlohmann::json& sec) {
    std::filesystem::path p = sec.at("file").get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  auto section = [&](const char* name) -> nlohmann::json {
    if (!spec.contains(name)) throw Error(Errc::invalid_config, std::string("ingest needs a '") + name + "' section");
    const auto s = spec.at(name);
    if (!s.contains("file") || !s.contains("columns"))
      throw Error(Errc::invalid_config, std::string("ingest.") + name + " needs 'file' and 'columns'");
    return s;
  };
  std::filesystem::create_directories(ctx.out);
  nlohmann::json counts;

  // trials
  {
    const auto sec = section("trials");
    const auto path = resolve(sec);
    const auto t = csv::read(path);
    ColumnMap cm{&t, sec.at("columns"), path.string()};
    const auto c_resp = cm.need("response"), c_kind = cm.need("kind");
    const auto c_chain = cm.find("chain_id"), c_iter = cm.find("iteration"), c_prompt = cm.find("prompt"),
               c_agent = cm.find("participant"), c_status = cm.find("status");
    const auto kinds = sec.value("kind_values", nlohmann::json{{"S", "S"}, {"T", "T"}});
    const auto accepted = sec.value("accepted_values", std::vector<std::string>{"accepted"});
    JsonlWriter log(ctx.out / kTrialsFile, false);
    std::size_t n = 0, skipped = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      const auto where = at_row(path.string(), t, r);
      if (c_status && std::find(accepted.begin(), accepted.end(), row[*c_status]) == accepted.end()) {
        ++skipped;
        continue;
      }
      if (!kinds.contains(row[c_kind]))
        throw Error(Errc::schema_error, where + " column '" + t.header[c_kind] + "': unknown trial kind '" + row[c_kind] + "'");
      const TrialKind kind = kinds.at(row[c_kind]).get<std::string>() == "S" ? TrialKind::S : TrialKind::T;
      chain::Trial tr;
      try {
        tr.trial_id = "ingest-" + std::to_string(r + 1);
        tr.chain_id = c_chain ? row[*c_chain] : "ingest";
        tr.iteration = c_iter ? static_cast<std::size_t>(csv::parse_double(row[*c_iter], where)) : r;
        tr.kind = kind;
        const std::string prompt = c_prompt ? row[*c_prompt] : std::string();
        if (kind == TrialKind::S) {
          tr.prompt = Tone::make(prompt.empty() ? "neutral" : prompt);
          tr.response = Sentence::make(row[c_resp]);
        } else {
          tr.prompt = Sentence::make(prompt.empty() ? "unknown" : prompt);
          tr.response = Tone::make(row[c_resp]);
        }
      } catch (const Error& e) {
        throw Error(Errc::schema_error, where + ": " + e.what());
      }
      tr.raw_response = row[c_resp];
      tr.agent_id = c_agent ? row[*c_agent] : "ingest";
      tr.status = TrialStatus::accepted;
      tr.attempts = 1;
      tr.resolved_at = 0;
      log.write(chain::to_json(tr));
      ++n;
    }
    auto m = make_manifest(ctx, Stage::elicit);
    m.inputs = {path.string()};
    m.outputs = {kTrialsFile};
    m.extra = {{"domain", std::string(to_string(domain))}, {"ingested", true}, {"accepted_trials", n}, {"skipped", skipped}};
    write_manifest(ctx.out, m);
    counts["trials"] = n;
  }

  // quality-of-fit ratings
  std::vector<ratings::RatingRecord> fit;
  {
    const auto sec = section("ratings");
    const auto path = resolve(sec);
    const auto t = csv::read(path);
    ColumnMap cm{&t, sec.at("columns"), path.string()};
    const auto ct = cm.need("tone"), cs = cm.need("sentence"), cv = cm.need("value");
    const auto cr = cm.find("rater");
    JsonlWriter log(ctx.out / kRatingsFile, false);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto where = at_row(path.string(), t, r);
      try {
        ratings::RatingRecord rec{Tone::make(t.rows[r][ct]), Sentence::make(t.rows[r][cs]),
                                  cr ? t.rows[r][*cr] : "ingest",
                                  likert_cell(t.rows[r][cv], where + " column '" + t.header[cv] + "'")};
        log.write(ratings::to_json(rec));
        fit.push_back(std::move(rec));
      } catch (const Error& e) {
        if (e.code() == Errc::invalid_item) throw;
        throw Error(Errc::schema_error, where + ": " + e.what());
      }
    }
    counts["ratings"] = fit.size();
  }
  ItemSet items;
  items.domain = domain;
  {
    std::set<Tone> ts;
    std::set<Sentence> ss;
    for (const auto& r : fit) {
      ts.insert(r.tone);
      ss.insert(r.sentence);
    }
    items.tones.assign(ts.begin(), ts.end());
    items.sentences.assign(ss.begin(), ss.end());
  }
  write_json_file(ctx.out / kItemsFile, items.to_json());
  {
    auto m = make_manifest(ctx, Stage::rate);
    m.inputs = {resolve(spec.at("ratings")).string()};
    m.outputs = {kRatingsFile, kItemsFile};
    m.extra = {{"domain", std::string(to_string(domain))}, {"ingested", true}};
    write_manifest(ctx.out, m);
  }

  // similarity
  {
    const auto sec = section("similarity");
    const auto path = resolve(sec);
    const auto t = csv::read(path);
    ColumnMap cm{&t, sec.at("columns"), path.string()};
    const auto ca = cm.need("tone_a"), cb = cm.need("tone_b"), cv = cm.need("value");
    const auto cr = cm.find("rater");
    const double lo = sec.value("scale_min", 1.0), hi = sec.value("scale_max", 5.0);
    JsonlWriter log(ctx.out / kSimilarityFile, false);
    std::size_t n = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto where = at_row(path.string(), t, r) + " column '" + t.header[cv] + "'";
      const double raw = csv::parse_double(t.rows[r][cv], where);
      if (raw < lo || raw > hi) throw Error(Errc::invalid_item, where + ": outside [" + fmt(lo) + ", " + fmt(hi) + "]");
      try {
        log.write(ratings::to_json(ratings::SimilarityRecord{Tone::make(t.rows[r][ca]), Tone::make(t.rows[r][cb]),
                                                             cr ? t.rows[r][*cr] : "ingest",
                                                             1.0 + 4.0 * (raw - lo) / (hi - lo)}));
      } catch (const Error& e) {
        throw Error(Errc::schema_error, at_row(path.string(), t, r) + ": " + e.what());
      }
      ++n;
    }
    auto m = make_manifest(ctx, Stage::similarity);
    m.inputs = {path.string()};
    m.outputs = {kSimilarityFile};
    write_manifest(ctx.out, m);
    counts["similarity"] = n;
  }

  // feature ratings
  {
    const auto sec = section("features");
    const auto path = resolve(sec);
    const auto t = csv::read(path);
    ColumnMap cm{&t, sec.at("columns"), path.string()};
    const auto ct = cm.need("tone"), cf = cm.need("feature"), cv = cm.need("value");
    const auto cr = cm.find("rater");
    const auto names = sec.value("feature_values", nlohmann::json::object());
    JsonlWriter log(ctx.out / kFeaturesFile, false);
    std::size_t n = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto where = at_row(path.string(), t, r);
      const std::string fname = names.contains(t.rows[r][cf]) ? names.at(t.rows[r][cf]).get<std::string>() : t.rows[r][cf];
      try {
        log.write(ratings::to_json(ratings::FeatureRecord{Tone::make(t.rows[r][ct]), feature_from_id(fname),
                                                          cr ? t.rows[r][*cr] : "ingest",
                                                          likert_cell(t.rows[r][cv], where + " column '" + t.header[cv] + "'")}));
      } catch (const Error& e) {
        if (e.code() == Errc::invalid_item) throw;
        throw Error(Errc::schema_error, where + ": " + e.what());
      }
      ++n;
    }
    auto m = make_manifest(ctx, Stage::features);
    m.inputs = {path.string()};
    m.outputs = {kFeaturesFile};
    write_manifest(ctx.out, m);
    counts["features"] = n;
  }
  return counts;
}

}  // namespace swp::cli
