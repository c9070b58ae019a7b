// swp: pipeline stages and the trial service.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "swp/cli/align_report.hpp"
#include "swp/cli/analyze_stage.hpp"
#include "swp/cli/collect_stages.hpp"
#include "swp/cli/context.hpp"
#include "swp/service/server.hpp"

namespace fs = std::filesystem;
using namespace swp;
using namespace swp::cli;

namespace {

struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config (default: data/config/default.json)");
  sub->add_option("--seed", c.seed, "master RNG seed (default: config \"seed\" or 0)");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
}

fs::path data_dir() {
  if (const char* d = std::getenv("SWP_DATA_DIR")) return d;
  return SWP_DEFAULT_DATA_DIR;
}

RunContext make_context(const Common& c) {
  RunContext ctx;
  ctx.data_dir = data_dir();
  ctx.config = load_config(c.config ? std::optional<fs::path>(*c.config) : std::nullopt, ctx.data_dir);
  ctx.seed = c.seed.value_or(ctx.config.value("seed", std::uint64_t{0}));
  ctx.config["seed"] = ctx.seed;
  ctx.out = c.out;
  return ctx;
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

int serve(const RunContext& ctx) {
  if (configured_backend(ctx) != Backend::human)
    throw Error(Errc::invalid_config, "serve needs \"backend\": \"human\" in the config");
  auto sc = service::ServiceConfig::from_json(ctx.config, ctx.data_dir / "instructions");
  sc.experiment = experiment_config(ctx, Backend::human);
  if (sc.state_dir.is_relative()) sc.state_dir = ctx.out / sc.state_dir;
  fs::create_directories(sc.state_dir);

  // Block the signals before any thread starts so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  service::TrialService svc(sc, load_lexicons(ctx));
  const int port = svc.start();
  std::cout << "listening on http://" << sc.host << ':' << port << " (state in " << sc.state_dir.string() << ")"
            << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  std::cout << "shutting down" << std::endl;
  svc.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-with-people pipeline: elicitation, ratings, analysis, alignment, trial service"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common c;
  std::string backend;
  std::optional<std::size_t> chains, iters, seeds;
  std::vector<std::string> inputs;
  std::optional<std::string> items, x, y, truth;
  std::string spec;
  bool fixture = false;

  auto* elicit = app.add_subcommand("elicit", "run every chain to completion with a synthetic or LLM agent");
  add_common(elicit, c);
  elicit->add_option("--backend", backend, "synthetic|llm (default: config \"backend\")");
  elicit->add_option("--chains", chains, "number of chains");
  elicit->add_option("--iters", iters, "iterations per chain");

  auto* rate = app.add_subcommand("rate", "quality-of-fit ratings of elicited tones x sentences");
  add_common(rate, c);
  rate->add_option("--input", inputs, "directory holding the elicit outputs (default: --out)");
  rate->add_option("--items", items, "items.json from another run, to rate the same tones and sentences");

  auto* sim = app.add_subcommand("similarity", "pairwise tone similarity judgments");
  add_common(sim, c);
  sim->add_option("--input", inputs, "directory holding the rate outputs (default: --out)");

  auto* feat = app.add_subcommand("features", "valence, arousal, informational and relational ratings per tone");
  add_common(feat, c);
  feat->add_option("--input", inputs, "directory holding the rate outputs (default: --out)");

  auto* analyze = app.add_subcommand("analyze", "histograms, reliability, correlations, MDS, biplots, NN graph");
  add_common(analyze, c);
  analyze->add_option("--input", inputs, "one or two pipeline directories (default: --out)");

  auto* align = app.add_subcommand("align", "benchmark alignment methods on two embedding sets");
  add_common(align, c);
  align->add_option("--x", x, "domain A embeddings (rating_matrix.csv)");
  align->add_option("--y", y, "domain B embeddings (rating_matrix.csv)");
  align->add_option("--truth", truth, "ground-truth cross correlation (cross_correlation.csv)");
  align->add_option("--seeds", seeds, "seeds per stochastic method (default: config alignment.seeds)");
  align->add_flag("--fixture", fixture, "use the built-in rotated and permuted synthetic fixture");

  auto* report = app.add_subcommand("report", "render report.json (and benchmark.json) as markdown");
  add_common(report, c);
  report->add_option("--input", inputs, "directory holding report.json (default: --out)");

  auto* ingest = app.add_subcommand("ingest", "convert released-data CSVs into pipeline logs");
  add_common(ingest, c);
  ingest->add_option("--spec", spec, "column-mapping JSON (see data/config/ingest.example.json)")->required();

  auto* srv = app.add_subcommand("serve", "HTTP trial service for human participants");
  add_common(srv, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto ctx = make_context(c);
    auto input = [&]() -> fs::path { return inputs.empty() ? ctx.out : fs::path(inputs.front()); };
    if (*elicit) {
      ElicitOverrides o;
      if (!backend.empty()) o.backend = backend_from_string(backend);
      o.chains = chains;
      o.iterations = iters;
      print(cmd_elicit(ctx, o));
    } else if (*rate) {
      print(cmd_rate(ctx, input(), items ? std::optional<fs::path>(*items) : std::nullopt));
    } else if (*sim) {
      print(cmd_similarity(ctx, input()));
    } else if (*feat) {
      print(cmd_features(ctx, input()));
    } else if (*analyze) {
      std::vector<fs::path> dirs(inputs.begin(), inputs.end());
      if (dirs.empty()) dirs.push_back(ctx.out);
      const auto rep = cmd_analyze(ctx, dirs);
      std::cout << "wrote " << (ctx.out / "report.json").string() << '\n';
      for (const auto& n : rep.at("notes")) std::cout << "note: " << n.get<std::string>() << '\n';
    } else if (*align) {
      AlignInputs in;
      if (x) in.x = *x;
      if (y) in.y = *y;
      if (truth) in.truth = *truth;
      in.seeds = seeds;
      in.fixture = fixture;
      const auto rep = cmd_align(ctx, in);
      alignment::write_benchmark_csv(std::cout, rep);
    } else if (*report) {
      cmd_report(ctx, input());
      std::cout << "wrote " << (ctx.out / "report.md").string() << '\n';
    } else if (*ingest) {
      const auto spec_json = read_json_file(spec, Errc::invalid_config);
      print(cmd_ingest(ctx, spec_json, fs::path(spec).parent_path()));
    } else if (*srv) {
      return serve(ctx);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
