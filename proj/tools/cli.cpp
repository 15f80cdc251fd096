#include "corpusplay/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corpusplay/config.hpp"
#include "corpusplay/engine.hpp"
#include "corpusplay/error.hpp"
#include "corpusplay/eval.hpp"
#include "corpusplay/serve.hpp"
#include "corpusplay/verifier.hpp"

namespace corpusplay::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::atomic<bool> g_stop{false};
BatchServer* g_server = nullptr;

extern "C" void on_signal(int) {
  g_stop.store(true);
  if (g_server) g_server->stop();
}

// Installs SIGINT/SIGTERM handlers for the lifetime of the object.
class SignalScope {
 public:
  SignalScope() {
    g_stop.store(false);
    prev_int_ = std::signal(SIGINT, on_signal);
    prev_term_ = std::signal(SIGTERM, on_signal);
  }
  ~SignalScope() {
    std::signal(SIGINT, prev_int_);
    std::signal(SIGTERM, prev_term_);
  }

 private:
  void (*prev_int_)(int);
  void (*prev_term_)(int);
};

std::string footer() {
  std::string s = "Config keys (JSON file, or --set key=value):\n";
  for (const auto& k : config_keys()) s += "  " + k + "\n";
  s += "\nExit codes: 0 success, 1 runtime error, 2 usage or config error.\n";
  return s;
}

EngineConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  EngineConfig base = path.empty() ? EngineConfig{} : load_config(path);
  if (overrides.empty()) return base;
  json j = base.to_json();
  for (const auto& o : overrides) apply_override(j, o);
  return EngineConfig::from_json(j);
}

CorpusStore open_corpus(const EngineConfig& config) {
  if (config.corpus.path.empty()) throw ConfigError("corpus.path is not set");
  CorpusStore store = CorpusStore::load(config.corpus.path, config.seed);
  if (!config.corpus.source_mix.empty()) store.set_source_mix(config.corpus.source_mix);
  if (store.empty()) throw ConfigError("corpus " + config.corpus.path + " holds no documents");
  return store;
}

std::vector<int> parse_labels(const std::string& text) {
  std::vector<int> labels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "1")
      labels.push_back(1);
    else if (item == "0")
      labels.push_back(0);
    else
      throw ConfigError("labels must be a comma-separated list of 0 and 1");
  }
  if (labels.empty()) throw ConfigError("labels must not be empty");
  return labels;
}

constexpr RewardScheme kSchemes[] = {RewardScheme::Variance, RewardScheme::AbsoluteZero, RewardScheme::Threshold,
                                     RewardScheme::RZero};

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"corpusplay: corpus-grounded self-play rollout engine", "corpusplay"};
  app.require_subcommand(1);
  app.footer(footer());

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Segment a line-delimited text file into a document store");
  std::string ingest_input, ingest_source = "default", ingest_store;
  std::size_t ingest_budget = kDefaultSegmentBudget;
  bool ingest_append = false;
  ingest->add_option("--input", ingest_input, "Records with a text field, one JSON object per line")->required();
  ingest->add_option("--source", ingest_source, "Source tag for records without one");
  ingest->add_option("--budget", ingest_budget, "Segment budget in estimated tokens")->check(CLI::PositiveNumber);
  ingest->add_option("--store", ingest_store, "Store file to write")->required();
  ingest->add_flag("--append", ingest_append, "Add to an existing store file");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run self-play iterations and export trajectory batches");
  std::string run_config, run_out;
  std::vector<std::string> run_sets;
  int run_stop_after = 0;
  run_cmd->add_option("--config", run_config, "Config JSON file");
  run_cmd->add_option("--set", run_sets, "Override a config key: key.path=value (repeatable)");
  run_cmd->add_option("--out", run_out, "Run directory (resumed if it exists)")->required();
  run_cmd->add_option("--stop-after", run_stop_after, "Stop after this many iterations in this invocation")
      ->check(CLI::NonNegativeNumber);

  // crossplay
  auto* cross = app.add_subcommand("crossplay", "Evaluate a challenger against a reasoner on a document pool");
  std::string cross_config, cross_out, cross_cid = "challenger", cross_rid = "reasoner";
  std::vector<std::string> cross_sets;
  int cross_docs = 128, cross_attempts = 128;
  cross->add_option("--config", cross_config, "Config JSON file (policy, corpus, templates, G, seed)");
  cross->add_option("--set", cross_sets, "Override a config key: key.path=value (repeatable)");
  cross->add_option("--out", cross_out, "Output directory for crossplay.csv and crossplay.json")->required();
  cross->add_option("--challenger-id", cross_cid, "Label of the challenger checkpoint");
  cross->add_option("--reasoner-id", cross_rid, "Label of the reasoner checkpoint");
  cross->add_option("--docs", cross_docs, "Documents in the pool")->check(CLI::PositiveNumber);
  cross->add_option("--attempts", cross_attempts, "Generation attempts per document")->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate challenger/reasoner co-evolution on a difficulty grid");
  SimConfig sim_cfg;
  std::string sim_scheme = "variance", sim_out;
  int sim_freeze = -1;
  sim->add_option("--scheme", sim_scheme, "variance, absolute_zero, threshold or rzero");
  sim->add_option("--steps", sim_cfg.steps, "Simulation steps")->check(CLI::PositiveNumber);
  sim->add_option("--lr", sim_cfg.learning_rate, "Reasoner learning rate");
  sim->add_option("--initial-skill", sim_cfg.initial_skill, "Initial reasoner skill");
  sim->add_option("--grid-lo", sim_cfg.grid_lo, "Lowest difficulty");
  sim->add_option("--grid-hi", sim_cfg.grid_hi, "Highest difficulty");
  sim->add_option("--grid-points", sim_cfg.grid_points, "Difficulty grid size");
  sim->add_option("--samples", sim_cfg.K, "Reasoner samples per task");
  sim->add_option("--seed", sim_cfg.seed, "RNG seed");
  sim->add_option("--freeze-at", sim_freeze, "Step at which a frozen reasoner copy is taken");
  sim->add_option("--out", sim_out, "Output directory (default: CSV to stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "Check a candidate answer against a gold answer");
  std::string v_type, v_gold, v_cand;
  verify->add_option("--type", v_type, "MCQ, Integer, Float, Expression, String or Boolean")->required();
  verify->add_option("--gold", v_gold, "Gold answer")->required();
  verify->add_option("--candidate", v_cand, "Candidate answer; a \\boxed{} payload is used if present")->required();

  // reward
  auto* reward = app.add_subcommand("reward", "Inspect challenger rewards for a label group");
  std::string r_scheme = "variance", r_labels, r_curve;
  bool r_invalid = false;
  RewardConfig r_cfg;
  reward->add_option("--scheme", r_scheme, "variance, absolute_zero, threshold or rzero");
  reward->add_option("--labels", r_labels, "Comma-separated 0/1 reasoner labels");
  reward->add_flag("--invalid", r_invalid, "Score an invalid task");
  reward->add_option("--sigma2-opt", r_cfg.sigma2_opt, "Target variance");
  reward->add_option("--tau", r_cfg.tau, "Gaussian width");
  reward->add_option("--rho", r_cfg.rho, "Invalid-task penalty");
  reward->add_option("--curve", r_curve, "Write the reward curve CSV (p from 0 to 1 by 0.01) to this file");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve a run directory's batches and metrics over HTTP");
  std::string s_dir, s_host = "127.0.0.1";
  int s_port = 8080;
  serve->add_option("--run", s_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--host", s_host, "Bind address");
  serve->add_option("--port", s_port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      CorpusStore store;
      if (ingest_append && fs::exists(ingest_store)) store = CorpusStore::load(ingest_store);
      auto report = store.ingest(fs::path(ingest_input), ingest_source, ingest_budget);
      store.save(ingest_store);
      out << json{{"records", report.records}, {"added", report.added}, {"malformed", report.malformed},
                  {"empty", report.empty}, {"store_size", store.size()}}
                 .dump()
          << "\n";
      return kExitOk;
    }

    if (*run_cmd) {
      EngineConfig config = resolve_config(run_config, run_sets);
      CorpusStore store = open_corpus(config);
      Clients clients = make_clients(config);
      SignalScope signals;
      RunOptions options;
      options.stop_flag = &g_stop;
      if (run_stop_after > 0) options.stop_after = run_stop_after;
      options.on_iteration = [&](const IterationBatch& b) {
        out << "iteration " << b.iteration << ": " << b.metrics.dump() << "\n" << std::flush;
      };
      RunSummary s = run(store, clients, config, run_out, options);
      out << json{{"first_iteration", s.first_iteration}, {"last_completed", s.last_completed},
                  {"iterations_run", s.iterations_run}, {"stopped_early", s.stopped_early}}
                 .dump()
          << "\n";
      return kExitOk;
    }

    if (*cross) {
      EngineConfig config = resolve_config(cross_config, cross_sets);
      CorpusStore store = open_corpus(config);
      Clients clients = make_clients(config);
      CrossplayConfig cc;
      cc.challenger_id = cross_cid;
      cc.reasoner_id = cross_rid;
      cc.n_docs = cross_docs;
      cc.attempts_per_doc = cross_attempts;
      cc.G = config.G;
      cc.seed = config.seed;
      cc.concurrency = config.concurrency;
      cc.settings = rollout_settings(config);
      CrossplayReport report = crossplay(*clients.challenger, *clients.reasoner, store, cc);
      fs::create_directories(cross_out);
      std::ofstream csv(fs::path(cross_out) / "crossplay.csv");
      csv << std::setprecision(17);
      write_crossplay_csv(csv, report);
      json summary = {{"challenger_id", report.challenger_id}, {"reasoner_id", report.reasoner_id},
                      {"documents_used", report.documents_used},
                      {"documents_without_task", report.documents_without_task},
                      {"tasks", report.records.size()}, {"pass_rate", report.pass_rate}};
      std::ofstream(fs::path(cross_out) / "crossplay.json") << summary.dump(2) << "\n";
      out << summary.dump() << "\n";
      return kExitOk;
    }

    if (*sim) {
      sim_cfg.reward.scheme = parse_reward_scheme(sim_scheme);
      if (sim_freeze >= 0) sim_cfg.freeze_at = sim_freeze;
      auto series = simulate_coevolution(sim_cfg);
      if (sim_out.empty()) {
        out << std::setprecision(10);
        write_simulation_csv(out, series);
      } else {
        fs::create_directories(sim_out);
        std::ofstream csv(fs::path(sim_out) / "simulation.csv");
        csv << std::setprecision(17);
        write_simulation_csv(csv, series);
        out << "wrote " << series.size() << " steps to " << (fs::path(sim_out) / "simulation.csv").string() << "\n";
      }
      return kExitOk;
    }

    if (*verify) {
      const auto parsed_type = parse_answer_type(v_type);
      if (!parsed_type) throw ConfigError("unknown answer type: " + v_type);
      const AnswerType type = *parsed_type;
      if (!normalize_gold(type, v_gold)) throw ConfigError("gold '" + v_gold + "' is not a valid " + v_type);
      std::string answer = v_cand;
      if (auto boxed = extract_boxed(v_cand)) answer = boxed->raw;
      const bool ok = equivalent(v_gold, answer, type);
      out << json{{"type", to_string(type)}, {"gold", v_gold}, {"candidate", answer}, {"equivalent", ok}}.dump()
          << "\n";
      return ok ? kExitOk : kExitRuntime;
    }

    if (*reward) {
      r_cfg.scheme = parse_reward_scheme(r_scheme);
      r_cfg.validate();
      if (!r_curve.empty()) {
        std::ofstream csv(r_curve);
        if (!csv) throw Error("cannot write " + r_curve);
        csv << std::setprecision(17) << "p";
        for (auto s : kSchemes) csv << ',' << to_string(s);
        csv << '\n';
        for (int i = 0; i <= 100; ++i) {
          const double p = i / 100.0;
          csv << p;
          for (auto s : kSchemes) {
            RewardConfig c = r_cfg;
            c.scheme = s;
            csv << ',' << scheme_reward(p, c);
          }
          csv << '\n';
        }
      }
      if (r_invalid) {
        out << json{{"scheme", to_string(r_cfg.scheme)}, {"valid", false},
                    {"reward", challenger_reward(std::nullopt, r_cfg)}}
                   .dump()
            << "\n";
      } else if (!r_labels.empty()) {
        auto stats = GroupStats::from_labels(parse_labels(r_labels));
        json per_scheme = json::object();
        for (auto s : kSchemes) {
          RewardConfig c = r_cfg;
          c.scheme = s;
          per_scheme[std::string(to_string(s))] = challenger_reward(stats, c);
        }
        out << json{{"scheme", to_string(r_cfg.scheme)}, {"k", stats.labels.size()},
                    {"pass_rate", stats.pass_rate}, {"variance", stats.variance},
                    {"reward", challenger_reward(stats, r_cfg)}, {"schemes", per_scheme}}
                   .dump()
            << "\n";
      } else if (r_curve.empty()) {
        throw ConfigError("reward needs --labels, --invalid or --curve");
      }
      return kExitOk;
    }

    if (*serve) {
      BatchServer server(s_dir);
      const int port = server.bind(s_host, s_port);
      out << "serving " << s_dir << " on http://" << s_host << ":" << port << "\n" << std::flush;
      SignalScope signals;
      g_server = &server;
      server.listen();
      g_server = nullptr;
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace corpusplay::cli
