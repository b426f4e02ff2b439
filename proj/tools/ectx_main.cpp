// Operator CLI for the elastic-context agent runtime.
//
// Subcommands: run (one episode), bench (a question file under one or more
// strategies), replay (bit-exact view reconstruction), stats (growth and
// op-usage CSVs), export-sft (training pairs from trajectories).

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ectx/ectx.hpp"

namespace fs = std::filesystem;

namespace {

// Flag storage. Sentinels ("" / -1) mean "not set on the command line";
// resolution order is flag > environment > config file > built-in default.
struct CommonFlags {
  std::string config_path;
  std::string backend;
  std::string script;
  std::string endpoint;
  std::string api_key;
  std::string model;
  std::string strategy;
  int window = -1;
  long long threshold = -1;
  int max_steps = -1;
  int max_rounds = -1;
  long long token_budget = -1;
  std::string tools;
  std::string corpus;
  long long padding = -1;
  long long seed = -1;
  long long byte_cap = -1;
  std::string search_url;
  std::string system_prompt_path;
  std::string summarize_prompt_path;
  std::string estimator;
  double temperature = -1.0;
  int max_output_tokens = -1;
  std::string out;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file");
  cmd->add_option("--backend", f.backend, "backend: scripted | http");
  cmd->add_option("--script", f.script, "script JSONL for the scripted backend");
  cmd->add_option("--endpoint", f.endpoint, "chat-completion endpoint URL (env ECTX_ENDPOINT)");
  cmd->add_option("--api-key", f.api_key, "API key (env ECTX_API_KEY)");
  cmd->add_option("--model", f.model, "model name for the http backend");
  cmd->add_option("--strategy", f.strategy,
                  "context-react | append-only | sliding-window | discard-all | periodic-summary");
  cmd->add_option("--window", f.window, "sliding-window size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", f.threshold, "token threshold for discard-all / periodic-summary");
  cmd->add_option("--max-steps", f.max_steps, "max tool calls per round")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-rounds", f.max_rounds, "max rounds (discard-all restarts)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--token-budget", f.token_budget, "advisory context budget in tokens");
  cmd->add_option("--tools", f.tools, "tool set: mock | http");
  cmd->add_option("--corpus", f.corpus, "mock corpus JSONL ({id,title,text} per line)");
  cmd->add_option("--padding", f.padding, "mock observation padding in bytes");
  cmd->add_option("--seed", f.seed, "seed for mock padding");
  cmd->add_option("--byte-cap", f.byte_cap, "fetch truncation cap in bytes");
  cmd->add_option("--search-url", f.search_url, "search endpoint for http tools");
  cmd->add_option("--system-prompt", f.system_prompt_path, "system prompt text file");
  cmd->add_option("--summarize-prompt", f.summarize_prompt_path, "summarizer prompt text file");
  cmd->add_option("--estimator", f.estimator, "token estimator: bytes/4 | bytes");
  cmd->add_option("--temperature", f.temperature, "sampling temperature");
  cmd->add_option("--max-output-tokens", f.max_output_tokens, "generation cap");
  cmd->add_option("--out", f.out, "output directory for this run");
}

struct Effective {
  std::string backend, script, endpoint, api_key, model;
  ectx::StrategySpec strategy;
  int max_steps = 300;
  int max_rounds = 5;
  std::size_t token_budget = 0;
  std::string tools, corpus;
  std::size_t padding = 0;
  std::uint64_t seed = 42;
  std::size_t byte_cap = 100000;
  std::string search_url;
  std::string system_prompt, summarize_prompt;
  std::string estimator_name = ectx::kDefaultEstimatorName;
  double temperature = 0.7;
  int max_output_tokens = 4096;
  std::string out;

  std::map<std::string, std::string> echo;  // effective settings, for stderr + manifest
};

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Effective resolve(const CommonFlags& f, const std::string& default_out) {
  ectx::KvConfig file;
  if (!f.config_path.empty()) file = ectx::KvConfig::load(f.config_path);

  auto str = [&](const std::string& flag, const char* env,
                 const std::string& key, const std::string& fallback) {
    return ectx::resolve_setting(flag, env, file, key, fallback);
  };
  auto num = [&](long long flag, const std::string& key, long long fallback) {
    if (flag >= 0) return flag;
    if (file.has(key)) return std::stoll(file.get(key));
    return fallback;
  };

  Effective e;
  e.backend = str(f.backend, nullptr, "backend", "scripted");
  e.script = str(f.script, nullptr, "script", "");
  e.endpoint = str(f.endpoint, "ECTX_ENDPOINT", "endpoint", "");
  e.api_key = str(f.api_key, "ECTX_API_KEY", "api_key", "");
  e.model = str(f.model, nullptr, "model", "default");
  e.strategy.kind = ectx::StrategySpec::kind_from_name(
      str(f.strategy, nullptr, "strategy", "context-react"));
  e.strategy.window = static_cast<int>(num(f.window, "window", 8));
  e.strategy.threshold = static_cast<std::size_t>(num(f.threshold, "threshold", 0));
  e.max_steps = static_cast<int>(num(f.max_steps, "max_steps", 300));
  e.max_rounds = static_cast<int>(num(f.max_rounds, "max_rounds", 5));
  e.token_budget = static_cast<std::size_t>(num(f.token_budget, "token_budget", 0));
  e.tools = str(f.tools, nullptr, "tools", "mock");
  e.corpus = str(f.corpus, nullptr, "corpus", "");
  // default mock observations are ~2,000 tokens to reproduce real page bulk
  e.padding = static_cast<std::size_t>(num(f.padding, "padding", 8000));
  e.seed = static_cast<std::uint64_t>(num(f.seed, "seed", 42));
  e.byte_cap = static_cast<std::size_t>(num(f.byte_cap, "byte_cap", 100000));
  e.search_url = str(f.search_url, nullptr, "search_url", "");
  e.estimator_name = str(f.estimator, nullptr, "estimator", ectx::kDefaultEstimatorName);
  if (f.temperature >= 0) {
    e.temperature = f.temperature;
  } else if (file.has("temperature")) {
    e.temperature = std::stod(file.get("temperature"));
  }
  e.max_output_tokens = static_cast<int>(
      num(f.max_output_tokens, "max_output_tokens", 4096));
  e.out = str(f.out, nullptr, "out", default_out);

  const std::string prompt_path = str(f.system_prompt_path, nullptr,
                                      "system_prompt",
                                      "assets/prompts/system_prompt.txt");
  const std::string summ_path = str(f.summarize_prompt_path, nullptr,
                                    "summarize_prompt",
                                    "assets/prompts/summarize_prompt.txt");
  if (fs::exists(prompt_path)) {
    e.system_prompt = read_text_file(prompt_path);
  } else if (e.backend == "http") {
    throw std::runtime_error("system prompt file not found: " + prompt_path +
                             " (required for the http backend)");
  }
  if (fs::exists(summ_path)) e.summarize_prompt = read_text_file(summ_path);

  e.echo = {
      {"backend", e.backend},
      {"script", e.script},
      {"endpoint", e.endpoint},
      {"model", e.model},
      {"strategy", e.strategy.canonical()},
      {"max_steps", std::to_string(e.max_steps)},
      {"max_rounds", std::to_string(e.max_rounds)},
      {"token_budget", std::to_string(e.token_budget)},
      {"tools", e.tools},
      {"corpus", e.corpus},
      {"padding", std::to_string(e.padding)},
      {"seed", std::to_string(e.seed)},
      {"byte_cap", std::to_string(e.byte_cap)},
      {"search_url", e.search_url},
      {"estimator", e.estimator_name},
      {"temperature", std::to_string(e.temperature)},
      {"max_output_tokens", std::to_string(e.max_output_tokens)},
      {"system_prompt", prompt_path},
      {"out", e.out},
  };
  return e;
}

void echo_config(const Effective& e) {
  for (const auto& [key, value] : e.echo) {
    std::cerr << "[config] " << key << "=" << value << "\n";
  }
}

std::shared_ptr<ectx::Backend> make_backend(const Effective& e) {
  if (e.backend == "scripted") {
    if (e.script.empty()) {
      throw std::runtime_error("the scripted backend requires --script");
    }
    return std::make_shared<ectx::ScriptedBackend>(
        ectx::ScriptedBackend::load_jsonl(e.script));
  }
  if (e.backend == "http") {
    ectx::HttpBackendConfig cfg;
    cfg.endpoint = e.endpoint;
    cfg.api_key = e.api_key;
    cfg.model = e.model;
    return std::make_shared<ectx::HttpBackend>(std::move(cfg));
  }
  throw std::runtime_error("unknown backend: " + e.backend);
}

std::shared_ptr<const ectx::ToolRegistry> make_tools(const Effective& e) {
  auto registry = std::make_shared<ectx::ToolRegistry>(
      ectx::make_estimator(e.estimator_name));
  if (e.tools == "mock") {
    auto corpus = std::make_shared<ectx::MockCorpus>(
        e.corpus.empty() ? ectx::MockCorpus()
                         : ectx::MockCorpus::load_jsonl(e.corpus));
    corpus->set_padding(e.padding, e.seed);
    ectx::register_mock_tools(*registry, corpus, e.byte_cap);
  } else if (e.tools == "http") {
    ectx::register_http_tools(*registry, e.search_url, e.byte_cap);
  } else {
    throw std::runtime_error("unknown tool set: " + e.tools);
  }
  return registry;
}

ectx::EpisodeConfig make_episode_config(const Effective& e,
                                        const std::string& episode_id,
                                        const std::string& question,
                                        std::shared_ptr<ectx::Backend> backend,
                                        std::shared_ptr<const ectx::ToolRegistry> tools) {
  ectx::EpisodeConfig cfg;
  cfg.episode_id = episode_id;
  cfg.question = question;
  cfg.strategy = e.strategy;
  cfg.max_tool_calls = e.max_steps;
  cfg.max_rounds = e.max_rounds;
  cfg.token_budget = e.token_budget;
  cfg.system_prompt = e.system_prompt;
  cfg.summarize_prompt = e.summarize_prompt;
  cfg.temperature = e.temperature;
  cfg.max_output_tokens = e.max_output_tokens;
  cfg.estimator = ectx::make_estimator(e.estimator_name);
  cfg.estimator_name = e.estimator_name;
  cfg.backend = std::move(backend);
  cfg.tools = std::move(tools);
  if (e.backend == "scripted") {
    // logical clock keeps scripted trajectory files byte-identical across runs
    auto counter = std::make_shared<std::atomic<std::int64_t>>(0);
    cfg.clock = [counter]() { return counter->fetch_add(1); };
  }
  return cfg;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const Effective& e, const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = e.echo;
  j["outputs"] = files;
  std::ofstream out(out_dir + "/manifest.json", std::ios::binary | std::ios::trunc);
  out << j.dump(2) << "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::vector<ectx::Trajectory> read_all(const std::vector<std::string>& paths) {
  std::vector<ectx::Trajectory> out;
  for (const auto& p : paths) out.push_back(ectx::read_trajectory(p));
  return out;
}

// ── Subcommands ─────────────────────────────────────────────────────────

int cmd_run(const CommonFlags& flags, const std::string& question,
            const std::string& episode_id) {
  const Effective e = resolve(flags, "runs/run");
  echo_config(e);
  fs::create_directories(e.out);

  auto backend = make_backend(e);
  auto tools = make_tools(e);
  auto cfg = make_episode_config(e, episode_id, question, backend, tools);

  const std::string traj_path = e.out + "/trajectory-" + episode_id + ".jsonl";
  ectx::JsonlTrajectoryWriter writer(traj_path, ectx::make_trajectory_header(cfg));
  ectx::EpisodeRunner live(cfg, &writer);
  const ectx::EpisodeResult result = live.run();

  std::cout << "answer: " << result.answer.value_or("(none)") << "\n"
            << "termination: " << ectx::to_string(result.termination) << "\n"
            << "turns: " << result.turns_used << "\n"
            << "rounds: " << result.rounds_used << "\n"
            << "final_token_estimate: " << result.final_token_estimate << "\n"
            << "trajectory: " << traj_path << "\n";
  write_manifest(e.out, "run", e, {traj_path});
  return result.termination == ectx::Termination::backend_failure ? 2 : 0;
}

int cmd_bench(const CommonFlags& flags, const std::string& questions_path,
              const std::string& strategies_csv, int concurrency) {
  const Effective base = resolve(flags, "runs/bench");
  echo_config(base);
  fs::create_directories(base.out);
  const auto questions = ectx::load_questions(questions_path);
  if (questions.empty()) throw std::runtime_error("no questions in " + questions_path);

  std::vector<std::string> strategies;
  std::stringstream ss(strategies_csv.empty() ? base.strategy.name()
                                              : strategies_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) strategies.push_back(item);
  }

  auto tools = make_tools(base);
  std::vector<ectx::BenchSummary> summaries;
  std::vector<std::string> outputs;
  for (const auto& strategy_name : strategies) {
    Effective e = base;
    e.strategy.kind = ectx::StrategySpec::kind_from_name(strategy_name);
    const std::string dir = base.out + "/" + strategy_name;
    fs::create_directories(dir);

    auto backend = make_backend(e);
    auto factory = [&](int index, const ectx::BenchQuestion& q) {
      char id[32];
      std::snprintf(id, sizeof(id), "q%04d", index);
      return make_episode_config(e, id, q.question, backend, tools);
    };
    auto writer_factory = [&](int index, const ectx::EpisodeConfig& cfg) {
      char id[32];
      std::snprintf(id, sizeof(id), "q%04d", index);
      return new ectx::JsonlTrajectoryWriter(dir + "/" + id + ".jsonl",
                                             ectx::make_trajectory_header(cfg));
    };
    const auto rows = ectx::run_bench(questions, factory, concurrency, writer_factory);
    const auto summary = ectx::summarize_bench(strategy_name, rows);
    summaries.push_back(summary);

    const std::string results_path = dir + "/results.csv";
    write_file(results_path, ectx::bench_results_csv(rows));
    outputs.push_back(results_path);
    std::cout << strategy_name << ": " << summary.answered << "/"
              << summary.questions << " answered";
    if (summary.with_expected > 0) {
      char acc[32];
      std::snprintf(acc, sizeof(acc), "%.4f", summary.accuracy);
      std::cout << ", accuracy " << acc;
    }
    std::cout << "\n";
  }

  const std::string comparison_path = base.out + "/comparison.csv";
  write_file(comparison_path, ectx::bench_comparison_csv(summaries));
  outputs.push_back(comparison_path);
  std::cout << "comparison: " << comparison_path << "\n";
  write_manifest(base.out, "bench", base, outputs);
  return 0;
}

int cmd_replay(const std::vector<std::string>& paths) {
  bool all_ok = true;
  for (const auto& path : paths) {
    try {
      const auto result = ectx::replay_trajectory(path);
      if (result.ok) {
        std::cout << "OK " << path << " (" << result.views.size()
                  << " turns)\n";
      } else {
        all_ok = false;
        std::cout << "DIVERGENT " << path << ": " << result.message << "\n";
      }
    } catch (const std::exception& ex) {
      all_ok = false;
      std::cout << "ERROR " << path << ": " << ex.what() << "\n";
    }
  }
  return all_ok ? 0 : 1;
}

int cmd_stats(const std::vector<std::string>& paths,
              const std::string& growth_out, const std::string& ops_out) {
  const auto trajectories = read_all(paths);
  const std::string growth = ectx::growth_csv(ectx::growth_curve(trajectories));
  const std::string ops =
      ectx::op_distribution_csv(ectx::op_distribution(trajectories));
  if (growth_out.empty() && ops_out.empty()) {
    std::cout << growth << "\n" << ops;
    return 0;
  }
  if (!growth_out.empty()) {
    write_file(growth_out, growth);
    std::cout << "growth: " << growth_out << "\n";
  }
  if (!ops_out.empty()) {
    write_file(ops_out, ops);
    std::cout << "ops: " << ops_out << "\n";
  }
  return 0;
}

int cmd_export_sft(const std::vector<std::string>& paths,
                   const std::string& out_path) {
  const auto records = ectx::export_sft(read_all(paths));
  write_file(out_path, ectx::sft_jsonl(records));
  std::cout << "wrote " << records.size() << " sft records to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elastic-context agent runtime"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string question, episode_id = "run";
  auto* run = app.add_subcommand("run", "run one episode");
  add_common_flags(run, run_flags);
  run->add_option("--question", question, "the task to solve")->required();
  run->add_option("--id", episode_id, "episode id");

  CommonFlags bench_flags;
  std::string questions_path, strategies_csv;
  int concurrency = 4;
  auto* bench = app.add_subcommand("bench", "run a question file");
  add_common_flags(bench, bench_flags);
  bench->add_option("--questions", questions_path, "questions file (question[\\t expected] per line)")
      ->required();
  bench->add_option("--strategies", strategies_csv, "comma-separated strategy list");
  bench->add_option("--concurrency", concurrency, "episodes in flight");

  std::vector<std::string> replay_paths;
  auto* replay = app.add_subcommand("replay", "verify trajectories replay bit-exactly");
  replay->add_option("paths", replay_paths, "trajectory files")->required();

  std::vector<std::string> stats_paths;
  std::string growth_out, ops_out;
  auto* stats = app.add_subcommand("stats", "growth and op-usage metrics");
  stats->add_option("--growth", growth_out, "write growth CSV here");
  stats->add_option("--ops", ops_out, "write op distribution CSV here");
  stats->add_option("paths", stats_paths, "trajectory files")->required();

  std::vector<std::string> sft_paths;
  std::string sft_out = "sft.jsonl";
  auto* sft = app.add_subcommand("export-sft", "export training pairs");
  sft->add_option("--out", sft_out, "output JSONL path");
  sft->add_option("paths", sft_paths, "trajectory files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags, question, episode_id);
    if (bench->parsed()) {
      return cmd_bench(bench_flags, questions_path, strategies_csv, concurrency);
    }
    if (replay->parsed()) return cmd_replay(replay_paths);
    if (stats->parsed()) return cmd_stats(stats_paths, growth_out, ops_out);
    if (sft->parsed()) return cmd_export_sft(sft_paths, sft_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
