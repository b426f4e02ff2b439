#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ectx/episode.hpp"

namespace ectx {

struct BenchQuestion {
  std::string question;
  std::optional<std::string> expected;
};

// One question per line; an optional expected answer follows a tab. Empty
// lines and lines starting with '#' are skipped.
inline std::vector<BenchQuestion> load_questions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open questions file: " + path);
  std::vector<BenchQuestion> questions;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    BenchQuestion q;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      q.question = line;
    } else {
      q.question = line.substr(0, tab);
      q.expected = line.substr(tab + 1);
    }
    questions.push_back(std::move(q));
  }
  return questions;
}

struct BenchRow {
  int index = 0;  // 1-based question index
  BenchQuestion question;
  EpisodeResult result;
  bool correct = false;
  bool infra_failure = false;
  std::string error;
};

struct BenchSummary {
  std::string strategy;
  int questions = 0;
  int answered = 0;
  int with_expected = 0;
  int correct = 0;
  double accuracy = 0.0;  // over questions with expected answers
  double mean_turns = 0.0;
  double mean_final_tokens = 0.0;
};

namespace detail {

inline std::string trim_copy(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace detail

// Factory so each concurrent episode gets its own config (episode id and
// question filled in by the bench driver).
using EpisodeConfigFactory =
    std::function<EpisodeConfig(int index, const BenchQuestion&)>;

// Runs all questions with bounded concurrency. Rows come back ordered by
// question index regardless of completion order; per-episode failures are
// recorded, never propagated.
inline std::vector<BenchRow> run_bench(
    const std::vector<BenchQuestion>& questions,
    const EpisodeConfigFactory& make_config, int concurrency,
    const std::function<JsonlTrajectoryWriter*(int, const EpisodeConfig&)>&
        make_writer = nullptr) {
  std::vector<BenchRow> rows(questions.size());
  std::atomic<std::size_t> cursor{0};
  const int workers =
      std::max(1, std::min<int>(concurrency,
                                static_cast<int>(questions.size())));

  auto work = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= questions.size()) return;
      BenchRow& row = rows[i];
      row.index = static_cast<int>(i) + 1;
      row.question = questions[i];
      try {
        EpisodeConfig cfg = make_config(row.index, questions[i]);
        std::unique_ptr<JsonlTrajectoryWriter> writer;
        if (make_writer) writer.reset(make_writer(row.index, cfg));
        EpisodeRunner runner(std::move(cfg), writer.get());
        row.result = runner.run();
        if (row.result.answer && questions[i].expected) {
          row.correct = detail::trim_copy(*row.result.answer) ==
                        detail::trim_copy(*questions[i].expected);
        }
      } catch (const std::exception& e) {
        row.infra_failure = true;
        row.error = e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return rows;
}

inline BenchSummary summarize_bench(const std::string& strategy,
                                    const std::vector<BenchRow>& rows) {
  BenchSummary s;
  s.strategy = strategy;
  s.questions = static_cast<int>(rows.size());
  double turns = 0.0, tokens = 0.0;
  for (const auto& row : rows) {
    if (row.result.answer) ++s.answered;
    if (row.question.expected) {
      ++s.with_expected;
      if (row.correct) ++s.correct;
    }
    turns += row.result.turns_used;
    tokens += static_cast<double>(row.result.final_token_estimate);
  }
  if (s.with_expected > 0) {
    s.accuracy = static_cast<double>(s.correct) / s.with_expected;
  }
  if (s.questions > 0) {
    s.mean_turns = turns / s.questions;
    s.mean_final_tokens = tokens / s.questions;
  }
  return s;
}

inline std::string bench_results_csv(const std::vector<BenchRow>& rows) {
  std::string out =
      "index,question,expected,answer,correct,termination,turns,rounds,"
      "final_tokens,error\n";
  for (const auto& row : rows) {
    out += std::to_string(row.index) + ",";
    out += detail::csv_escape(row.question.question) + ",";
    out += detail::csv_escape(row.question.expected.value_or("")) + ",";
    out += detail::csv_escape(row.result.answer.value_or("")) + ",";
    out += (row.correct ? "1" : "0");
    out += ",";
    out += row.infra_failure ? "infra-failure" : to_string(row.result.termination);
    out += "," + std::to_string(row.result.turns_used);
    out += "," + std::to_string(row.result.rounds_used);
    out += "," + std::to_string(row.result.final_token_estimate);
    out += "," + detail::csv_escape(row.error) + "\n";
  }
  return out;
}

inline std::string bench_comparison_csv(
    const std::vector<BenchSummary>& summaries) {
  std::string out =
      "strategy,questions,answered,with_expected,correct,accuracy,mean_turns,"
      "mean_final_tokens\n";
  char buf[128];
  for (const auto& s : summaries) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%d,%d,%.4f,%.2f,%.2f\n",
                  s.strategy.c_str(), s.questions, s.answered, s.with_expected,
                  s.correct, s.accuracy, s.mean_turns, s.mean_final_tokens);
    out += buf;
  }
  return out;
}

}  // namespace ectx
