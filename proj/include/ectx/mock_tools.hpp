#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ectx/tools.hpp"

namespace ectx {

struct MockDoc {
  std::string id;
  std::string title;
  std::string text;
};

// Deterministic in-memory "web": documents from a JSONL file of
// {"id","title","text"}, a term index for ranked search, and seeded
// pseudo-random page padding so fetched observations are as verbose as real
// pages. Read-only after load.
class MockCorpus {
 public:
  static MockCorpus load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    MockCorpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error("corpus line " + std::to_string(line_no) +
                                 " is not a JSON object: " + path);
      }
      MockDoc doc{j.at("id").get<std::string>(),
                  j.at("title").get<std::string>(),
                  j.at("text").get<std::string>()};
      corpus.add(std::move(doc));
    }
    return corpus;
  }

  void add(MockDoc doc) {
    const std::string id = doc.id;
    for (const auto& term : tokenize(doc.title + " " + doc.text)) {
      index_[term][id] += 1;
    }
    docs_[id] = std::move(doc);
  }

  void set_padding(std::size_t bytes, std::uint64_t seed) {
    padding_bytes_ = bytes;
    seed_ = seed;
  }

  std::size_t size() const { return docs_.size(); }

  const MockDoc* find(const std::string& id) const {
    auto it = docs_.find(id);
    return it == docs_.end() ? nullptr : &it->second;
  }

  struct Hit {
    std::string id;
    std::string title;
    std::string snippet;
    int score = 0;
  };

  // Term-frequency ranking, ties broken by doc id. Fully deterministic.
  std::vector<Hit> search(const std::string& query, std::size_t limit) const {
    std::map<std::string, int> scores;
    for (const auto& term : tokenize(query)) {
      auto it = index_.find(term);
      if (it == index_.end()) continue;
      for (const auto& [id, count] : it->second) scores[id] += count;
    }
    std::vector<Hit> hits;
    for (const auto& [id, score] : scores) {
      const MockDoc& doc = docs_.at(id);
      hits.push_back(Hit{id, doc.title, doc.text.substr(0, 160), score});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.id < b.id;
    });
    if (hits.size() > limit) hits.resize(limit);
    return hits;
  }

  // Page body: document text plus reproducible filler sized by the configured
  // padding. The filler is a pure function of (seed, doc id).
  std::string page_text(const MockDoc& doc) const {
    std::string out = doc.title + "\n\n" + doc.text;
    if (padding_bytes_ > 0) {
      out += "\n\n";
      out += filler(doc.id);
    }
    return out;
  }

  std::string filler(const std::string& id) const {
    static const std::vector<std::string> words = {
        "archive",  "banner",  "catalog", "digest",  "excerpt", "footer",
        "gallery",  "header",  "index",   "journal", "keyword", "listing",
        "margin",   "notice",  "outline", "preview", "quote",   "reprint",
        "sidebar",  "ticker",  "update",  "volume",  "widget",  "extract"};
    std::uint64_t h = seed_;
    for (unsigned char c : id) h = h * 1099511628211ull + c;
    std::mt19937_64 rng(h);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::string out;
    out.reserve(padding_bytes_ + 16);
    while (out.size() < padding_bytes_) {
      out += words[pick(rng)];
      out += (out.size() % 64 < 8) ? '\n' : ' ';
    }
    return out;
  }

 private:
  static std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> terms;
    std::string current;
    for (unsigned char c : text) {
      if (std::isalnum(c)) {
        current += static_cast<char>(std::tolower(c));
      } else if (!current.empty()) {
        terms.push_back(current);
        current.clear();
      }
    }
    if (!current.empty()) terms.push_back(current);
    return terms;
  }

  std::map<std::string, MockDoc> docs_;
  std::map<std::string, std::map<std::string, int>> index_;
  std::size_t padding_bytes_ = 0;
  std::uint64_t seed_ = 0;
};

// Registers `search` and `fetch` backed by the corpus.
//   search{"query": text}  -> ranked "id: title" lines with snippets
//   fetch{"id": doc id}    -> page text, truncated at byte_cap
inline void register_mock_tools(ToolRegistry& registry,
                                std::shared_ptr<const MockCorpus> corpus,
                                std::size_t byte_cap = 0) {
  registry.register_tool(
      "search", "search{\"query\": text} ranks matching documents",
      [corpus](const nlohmann::json& args) {
        ToolResult r;
        if (!args.contains("query") || !args.at("query").is_string()) {
          r.ok = false;
          r.text = "search requires a string 'query' argument";
          return r;
        }
        const auto query = args.at("query").get<std::string>();
        const auto hits = corpus->search(query, 5);
        if (hits.empty()) {
          r.text = "no results for query: " + query;
          return r;
        }
        std::ostringstream out;
        out << "results for query: " << query << "\n";
        int rank = 1;
        for (const auto& hit : hits) {
          out << rank++ << ". " << hit.id << ": " << hit.title << "\n   "
              << hit.snippet << "\n";
        }
        // search result pages carry boilerplate too
        out << corpus->filler("search:" + query);
        r.text = out.str();
        return r;
      });

  registry.register_tool(
      "fetch", "fetch{\"id\": doc id} returns the page text",
      [corpus, byte_cap](const nlohmann::json& args) {
        ToolResult r;
        if (!args.contains("id") || !args.at("id").is_string()) {
          r.ok = false;
          r.text = "fetch requires a string 'id' argument";
          return r;
        }
        const auto id = args.at("id").get<std::string>();
        const MockDoc* doc = corpus->find(id);
        if (!doc) {
          r.ok = false;
          r.text = "no document with id: " + id;
          return r;
        }
        r.text = truncate_bytes(corpus->page_text(*doc), byte_cap);
        return r;
      });
}

}  // namespace ectx
