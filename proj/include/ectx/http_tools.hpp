#pragma once

#include <sstream>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ectx/tools.hpp"

namespace ectx {

namespace detail {

// Splits "http://host:port/some/path" into client base and path.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start =
      url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

// Registers live `search` and `fetch` tools.
//   search{"query": text} -> GET <search_url>?q=<query>, expects
//     {"results":[{"id","title","snippet"},…]} or returns the raw body
//   fetch{"url": text}    -> GET <url>, body truncated at byte_cap
// Transport and HTTP failures become error observations, never aborts.
inline void register_http_tools(ToolRegistry& registry,
                                const std::string& search_url,
                                std::size_t byte_cap) {
  registry.register_tool(
      "search", "search{\"query\": text} queries the search endpoint",
      [search_url](const nlohmann::json& args) {
        ToolResult r;
        if (!args.contains("query") || !args.at("query").is_string()) {
          r.ok = false;
          r.text = "search requires a string 'query' argument";
          return r;
        }
        if (search_url.empty()) {
          r.ok = false;
          r.text = "no search endpoint configured";
          return r;
        }
        const auto [base, path] = detail::split_url(search_url);
        httplib::Client client(base);
        httplib::Params params{{"q", args.at("query").get<std::string>()}};
        auto res = client.Get(path, params, httplib::Headers{});
        if (!res) {
          r.ok = false;
          r.text = "search transport failure: " + httplib::to_string(res.error());
          return r;
        }
        if (res->status != 200) {
          r.ok = false;
          r.text = "search http " + std::to_string(res->status) + ": " + res->body;
          return r;
        }
        const auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("results")) {
          r.text = res->body;  // passthrough for non-JSON endpoints
          return r;
        }
        std::ostringstream out;
        int rank = 1;
        for (const auto& hit : j["results"]) {
          out << rank++ << ". " << hit.value("id", "") << ": "
              << hit.value("title", "") << "\n   " << hit.value("snippet", "")
              << "\n";
        }
        r.text = out.str();
        return r;
      });

  registry.register_tool(
      "fetch", "fetch{\"url\": text} retrieves a page",
      [byte_cap](const nlohmann::json& args) {
        ToolResult r;
        if (!args.contains("url") || !args.at("url").is_string()) {
          r.ok = false;
          r.text = "fetch requires a string 'url' argument";
          return r;
        }
        const auto url = args.at("url").get<std::string>();
        const auto [base, path] = detail::split_url(url);
        httplib::Client client(base);
        auto res = client.Get(path);
        if (!res) {
          r.ok = false;
          r.text = "fetch transport failure: " + httplib::to_string(res.error());
          return r;
        }
        if (res->status != 200) {
          r.ok = false;
          r.text = "fetch http " + std::to_string(res->status) + ": " + res->body;
          return r;
        }
        r.text = truncate_bytes(res->body, byte_cap);
        return r;
      });
}

}  // namespace ectx
