#include "alviz/serve.hpp"

#include "alviz/artifact.hpp"
#include "alviz/embedding.hpp"
#include "alviz/errors.hpp"
#include "alviz/histogram.hpp"
#include "alviz/prediction_change.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>

namespace alviz::serve {
namespace {

using nlohmann::json;

Response error(int status, const std::string& message) { return {status, json{{"error", message}}.dump()}; }

Response ok(const json& body) { return {200, body.dump()}; }

Response unknown_run(std::string_view id) { return error(404, "unknown run '" + std::string(id) + "'"); }

json row_json(const auto& row) {
  json out = json::array();
  for (Index j = 0; j < row.size(); ++j) out.push_back(row(j));
  return out;
}

json matrix_json(const auto& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(row_json(m.row(i)));
  return out;
}

json strategies_json(const RunArtifact& a) {
  json out = json::array();
  for (const auto s : a.strategies) out.push_back(std::string(to_string(s)));
  return out;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<long long> int_param(const Params& params, std::string_view name, long long fallback, bool& bad) {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  const auto v = parse_int(it->second);
  if (!v) bad = true;
  return v;
}

json histogram_json(const Histogram& h) { return json{{"bin_edges", h.edges}, {"counts", h.counts}}; }

}  // namespace

void ServiceState::add(std::string run_id, RunArtifact artifact) {
  if (runs_.contains(run_id)) throw ConfigError("duplicate run id '" + run_id + "'");
  runs_.emplace(std::move(run_id), std::move(artifact));
}

ServiceState ServiceState::load(std::span<const std::filesystem::path> paths) {
  ServiceState state;
  for (const auto& p : paths) state.add(p.stem().string(), read_artifact(p));
  return state;
}

const RunArtifact* ServiceState::find(std::string_view run_id) const {
  const auto it = runs_.find(run_id);
  return it == runs_.end() ? nullptr : &it->second;
}

Response list_runs(const ServiceState& state) {
  json out = json::array();
  for (const auto& [id, a] : state.runs()) {
    out.push_back({{"run_id", id},
                   {"strategies", strategies_json(a)},
                   {"num_batches", a.num_batches()},
                   {"n_test", a.n_test()},
                   {"dataset_hash", a.dataset_hash}});
  }
  return ok(out);
}

Response embedding(const ServiceState& state, std::string_view run_id) {
  const auto* a = state.find(run_id);
  if (!a) return unknown_run(run_id);
  return ok({{"coords", matrix_json(a->pc_coords)},
             {"labels", row_json(a->test_labels)},
             {"explained_variance", a->pc_explained_variance}});
}

Response selection(const ServiceState& state, std::string_view run_id, std::string_view body) {
  const auto* a = state.find(run_id);
  if (!a) return unknown_run(run_id);
  const json req = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (req.is_discarded() || !req.is_object()) return error(400, "body must be a JSON object");
  const bool has_anchor = req.contains("anchor");
  const bool has_rect = req.contains("rect");
  if (has_anchor == has_rect) return error(400, "exactly one of 'anchor' or 'rect' is required");

  auto numbers = [](const json& v, std::size_t n) -> std::optional<std::vector<double>> {
    if (!v.is_array() || v.size() != n) return std::nullopt;
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) return std::nullopt;
      out.push_back(x.get<double>());
    }
    return out;
  };
  auto count = [&](const char* key, Index fallback) -> std::optional<Index> {
    if (!req.contains(key)) return fallback;
    const auto& v = req[key];
    if (!v.is_number_integer()) return std::nullopt;
    return v.get<Index>();
  };

  Selection sel;
  json anchor_used = nullptr;
  if (has_anchor) {
    const auto anchor = numbers(req["anchor"], 2);
    const auto k = count("k", kDefaultNearest);
    if (!anchor) return error(400, "'anchor' must be [pc1, pc2]");
    if (!k || *k < 1) return error(400, "'k' must be a positive integer");
    if (*k > a->n_test()) {
      return error(422, "k = " + std::to_string(*k) + " exceeds " + std::to_string(a->n_test()) + " test points");
    }
    sel = nearest_k(a->pc_coords, {(*anchor)[0], (*anchor)[1]}, *k);
    anchor_used = *anchor;
  } else {
    const auto rect = numbers(req["rect"], 4);
    const auto cap = count("cap", kDefaultNearest);
    if (!rect) return error(400, "'rect' must be [pc1_lo, pc1_hi, pc2_lo, pc2_hi]");
    if (!cap || *cap < 0) return error(400, "'cap' must be a non-negative integer");
    const Rect r{(*rect)[0], (*rect)[1], (*rect)[2], (*rect)[3]};
    if (!(r.pc1_lo <= r.pc1_hi && r.pc2_lo <= r.pc2_hi)) return error(400, "inverted rectangle");
    sel = select_rect(a->pc_coords, r, *cap);
  }
  return ok({{"indices", sel.indices}, {"anchor_used", anchor_used}});
}

Response change(const ServiceState& state, std::string_view run_id, const Params& params) {
  const auto* a = state.find(run_id);
  if (!a) return unknown_run(run_id);
  const auto strategy_it = params.find("strategy");
  const auto kind_it = params.find("kind");
  const auto indices_it = params.find("indices");
  if (strategy_it == params.end() || kind_it == params.end() || indices_it == params.end()) {
    return error(400, "query parameters strategy, kind and indices are required");
  }
  Strategy strategy;
  ChangeKind kind;
  try {
    strategy = parse_strategy(strategy_it->second);
    kind = parse_change_kind(kind_it->second);
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  if (!a->find(strategy)) return error(400, "run has no strategy '" + strategy_it->second + "'");

  std::vector<Index> indices;
  std::string_view list = indices_it->second;
  while (!list.empty()) {
    const auto pos = list.find(',');
    const auto token = list.substr(0, pos);
    const auto v = parse_int(token);
    if (!v) return error(400, "malformed index '" + std::string(token) + "'");
    indices.push_back(static_cast<Index>(*v));
    if (indices.size() > kMaxChangeIndices) {
      return error(400, "at most " + std::to_string(kMaxChangeIndices) + " indices per request");
    }
    if (pos == std::string_view::npos) break;
    list.remove_prefix(pos + 1);
  }
  for (const Index i : indices) {
    if (i < 0 || i >= a->n_test()) return error(422, "test index " + std::to_string(i) + " out of range");
  }
  const auto m = change_matrix(*a, strategy, kind, indices);
  return ok({{"kind", std::string(to_string(kind))},
             {"strategy", std::string(to_string(strategy))},
             {"row_indices", m.row_indices},
             {"q_axis", m.q_axis()},
             {"values", matrix_json(m.values)}});
}

Response mse(const ServiceState& state, std::string_view run_id) {
  const auto* a = state.find(run_id);
  if (!a) return unknown_run(run_id);
  std::vector<Index> axis;
  for (Index q = 0; q <= a->num_batches(); ++q) axis.push_back(q);
  return ok({{"strategies", strategies_json(*a)}, {"q_axis", axis}, {"mse", matrix_json(a->mse)}});
}

Response query_histogram(const ServiceState& state, std::string_view run_id, const Params& params) {
  const auto* a = state.find(run_id);
  if (!a) return unknown_run(run_id);
  bool bad = false;
  const auto prefix = int_param(params, "prefix", a->config.batch_size * a->num_batches(), bad);
  const auto bins = int_param(params, "bins", kDefaultBins, bad);
  if (bad || *prefix < 0 || *bins < 1 || *bins > 10000) {
    return error(400, "prefix must be a non-negative integer and bins an integer in [1, 10000]");
  }
  const std::vector<double> reference(a->test_labels.data(), a->test_labels.data() + a->test_labels.size());
  const auto h = query_histograms(*a, static_cast<Index>(*prefix), static_cast<Index>(*bins), reference);
  json per = json::object();
  for (std::size_t s = 0; s < h.strategies.size(); ++s) {
    per[std::string(to_string(h.strategies[s]))] = histogram_json(h.per_strategy[s]);
  }
  return ok({{"prefix", h.prefix},
             {"bins", *bins},
             {"strategies", strategies_json(*a)},
             {"histograms", per},
             {"all_data", histogram_json(h.reference)},
             {"all_data_source", "test_labels"}});
}

void install_routes(httplib::Server& server, const ServiceState& state, const ServeOptions& options) {
  constexpr const char* kJson = "application/json";
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  if (!options.cors_origin.empty()) {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  }
  auto send = [kJson](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, kJson);
  };
  auto params_of = [](const httplib::Request& req) {
    Params p;
    for (const auto& [k, v] : req.params) p.emplace(k, v);
    return p;
  };

  server.Get("/api/runs", [&state, send](const httplib::Request&, httplib::Response& res) {
    send(res, list_runs(state));
  });
  server.Get(R"(/api/runs/([^/]+)/embedding)", [&state, send](const httplib::Request& req, httplib::Response& res) {
    send(res, embedding(state, req.matches[1].str()));
  });
  server.Post(R"(/api/runs/([^/]+)/selection)", [&state, send](const httplib::Request& req, httplib::Response& res) {
    send(res, selection(state, req.matches[1].str(), req.body));
  });
  server.Get(R"(/api/runs/([^/]+)/change)",
             [&state, send, params_of](const httplib::Request& req, httplib::Response& res) {
               send(res, change(state, req.matches[1].str(), params_of(req)));
             });
  server.Get(R"(/api/runs/([^/]+)/mse)", [&state, send](const httplib::Request& req, httplib::Response& res) {
    send(res, mse(state, req.matches[1].str()));
  });
  server.Get(R"(/api/runs/([^/]+)/query-histogram)",
             [&state, send, params_of](const httplib::Request& req, httplib::Response& res) {
               send(res, query_histogram(state, req.matches[1].str(), params_of(req)));
             });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  if (options.static_dir) {
    server.set_mount_point("/", options.static_dir->string());
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(
          "<!doctype html><title>alviz</title><p>Panel bundle not installed. API: "
          "<a href=\"/api/runs\">/api/runs</a></p>\n",
          "text/html");
    });
  }

  server.set_error_handler([kJson](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(json{{"error", "no route for " + req.method + " " + req.path}}.dump(), kJson);
    }
  });
  server.set_exception_handler([kJson](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", what}}.dump(), kJson);
  });
}

}  // namespace alviz::serve
