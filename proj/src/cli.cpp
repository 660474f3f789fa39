#include "alviz/cli.hpp"

#include "alviz/al_engine.hpp"
#include "alviz/artifact.hpp"
#include "alviz/embedding.hpp"
#include "alviz/errors.hpp"
#include "alviz/histogram.hpp"
#include "alviz/log.hpp"
#include "alviz/prediction_change.hpp"
#include "alviz/serve.hpp"
#include "alviz/svg_plot.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <charconv>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace alviz::cli {
namespace {

namespace fs = std::filesystem;

struct RunFlags {
  std::string data;
  std::string target = "RMSD";
  char delimiter = ',';
  std::string synthetic;
  Index synthetic_n = 2000;
  Index synthetic_d = 4;
  double synthetic_noise = 0.0;
  double test_frac = 9730.0 / 45730.0;
  Index batch_size = 500;
  Index batches = 15;
  std::string strategies = "al,uc,rn";
  std::uint64_t seed = 0;
  double lifetime = 2.0;
  int max_depth = 20;
  bool no_standardize = false;
  std::string out = "run.json";
};

struct PlotFlags {
  std::string run;
  std::string out_dir = "plots";
  std::string anchor;
  Index k = kDefaultNearest;
  std::string rect;
  Index cap = kDefaultNearest;
};

struct HistFlags {
  std::string run;
  std::string out_dir = "plots";
  Index prefix = -1;  // all queries
  Index bins = kDefaultBins;
  std::string data;
  std::string target = "RMSD";
  char delimiter = ',';
};

struct ServeFlags {
  std::vector<std::string> runs;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string cors_origin = "*";
};

struct SynthFlags {
  std::string kind = "piecewise_constant";
  Index n = 2000;
  Index d = 4;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out = "synthetic.csv";
};

std::vector<double> parse_numbers(const std::string& csv, std::size_t expected, const char* flag) {
  std::vector<double> out;
  std::string_view rest = csv;
  while (true) {
    const auto pos = rest.find(',');
    auto token = rest.substr(0, pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    double v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) {
      throw ConfigError(std::string(flag) + ": cannot parse '" + csv + "'");
    }
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  if (out.size() != expected) {
    throw ConfigError(std::string(flag) + " expects " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

int cmd_run(const RunFlags& f) {
  ExperimentConfig config;
  config.strategies = parse_strategy_list(f.strategies);
  config.batch_size = f.batch_size;
  config.num_batches = f.batches;
  config.seed = f.seed;
  config.lifetime = f.lifetime;
  config.max_depth = f.max_depth;
  config.test_fraction = f.test_frac;
  config.standardize_embedding = !f.no_standardize;
  validate_config(config);

  Dataset dataset;
  if (!f.synthetic.empty()) {
    if (!f.data.empty()) throw ConfigError("--data and --synthetic are mutually exclusive");
    dataset = make_synthetic(parse_synthetic_kind(f.synthetic), f.synthetic_n, f.synthetic_d, f.synthetic_noise,
                             f.seed);
    config.target = dataset.target_name;
  } else {
    if (f.data.empty()) throw ConfigError("one of --data or --synthetic is required");
    dataset = load_csv(f.data, f.target, f.delimiter);
    config.target = f.target;
  }
  config.data_source = dataset.source_id;

  const auto artifact = run_experiment(config, dataset);
  write_artifact(artifact, f.out);
  std::cout << "artifact: " << f.out << "\n";
  std::cout << "test points: " << artifact.n_test() << ", batches: " << artifact.num_batches()
            << ", batch size: " << config.batch_size << "\n";
  for (Index s = 0; s < artifact.num_strategies(); ++s) {
    std::cout << "final mse " << to_string(artifact.strategies[static_cast<std::size_t>(s)]) << ": "
              << artifact.mse(s, artifact.num_batches()) << "\n";
  }
  return kOk;
}

int cmd_plot(const PlotFlags& f) {
  const auto artifact = read_artifact(f.run);
  if (f.anchor.empty() == f.rect.empty()) throw ConfigError("give exactly one of --anchor or --rect");
  Selection sel;
  if (!f.anchor.empty()) {
    const auto a = parse_numbers(f.anchor, 2, "--anchor");
    sel = nearest_k(artifact.pc_coords, {a[0], a[1]}, f.k);
  } else {
    const auto r = parse_numbers(f.rect, 4, "--rect");
    sel = select_rect(artifact.pc_coords, Rect{r[0], r[1], r[2], r[3]}, f.cap);
  }
  if (sel.indices.empty()) log::warn("selection is empty; heatmaps will have no rows");

  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  std::vector<ChangeMatrix> grid;
  for (const auto s : artifact.strategies)
    for (const auto kind : kAllChangeKinds) grid.push_back(change_matrix(artifact, s, kind, sel.indices));
  const double range = svg::symmetric_range(grid);
  for (const auto& m : grid) {
    const auto name = "heatmap_" + std::string(to_string(m.strategy)) + "_" + std::string(to_string(m.kind)) + ".svg";
    write_file(dir / name, svg::heatmap(m, range));
  }
  write_file(dir / "mse.svg", svg::mse_curves(artifact));
  write_file(dir / "pca.svg", svg::pca_scatter(artifact, sel.indices));
  std::cout << "selection (" << sel.indices.size() << "):";
  for (const auto i : sel.indices) std::cout << ' ' << i;
  std::cout << "\nwrote " << grid.size() << " heatmaps + mse.svg + pca.svg to " << dir.string() << "\n";
  return kOk;
}

int cmd_hist(const HistFlags& f) {
  const auto artifact = read_artifact(f.run);
  std::vector<double> reference;
  if (!f.data.empty()) {
    const auto ds = load_csv(f.data, f.target, f.delimiter);
    reference.assign(ds.labels.data(), ds.labels.data() + ds.labels.size());
  } else {
    reference.assign(artifact.test_labels.data(), artifact.test_labels.data() + artifact.test_labels.size());
  }
  const Index prefix = f.prefix < 0 ? artifact.config.batch_size * artifact.num_batches() : f.prefix;
  const auto h = query_histograms(artifact, prefix, f.bins, reference);
  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  const auto stem = "query_histogram_" + std::to_string(h.prefix);
  write_file(dir / (stem + ".svg"), svg::query_histograms(h));
  write_file(dir / (stem + ".csv"), svg::histogram_csv(h));
  std::cout << "wrote " << (dir / stem).string() << ".{svg,csv} (" << h.prefix << " queries per strategy, "
            << f.bins << " bins)\n";
  return kOk;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const ServeFlags& f) {
  if (f.runs.empty()) throw ConfigError("at least one --run is required");
  std::vector<fs::path> paths(f.runs.begin(), f.runs.end());
  const auto state = serve::ServiceState::load(paths);
  serve::ServeOptions options;
  options.host = f.host;
  options.port = f.port;
  options.cors_origin = f.cors_origin;
  if (!f.static_dir.empty()) options.static_dir = fs::path(f.static_dir);

  httplib::Server server;
  serve::install_routes(server, state, options);
  int port = f.port;
  if (port == 0) {
    port = server.bind_to_any_port(f.host);
    if (port < 0) {
      log::error("cannot bind " + f.host);
      return kNetwork;
    }
  } else if (!server.bind_to_port(f.host, port)) {
    log::error("cannot bind " + f.host + ":" + std::to_string(port) + " (port in use?)");
    return kNetwork;
  }
  std::cout << "listening on http://" << f.host << ":" << port << std::endl;
  log::info("serving " + std::to_string(state.runs().size()) + " run(s)");
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const bool clean = server.listen_after_bind();
  g_server = nullptr;
  return clean ? kOk : kNetwork;
}

int cmd_synth(const SynthFlags& f) {
  const auto ds = make_synthetic(parse_synthetic_kind(f.kind), f.n, f.d, f.noise, f.seed);
  write_csv(ds, f.out);
  std::cout << "wrote " << f.out << " (" << ds.rows() << " rows, " << ds.dims() << " features, target '"
            << ds.target_name << "')\n";
  return kOk;
}

int dispatch(CLI::App& app, const std::function<int()>& action) {
  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << app.get_name() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << app.get_name() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << app.get_name() << ": " << e.what() << "\n";
    return kIo;
  }
}

int run_app(const std::function<void(CLI::App&)>& parse) {
  CLI::App app{"Active-learning experiment engine and prediction-change plots", "alviz"};
  app.set_config("--config", "", "TOML file supplying flag values")->check(CLI::ExistingFile);
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run an active-learning experiment and write a run artifact");
  run_cmd->add_option("--data", run.data, "Headered CSV file");
  run_cmd->add_option("--target", run.target, "Target column")->capture_default_str();
  run_cmd->add_option("--delimiter", run.delimiter, "CSV delimiter")->capture_default_str();
  run_cmd->add_option("--synthetic", run.synthetic, "Generate data instead: clusters|piecewise_constant|plane");
  run_cmd->add_option("--synthetic-n", run.synthetic_n)->capture_default_str();
  run_cmd->add_option("--synthetic-d", run.synthetic_d)->capture_default_str();
  run_cmd->add_option("--synthetic-noise", run.synthetic_noise)->capture_default_str();
  run_cmd->add_option("--test-frac", run.test_frac, "Held-out test fraction")->capture_default_str();
  run_cmd->add_option("--batch-size", run.batch_size)->capture_default_str();
  run_cmd->add_option("--batches", run.batches, "Number of query batches")->capture_default_str();
  run_cmd->add_option("--strategies", run.strategies, "Comma-separated subset of al,uc,rn")->capture_default_str();
  run_cmd->add_option("--seed", run.seed)->capture_default_str();
  run_cmd->add_option("--lifetime", run.lifetime, "Mondrian lifetime budget")->capture_default_str();
  run_cmd->add_option("--max-depth", run.max_depth)->capture_default_str();
  run_cmd->add_flag("--no-standardize", run.no_standardize, "Embed raw (unscaled) test features");
  run_cmd->add_option("--out", run.out, "Artifact path")->capture_default_str();

  PlotFlags plot;
  auto* plot_cmd = app.add_subcommand("plot", "Write prediction-change heatmaps, MSE curves and the PCA scatter");
  plot_cmd->add_option("--run", plot.run, "Run artifact")->required();
  plot_cmd->add_option("--out-dir", plot.out_dir)->capture_default_str();
  plot_cmd->add_option("--anchor", plot.anchor, "pc1,pc2 click point");
  plot_cmd->add_option("--k", plot.k, "Nearest points to an anchor")->capture_default_str();
  plot_cmd->add_option("--rect", plot.rect, "lo1,hi1,lo2,hi2 brush rectangle");
  plot_cmd->add_option("--cap", plot.cap, "Rectangle selection cap")->capture_default_str();

  HistFlags hist;
  auto* hist_cmd = app.add_subcommand("hist", "Histogram the labels of queried samples");
  hist_cmd->add_option("--run", hist.run, "Run artifact")->required();
  hist_cmd->add_option("--out-dir", hist.out_dir)->capture_default_str();
  hist_cmd->add_option("--prefix", hist.prefix, "Queries per strategy to include (default all)");
  hist_cmd->add_option("--bins", hist.bins)->capture_default_str();
  hist_cmd->add_option("--data", hist.data, "Dataset CSV for the reference distribution (default test labels)");
  hist_cmd->add_option("--target", hist.target)->capture_default_str();
  hist_cmd->add_option("--delimiter", hist.delimiter)->capture_default_str();

  ServeFlags srv;
  auto* serve_cmd = app.add_subcommand("serve", "Serve run artifacts over a read-only JSON API");
  serve_cmd->add_option("--run", srv.runs, "Run artifact (repeatable)")->required();
  serve_cmd->add_option("--host", srv.host)->capture_default_str();
  serve_cmd->add_option("--port", srv.port, "0 picks a free port")->capture_default_str();
  serve_cmd->add_option("--static-dir", srv.static_dir, "Panel bundle served at /");
  serve_cmd->add_option("--cors-origin", srv.cors_origin, "Allowed origin; empty disables CORS")->capture_default_str();

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  synth_cmd->add_option("--kind", synth.kind)->capture_default_str();
  synth_cmd->add_option("--n", synth.n)->capture_default_str();
  synth_cmd->add_option("--d", synth.d)->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out)->capture_default_str();

  try {
    parse(app);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (run_cmd->parsed()) return dispatch(app, [&] { return cmd_run(run); });
  if (plot_cmd->parsed()) return dispatch(app, [&] { return cmd_plot(plot); });
  if (hist_cmd->parsed()) return dispatch(app, [&] { return cmd_hist(hist); });
  if (serve_cmd->parsed()) return dispatch(app, [&] { return cmd_serve(srv); });
  if (synth_cmd->parsed()) return dispatch(app, [&] { return cmd_synth(synth); });
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  return run_app([&](CLI::App& app) { app.parse(argc, argv); });
}

int main(const std::vector<std::string>& args) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  return run_app([&](CLI::App& app) { app.parse(reversed); });
}

}  // namespace alviz::cli
