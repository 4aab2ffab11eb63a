// Command-line front end: data ingestion, pipeline dispatch and JSON
// report emission for the distance computations in the library.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "serw/analysis.hpp"
#include "serw/embed.hpp"
#include "serw/gromov.hpp"
#include "serw/io.hpp"
#include "serw/log.hpp"
#include "serw/mmspace.hpp"
#include "serw/ot.hpp"
#include "serw/serw.hpp"
#include "serw/threading.hpp"

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct CommonArgs {
  std::string a, b, c;
  std::string weights_a, weights_b, weights_c;
  std::string out;
  std::string config;
  int dim = 0;
  std::string embed = "mds";
  std::string solver = "exact";
  double epsilon = 0.0;
  int epochs = 1;
  int batches = 1;
  int batch_size = 0;
  int restarts = 5;
  int lle_k = 0;
  double lr = 1e-3;
  double distortion_weight = 1.0;
  bool squared_dtw = false;
  bool entropic = false;
  std::string frames_dir;
  std::string metric = "gw";
  std::vector<int> dims;
  std::uint64_t seed = 0;
  int threads = 1;
};

serw::BaseEmbed parse_embed(const std::string& name) {
  if (name == "mds") return serw::BaseEmbed::Mds;
  if (name == "lle") return serw::BaseEmbed::Lle;
  throw std::invalid_argument("unknown embedding method: " + name);
}

serw::OtSolver parse_solver(const std::string& name) {
  if (name == "exact") return serw::OtSolver::Exact;
  if (name == "sinkhorn") return serw::OtSolver::Sinkhorn;
  throw std::invalid_argument("unknown solver: " + name);
}

std::string coupling_path(const std::string& out) {
  fs::path p(out);
  fs::path sibling = p.parent_path() / (p.stem().string() + ".coupling.csv");
  return sibling.string();
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  fs::path sibling = p.parent_path() / (p.stem().string() + suffix);
  return sibling.string();
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json distortion_json(const serw::DistortionEstimate& e) {
  ordered_json j;
  j["kappa"] = e.kappa;
  j["tau"] = e.tau;
  j["ratio_min"] = e.ratio_min;
  j["ratio_max"] = e.ratio_max;
  return j;
}

ordered_json residual_json(const serw::ResidualEmbedding& emb) {
  ordered_json layers = ordered_json::array();
  for (const Eigen::MatrixXd& w : emb.layers) {
    ordered_json layer;
    layer["rows"] = w.rows();
    layer["cols"] = w.cols();
    ordered_json data = ordered_json::array();
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) data.push_back(w(i, j));
    layer["weights"] = std::move(data);
    layers.push_back(std::move(layer));
  }
  ordered_json j;
  j["layers"] = std::move(layers);
  return j;
}

ordered_json serw_result_json(const std::string& command,
                              const serw::SerwResult& result,
                              const std::string& out) {
  const std::string plan_path = coupling_path(out);
  serw::save_matrix_csv(plan_path, result.coupling.plan);
  ordered_json j;
  j["command"] = command;
  j["value"] = result.value;
  j["rotation"] = matrix_json(result.rotation.matrix);
  j["coupling"] = plan_path;
  j["phi"] = residual_json(result.phi);
  j["psi"] = residual_json(result.psi);
  j["distortions"] = ordered_json::array(
      {distortion_json(result.distortions.first),
       distortion_json(result.distortions.second)});
  j["objective_trace"] = result.objective_trace;
  return j;
}

Eigen::MatrixXd base_embedding(const serw::MmSpace& space, int d,
                               serw::BaseEmbed method, int lle_k) {
  return method == serw::BaseEmbed::Mds
             ? serw::mds_embed(space, d).coords
             : serw::lle_embed(space, d, lle_k);
}

serw::SerwConfig serw_config_from(const CommonArgs& args) {
  serw::SerwConfig config;
  config.epochs = args.epochs;
  config.batches = args.batches;
  config.batch_size = args.batch_size;
  config.seed = args.seed;
  config.lr = args.lr;
  config.embed = parse_embed(args.embed);
  config.dim = args.dim;
  config.lle_k = args.lle_k;
  config.distortion_weight = args.distortion_weight;
  return config;
}

int run_w2(const CommonArgs& args) {
  const serw::MmSpace a = serw::load_space(args.a, args.weights_a);
  const serw::MmSpace b = serw::load_space(args.b, args.weights_b);
  serw::SinkhornParams sp;
  sp.epsilon = args.epsilon;
  const serw::OtSolution sol =
      serw::w2_solve(a, b, parse_solver(args.solver), sp);
  if (!sol.converged && parse_solver(args.solver) == serw::OtSolver::Sinkhorn)
    serw::log_info("sinkhorn stopped before reaching tolerance");

  const std::string plan_path = coupling_path(args.out);
  serw::save_matrix_csv(plan_path, sol.coupling.plan);
  ordered_json j;
  j["command"] = "w2";
  j["solver"] = args.solver;
  j["value"] = sol.cost;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["coupling"] = plan_path;
  serw::emit_report(j, args.out);
  std::cout << "w2: value = " << sol.cost << " (" << args.solver << ", "
            << sol.iterations << " iterations)\n";
  return 0;
}

int run_gw(const CommonArgs& args) {
  const serw::MmSpace a = serw::load_space(args.a, args.weights_a);
  const serw::MmSpace b = serw::load_space(args.b, args.weights_b);
  serw::GwConfig config;
  config.restarts = args.restarts;
  config.seed = args.seed;
  config.entropic = args.entropic;
  config.epsilon = args.epsilon;
  const serw::GwSolution sol = serw::gw_solve(a, b, config);

  const std::string plan_path = coupling_path(args.out);
  serw::save_matrix_csv(plan_path, sol.coupling.plan);
  ordered_json j;
  j["command"] = "gw";
  j["value"] = sol.gw_squared;
  j["restarts_used"] = sol.restarts_used;
  j["objective_history"] = sol.objective_history;
  j["coupling"] = plan_path;
  serw::emit_report(j, args.out);
  std::cout << "gw: value = " << sol.gw_squared << " ("
            << sol.restarts_used << " restarts)\n";
  return 0;
}

int run_fserw(const CommonArgs& args) {
  const serw::MmSpace a = serw::load_space(args.a, args.weights_a);
  const serw::MmSpace b = serw::load_space(args.b, args.weights_b);
  const int d = args.dim > 0 ? args.dim
                             : serw::target_dimension(a.size(), b.size());
  const serw::BaseEmbed method = parse_embed(args.embed);
  const Eigen::MatrixXd ea = base_embedding(a, d, method, args.lle_k);
  const Eigen::MatrixXd eb = base_embedding(b, d, method, args.lle_k);
  const serw::SerwResult result = serw::fserw(a, b, ea, eb);
  serw::emit_report(serw_result_json("fserw", result, args.out), args.out);
  std::cout << "fserw: value = " << result.value << " (d = " << d << ")\n";
  return 0;
}

int run_serw(const CommonArgs& args) {
  const serw::MmSpace a = serw::load_space(args.a, args.weights_a);
  const serw::MmSpace b = serw::load_space(args.b, args.weights_b);
  const serw::SerwResult result = serw::serw_train(a, b, serw_config_from(args));
  serw::emit_report(serw_result_json("serw", result, args.out), args.out);
  std::cout << "serw: value = " << result.value << " (" << args.epochs
            << " epochs)\n";
  return 0;
}

int run_bounds(const CommonArgs& args) {
  const serw::MmSpace a = serw::load_space(args.a, args.weights_a);
  const serw::MmSpace b = serw::load_space(args.b, args.weights_b);
  const serw::SerwResult result = serw::serw_train(a, b, serw_config_from(args));
  const serw::GwSolution gw = serw::gw_solve(a, b, args.restarts, args.seed);
  const serw::BoundsReport report = serw::check_bounds(a, b, result, gw);
  ordered_json j;
  j["command"] = "bounds";
  j["gw_squared"] = report.gw_squared;
  j["serw_squared"] = report.serw_squared;
  j["alpha"] = report.alpha;
  j["beta"] = report.beta;
  j["m_bar"] = report.m_bar;
  j["m_underbar"] = report.m_underbar;
  j["lower_holds"] = report.lower_holds;
  j["upper_holds"] = report.upper_holds;
  j["slack_lower"] = report.slack_lower;
  j["slack_upper"] = report.slack_upper;
  serw::emit_report(j, args.out);
  std::cout << "bounds: gw^2 = " << report.gw_squared
            << ", serw^2 = " << report.serw_squared
            << ", upper holds = " << (report.upper_holds ? "yes" : "no")
            << ", lower holds = " << (report.lower_holds ? "yes" : "no")
            << "\n";
  return 0;
}

int run_embed(const CommonArgs& args) {
  const serw::MmSpace a = serw::load_space(args.a, args.weights_a);
  const int d = args.dim > 0 ? args.dim
                             : serw::target_dimension(a.size(), a.size());
  const serw::BaseEmbed method = parse_embed(args.embed);

  ordered_json j;
  j["command"] = "embed";
  j["method"] = args.embed;
  j["dim"] = d;
  Eigen::MatrixXd coords;
  if (method == serw::BaseEmbed::Mds) {
    const serw::MdsEmbedding emb = serw::mds_embed(a, d);
    coords = emb.coords;
    j["padded"] = emb.padded;
    j["origin_enforced"] = emb.origin_enforced;
  } else {
    coords = serw::lle_embed(a, d, args.lle_k);
    j["padded"] = false;
    j["origin_enforced"] = false;
  }
  const std::string coords_path = sibling_path(args.out, ".coords.csv");
  serw::save_matrix_csv(coords_path, coords);
  j["coords"] = coords_path;
  j["distortion"] = distortion_json(serw::estimate_distortion(
      a.distance_matrix(), serw::pairwise_distance_matrix(coords)));
  serw::emit_report(j, args.out);
  std::cout << "embed: " << args.embed << " to d = " << d << ", tau = "
            << j["distortion"]["tau"].get<double>() << "\n";
  return 0;
}

int run_dtw(const CommonArgs& args) {
  const Eigen::VectorXd a = serw::load_vector_csv(args.a);
  const Eigen::VectorXd b = serw::load_vector_csv(args.b);
  const serw::DtwResult result =
      serw::dtw(std::vector<double>(a.data(), a.data() + a.size()),
                std::vector<double>(b.data(), b.data() + b.size()),
                args.squared_dtw ? serw::DtwLocalCost::Squared
                                 : serw::DtwLocalCost::Absolute);
  ordered_json j;
  j["command"] = "dtw";
  j["distance"] = result.distance;
  ordered_json path = ordered_json::array();
  for (const auto& [i, k] : result.path)
    path.push_back(ordered_json::array({i, k}));
  j["path"] = std::move(path);
  serw::emit_report(j, args.out);
  std::cout << "dtw: distance = " << result.distance << " (path length "
            << result.path.size() << ")\n";
  return 0;
}

std::vector<serw::MmSpace> load_frames(const std::string& dir) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir))
    throw std::invalid_argument("--frames must name a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.size() < 2)
    throw std::invalid_argument("frames directory needs >= 2 csv files");
  std::vector<serw::MmSpace> frames;
  frames.reserve(files.size());
  for (const std::string& f : files) frames.push_back(serw::load_space(f));
  return frames;
}

int run_curve(const CommonArgs& args) {
  const std::vector<serw::MmSpace> frames = load_frames(args.frames_dir);
  serw::CurveOptions options;
  options.w2_solver = parse_solver(args.solver);
  options.sinkhorn_epsilon = args.epsilon;
  options.dim = args.dim;
  options.embed = parse_embed(args.embed);
  options.gw_restarts = args.restarts;
  options.seed = args.seed;
  const std::string& metric = args.metric;
  if (metric == "gw")
    options.metric = serw::CurveMetric::GW;
  else if (metric == "w2")
    options.metric = serw::CurveMetric::W2;
  else if (metric == "fserw")
    options.metric = serw::CurveMetric::FSERW;
  else
    throw std::invalid_argument("unknown curve metric: " + metric);
  const std::vector<double> curve = serw::sequence_curve(frames, options);

  Eigen::MatrixXd table(curve.size(), 2);
  for (size_t k = 0; k < curve.size(); ++k) {
    table(static_cast<int>(k), 0) = static_cast<double>(k);
    table(static_cast<int>(k), 1) = curve[k];
  }
  const std::string csv = sibling_path(args.out, ".curve.csv");
  serw::save_matrix_csv(csv, table);

  ordered_json j;
  j["command"] = "curve";
  j["metric"] = metric;
  j["curve"] = curve;
  j["csv"] = csv;
  serw::emit_report(j, args.out);
  std::cout << "curve: " << curve.size() << " frames (" << metric << ")\n";
  return 0;
}

int run_sweep(const CommonArgs& args) {
  const serw::MmSpace a = serw::load_space(args.a, args.weights_a);
  const serw::MmSpace b = serw::load_space(args.b, args.weights_b);
  if (args.dims.empty())
    throw std::invalid_argument("sweep needs --dims, e.g. --dims 2,4,8");
  const serw::CurveReport report = serw::dimension_sweep(
      a, b, args.dims, parse_embed(args.embed), args.seed);

  Eigen::MatrixXd table(report.dims.size(), 5);
  for (size_t k = 0; k < report.dims.size(); ++k) {
    const int r = static_cast<int>(k);
    table(r, 0) = report.dims[k];
    table(r, 1) = report.distortion_rates[k];
    table(r, 2) = report.upper_bounds[k];
    table(r, 3) = report.serw_ratios[k];
    table(r, 4) = report.gw_ratios[k];
  }
  const std::string csv = sibling_path(args.out, ".sweep.csv");
  serw::save_matrix_csv(csv, table);

  ordered_json j;
  j["command"] = "sweep";
  j["dims"] = report.dims;
  j["distortion_rates"] = report.distortion_rates;
  j["upper_bounds"] = report.upper_bounds;
  j["serw_ratios"] = report.serw_ratios;
  j["gw_ratios"] = report.gw_ratios;
  j["csv"] = csv;
  serw::emit_report(j, args.out);
  std::cout << "sweep: " << report.dims.size() << " dimensions\n";
  return 0;
}

int run_ratios(const CommonArgs& args) {
  const serw::MmSpace x = serw::load_space(args.a, args.weights_a);
  const serw::MmSpace y = serw::load_space(args.b, args.weights_b);
  const serw::MmSpace z = serw::load_space(args.c, args.weights_c);
  const serw::ProximityRatios r = serw::proximity_ratios(
      x, y, z, args.dim, parse_embed(args.embed), args.seed);
  ordered_json j;
  j["command"] = "ratios";
  j["gw_ratios"] = ordered_json::array({r.gw[0], r.gw[1]});
  j["serw_ratios"] = ordered_json::array({r.serw[0], r.serw[1]});
  j["ordering_agreement"] = r.ordering_agreement;
  serw::emit_report(j, args.out);
  std::cout << "ratios: gw = (" << r.gw[0] << ", " << r.gw[1] << "), serw = ("
            << r.serw[0] << ", " << r.serw[1] << "), order "
            << (r.ordering_agreement ? "preserved" : "not preserved") << "\n";
  return 0;
}

// Layers a JSON config under the command-line flags: config values are
// injected as arguments before the user's own, and every option takes
// the last occurrence.
std::vector<std::string> apply_config_file(CLI::App& app,
                                           std::vector<std::string> args) {
  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  if (args.empty() || args[0].rfind("--", 0) == 0) return args;

  CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;

  std::ifstream in(config_path);
  if (!in)
    throw std::invalid_argument("cannot open config file: " + config_path);
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(config_path + ": " + e.what());
  }
  if (!config.is_object())
    throw std::invalid_argument(config_path + ": config must be an object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : config.items()) {
    const std::string flag = "--" + key;
    if (sub->get_option_no_throw(flag) == nullptr)
      throw std::invalid_argument(config_path + ": unknown key '" + key +
                                  "' for subcommand " + args[0]);
    std::string text;
    if (value.is_string())
      text = value.get<std::string>();
    else if (value.is_boolean())
      text = value.get<bool>() ? "true" : "false";
    else
      text = value.dump();
    injected.push_back(flag + "=" + text);
  }
  std::vector<std::string> merged{args[0]};
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distances between metric measure spaces: optimal transport, "
               "Gromov-Wasserstein and embedding-aligned variants"};
  app.require_subcommand(1);

  CommonArgs args;
  std::function<int(const CommonArgs&)> action;

  auto add_common = [&](CLI::App* sub, bool needs_b) {
    sub->option_defaults()->take_last();
    sub->add_option("--a", args.a, "first input CSV")->required();
    if (needs_b) sub->add_option("--b", args.b, "second input CSV")->required();
    sub->add_option("--weights-a", args.weights_a, "weights for --a");
    if (needs_b)
      sub->add_option("--weights-b", args.weights_b, "weights for --b");
    sub->add_option("--out", args.out, "output JSON report path")->required();
    sub->add_option("--config", args.config,
                    "JSON config file; flags override its values");
    sub->add_option("--seed", args.seed, "random seed (default 0)");
    sub->add_option("--threads", args.threads,
                    "worker thread cap (default 1)");
  };

  CLI::App* w2 = app.add_subcommand("w2", "squared 2-Wasserstein distance");
  add_common(w2, true);
  w2->add_option("--solver", args.solver, "exact|sinkhorn (default exact)");
  w2->add_option("--epsilon", args.epsilon,
                 "sinkhorn regularization (default 1e-2 * max cost)");
  w2->callback([&] { action = run_w2; });

  CLI::App* gw =
      app.add_subcommand("gw", "squared Gromov-Wasserstein distance");
  add_common(gw, true);
  gw->add_option("--restarts", args.restarts, "solver restarts (default 5)");
  gw->add_flag("--entropic", args.entropic,
               "use the entropic cross-check solver");
  gw->add_option("--epsilon", args.epsilon, "entropic regularization");
  gw->callback([&] { action = run_gw; });

  CLI::App* fserw =
      app.add_subcommand("fserw", "fixed-embedding aligned distance");
  add_common(fserw, true);
  fserw->add_option("--dim", args.dim, "embedding dimension (default auto)");
  fserw->add_option("--embed", args.embed, "mds|lle (default mds)");
  fserw->add_option("--lle-k", args.lle_k, "LLE neighbor count");
  fserw->callback([&] { action = run_fserw; });

  CLI::App* sw = app.add_subcommand(
      "serw", "trained sub-embedding aligned distance");
  add_common(sw, true);
  sw->add_option("--dim", args.dim, "embedding dimension (default auto)");
  sw->add_option("--embed", args.embed, "mds|lle (default mds)");
  sw->add_option("--lle-k", args.lle_k, "LLE neighbor count");
  sw->add_option("--epochs", args.epochs, "training epochs (default 1)");
  sw->add_option("--batches", args.batches, "batches per epoch (default 1)");
  sw->add_option("--batch-size", args.batch_size,
                 "batch size (default min(n, m))");
  sw->add_option("--lr", args.lr, "Adam learning rate (default 1e-3)");
  sw->add_option("--distortion-weight", args.distortion_weight,
                 "weight of the distortion penalties (default 1)");
  sw->callback([&] { action = run_serw; });

  CLI::App* bounds = app.add_subcommand(
      "bounds", "cost-relation report between GW and the aligned distance");
  add_common(bounds, true);
  bounds->add_option("--dim", args.dim, "embedding dimension (default auto)");
  bounds->add_option("--embed", args.embed, "mds|lle (default mds)");
  bounds->add_option("--lle-k", args.lle_k, "LLE neighbor count");
  bounds->add_option("--epochs", args.epochs, "training epochs (default 1)");
  bounds->add_option("--batches", args.batches, "batches per epoch");
  bounds->add_option("--batch-size", args.batch_size, "batch size");
  bounds->add_option("--lr", args.lr, "Adam learning rate");
  bounds->add_option("--distortion-weight", args.distortion_weight,
                     "distortion penalty weight");
  bounds->add_option("--restarts", args.restarts, "GW solver restarts");
  bounds->callback([&] { action = run_bounds; });

  CLI::App* embed = app.add_subcommand("embed", "base embedding of one space");
  embed->option_defaults()->take_last();
  embed->add_option("--a", args.a, "input CSV")->required();
  embed->add_option("--weights-a", args.weights_a, "weights for --a");
  embed->add_option("--out", args.out, "output JSON report path")->required();
  embed->add_option("--config", args.config, "JSON config file");
  embed->add_option("--dim", args.dim, "embedding dimension (default auto)");
  embed->add_option("--embed", args.embed, "mds|lle (default mds)");
  embed->add_option("--lle-k", args.lle_k, "LLE neighbor count");
  embed->add_option("--seed", args.seed, "random seed");
  embed->add_option("--threads", args.threads, "worker thread cap");
  embed->callback([&] { action = run_embed; });

  CLI::App* dtw = app.add_subcommand(
      "dtw", "dynamic time warping between two one-column sequences");
  add_common(dtw, true);
  dtw->add_flag("--squared", args.squared_dtw,
                "squared-difference local cost instead of absolute");
  dtw->callback([&] { action = run_dtw; });

  CLI::App* curve = app.add_subcommand(
      "curve", "distance-to-first-frame curve over a frame directory");
  curve->option_defaults()->take_last();
  curve->add_option("--frames", args.frames_dir,
                    "directory of frame CSV files (sorted by name)")
      ->required();
  curve->add_option("--metric", args.metric, "gw|fserw|w2 (default gw)");
  curve->add_option("--dim", args.dim, "fserw embedding dimension");
  curve->add_option("--embed", args.embed, "mds|lle (default mds)");
  curve->add_option("--restarts", args.restarts, "GW restarts");
  curve->add_option("--solver", args.solver, "w2 solver: exact|sinkhorn");
  curve->add_option("--epsilon", args.epsilon, "sinkhorn regularization");
  curve->add_option("--out", args.out, "output JSON report path")->required();
  curve->add_option("--config", args.config, "JSON config file");
  curve->add_option("--seed", args.seed, "random seed");
  curve->add_option("--threads", args.threads, "worker thread cap");
  curve->callback([&] { action = run_curve; });

  CLI::App* sweep = app.add_subcommand(
      "sweep", "distortion and bound quantities across embedding dimensions");
  add_common(sweep, true);
  sweep->add_option("--dims", args.dims, "dimensions, e.g. 2,4,8")
      ->delimiter(',');
  sweep->add_option("--embed", args.embed, "mds|lle (default mds)");
  sweep->callback([&] { action = run_sweep; });

  CLI::App* ratios = app.add_subcommand(
      "ratios", "proximity-preservation ratios over three spaces");
  add_common(ratios, true);
  ratios->add_option("--c", args.c, "third input CSV")->required();
  ratios->add_option("--weights-c", args.weights_c, "weights for --c");
  ratios->add_option("--dim", args.dim, "embedding dimension (default auto)");
  ratios->add_option("--embed", args.embed, "mds|lle (default mds)");
  ratios->callback([&] { action = run_ratios; });

  try {
    std::vector<std::string> raw(argv + 1, argv + argc);
    const std::vector<std::string> merged = apply_config_file(app, raw);
    // CLI11 parses a reversed vector form.
    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    app.parse(reversed);
    serw::set_max_threads(args.threads);
    if (!action) throw CLI::CallForHelp();
    return action(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const serw::solver_error& e) {
    serw::log_error(e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    serw::log_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    serw::log_error(e.what());
    return 2;
  }
}
