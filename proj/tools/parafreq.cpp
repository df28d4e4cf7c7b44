#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "parafreq/experiment.hpp"

namespace {

parafreq::Json read_config(const std::string& path) {
  std::ifstream in(path);
  parafreq::require(static_cast<bool>(in), parafreq::ErrorCode::IoError, "config: cannot open " + path);
  try {
    return parafreq::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    parafreq::fail(parafreq::ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic frequency experiments"};
  app.allow_extras(false);

  std::string command = "run";
  app.add_option("command", command, "Command (only 'run')")->check(CLI::IsMember({"run"}));

  std::string config_path;
  app.add_option("--config", config_path, "JSON config; command-line flags override it");

  parafreq::Json flags = parafreq::Json::object();
  std::string experiment, background, window, modes, shape, csv, json, degrees;
  int degree = 0, dim = 1, samples = 64, order = 0, truncation = 48, n_max = 6, max_mode = 4;
  double t1 = 0, length = 0, c0 = 0, center = 0, sphere_eps = 0, alpha = 0, beta = 0, tau = 1;
  std::uint64_t seed = 1;
  bool corrupt = false, parallel = false;

  auto* o_experiment = app.add_option("--experiment", experiment, "Experiment name")
                           ->check(CLI::IsMember(parafreq::experiment_names()));
  auto* o_background = app.add_option("--background", background, "gaussian | circle | sphere");
  auto* o_degree = app.add_option("--degree", degree, "Caloric polynomial degree (one dimension)");
  auto* o_degrees = app.add_option("--degrees", degrees, "Tensor caloric degrees, comma separated");
  auto* o_dim = app.add_option("--dim", dim, "Dimension of the Gaussian soliton for random mixtures");
  auto* o_modes = app.add_option("--modes", modes, "Initial modes k:cos[:sin],... (circle) or l:coef,... (sphere)");
  auto* o_max_mode = app.add_option("--max-mode", max_mode, "Band limit for random initial data");
  auto* o_window = app.add_option("--window", window, "Time window a:b")->allow_extra_args(false);
  auto* o_samples = app.add_option("--samples", samples, "Trace samples");
  auto* o_t1 = app.add_option("--t1", t1, "Kernel base time");
  auto* o_length = app.add_option("--length", length, "Circle length");
  auto* o_c0 = app.add_option("--c0", c0, "Sphere scale at t = 0");
  auto* o_center = app.add_option("--center", center, "Kernel base point (first coordinate)");
  auto* o_order = app.add_option("--order", order, "Quadrature order (0 = default)");
  auto* o_truncation = app.add_option("--truncation", truncation, "Sphere kernel mode count");
  auto* o_sphere_eps = app.add_option("--sphere-eps", sphere_eps, "Sphere kernel smoothing time");
  auto* o_alpha = app.add_option("--alpha", alpha, "Drift perturbation amplitude");
  auto* o_beta = app.add_option("--beta", beta, "Potential perturbation amplitude");
  auto* o_shape = app.add_option("--shape", shape, "constant | sine | cosine");
  auto* o_tau = app.add_option("--tau", tau, "Scale for ou-spectrum");
  auto* o_n_max = app.add_option("--n-max", n_max, "Highest Hermite degree for ou-spectrum");
  auto* o_seed = app.add_option("--seed", seed, "Seed for random initial data");
  auto* o_corrupt = app.add_flag("--corrupt", corrupt, "Lower U at one sample (negative control)");
  auto* o_parallel = app.add_flag("--parallel", parallel, "Evaluate trace samples concurrently");
  auto* o_csv = app.add_option("--csv", csv, "Trace CSV path");
  auto* o_json = app.add_option("--json", json, "Report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (o_experiment->count()) flags["experiment"] = experiment;
    if (o_background->count()) flags["background"] = background;
    if (o_degree->count()) flags["degree"] = degree;
    if (o_degrees->count()) flags["degrees"] = degrees;
    if (o_dim->count()) flags["dim"] = dim;
    if (o_modes->count()) flags["modes"] = modes;
    if (o_max_mode->count()) flags["max_mode"] = max_mode;
    if (o_window->count()) flags["window"] = window;
    if (o_samples->count()) flags["samples"] = samples;
    if (o_t1->count()) flags["t1"] = t1;
    if (o_length->count()) flags["length"] = length;
    if (o_c0->count()) flags["c0"] = c0;
    if (o_center->count()) flags["center"] = center;
    if (o_order->count()) flags["order"] = order;
    if (o_truncation->count()) flags["truncation"] = truncation;
    if (o_sphere_eps->count()) flags["sphere_eps"] = sphere_eps;
    if (o_alpha->count()) flags["alpha"] = alpha;
    if (o_beta->count()) flags["beta"] = beta;
    if (o_shape->count()) flags["shape"] = shape;
    if (o_tau->count()) flags["tau"] = tau;
    if (o_n_max->count()) flags["n_max"] = n_max;
    if (o_seed->count()) flags["seed"] = seed;
    if (o_corrupt->count()) flags["corrupt"] = corrupt;
    if (o_parallel->count()) flags["parallel"] = parallel;
    if (o_csv->count()) flags["csv"] = csv;
    if (o_json->count()) flags["json"] = json;

    parafreq::ExperimentConfig cfg;
    if (!config_path.empty()) parafreq::apply_json(cfg, read_config(config_path));
    parafreq::apply_json(cfg, flags);

    const int code = parafreq::run(cfg);
    std::cout << (code == 0 ? "PASS " : "FAIL ") << cfg.experiment << " -> " << cfg.json_path << '\n';
    return code;
  } catch (const parafreq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
