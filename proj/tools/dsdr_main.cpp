#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "dsdr/experiment.hpp"

namespace {

using namespace dsdr;

Method parse_method(const std::string& s) {
  if (s == "sir") return Method::Sir;
  if (s == "save") return Method::Save;
  if (s == "dr") return Method::Dr;
  throw ConfigError("unknown method: " + s);
}

int cmd_run(CLI::App& app, int& exit_code) {
  static ExperimentConfig config;
  static std::string method = "sir", mode = "global", xmode = "standard", aggregate = "spectrum",
                     partition_name = "homo-equal", transport = "inproc", slicing = "quantile",
                     out_path = "results.csv";
  static int model = 1, k = 0, port = 0;
  static long long n = 1000;
  static double alpha = -1.0, sigma = 0.5;
  static bool no_pooled = false;

  auto* run = app.add_subcommand("run", "run a Monte-Carlo experiment");
  run->add_option("--method", method)->check(CLI::IsMember({"sir", "save", "dr"}));
  run->add_option("--mode", mode)
      ->check(CLI::IsMember({"global", "exact", "approx-homo", "approx-hetero"}));
  run->add_option("--model", model)->check(CLI::Range(1, 8));
  run->add_option("--xmode", xmode)->check(CLI::IsMember({"standard", "hetero", "dependent"}));
  run->add_option("--n", n);
  run->add_option("--p", config.p);
  run->add_option("--slices", config.slices);
  run->add_option("--workers", config.workers);
  run->add_option("--k", k);
  run->add_option("--alpha", alpha);
  run->add_option("--aggregate", aggregate)->check(CLI::IsMember({"spectrum", "basis"}));
  run->add_option("--partition", partition_name)
      ->check(CLI::IsMember({"homo-equal", "hetero-equal", "hetero-unequal"}));
  run->add_option("--reps", config.reps);
  run->add_option("--seed", config.base_seed);
  run->add_option("--transport", transport)->check(CLI::IsMember({"inproc", "tcp"}));
  run->add_option("--port", port);
  run->add_option("--slicing", slicing)->check(CLI::IsMember({"equal", "quantile"}));
  run->add_option("--sigma", sigma);
  run->add_flag("--no-pooled-correction", no_pooled,
                "heterogeneous mode: skip the pooled covariance correction");
  run->add_option("--out", out_path);

  run->callback([&] {
    config.method = parse_method(method);
    config.mode = mode == "global"        ? RunMode::Global
                  : mode == "exact"       ? RunMode::Exact
                  : mode == "approx-homo" ? RunMode::ApproxHomogeneous
                                          : RunMode::ApproxHeterogeneous;
    config.model_id = model;
    config.xmode = xmode == "standard" ? PredictorKind::StandardNormal
                   : xmode == "hetero" ? PredictorKind::HeterogeneousNormal
                                       : PredictorKind::DependentNormal;
    config.n = n;
    if (alpha > 0.0 && k > 0) throw ConfigError("--k and --alpha are mutually exclusive");
    config.k_rule = alpha > 0.0 ? KRule::threshold(alpha) : KRule::fixed(k);
    config.aggregation =
        aggregate == "spectrum" ? Aggregation::SpectrumWeighted : Aggregation::BasisOnly;
    config.partition = partition_name == "homo-equal" ? PartitionKind::HomogeneousEqual
                       : partition_name == "hetero-equal"
                           ? PartitionKind::HeterogeneousEqual
                           : PartitionKind::HeterogeneousUnequal;
    config.transport = transport == "inproc" ? TransportKind::InProcess : TransportKind::Tcp;
    config.tcp_port = port;
    config.slicing = slicing == "equal" ? SliceStrategy::EqualWidth : SliceStrategy::EqualCount;
    config.pooled_correction = !no_pooled;
    config.sigma_noise = sigma;

    ResultTable table = run_experiment(config);
    write_result_table(table, out_path);

    int failed = 0;
    for (const auto& r : table.records)
      if (r.failed) ++failed;
    std::cout << "reps=" << table.records.size() << " ok=" << table.records.size() - failed
              << " failed=" << failed << " -> " << out_path << '\n';
    if (failed == static_cast<int>(table.records.size())) exit_code = 3;
  });
  return 0;
}

int cmd_fit(CLI::App& app, int& exit_code) {
  static std::string input, response = "0", method = "sir", out_path, slicing = "quantile";
  static int slices = 10, k = 1;
  static bool standardize = false;

  auto* fit = app.add_subcommand("fit", "fit SDR directions on an external CSV dataset");
  fit->add_option("--input", input)->required();
  fit->add_option("--response", response, "response column name or 0-based index");
  fit->add_option("--method", method)->check(CLI::IsMember({"sir", "save", "dr"}));
  fit->add_option("--slices", slices);
  fit->add_option("--k", k);
  fit->add_option("--slicing", slicing)->check(CLI::IsMember({"equal", "quantile"}));
  fit->add_flag("--standardize", standardize, "z-score the predictor columns");
  fit->add_option("--out", out_path, "write directions as CSV (default: stdout)");

  fit->callback([&exit_code] {
    ColumnRef ref;
    try {
      std::size_t pos = 0;
      const int idx = std::stoi(response, &pos);
      if (pos == response.size())
        ref = idx;
      else
        ref = response;
    } catch (...) {
      ref = response;
    }
    CsvData csv = load_csv(input, ref, standardize);
    SdrEstimate est = fit_global(
        csv.data, parse_method(method), slices, k,
        slicing == "equal" ? SliceStrategy::EqualWidth : SliceStrategy::EqualCount);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw IoError("cannot write " + out_path);
      out = &file;
    }
    *out << "predictor";
    for (int c = 0; c < est.beta.cols(); ++c) *out << ",dir" << (c + 1);
    *out << '\n';
    *out << "eigenvalue";
    for (int c = 0; c < est.beta.cols(); ++c) *out << ',' << format_real(est.eigenvalues(c));
    *out << '\n';
    for (Eigen::Index r = 0; r < est.beta.rows(); ++r) {
      *out << csv.predictor_names[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < est.beta.cols(); ++c)
        *out << ',' << format_real(est.beta(r, c));
      *out << '\n';
    }
    (void)exit_code;
  });
  return 0;
}

int cmd_timing(CLI::App& app) {
  static std::vector<long long> n_values{10000, 50000, 100000, 200000};
  static std::vector<int> p_values{100, 200, 500};
  static std::vector<int> s_values{5, 10};
  static std::string method = "sir", dist_mode = "exact", out_path = "timing.csv";
  static int slices = 10;
  static std::uint64_t seed = 7, budget = 0;

  auto* timing = app.add_subcommand("timing", "wall-time sweep over n, p, workers");
  timing->add_option("--grid-n", n_values, "sample sizes");
  timing->add_option("--grid-p", p_values, "predictor dimensions");
  timing->add_option("--grid-s", s_values, "worker counts");
  timing->add_option("--method", method)->check(CLI::IsMember({"sir", "save", "dr"}));
  timing->add_option("--dist-mode", dist_mode)
      ->check(CLI::IsMember({"exact", "approx-homo", "approx-hetero"}));
  timing->add_option("--slices", slices);
  timing->add_option("--seed", seed);
  timing->add_option("--budget-cells", budget, "override DSDR_BUDGET_CELLS");
  timing->add_option("--out", out_path);

  timing->callback([] {
    TimingConfig config;
    config.n_values.assign(n_values.begin(), n_values.end());
    config.p_values = p_values;
    config.s_values = s_values;
    config.method = parse_method(method);
    config.dist_mode = dist_mode == "exact"       ? RunMode::Exact
                       : dist_mode == "approx-homo" ? RunMode::ApproxHomogeneous
                                                    : RunMode::ApproxHeterogeneous;
    config.slices = slices;
    config.seed = seed;
    config.budget_cells = budget;
    if (config.method != Method::Sir && config.dist_mode == RunMode::Exact)
      config.dist_mode = RunMode::ApproxHomogeneous;

    auto rows = timing_sweep(config);
    write_timing_table(rows, out_path);
    int skipped = 0;
    for (const auto& r : rows)
      if (r.skipped) ++skipped;
    std::cout << "points=" << rows.size() << " skipped=" << skipped << " -> " << out_path << '\n';
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed sufficient dimension reduction toolkit"};
  app.require_subcommand(1);

  int exit_code = 0;
  cmd_run(app, exit_code);
  cmd_fit(app, exit_code);
  cmd_timing(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const dsdr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return exit_code;
}
