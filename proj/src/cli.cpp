#include "iwagg/cli.hpp"

#include "iwagg/aggregation.hpp"
#include "iwagg/bundle_io.hpp"
#include "iwagg/density_ratio.hpp"
#include "iwagg/embeddings.hpp"
#include "iwagg/error.hpp"
#include "iwagg/probe.hpp"
#include "iwagg/selection.hpp"
#include "iwagg/synth_bench.hpp"
#include "iwagg/text_io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace iwagg::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kAnalyticRatioFile = "analytic_ratio.json";
constexpr double kSaturationWarning = 0.5;

struct RunConfig {
  std::string input;
  std::string output;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  int threads = 1;
  bool verbose = false;

  // aggregate / select
  std::string beta_file;
  std::string ratio_file;
  bool analytic = false;
  bool oracle = false;

  // estimate-ratio
  std::string estimator;

  // bench
  std::optional<int> trials;
  std::string export_bundles;

  // probe
  std::optional<double> epsilon;
  std::string lipschitz;
};

fs::path output_dir(const RunConfig& rc) {
  return rc.output.empty() ? fs::path(rc.input) : fs::path(rc.output);
}

LambdaPolicy lambda_policy(const RunConfig& rc) {
  if (!rc.lambda) return LambdaPolicy::automatic();
  if (!(*rc.lambda >= 0)) fail(ErrorKind::ConfigInvalid, "--lambda must be >= 0");
  return LambdaPolicy::fixed(*rc.lambda);
}

struct Weights {
  Vector beta;
  double bound = kDefaultRatioBound;
  std::string source;
};

/// β from --beta, --ratio, --analytic, or <input>/beta.csv, in that order.
std::optional<Weights> resolve_weights(const RunConfig& rc, const PredictionBundle& bundle) {
  const auto from_model = [&](const fs::path& path, const std::string& label) {
    const RatioModel model = ratio_model_from_json(read_json_file(path));
    if (!bundle.source().features())
      fail(ErrorKind::PreconditionViolation,
           "bundle has no source feature columns (x_1..x_d1) to evaluate " + path.string());
    return Weights{evaluate_ratio(model, *bundle.source().features()), model.bound(), label};
  };
  if (!rc.beta_file.empty()) {
    Vector beta = read_vector_csv(rc.beta_file);
    if (beta.size() != bundle.source_size())
      fail(ErrorKind::DimensionMismatch, rc.beta_file + ": " + std::to_string(beta.size()) +
                                             " weights for " +
                                             std::to_string(bundle.source_size()) + " source samples");
    return Weights{std::move(beta), kDefaultRatioBound, "file"};
  }
  if (!rc.ratio_file.empty()) return from_model(rc.ratio_file, "ratio_model");
  if (rc.analytic) return from_model(fs::path(rc.input) / kAnalyticRatioFile, "analytic");
  const fs::path default_beta = fs::path(rc.input) / "beta.csv";
  if (fs::exists(default_beta)) {
    RunConfig copy = rc;
    copy.beta_file = default_beta.string();
    return resolve_weights(copy, bundle);
  }
  return std::nullopt;
}

int cmd_estimate_ratio(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const PredictionBundle bundle = load_bundle(rc.input);
  std::string missing;
  if (!bundle.source().features()) missing += " source.csv";
  if (!bundle.target().features()) missing += " target.csv";
  if (!missing.empty())
    fail(ErrorKind::PreconditionViolation,
         "density ratio estimation needs feature columns x_1..x_d1, missing in:" + missing);

  RatioFitConfig cfg;
  if (!rc.config.empty()) cfg = ratio_config_from_json(read_json_file(rc.config));
  if (!rc.estimator.empty()) cfg.estimator = ratio_kind_from_string(rc.estimator);
  if (cfg.estimator == RatioKind::analytic)
    fail(ErrorKind::ConfigInvalid, "the analytic ratio cannot be fitted");
  if (rc.seed) cfg.seed = *rc.seed;

  const Matrix& xs = *bundle.source().features();
  const RatioModel model = fit_ratio(xs, *bundle.target().features(), cfg);
  const Vector beta = evaluate_ratio(model, xs);
  const double saturation = saturation_fraction(beta, model.bound());

  const fs::path dir = output_dir(rc);
  write_text_file(dir / "ratio.json", dump_json(ratio_model_to_json(model)));
  write_vector_csv(beta, "beta", dir / "beta.csv");

  err << "estimator: " << to_string(model.kind()) << "\n";
  err << "beta mean: " << format_double(beta.mean()) << "\n";
  err << "beta saturation fraction: " << format_double(saturation) << "\n";
  if (saturation > kSaturationWarning)
    err << "warning: beta saturation: " << format_double(saturation)
        << " of source samples at the bound " << format_double(model.bound()) << "\n";
  out << (dir / "ratio.json").string() << "\n" << (dir / "beta.csv").string() << "\n";
  return kExitOk;
}

int cmd_aggregate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const PredictionBundle bundle = load_bundle(rc.input);
  AggregationResult result;
  std::optional<Weights> weights;
  if (rc.oracle) {
    const LambdaPolicy policy = rc.lambda ? lambda_policy(rc) : LambdaPolicy::fixed(0.0);
    result = oracle_aggregate(bundle, policy);
    weights = resolve_weights(rc, bundle);
  } else {
    weights = resolve_weights(rc, bundle);
    if (!weights)
      fail(ErrorKind::ConfigInvalid,
           "no importance weights: pass --beta, --ratio or --analytic, or run estimate-ratio first");
    result = run_aggregation(bundle, weights->beta, lambda_policy(rc), weights->bound);
    result.notes.push_back("beta source: " + weights->source);
  }

  Json doc = aggregation_result_to_json(result);
  doc["model_names"] = bundle.model_names();
  doc["oracle"] = rc.oracle;
  Json reports = Json::object();
  if (bundle.target().has_oracle_labels())
    reports["target_oracle"] =
        risk_report_to_json(make_risk_report(bundle, result.coefficients, RiskKind::target_oracle));
  if (weights)
    reports["importance_weighted"] = risk_report_to_json(
        make_risk_report(bundle, result.coefficients, RiskKind::importance_weighted, &weights->beta));
  reports["source"] =
      risk_report_to_json(make_risk_report(bundle, result.coefficients, RiskKind::source));
  doc["risk_reports"] = std::move(reports);

  const fs::path dir = output_dir(rc);
  write_text_file(dir / "result.json", dump_json(doc));
  write_matrix_csv(aggregate_predict(bundle.target_preds(), result.coefficients), "f",
                   dir / "aggregated_target.csv");
  write_matrix_csv(aggregate_predict(bundle.source_preds(), result.coefficients), "f",
                   dir / "aggregated_source.csv");

  if (rc.verbose)
    for (const auto& note : result.notes) err << "note: " << note << "\n";
  if (weights && result.diagnostics.count("beta_saturation_fraction") &&
      result.diagnostics.at("beta_saturation_fraction") > kSaturationWarning)
    err << "warning: beta saturation: "
        << format_double(result.diagnostics.at("beta_saturation_fraction")) << "\n";
  out << "lambda: " << format_double(result.lambda) << "\n";
  out << "condition estimate: " << format_double(result.condition_estimate) << "\n";
  for (Index k = 0; k < bundle.model_count(); ++k)
    out << bundle.model_names()[static_cast<std::size_t>(k)] << " "
        << format_double(result.coefficients(k)) << "\n";
  return kExitOk;
}

int cmd_select(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const PredictionBundle bundle = load_bundle(rc.input);
  const auto weights = resolve_weights(rc, bundle);
  if (!weights)
    fail(ErrorKind::ConfigInvalid,
         "no importance weights: pass --beta, --ratio or --analytic, or run estimate-ratio first");
  const ComparisonReport report =
      compare_methods(bundle, weights->beta, lambda_policy(rc), weights->source, weights->bound);
  Json doc = comparison_to_json(report);
  doc["source_risk"] = selection_outcome_to_json(select_source_risk(bundle));
  doc["iwv"] = selection_outcome_to_json(select_iwv(bundle, weights->beta));
  write_text_file(output_dir(rc) / "comparison.json", dump_json(doc));
  out << comparison_table(report);
  return kExitOk;
}

int cmd_bench(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  SuiteConfig cfg;
  if (!rc.config.empty()) cfg = suite_config_from_json(read_json_file(rc.config));
  if (rc.seed) cfg.seed = *rc.seed;
  if (rc.trials) cfg.trials = *rc.trials;
  if (rc.lambda) cfg.lambda = lambda_policy(rc);
  if (rc.threads < 1) fail(ErrorKind::ConfigInvalid, "--threads must be >= 1");
  cfg.validate();

  const SuiteReport report = run_suite(cfg, rc.threads);
  const std::string table = suite_table(report);
  if (!rc.output.empty()) {
    const fs::path dir = rc.output;
    write_text_file(dir / "suite_report.json", dump_json(suite_report_to_json(report)));
    write_text_file(dir / "suite_report.txt", table);
  }
  if (!rc.export_bundles.empty()) {
    for (int t = 0; t < cfg.trials; ++t) {
      SynthTaskConfig task_cfg = cfg.task;
      task_cfg.seed = report.trials[static_cast<std::size_t>(t)].seed;
      const SynthTask task = generate_task(task_cfg);
      char name[32];
      std::snprintf(name, sizeof(name), "trial_%03d", t);
      const fs::path dir = fs::path(rc.export_bundles) / name;
      write_bundle(task.bundle, dir);
      write_text_file(dir / kAnalyticRatioFile, dump_json(ratio_model_to_json(task.analytic_ratio)));
    }
    if (rc.verbose) err << "exported " << cfg.trials << " bundles to " << rc.export_bundles << "\n";
  }
  out << table;
  return kExitOk;
}

std::vector<double> parse_constants(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(parse_double(item, "--lipschitz", 0));
  }
  return values;
}

int cmd_probe(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const LayerEmbeddingSet emb = load_embeddings(rc.input);
  ProbeReport report = semantic_distance(emb);
  if (rc.epsilon) {
    report.epsilon = *rc.epsilon;
    report.is_epsilon_close = epsilon_close(report, *rc.epsilon);
  }
  if (!rc.lipschitz.empty()) {
    const std::vector<double> constants = parse_constants(rc.lipschitz);
    report.lipschitz_constants = constants;
    report.propagated_bound =
        lipschitz_propagated_bound(rc.epsilon ? *rc.epsilon : report.d_sem, constants);
  }
  const std::string text = dump_json(probe_report_to_json(report));
  if (!rc.output.empty()) write_text_file(fs::path(rc.output) / "probe.json", text);
  out << text;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Importance-weighted model aggregation for covariate-shift adaptation"};
  app.require_subcommand(1);
  RunConfig rc;

  const auto common = [&rc](CLI::App* sub) {
    sub->add_option("--seed", rc.seed, "RNG seed");
    sub->add_option("--lambda", rc.lambda, "Fixed Tikhonov term (default: automatic)");
    sub->add_option("--config", rc.config, "JSON config file");
    sub->add_option("--threads", rc.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", rc.verbose, "Extra diagnostics on stderr");
  };
  const auto weights = [&rc](CLI::App* sub) {
    auto* beta = sub->add_option("--beta", rc.beta_file, "beta.csv with one weight per source sample");
    auto* ratio = sub->add_option("--ratio", rc.ratio_file, "Fitted ratio model JSON");
    auto* analytic = sub->add_flag("--analytic", rc.analytic, "Use <input>/analytic_ratio.json");
    beta->excludes(ratio)->excludes(analytic);
    ratio->excludes(analytic);
  };

  auto* est = app.add_subcommand("estimate-ratio", "Fit a density-ratio model on bundle features");
  est->add_option("--input", rc.input, "Bundle directory")->required();
  est->add_option("--output", rc.output, "Output directory (default: input)");
  est->add_option("--estimator", rc.estimator, "ulsif or logistic (overrides config)");
  common(est);

  auto* agg = app.add_subcommand("aggregate", "Solve for aggregation coefficients");
  agg->add_option("--input", rc.input, "Bundle directory")->required();
  agg->add_option("--output", rc.output, "Output directory (default: input)");
  agg->add_flag("--oracle", rc.oracle, "Form the moment vector from target oracle labels");
  weights(agg);
  common(agg);

  auto* sel = app.add_subcommand("select", "Compare selection baselines with aggregation");
  sel->add_option("--input", rc.input, "Bundle directory")->required();
  sel->add_option("--output", rc.output, "Output directory (default: input)");
  weights(sel);
  common(sel);

  auto* bench = app.add_subcommand("bench", "Run the synthetic covariate-shift suite");
  bench->add_option("--output", rc.output, "Directory for suite_report.json/.txt");
  bench->add_option("--trials", rc.trials, "Override trial count");
  bench->add_option("--export-bundles", rc.export_bundles, "Write every trial's bundle here");
  common(bench);

  auto* probe = app.add_subcommand("probe", "Semantic distance over an embedding dump");
  probe->add_option("--input", rc.input, "Embedding dump JSON")->required();
  probe->add_option("--output", rc.output, "Directory for probe.json");
  probe->add_option("--epsilon", rc.epsilon, "Closeness threshold");
  probe->add_option("--lipschitz", rc.lipschitz, "Comma-separated Lipschitz constants");
  common(probe);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*est) return cmd_estimate_ratio(rc, out, err);
    if (*agg) return cmd_aggregate(rc, out, err);
    if (*sel) return cmd_select(rc, out, err);
    if (*bench) return cmd_bench(rc, out, err);
    if (*probe) return cmd_probe(rc, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace iwagg::cli
