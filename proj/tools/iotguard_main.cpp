#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iotguard/errors.hpp"
#include "iotguard/harness.hpp"

namespace fs = std::filesystem;
using namespace iotguard;

namespace {

std::pair<int, int> parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ParameterError("ratio must look like 7:3, got '" + text + "'");
  try {
    const int benign = std::stoi(text.substr(0, colon));
    const int malicious = std::stoi(text.substr(colon + 1));
    if (benign <= 0 || malicious <= 0) throw ParameterError("ratio parts must be positive");
    return {benign, malicious};
  } catch (const ParameterError&) {
    throw;
  } catch (const std::exception&) {
    throw ParameterError("ratio must look like 7:3, got '" + text + "'");
  }
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos)
    throw ParameterError("range must look like 2..12, got '" + text + "'");
  try {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo > hi) throw ParameterError("range low end exceeds high end");
    return {lo, hi};
  } catch (const ParameterError&) {
    throw;
  } catch (const std::exception&) {
    throw ParameterError("range must look like 2..12, got '" + text + "'");
  }
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  cfg.cls = class_from_name(j.at("class").get<std::string>());
  cfg.device_count = j.value("devices", cfg.device_count);
  cfg.flows_per_device = j.value("flows", cfg.flows_per_device);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.knobs.port_range_lo = j.value("port_range_lo", cfg.knobs.port_range_lo);
  cfg.knobs.port_range_hi = j.value("port_range_hi", cfg.knobs.port_range_hi);
  cfg.knobs.scan_subset = j.value("scan_subset", cfg.knobs.scan_subset);
  cfg.knobs.botnet_fanout = j.value("botnet_fanout", cfg.knobs.botnet_fanout);
  cfg.knobs.auth_failure_rate = j.value("auth_failure_rate", cfg.knobs.auth_failure_rate);
  cfg.knobs.worm_host_pool = j.value("worm_host_pool", cfg.knobs.worm_host_pool);
  cfg.knobs.normal_dst_pool = j.value("normal_dst_pool", cfg.knobs.normal_dst_pool);
  return cfg;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"IoTguard: semi-supervised IoT traffic classification"};
  app.require_subcommand(1);
  // global flags (--seed/--config/--out-dir) remain usable after a
  // subcommand name
  app.subcommand_defaults()->fallthrough();

  std::uint64_t global_seed = 7;
  std::string global_config;
  std::string global_out_dir;
  app.add_option("--seed", global_seed, "Default RNG seed");
  app.add_option("--config", global_config, "Pipeline config file (key = value lines)");
  app.add_option("--out-dir", global_out_dir, "Artifact directory for `run`");

  // generate
  auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic flow log");
  std::string gen_class, gen_mix, gen_output;
  ScenarioConfig gen_cfg;
  bool gen_seed_given = false;
  generate_cmd->add_option("--class", gen_class, "Traffic class (e.g. portsweep)");
  generate_cmd->add_option("--mix", gen_mix, "JSON file with per-class scenario configs");
  generate_cmd->add_option("--devices", gen_cfg.device_count, "Devices per scenario");
  generate_cmd->add_option("--flows", gen_cfg.flows_per_device, "Flows per device");
  generate_cmd->add_option("--seed", gen_cfg.seed, "Scenario seed")
      ->each([&](const std::string&) { gen_seed_given = true; });
  generate_cmd->add_option("--port-range-lo", gen_cfg.knobs.port_range_lo, "Scan range low port");
  generate_cmd->add_option("--port-range-hi", gen_cfg.knobs.port_range_hi, "Scan range high port");
  generate_cmd->add_option("--scan-subset", gen_cfg.knobs.scan_subset, "PortScan subset size");
  generate_cmd->add_option("--botnet-fanout", gen_cfg.knobs.botnet_fanout, "Botnet C2 count");
  generate_cmd->add_option("--auth-failure-rate", gen_cfg.knobs.auth_failure_rate,
                           "AuthAttack failed-login rate");
  generate_cmd->add_option("--output", gen_output, "Output flow log (JSON lines)")->required();

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse and validate a flow log");
  std::string ingest_input;
  bool ingest_strict = false;
  ingest_cmd->add_option("--input", ingest_input, "Flow log path")->required();
  ingest_cmd->add_flag("--strict", ingest_strict, "Abort on the first malformed line");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "Extract 39-feature vectors");
  std::string extract_input, extract_output;
  std::size_t extract_window = 100;
  extract_cmd->add_option("--input", extract_input, "Flow log path")->required();
  extract_cmd->add_option("--window", extract_window, "Last-n aggregation window");
  extract_cmd->add_option("--output", extract_output, "Feature CSV path")->required();

  // reduce
  auto* reduce_cmd = app.add_subcommand("reduce", "Drop uninformative features and normalize");
  std::string reduce_input, reduce_output, reduce_report;
  ReduceParams reduce_params;
  reduce_cmd->add_option("--input", reduce_input, "Feature CSV")->required();
  reduce_cmd->add_option("--output", reduce_output, "Reduced CSV")->required();
  reduce_cmd->add_option("--report", reduce_report, "Reduction report JSON")->required();
  reduce_cmd->add_option("--variance-epsilon", reduce_params.variance_epsilon,
                         "Variance filter threshold");
  reduce_cmd->add_option("--pearson-threshold", reduce_params.pearson_threshold,
                         "|R| pruning threshold");
  reduce_cmd->add_option("--min-support", reduce_params.deviation_min_support,
                         "Deviation-method minimum support");

  // balance
  auto* balance_cmd = app.add_subcommand("balance", "Rebalance classes (undersample + SMOTE)");
  std::string balance_input, balance_output, balance_ratio = "7:3";
  int balance_k = 5;
  std::uint64_t balance_seed = 0;
  bool balance_seed_given = false;
  balance_cmd->add_option("--input", balance_input, "Reduced CSV")->required();
  balance_cmd->add_option("--ratio", balance_ratio, "benign:malicious target ratio");
  balance_cmd->add_option("--k", balance_k, "SMOTE neighbour count");
  balance_cmd->add_option("--seed", balance_seed, "Balance seed")
      ->each([&](const std::string&) { balance_seed_given = true; });
  balance_cmd->add_option("--output", balance_output, "Balanced CSV")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Cluster and build the fuzzy rule base");
  std::string train_input, train_report, train_model, train_range = "2..12";
  FcmConfig train_fcm;
  double train_spread = 3.0;
  int train_select_iters = 3000;
  bool train_seed_given = false;
  train_cmd->add_option("--input", train_input, "Balanced CSV (labeled)")->required();
  train_cmd->add_option("--report", train_report, "Reduction report JSON")->required();
  train_cmd->add_option("--c-range", train_range, "Cluster count candidates, e.g. 2..12");
  train_cmd->add_option("--m", train_fcm.m, "Fuzziness index");
  train_cmd->add_option("--tol", train_fcm.tol, "Convergence tolerance on J_m");
  train_cmd->add_option("--restarts", train_fcm.restarts, "Random restarts per candidate");
  train_cmd->add_option("--select-iters", train_select_iters, "Max iterations per candidate fit");
  train_cmd->add_option("--spread", train_spread, "Antecedent spread multiplier");
  train_cmd->add_option("--seed", train_fcm.seed, "Clustering seed")
      ->each([&](const std::string&) { train_seed_given = true; });
  train_cmd->add_option("--model", train_model, "Output model JSON")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Classify flows with a trained model");
  std::string predict_model, predict_input, predict_output;
  std::size_t predict_window = 100;
  predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
  predict_cmd->add_option("--input", predict_input,
                          "Feature CSV (raw or reduced) or flow log (.jsonl)")
      ->required();
  predict_cmd->add_option("--window", predict_window,
                          "Aggregation window for flow-log inputs");
  predict_cmd->add_option("--output", predict_output, "Predictions CSV")->required();

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against labels");
  std::string eval_predictions, eval_metrics, eval_cm_binary, eval_cm_multi;
  evaluate_cmd->add_option("--predictions", eval_predictions, "Predictions CSV")->required();
  evaluate_cmd->add_option("--metrics", eval_metrics, "Output metrics JSON")->required();
  evaluate_cmd->add_option("--confusion-binary", eval_cm_binary, "Binary confusion CSV");
  evaluate_cmd->add_option("--confusion-multiclass", eval_cm_multi, "Multi-class confusion CSV");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline from a config file");

  CLI11_PARSE(app, argc, argv);

  if (generate_cmd->parsed()) {
    FlowLog log;
    if (!gen_mix.empty()) {
      std::ifstream in(gen_mix);
      if (!in) throw DataError("cannot open mix config: " + gen_mix);
      nlohmann::json doc;
      try {
        in >> doc;
      } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid mix config: ") + e.what());
      }
      std::vector<ScenarioConfig> configs;
      for (const auto& scenario : doc.at("scenarios"))
        configs.push_back(scenario_from_json(scenario));
      log = generate_mixed(configs, doc.value("interleave_seed", global_seed));
    } else if (!gen_class.empty()) {
      gen_cfg.cls = class_from_name(gen_class);
      if (!gen_seed_given) gen_cfg.seed = global_seed;
      log = generate(gen_cfg);
    } else {
      throw ParameterError("generate needs either --class or --mix");
    }
    write_flow_log(gen_output, log);
    std::cout << "wrote " << log.records.size() << " records to " << gen_output << "\n";
  } else if (ingest_cmd->parsed()) {
    const auto result = parse_flow_log(ingest_input, ingest_strict);
    std::cout << "parsed " << result.report.parsed << " records, "
              << result.report.issues.size() << " malformed lines\n";
    for (const auto& issue : result.report.issues)
      std::cout << "  line " << issue.line_number << ": " << issue.message << "\n";
  } else if (extract_cmd->parsed()) {
    const auto parsed = parse_flow_log(extract_input);
    const auto data = extract_all(parsed.log, extract_window);
    write_feature_csv(extract_output, data);
    std::cout << "extracted " << data.rows.size() << " feature vectors ("
              << data.feature_names.size() << " features, window " << extract_window
              << ") to " << extract_output << "\n";
  } else if (reduce_cmd->parsed()) {
    const auto data = read_feature_csv(reduce_input);
    const auto report = fit_reduction(data, reduce_params);
    write_feature_csv(reduce_output, apply_reduction(data, report));
    save_reduction_report(reduce_report, report);
    std::cout << "kept " << report.kept.size() << " of "
              << report.kept.size() + report.dropped.size() << " features\n";
    for (const auto& d : report.dropped)
      std::cout << "  dropped " << d.name << " (" << d.reason_string() << ")\n";
  } else if (balance_cmd->parsed()) {
    const auto data = read_feature_csv(balance_input);
    BalanceConfig bc;
    std::tie(bc.benign_parts, bc.malicious_parts) = parse_ratio(balance_ratio);
    bc.k_neighbors = balance_k;
    bc.seed = balance_seed_given ? balance_seed : global_seed;
    const auto balanced = rebalance(data, bc);
    write_feature_csv(balance_output, balanced);
    long benign = 0;
    for (const auto& row : balanced.rows)
      if (row.label && *row.label == TrafficClass::Normal) ++benign;
    std::cout << "balanced to " << balanced.rows.size() << " rows (" << benign
              << " benign, " << balanced.rows.size() - static_cast<std::size_t>(benign)
              << " malicious)\n";
  } else if (train_cmd->parsed()) {
    const auto data = read_feature_csv(train_input);
    std::ifstream report_in(train_report);
    if (!report_in) throw DataError("cannot open reduction report: " + train_report);
    std::stringstream buf;
    buf << report_in.rdbuf();

    ModelBundle model;
    model.reduction = parse_reduction_report_json(buf.str());
    const Matrix matrix = dataset_matrix(data);
    std::vector<TrafficClass> labels;
    for (const auto& row : data.rows) {
      if (!row.label)
        throw DataError("train needs labeled rows for cluster labeling");
      labels.push_back(*row.label);
    }
    if (!train_seed_given) train_fcm.seed = global_seed;
    const auto [c_lo, c_hi] = parse_range(train_range);
    std::vector<int> candidates;
    for (int c = c_lo; c <= std::min<int>(c_hi, static_cast<int>(matrix.rows()) - 1); ++c)
      candidates.push_back(c);
    auto selection = select_c(matrix, candidates, train_fcm, train_select_iters);
    std::cout << "c    J_m          WCSD         FPC      silhouette\n";
    for (const auto& row : selection.table)
      std::cout << row.c << "    " << row.objective << "    " << row.wcsd << "    "
                << row.fpc << "    " << row.mean_silhouette << "\n";
    std::cout << "selected c = " << selection.best_c << "\n";
    model.clusters = std::move(selection.best_model);
    label_clusters(model.clusters, labels);
    model.clusters.quality.wcsd = wcsd(model.clusters, matrix);
    model.clusters.quality.fpc = fpc(model.clusters);
    model.clusters.quality.mean_silhouette =
        silhouette(matrix, model.clusters.hard_assignment()).mean;
    model.rules = rules_from_clusters(model.clusters, matrix, data.feature_names,
                                      train_spread);
    save_model(train_model, model);
    std::cout << "wrote model with " << model.rules.rules.size() << " rules to "
              << train_model << "\n";
  } else if (predict_cmd->parsed()) {
    const auto model = load_model(predict_model);
    Dataset reduced;
    const fs::path input_path(predict_input);
    if (input_path.extension() == ".jsonl" || input_path.extension() == ".json") {
      const auto parsed = parse_flow_log(predict_input);
      reduced = apply_reduction(extract_all(parsed.log, predict_window), model.reduction);
    } else {
      const auto data = read_feature_csv(predict_input);
      if (data.feature_names == model.reduction.kept)
        reduced = data;  // already reduced and normalized
      else
        reduced = apply_reduction(data, model.reduction);
    }
    std::vector<PredictionRow> rows;
    rows.reserve(reduced.rows.size());
    for (const auto& fv : reduced.rows) {
      const auto start = std::chrono::steady_clock::now();
      const auto inference = infer(fv.values, model.rules);
      const auto decision = classify_binary(inference);
      const double us = std::chrono::duration<double, std::micro>(
                            std::chrono::steady_clock::now() - start)
                            .count();
      rows.push_back({fv.key, fv.label, inference.score, inference.predicted,
                      decision.label, decision.degree_of_maliciousness,
                      inference.class_confidence, us});
    }
    write_predictions_csv(predict_output, rows);
    std::cout << "predicted " << rows.size() << " flows to " << predict_output << "\n";
  } else if (evaluate_cmd->parsed()) {
    const auto rows = read_predictions_csv(eval_predictions);
    const auto eval = evaluate_predictions(rows);
    std::ofstream out(eval_metrics);
    if (!out) throw DataError("cannot write metrics: " + eval_metrics);
    out << metrics_json(eval);
    if (!eval_cm_binary.empty()) write_confusion_csv(eval_cm_binary, eval.binary_cm);
    if (!eval_cm_multi.empty()) write_confusion_csv(eval_cm_multi, eval.multiclass_cm);
    std::cout << "evaluated " << eval.evaluated << " predictions\n";
    if (eval.binary_metrics.binary_accuracy)
      std::cout << "binary accuracy " << *eval.binary_metrics.binary_accuracy
                << ", fpr "
                << (eval.binary_metrics.false_positive_rate
                        ? *eval.binary_metrics.false_positive_rate
                        : 0.0)
                << "\n";
    std::cout << "median latency " << eval.latency.median_us << " us (p95 "
              << eval.latency.p95_us << " us)\n";
  } else if (run_cmd->parsed()) {
    PipelineConfig config;
    if (!global_config.empty()) config = PipelineConfig::from_file(global_config);
    if (app.count("--seed") > 0) config.seed = global_seed;
    if (!global_out_dir.empty()) config.out_dir = global_out_dir;
    const auto result = run_pipeline(config);
    std::cout << "pipeline finished; artifacts in " << result.out_dir.string() << "\n";
    if (result.evaluation.binary_metrics.binary_accuracy)
      std::cout << "binary accuracy "
                << *result.evaluation.binary_metrics.binary_accuracy << ", fpr "
                << (result.evaluation.binary_metrics.false_positive_rate
                        ? *result.evaluation.binary_metrics.false_positive_rate
                        : 0.0)
                << ", selected c = " << result.selected_c << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
