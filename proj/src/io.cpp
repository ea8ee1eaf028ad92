#include "iotguard/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iotguard/errors.hpp"

namespace iotguard {

using nlohmann::json;

namespace {

// 17 significant digits: shortest text that round-trips any double exactly
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  // fields in this repo never contain commas or quotes
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw DataError(std::string("trailing characters in ") + what);
    return v;
  } catch (const std::exception&) {
    throw DataError(std::string("cannot parse ") + what + ": '" + s + "'");
  }
}

}  // namespace

void write_feature_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv: " + path.string());
  out << "src_ip,dst_ip,timestamp";
  for (const auto& name : data.feature_names) out << ',' << name;
  out << ",label\n";
  for (const auto& row : data.rows) {
    out << row.key.src_ip << ',' << row.key.dst_ip << ',' << fmt_double(row.key.timestamp);
    for (const double v : row.values) out << ',' << fmt_double(v);
    out << ',' << (row.label ? class_name(*row.label) : std::string()) << '\n';
  }
}

Dataset read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open csv: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty csv: " + path.string());
  auto header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "src_ip" || header[1] != "dst_ip" ||
      header[2] != "timestamp" || header.back() != "label")
    throw DataError("unexpected feature csv header in " + path.string());

  Dataset data;
  data.feature_names.assign(header.begin() + 3, header.end() - 1);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": wrong field count");
    FeatureVector row;
    row.key.src_ip = fields[0];
    row.key.dst_ip = fields[1];
    row.key.timestamp = parse_double(fields[2], "timestamp");
    row.values.reserve(data.feature_names.size());
    for (std::size_t i = 3; i + 1 < fields.size(); ++i)
      row.values.push_back(parse_double(fields[i], "feature value"));
    if (!fields.back().empty()) row.label = class_from_name(fields.back());
    data.rows.push_back(std::move(row));
  }
  return data;
}

namespace {

json triangle_json(const TriangularSet& t) {
  return json{{"a", t.a}, {"b", t.b}, {"c", t.c}};
}

TriangularSet triangle_from_json(const json& j) {
  return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>()};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw DataError("expected a matrix (array of arrays)");
  if (j.empty()) return {};
  Matrix m(j.size(), j.front().size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    if (row.size() != m.cols()) throw DataError("ragged matrix rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

json reduction_json(const ReductionReport& report) {
  json dropped = json::array();
  for (const auto& d : report.dropped)
    dropped.push_back(json{{"name", d.name}, {"reason", d.reason_string()}});
  json scalers = json::array();
  for (std::size_t i = 0; i < report.kept.size(); ++i)
    scalers.push_back(json{{"name", report.kept[i]},
                           {"min", report.scalers[i].min},
                           {"max", report.scalers[i].max}});
  return json{{"kept", report.kept}, {"dropped", dropped}, {"scalers", scalers}};
}

ReductionReport reduction_from_json(const json& j) {
  ReductionReport report;
  report.kept = j.at("kept").get<std::vector<std::string>>();
  for (const auto& d : j.at("dropped")) {
    DroppedFeature df;
    df.name = d.at("name").get<std::string>();
    const std::string reason = d.at("reason").get<std::string>();
    if (reason == "low_variance") {
      df.reason = DropReason::LowVariance;
    } else if (reason == "overlapping_deviation") {
      df.reason = DropReason::OverlappingDeviation;
    } else if (reason.rfind("correlated_with:", 0) == 0) {
      df.reason = DropReason::Correlated;
      df.correlated_with = reason.substr(std::string("correlated_with:").size());
    } else {
      throw DataError("unknown drop reason: " + reason);
    }
    report.dropped.push_back(std::move(df));
  }
  for (const auto& s : j.at("scalers"))
    report.scalers.push_back({s.at("min").get<double>(), s.at("max").get<double>()});
  if (report.scalers.size() != report.kept.size())
    throw DataError("scaler/kept count mismatch in reduction report");
  return report;
}

}  // namespace

std::string reduction_report_json(const ReductionReport& report) {
  return reduction_json(report).dump(2);
}

void save_reduction_report(const std::filesystem::path& path,
                           const ReductionReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path.string());
  out << reduction_report_json(report) << '\n';
}

ReductionReport parse_reduction_report_json(const std::string& text) {
  try {
    return reduction_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid reduction report: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelBundle& model) {
  json clusters;
  clusters["c"] = model.clusters.c;
  clusters["m"] = model.clusters.m;
  clusters["objective"] = model.clusters.objective;
  clusters["centers"] = matrix_json(model.clusters.centers);
  clusters["memberships"] = matrix_json(model.clusters.memberships);
  json labels = json::array();
  for (const auto cls : model.clusters.labels) labels.push_back(class_name(cls));
  clusters["labels"] = labels;
  clusters["quality"] = json{{"wcsd", model.clusters.quality.wcsd},
                             {"fpc", model.clusters.quality.fpc},
                             {"mean_silhouette", model.clusters.quality.mean_silhouette}};

  json rules = json::array();
  for (const auto& rule : model.rules.rules) {
    json antecedents = json::array();
    for (const auto& t : rule.antecedents) antecedents.push_back(triangle_json(t));
    rules.push_back(json{{"class", class_name(rule.cls)},
                         {"consequent", triangle_json(rule.consequent)},
                         {"antecedents", antecedents},
                         {"defuzzified", rule.defuzzified_antecedent}});
  }

  json doc;
  doc["format"] = "iotguard-model/1";
  doc["reduction"] = reduction_json(model.reduction);
  doc["clusters"] = clusters;
  doc["rules"] = json{{"spread", model.rules.spread},
                      {"feature_names", model.rules.feature_names},
                      {"rules", rules}};

  std::ofstream out(path);
  if (!out) throw DataError("cannot write model: " + path.string());
  out << doc.dump(2) << '\n';
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid model json: ") + e.what());
  }
  if (doc.value("format", "") != "iotguard-model/1")
    throw DataError("unsupported model format");

  ModelBundle model;
  model.reduction = reduction_from_json(doc.at("reduction"));

  const auto& clusters = doc.at("clusters");
  model.clusters.c = clusters.at("c").get<int>();
  model.clusters.m = clusters.at("m").get<double>();
  model.clusters.objective = clusters.at("objective").get<double>();
  model.clusters.centers = matrix_from_json(clusters.at("centers"));
  model.clusters.memberships = matrix_from_json(clusters.at("memberships"));
  for (const auto& name : clusters.at("labels"))
    model.clusters.labels.push_back(class_from_name(name.get<std::string>()));
  model.clusters.quality.wcsd = clusters.at("quality").at("wcsd").get<double>();
  model.clusters.quality.fpc = clusters.at("quality").at("fpc").get<double>();
  model.clusters.quality.mean_silhouette =
      clusters.at("quality").at("mean_silhouette").get<double>();

  const auto& rules = doc.at("rules");
  model.rules.spread = rules.at("spread").get<double>();
  model.rules.feature_names = rules.at("feature_names").get<std::vector<std::string>>();
  for (const auto& r : rules.at("rules")) {
    FuzzyRule rule;
    rule.cls = class_from_name(r.at("class").get<std::string>());
    rule.consequent = triangle_from_json(r.at("consequent"));
    for (const auto& t : r.at("antecedents"))
      rule.antecedents.push_back(triangle_from_json(t));
    rule.defuzzified_antecedent = r.at("defuzzified").get<std::vector<double>>();
    model.rules.rules.push_back(std::move(rule));
  }
  return model;
}

void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<PredictionRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write predictions: " + path.string());
  out << "src_ip,dst_ip,timestamp,label,o_star,predicted_class,binary_label,"
         "degree_of_maliciousness";
  for (const auto cls : all_classes()) out << ",conf_" << class_name(cls);
  out << ",latency_us\n";
  for (const auto& row : rows) {
    out << row.key.src_ip << ',' << row.key.dst_ip << ','
        << fmt_double(row.key.timestamp) << ','
        << (row.actual ? class_name(*row.actual) : std::string()) << ','
        << fmt_double(row.o_star) << ',' << class_name(row.predicted) << ','
        << binary_name(row.binary) << ',' << fmt_double(row.degree_of_maliciousness);
    for (const double conf : row.class_confidence) out << ',' << fmt_double(conf);
    out << ',' << fmt_double(row.latency_us) << '\n';
  }
}

std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty predictions csv");
  const auto header = split_csv_line(line);
  const std::size_t expected = 9 + kClassCount;
  if (header.size() != expected || header[0] != "src_ip")
    throw DataError("unexpected predictions csv header");

  std::vector<PredictionRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected) throw DataError("wrong predictions field count");
    PredictionRow row;
    row.key.src_ip = fields[0];
    row.key.dst_ip = fields[1];
    row.key.timestamp = parse_double(fields[2], "timestamp");
    if (!fields[3].empty()) row.actual = class_from_name(fields[3]);
    row.o_star = parse_double(fields[4], "o_star");
    row.predicted = class_from_name(fields[5]);
    row.binary = fields[6] == "benign" ? BinaryLabel::Benign : BinaryLabel::Malicious;
    row.degree_of_maliciousness = parse_double(fields[7], "degree");
    for (int i = 0; i < kClassCount; ++i)
      row.class_confidence[static_cast<std::size_t>(i)] =
          parse_double(fields[8 + static_cast<std::size_t>(i)], "confidence");
    row.latency_us = parse_double(fields.back(), "latency_us");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace iotguard
