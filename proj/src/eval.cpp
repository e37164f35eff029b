#include "hitforge/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "hitforge/csv.hpp"

namespace hitforge::eval {

using nlohmann::json;

ConfusionMatrix confusion(std::span<const int> predictions,
                          std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("confusion: length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("confusion: empty input");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
      throw std::invalid_argument("confusion: entries must be 0/1");
    }
    if (p == 1 && y == 1) ++cm.tp;
    else if (p == 1 && y == 0) ++cm.fp;
    else if (p == 0 && y == 1) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw std::invalid_argument("metrics: empty matrix");
  Metrics out;
  out.accuracy = static_cast<double>(cm.tp + cm.tn) /
                 static_cast<double>(cm.total());
  if (cm.tp + cm.fp > 0) {
    out.precision =
        static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn > 0) {
    out.recall =
        static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  }
  return out;
}

json MetricsReport::to_json() const {
  json doc;
  doc["model"] = model;
  doc["split"] = split;
  doc["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
  doc["accuracy"] = m.accuracy;
  doc["precision"] = m.precision ? json(*m.precision) : json(nullptr);
  doc["recall"] = m.recall ? json(*m.recall) : json(nullptr);
  return doc;
}

MetricsReport MetricsReport::from_json(const json& doc) {
  MetricsReport r;
  r.model = doc.at("model").get<std::string>();
  r.split = doc.at("split").get<std::string>();
  const auto& cm = doc.at("confusion");
  r.cm = {cm.at("tp").get<long long>(), cm.at("fp").get<long long>(),
          cm.at("fn").get<long long>(), cm.at("tn").get<long long>()};
  r.m.accuracy = doc.at("accuracy").get<double>();
  if (!doc.at("precision").is_null()) {
    r.m.precision = doc.at("precision").get<double>();
  }
  if (!doc.at("recall").is_null()) {
    r.m.recall = doc.at("recall").get<double>();
  }
  return r;
}

std::string format_metric(const std::optional<double>& value) {
  if (!value) return "NA";
  return csvio::format_fixed(*value, 4);
}

namespace {

void write_confusion_csv(const std::filesystem::path& path,
                         const ConfusionMatrix& cm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << ",actual_hit,actual_non_hit\n";
  out << "predicted_hit," << cm.tp << ',' << cm.fp << '\n';
  out << "predicted_non_hit," << cm.fn << ',' << cm.tn << '\n';
}

struct BarDatum {
  std::string model;
  std::string split;
  double accuracy;
};

void write_svg(const std::filesystem::path& path,
               const std::vector<BarDatum>& bars,
               const std::vector<std::string>& model_order) {
  // Fixed layout: one group per model, one bar per split inside the group.
  const int bar_w = 34;
  const int gap = 26;
  const int group_w = 2 * bar_w + gap;
  const int margin_left = 60;
  const int margin_bottom = 44;
  const int margin_top = 24;
  const int plot_h = 220;
  const int width =
      margin_left + static_cast<int>(model_order.size()) * group_w + 30;
  const int height = margin_top + plot_h + margin_bottom;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int tick = 0; tick <= 10; tick += 2) {
    const double frac = tick / 10.0;
    const int y = margin_top + plot_h - static_cast<int>(frac * plot_h);
    out << "<line x1=\"" << margin_left << "\" y1=\"" << y << "\" x2=\""
        << width - 10 << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << margin_left - 8 << "\" y=\"" << y + 4
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
        << csvio::format_fixed(frac, 1) << "</text>\n";
  }
  for (std::size_t g = 0; g < model_order.size(); ++g) {
    const std::string& model = model_order[g];
    const int x0 = margin_left + static_cast<int>(g) * group_w + 6;
    int slot = 0;
    for (const char* split : {"val", "test"}) {
      for (const auto& b : bars) {
        if (b.model == model && b.split == split) {
          const int h = static_cast<int>(b.accuracy * plot_h);
          const int x = x0 + slot * bar_w;
          const int y = margin_top + plot_h - h;
          const char* fill = slot == 0 ? "#4878cf" : "#ee854a";
          out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\""
              << bar_w - 6 << "\" height=\"" << h << "\" fill=\"" << fill
              << "\"/>\n";
          out << "<text x=\"" << x + (bar_w - 6) / 2 << "\" y=\"" << y - 4
              << "\" font-size=\"10\" text-anchor=\"middle\" "
                 "font-family=\"sans-serif\">"
              << csvio::format_fixed(b.accuracy, 4) << "</text>\n";
        }
      }
      ++slot;
    }
    out << "<text x=\"" << x0 + bar_w - 3 << "\" y=\""
        << margin_top + plot_h + 18
        << "\" font-size=\"12\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\">"
        << model << "</text>\n";
  }
  out << "<text x=\"" << margin_left << "\" y=\"" << height - 8
      << "\" font-size=\"11\" font-family=\"sans-serif\">"
      << "accuracy by model (blue = val, orange = test)</text>\n";
  out << "</svg>\n";
}

}  // namespace

void emit_report(const std::vector<MetricsReport>& reports,
                 const std::filesystem::path& out_dir) {
  if (reports.empty()) {
    throw std::invalid_argument("emit_report: no reports");
  }
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> model_order;
  std::map<std::pair<std::string, std::string>, const MetricsReport*> by_cell;
  for (const auto& r : reports) {
    if (std::find(model_order.begin(), model_order.end(), r.model) ==
        model_order.end()) {
      model_order.push_back(r.model);
    }
    by_cell[{r.model, r.split}] = &r;
  }

  {
    std::ofstream out(out_dir / "table1.csv", std::ios::binary);
    if (!out) throw DomainError("cannot write table1.csv");
    out << "model,accuracy_test,accuracy_val,precision_test,precision_val,"
           "recall_test,recall_val\n";
    for (const auto& model : model_order) {
      out << model;
      for (const char* metric : {"accuracy", "precision", "recall"}) {
        for (const char* split : {"test", "val"}) {
          const auto it = by_cell.find({model, split});
          std::string cell = "NA";
          if (it != by_cell.end()) {
            const Metrics& m = it->second->m;
            if (std::string(metric) == "accuracy") {
              cell = format_metric(m.accuracy);
            } else if (std::string(metric) == "precision") {
              cell = format_metric(m.precision);
            } else {
              cell = format_metric(m.recall);
            }
          }
          out << ',' << cell;
        }
      }
      out << '\n';
    }
  }

  for (const auto& r : reports) {
    write_confusion_csv(
        out_dir / ("confusion_" + r.model + "_" + r.split + ".csv"), r.cm);
  }

  std::vector<BarDatum> bars;
  {
    std::ofstream out(out_dir / "accuracy_bars.tsv", std::ios::binary);
    if (!out) throw DomainError("cannot write accuracy_bars.tsv");
    out << "model\tsplit\taccuracy\n";
    for (const auto& r : reports) {
      out << r.model << '\t' << r.split << '\t'
          << csvio::format_fixed(r.m.accuracy, 4) << '\n';
      bars.push_back({r.model, r.split, r.m.accuracy});
    }
  }

  write_svg(out_dir / "accuracy_bars.svg", bars, model_order);
}

}  // namespace hitforge::eval
