#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hiaug/taxonomy.hpp"

namespace hiaug {

struct ClassOutcome {
  std::string code;
  std::int64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::int64_t support = 0;  // gold positives = tp + fn
};

struct LevelOutcome {
  int level = 0;
  std::int64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct EvalReport {
  double micro_f1 = 0.0, macro_f1 = 0.0;
  double micro_precision = 0.0, micro_recall = 0.0;
  std::vector<ClassOutcome> per_class;  // sorted by code; zero-support included
  std::vector<LevelOutcome> per_level;
  std::int64_t n_docs = 0;
  json config_echo = json::object();

  json to_json() const {
    json classes = json::array();
    for (const auto& c : per_class)
      classes.push_back(json{{"code", c.code},
                             {"tp", c.tp},
                             {"fp", c.fp},
                             {"fn", c.fn},
                             {"precision", c.precision},
                             {"recall", c.recall},
                             {"f1", c.f1},
                             {"support", c.support}});
    json levels = json::array();
    for (const auto& l : per_level)
      levels.push_back(json{{"level", l.level},
                            {"tp", l.tp},
                            {"fp", l.fp},
                            {"fn", l.fn},
                            {"precision", l.precision},
                            {"recall", l.recall},
                            {"f1", l.f1}});
    return json{{"micro_f1", micro_f1},
                {"macro_f1", macro_f1},
                {"micro_precision", micro_precision},
                {"micro_recall", micro_recall},
                {"n_docs", n_docs},
                {"per_class", std::move(classes)},
                {"per_level", std::move(levels)},
                {"config", config_echo}};
  }

  static EvalReport from_json(const json& j) {
    EvalReport r;
    r.micro_f1 = j.at("micro_f1").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.micro_precision = j.at("micro_precision").get<double>();
    r.micro_recall = j.at("micro_recall").get<double>();
    r.n_docs = j.at("n_docs").get<std::int64_t>();
    for (const auto& c : j.at("per_class"))
      r.per_class.push_back(ClassOutcome{
          c.at("code").get<std::string>(), c.at("tp").get<std::int64_t>(),
          c.at("fp").get<std::int64_t>(), c.at("fn").get<std::int64_t>(),
          c.at("precision").get<double>(), c.at("recall").get<double>(),
          c.at("f1").get<double>(), c.at("support").get<std::int64_t>()});
    if (j.contains("per_level"))
      for (const auto& l : j.at("per_level"))
        r.per_level.push_back(LevelOutcome{
            l.at("level").get<int>(), l.at("tp").get<std::int64_t>(),
            l.at("fp").get<std::int64_t>(), l.at("fn").get<std::int64_t>(),
            l.at("precision").get<double>(), l.at("recall").get<double>(),
            l.at("f1").get<double>()});
    if (j.contains("config")) r.config_echo = j.at("config");
    return r;
  }
};

namespace detail {

inline double safe_div(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double f1_of(double p, double r) {
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace detail

/// Multi-label precision/recall/F1 over closure label sets. Micro pools
/// TP/FP/FN across classes; macro averages per-class F1 over classes with
/// gold support >= 1 (zero-support classes stay in the table but not in
/// the average); per-level rows pool within each taxonomy level.
inline EvalReport evaluate(const std::vector<std::set<std::string>>& gold,
                           const std::vector<std::set<std::string>>& pred,
                           const std::vector<std::string>& classes,
                           const Taxonomy& taxonomy) {
  if (gold.size() != pred.size())
    throw ValidationError("evaluate: gold and pred differ in length");
  if (classes.empty()) throw ValidationError("evaluate: empty class set");

  std::set<std::string> known(classes.begin(), classes.end());
  for (const auto& labels : gold)
    for (const auto& code : labels)
      if (!known.count(code))
        throw ValidationError("evaluate: unknown code in gold labels: " + code);
  for (const auto& labels : pred)
    for (const auto& code : labels)
      if (!known.count(code))
        throw ValidationError("evaluate: unknown code in predictions: " + code);

  EvalReport report;
  report.n_docs = static_cast<std::int64_t>(gold.size());

  std::vector<std::string> sorted_classes(known.begin(), known.end());
  std::int64_t pool_tp = 0, pool_fp = 0, pool_fn = 0;
  double macro_sum = 0.0;
  std::int64_t macro_n = 0;
  std::map<int, LevelOutcome> levels;

  for (const auto& code : sorted_classes) {
    ClassOutcome c;
    c.code = code;
    for (std::size_t d = 0; d < gold.size(); ++d) {
      const bool in_gold = gold[d].count(code) > 0;
      const bool in_pred = pred[d].count(code) > 0;
      if (in_gold && in_pred) ++c.tp;
      if (!in_gold && in_pred) ++c.fp;
      if (in_gold && !in_pred) ++c.fn;
    }
    c.support = c.tp + c.fn;
    c.precision = detail::safe_div(c.tp, c.tp + c.fp);
    c.recall = detail::safe_div(c.tp, c.tp + c.fn);
    c.f1 = detail::f1_of(c.precision, c.recall);
    pool_tp += c.tp;
    pool_fp += c.fp;
    pool_fn += c.fn;
    if (c.support >= 1) {
      macro_sum += c.f1;
      ++macro_n;
    }
    if (taxonomy.contains(code)) {
      auto& lv = levels[taxonomy.level(code)];
      lv.tp += c.tp;
      lv.fp += c.fp;
      lv.fn += c.fn;
    }
    report.per_class.push_back(std::move(c));
  }

  report.micro_precision = detail::safe_div(pool_tp, pool_tp + pool_fp);
  report.micro_recall = detail::safe_div(pool_tp, pool_tp + pool_fn);
  report.micro_f1 = detail::f1_of(report.micro_precision, report.micro_recall);
  report.macro_f1 = macro_n == 0 ? 0.0 : macro_sum / static_cast<double>(macro_n);

  for (auto& [level, lv] : levels) {
    lv.level = level;
    lv.precision = detail::safe_div(lv.tp, lv.tp + lv.fp);
    lv.recall = detail::safe_div(lv.tp, lv.tp + lv.fn);
    lv.f1 = detail::f1_of(lv.precision, lv.recall);
    report.per_level.push_back(lv);
  }
  report.config_echo =
      json{{"macro_zero_support", "excluded"}, {"n_classes", sorted_classes.size()}};
  return report;
}

// -------------------------------------------------------------------------
// Baseline-vs-augmented deltas.

struct MetricDelta {
  std::string metric;
  double baseline = 0.0, augmented = 0.0, absolute = 0.0;
  std::optional<double> relative;  // absent when the baseline is 0
};

struct ClassDelta {
  std::string code;
  std::int64_t support = 0;  // gold support in the baseline report
  double f1_baseline = 0.0, f1_augmented = 0.0, f1_delta = 0.0;
  double precision_delta = 0.0, recall_delta = 0.0;
};

struct DeltaReport {
  std::vector<MetricDelta> metrics;
  std::vector<ClassDelta> per_class;  // sorted by support ascending

  json to_json() const {
    json ms = json::array();
    for (const auto& m : metrics) {
      json row{{"metric", m.metric},
               {"baseline", m.baseline},
               {"augmented", m.augmented},
               {"absolute", m.absolute}};
      row["relative"] = m.relative ? json(*m.relative) : json(nullptr);
      ms.push_back(std::move(row));
    }
    json cs = json::array();
    for (const auto& c : per_class)
      cs.push_back(json{{"code", c.code},
                        {"support", c.support},
                        {"f1_baseline", c.f1_baseline},
                        {"f1_augmented", c.f1_augmented},
                        {"f1_delta", c.f1_delta},
                        {"precision_delta", c.precision_delta},
                        {"recall_delta", c.recall_delta}});
    return json{{"metrics", std::move(ms)}, {"per_class", std::move(cs)}};
  }
};

/// Per-metric absolute and relative deltas plus a per-class F1 delta table
/// with minority (lowest-support) classes first.
inline DeltaReport improvement(const EvalReport& baseline,
                               const EvalReport& augmented) {
  if (baseline.per_class.size() != augmented.per_class.size())
    throw ValidationError("improvement: reports cover different class sets");
  for (std::size_t i = 0; i < baseline.per_class.size(); ++i)
    if (baseline.per_class[i].code != augmented.per_class[i].code)
      throw ValidationError("improvement: reports cover different class sets");
  if (baseline.n_docs != augmented.n_docs)
    throw ValidationError("improvement: reports evaluate different splits");

  DeltaReport delta;
  auto add_metric = [&](const std::string& name, double base, double aug) {
    MetricDelta m;
    m.metric = name;
    m.baseline = base;
    m.augmented = aug;
    m.absolute = aug - base;
    if (base != 0.0) m.relative = (aug - base) / base;
    delta.metrics.push_back(std::move(m));
  };
  add_metric("micro_f1", baseline.micro_f1, augmented.micro_f1);
  add_metric("macro_f1", baseline.macro_f1, augmented.macro_f1);
  add_metric("micro_precision", baseline.micro_precision,
             augmented.micro_precision);
  add_metric("micro_recall", baseline.micro_recall, augmented.micro_recall);

  for (std::size_t i = 0; i < baseline.per_class.size(); ++i) {
    const auto& b = baseline.per_class[i];
    const auto& a = augmented.per_class[i];
    ClassDelta c;
    c.code = b.code;
    c.support = b.support;
    c.f1_baseline = b.f1;
    c.f1_augmented = a.f1;
    c.f1_delta = a.f1 - b.f1;
    c.precision_delta = a.precision - b.precision;
    c.recall_delta = a.recall - b.recall;
    delta.per_class.push_back(std::move(c));
  }
  std::sort(delta.per_class.begin(), delta.per_class.end(),
            [](const ClassDelta& x, const ClassDelta& y) {
              if (x.support != y.support) return x.support < y.support;
              return x.code < y.code;
            });
  return delta;
}

inline std::string format_delta_table(const DeltaReport& delta) {
  std::ostringstream out;
  out << std::left << std::setw(18) << "metric" << std::right << std::setw(10)
      << "baseline" << std::setw(11) << "augmented" << std::setw(10) << "abs"
      << std::setw(10) << "rel" << '\n';
  out << std::string(59, '-') << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& m : delta.metrics) {
    out << std::left << std::setw(18) << m.metric << std::right << std::setw(10)
        << m.baseline << std::setw(11) << m.augmented << std::setw(10)
        << std::showpos << m.absolute << std::noshowpos;
    if (m.relative)
      out << std::setw(9) << std::showpos << (*m.relative * 100.0)
          << std::noshowpos << '%';
    else
      out << std::setw(10) << "n/a";
    out << '\n';
  }
  out << '\n'
      << std::left << std::setw(12) << "class" << std::right << std::setw(9)
      << "support" << std::setw(9) << "f1 base" << std::setw(9) << "f1 aug"
      << std::setw(10) << "f1 delta" << '\n';
  out << std::string(49, '-') << '\n';
  for (const auto& c : delta.per_class)
    out << std::left << std::setw(12) << c.code << std::right << std::setw(9)
        << c.support << std::setw(9) << c.f1_baseline << std::setw(9)
        << c.f1_augmented << std::setw(10) << std::showpos << c.f1_delta
        << std::noshowpos << '\n';
  return out.str();
}

}  // namespace hiaug
