#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hiaug/corpus.hpp"

namespace hiaug {

struct SamplerConfig {
  double lambda = 0.0;      // ignored when lambda_auto is set
  bool lambda_auto = true;  // auto = mean of participating class counts
  std::int64_t total_budget = 0;
  std::optional<std::set<std::string>> class_filter;  // default: taxonomy leaves
  CountingMode mode = CountingMode::closure;

  void check() const {
    if (!lambda_auto && !(lambda > 0.0))
      throw ConfigError("lambda must be positive");
    if (total_budget < 1) throw ConfigError("total budget must be at least 1");
  }
};

struct PlanRow {
  std::string code;
  std::int64_t count = 0;   // n_c
  double score = 0.0;       // s_c
  std::int64_t alloc = 0;   // f_c
};

struct MinorityPlan {
  double lambda = 0.0;
  std::int64_t total_budget = 0;
  CountingMode mode = CountingMode::closure;
  std::vector<PlanRow> rows;  // sorted by code

  json to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows)
      rows_json.push_back(json{{"code", r.code},
                               {"n", r.count},
                               {"score", r.score},
                               {"alloc", r.alloc}});
    return json{{"lambda", lambda},
                {"total", total_budget},
                {"mode", to_string(mode)},
                {"rows", std::move(rows_json)}};
  }

  static MinorityPlan from_json(const json& j) {
    MinorityPlan plan;
    plan.lambda = j.at("lambda").get<double>();
    plan.total_budget = j.at("total").get<std::int64_t>();
    plan.mode = counting_mode_from(j.value("mode", "closure"));
    for (const auto& r : j.at("rows"))
      plan.rows.push_back(PlanRow{r.at("code").get<std::string>(),
                                  r.at("n").get<std::int64_t>(),
                                  r.at("score").get<double>(),
                                  r.at("alloc").get<std::int64_t>()});
    return plan;
  }
};

/// Normalized exponential of negative class counts,
/// s_c = exp(-n_c/lambda) / sum_i exp(-n_i/lambda), evaluated with
/// max-exponent subtraction so billion-scale counts cannot overflow.
/// Accumulation runs in sorted-code order, keeping results independent of
/// the caller's container ordering.
inline std::map<std::string, double> minority_scores(
    const std::map<std::string, std::int64_t>& counts, double lambda) {
  if (counts.empty()) throw ConfigError("minority_scores: empty class set");
  if (!(lambda > 0.0)) throw ConfigError("minority_scores: lambda must be positive");

  std::int64_t min_count = std::numeric_limits<std::int64_t>::max();
  for (const auto& [code, n] : counts) {
    if (n < 0)
      throw ValidationError("minority_scores: negative count for class " + code);
    min_count = std::min(min_count, n);
  }

  // Integer subtraction keeps the shifted exponent bit-exact under a
  // constant shift of all counts.
  std::map<std::string, double> scores;
  double total = 0.0;
  for (const auto& [code, n] : counts) {
    double shifted = std::exp(static_cast<double>(min_count - n) / lambda);
    scores[code] = shifted;
    total += shifted;
  }
  for (auto& [code, s] : scores) s /= total;
  return scores;
}

/// Integer apportionment of T by largest remainder: floor(T*s_c) each, then
/// leftover units to the largest fractional parts, ties broken by larger
/// score and then lexicographic code.
inline std::map<std::string, std::int64_t> allocate_budget(
    const std::map<std::string, double>& scores, std::int64_t total_budget) {
  if (scores.empty()) throw ConfigError("allocate_budget: empty class set");
  if (total_budget < 0) throw ConfigError("allocate_budget: negative budget");
  double sum = 0.0;
  for (const auto& [code, s] : scores) {
    if (s < 0.0) throw ConfigError("allocate_budget: negative score for " + code);
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("allocate_budget: scores must sum to 1 (got " +
                      std::to_string(sum) + ")");

  struct Part {
    std::string code;
    double fraction;
    double score;
  };
  std::map<std::string, std::int64_t> alloc;
  std::vector<Part> parts;
  std::int64_t assigned = 0;
  for (const auto& [code, s] : scores) {
    double raw = static_cast<double>(total_budget) * s;
    auto base = static_cast<std::int64_t>(std::floor(raw));
    alloc[code] = base;
    assigned += base;
    parts.push_back(Part{code, raw - static_cast<double>(base), s});
  }
  std::int64_t remainder = total_budget - assigned;
  std::sort(parts.begin(), parts.end(), [](const Part& a, const Part& b) {
    if (a.fraction != b.fraction) return a.fraction > b.fraction;
    if (a.score != b.score) return a.score > b.score;
    return a.code < b.code;
  });
  for (std::int64_t i = 0; i < remainder; ++i)
    ++alloc[parts[static_cast<std::size_t>(i)].code];
  return alloc;
}

/// Resolves the participating class set: the explicit filter when given,
/// otherwise the taxonomy leaves.
inline std::set<std::string> participating_classes(const Taxonomy& t,
                                                   const SamplerConfig& cfg) {
  if (cfg.class_filter) {
    if (cfg.class_filter->empty())
      throw ConfigError("class filter must not be empty");
    for (const auto& code : *cfg.class_filter)
      if (!t.contains(code))
        throw ValidationError("class filter names unknown code " + code);
    return *cfg.class_filter;
  }
  auto leaves = t.leaves();
  return {leaves.begin(), leaves.end()};
}

inline double resolve_lambda(const SamplerConfig& cfg,
                             const std::map<std::string, std::int64_t>& counts) {
  if (!cfg.lambda_auto) return cfg.lambda;
  double mean = 0.0;
  for (const auto& [code, n] : counts) mean += static_cast<double>(n);
  mean /= static_cast<double>(counts.size());
  return mean > 0.0 ? mean : 1.0;
}

/// count_per_class -> minority_scores -> allocate_budget over the
/// participating classes.
inline MinorityPlan build_plan(const LabeledCorpus& corpus, const Taxonomy& t,
                               const SamplerConfig& cfg) {
  cfg.check();
  const auto participating = participating_classes(t, cfg);
  const ClassCounts all_counts = count_per_class(corpus, t, cfg.mode);

  std::map<std::string, std::int64_t> counts;
  for (const auto& code : participating) counts[code] = all_counts.counts.at(code);

  MinorityPlan plan;
  plan.lambda = resolve_lambda(cfg, counts);
  plan.total_budget = cfg.total_budget;
  plan.mode = cfg.mode;

  const auto scores = minority_scores(counts, plan.lambda);
  const auto alloc = allocate_budget(scores, cfg.total_budget);
  for (const auto& [code, n] : counts)
    plan.rows.push_back(PlanRow{code, n, scores.at(code), alloc.at(code)});
  return plan;
}

}  // namespace hiaug
