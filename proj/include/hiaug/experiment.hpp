#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hiaug/augment.hpp"
#include "hiaug/classifier.hpp"
#include "hiaug/metrics.hpp"

namespace hiaug {

enum class BackendKind { mock, http };

inline BackendKind backend_kind_from(const std::string& s) {
  if (s == "mock") return BackendKind::mock;
  if (s == "http") return BackendKind::http;
  throw ConfigError("unknown backend '" + s + "' (expected mock|http)");
}

struct ExperimentConfig {
  std::string taxonomy_path;
  std::string corpus_path;
  std::string keywords_path;  // optional; empty = keyword-free prompts
  std::string out_dir;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool leaves_only_eval = false;

  SamplerConfig sampler;
  PromptConfig prompt;
  TrainConfig train;
  BatchOptions batch;
  BackendKind backend = BackendKind::mock;
  EndpointConfig endpoint;
};

/// Identifies a run by its semantic configuration plus the content of the
/// input files; output locations deliberately stay out of the hash so two
/// runs into different directories produce identical artifacts.
inline std::string experiment_config_hash(const ExperimentConfig& cfg) {
  HashBuilder h;
  h.add_u64(fnv1a64(read_file(cfg.taxonomy_path)));
  h.add_u64(fnv1a64(read_file(cfg.corpus_path)));
  h.add_u64(cfg.keywords_path.empty() ? 0
                                      : fnv1a64(read_file(cfg.keywords_path)));
  h.add_double(cfg.test_fraction);
  h.add_u64(cfg.seed);
  h.add_u64(cfg.leaves_only_eval ? 1 : 0);
  h.add_u64(cfg.sampler.lambda_auto ? 1 : 0);
  h.add_double(cfg.sampler.lambda);
  h.add_i64(cfg.sampler.total_budget);
  h.add(to_string(cfg.sampler.mode));
  if (cfg.sampler.class_filter)
    for (const auto& code : *cfg.sampler.class_filter) h.add(code);
  h.add_i64(cfg.prompt.keywords_per_prompt);
  h.add_i64(cfg.prompt.lengths.title_max_words);
  h.add_i64(cfg.prompt.lengths.abstract_min_words);
  h.add_i64(cfg.prompt.lengths.abstract_max_words);
  h.add(cfg.prompt.language_style);
  for (const auto& rule : cfg.prompt.format_rules) h.add(rule);
  h.add_i64(cfg.train.epochs);
  h.add_double(cfg.train.lr);
  h.add_double(cfg.train.l2);
  h.add_double(cfg.train.threshold);
  h.add_i64(cfg.train.min_df);
  h.add(cfg.backend == BackendKind::mock ? "mock" : "http");
  if (cfg.backend == BackendKind::http) {
    // endpoint settings only matter when a live model is in the loop
    h.add(cfg.endpoint.model_name);
    h.add_double(cfg.endpoint.temperature);
  }
  return hex16(h.digest());
}

struct ExperimentResult {
  std::string config_hash;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  EvalReport baseline;
  EvalReport augmented;
  DeltaReport delta;
  AugmentRun run;
};

namespace detail {

/// Prefixes any failure with the experiment stage it happened in, keeping
/// the error category (and so the exit code) intact.
template <typename F>
auto with_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("stage ") + name + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("stage ") + name + ": " + e.what());
  } catch (const BackendError& e) {
    throw BackendError(std::string("stage ") + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + name + ": " + e.what());
  }
}

}  // namespace detail

/// Closure-label evaluation of a trained model on a held-out corpus over
/// the full node set (or leaves only).
inline EvalReport evaluate_model(const HierarchicalModel& model,
                                 const LabeledCorpus& test, const Taxonomy& t,
                                 double threshold, bool leaves_only) {
  std::vector<std::string> classes;
  if (leaves_only) {
    classes = t.leaves();
  } else {
    classes = t.codes();
  }
  std::set<std::string> class_set(classes.begin(), classes.end());

  std::vector<std::set<std::string>> gold, pred;
  gold.reserve(test.size());
  pred.reserve(test.size());
  for (const auto& p : test) {
    std::set<std::string> g, q;
    for (const auto& code : label_closure(p, t))
      if (class_set.count(code)) g.insert(code);
    for (const auto& code : predict(model, p.abstract, threshold))
      if (class_set.count(code)) q.insert(code);
    gold.push_back(std::move(g));
    pred.push_back(std::move(q));
  }
  auto report = evaluate(gold, pred, classes, t);
  report.config_echo["node_set"] = leaves_only ? "leaves" : "all";
  report.config_echo["threshold"] = threshold;
  return report;
}

/// split -> train baseline -> eval -> augment the train split -> retrain ->
/// eval -> delta. Writes the full artifact set under out_dir; with the mock
/// backend and a fixed seed the whole set is byte-reproducible.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const auto taxonomy =
      detail::with_stage("load-taxonomy", [&] { return load_taxonomy_file(cfg.taxonomy_path); });
  const auto corpus = detail::with_stage(
      "load-corpus", [&] { return load_corpus_file(cfg.corpus_path, taxonomy); });
  KeywordTable keywords;
  if (!cfg.keywords_path.empty())
    keywords = detail::with_stage("load-keywords", [&] {
      return load_keyword_table_file(cfg.keywords_path, &taxonomy);
    });

  ExperimentResult result;
  result.config_hash = experiment_config_hash(cfg);
  ensure_dir(cfg.out_dir);
  const auto artifact = [&](const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
  };
  const json meta{{"config_hash", result.config_hash}, {"seed", cfg.seed}};
  auto with_meta = [&](json j) {
    j["config_hash"] = result.config_hash;
    j["seed"] = cfg.seed;
    return j;
  };

  auto parts = detail::with_stage("split", [&] {
    return split(corpus, cfg.test_fraction, derive_seed(cfg.seed, "split"),
                 taxonomy);
  });
  result.n_train = parts.train.size();
  result.n_test = parts.test.size();

  auto baseline_model = detail::with_stage(
      "train-baseline", [&] { return train(parts.train, taxonomy, cfg.train); });
  result.baseline = detail::with_stage("eval-baseline", [&] {
    return evaluate_model(baseline_model, parts.test, taxonomy,
                                  cfg.train.threshold, cfg.leaves_only_eval);
  });
  detail::with_stage("write-baseline", [&] {
    save_model_file(baseline_model, artifact("model_baseline.bin"),
                    result.config_hash, cfg.seed);
    write_file(artifact("report_baseline.json"),
               with_meta(result.baseline.to_json()).dump(2) + "\n");
  });

  std::unique_ptr<GenerationBackend> backend;
  if (cfg.backend == BackendKind::mock) {
    backend = std::make_unique<MockBackend>(parts.train, taxonomy);
  } else {
    EndpointConfig endpoint = cfg.endpoint;
    if (endpoint.api_key.empty()) endpoint.api_key = api_key_from_env();
    backend = std::make_unique<HttpBackend>(endpoint);
  }

  AugmentSettings settings;
  settings.sampler = cfg.sampler;
  settings.prompt = cfg.prompt;
  settings.batch = cfg.batch;
  settings.seed = derive_seed(cfg.seed, "augment");
  auto [run, augmented_corpus] = detail::with_stage("augment", [&] {
    return run_augmentation(parts.train, taxonomy, keywords, *backend, settings);
  });
  result.run = run;
  detail::with_stage("write-augmentation", [&] {
    write_file(artifact("plan.json"), with_meta(run.plan.to_json()).dump(2) + "\n");
    save_corpus_file(augmented_corpus, artifact("augmented.jsonl"), &meta);
    write_file(artifact("run_report.json"),
               with_meta(run_report_json(run)).dump(2) + "\n");
    auto out = open_output(artifact("failures.jsonl"));
    out << json{{"_meta", meta}}.dump() << '\n';
    for (const auto& f : run.failures) out << failures_json_line(f).dump() << '\n';
  });

  auto augmented_model = detail::with_stage("train-augmented", [&] {
    return train(augmented_corpus, taxonomy, cfg.train);
  });
  result.augmented = detail::with_stage("eval-augmented", [&] {
    return evaluate_model(augmented_model, parts.test, taxonomy,
                                  cfg.train.threshold, cfg.leaves_only_eval);
  });
  detail::with_stage("write-augmented", [&] {
    save_model_file(augmented_model, artifact("model_augmented.bin"),
                    result.config_hash, cfg.seed);
    write_file(artifact("report_augmented.json"),
               with_meta(result.augmented.to_json()).dump(2) + "\n");
  });

  result.delta = detail::with_stage(
      "improvement", [&] { return improvement(result.baseline, result.augmented); });
  write_file(artifact("delta.json"),
             with_meta(result.delta.to_json()).dump(2) + "\n");

  json summary{{"n_train", result.n_train},
               {"n_test", result.n_test},
               {"baseline_micro_f1", result.baseline.micro_f1},
               {"baseline_macro_f1", result.baseline.macro_f1},
               {"augmented_micro_f1", result.augmented.micro_f1},
               {"augmented_macro_f1", result.augmented.macro_f1},
               {"requested", result.run.total_requested()},
               {"succeeded", result.run.total_succeeded()},
               {"failed", result.run.total_failed()},
               {"appended", result.run.appended},
               {"dropped_duplicates", result.run.dropped},
               {"artifacts",
                json::array({"plan.json", "augmented.jsonl", "run_report.json",
                             "failures.jsonl", "model_baseline.bin",
                             "model_augmented.bin", "report_baseline.json",
                             "report_augmented.json", "delta.json",
                             "experiment.json"})}};
  write_file(artifact("experiment.json"), with_meta(summary).dump(2) + "\n");
  return result;
}

// -------------------------------------------------------------------------
// Flat key = value configuration files ('#' starts a comment). CLI flags
// override file values; the merge happens in the CLI layer.

inline std::map<std::string, std::string> load_kv_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

inline std::map<std::string, std::string> load_kv_config_file(
    const std::string& path) {
  auto in = open_input(path);
  return load_kv_config(in);
}

}  // namespace hiaug
