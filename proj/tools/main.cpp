// hiaug: rebalances hierarchically labeled proposal corpora by planning a
// per-class generation budget, prompting an LLM (or offline mock) for
// synthetic proposals, and measuring the downstream classifier effect.

#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <iostream>

#include "hiaug/experiment.hpp"
#include "hiaug/synth.hpp"

namespace {

using namespace hiaug;

struct LambdaArg {
  bool is_auto = true;
  double value = 0.0;
};

LambdaArg parse_lambda(const std::string& text) {
  if (text == "auto") return {};
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return {false, v};
  } catch (const std::exception&) {
    throw ConfigError("--lambda expects a positive number or 'auto', got '" +
                      text + "'");
  }
}

std::vector<std::int64_t> parse_profile(const std::string& text) {
  std::vector<std::int64_t> out;
  std::string buf;
  std::istringstream in(text);
  while (std::getline(in, buf, ',')) {
    try {
      out.push_back(std::stoll(buf));
    } catch (const std::exception&) {
      throw ConfigError("--profile expects comma-separated integers, got '" +
                        text + "'");
    }
  }
  if (out.empty()) throw ConfigError("--profile is empty");
  return out;
}

std::set<std::string> read_class_file(const std::string& path) {
  auto in = open_input(path);
  std::set<std::string> codes;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    codes.insert(line.substr(b, e - b + 1));
  }
  if (codes.empty()) throw ConfigError("class file " + path + " names no codes");
  return codes;
}

void print_plan(const MinorityPlan& plan) {
  std::cout << "lambda=" << plan.lambda << " total=" << plan.total_budget
            << " mode=" << to_string(plan.mode) << '\n';
  std::cout << std::left << std::setw(12) << "code" << std::right
            << std::setw(10) << "n" << std::setw(12) << "score" << std::setw(8)
            << "alloc" << '\n';
  for (const auto& row : plan.rows)
    std::cout << std::left << std::setw(12) << row.code << std::right
              << std::setw(10) << row.count << std::setw(12) << std::fixed
              << std::setprecision(6) << row.score << std::setw(8) << row.alloc
              << '\n';
}

void print_report_summary(const char* tag, const EvalReport& report) {
  std::cout << tag << ": micro_f1=" << std::fixed << std::setprecision(4)
            << report.micro_f1 << " macro_f1=" << report.macro_f1
            << " micro_p=" << report.micro_precision
            << " micro_r=" << report.micro_recall << " docs=" << report.n_docs
            << '\n';
}

// validate <taxonomy>
void cmd_validate(const std::string& path) {
  auto taxonomy = load_taxonomy_file(path);
  std::cout << "OK: " << taxonomy.size() << " nodes, "
            << taxonomy.leaves().size() << " leaves, depth "
            << taxonomy.max_level() << '\n';
}

// stats <corpus> --taxonomy --mode
void cmd_stats(const std::string& corpus_path, const std::string& taxonomy_path,
               const std::string& mode) {
  auto taxonomy = load_taxonomy_file(taxonomy_path);
  auto corpus = load_corpus_file(corpus_path, taxonomy);
  auto counts = count_per_class(corpus, taxonomy, counting_mode_from(mode));
  std::cout << std::left << std::setw(12) << "code" << std::right << std::setw(7)
            << "level" << std::setw(10) << "n" << '\n';
  for (const auto& [code, n] : counts.counts)
    std::cout << std::left << std::setw(12) << code << std::right << std::setw(7)
              << taxonomy.level(code) << std::setw(10) << n << '\n';
  std::cout << "proposals: " << corpus.size() << " mode: " << mode << '\n';
}

struct PlanArgs {
  std::string corpus, taxonomy, lambda = "auto", mode = "closure";
  std::string classes_file, out;
  std::int64_t total = 0;
};

void cmd_plan(const PlanArgs& args) {
  auto taxonomy = load_taxonomy_file(args.taxonomy);
  auto corpus = load_corpus_file(args.corpus, taxonomy);
  SamplerConfig cfg;
  auto lambda = parse_lambda(args.lambda);
  cfg.lambda_auto = lambda.is_auto;
  cfg.lambda = lambda.value;
  cfg.total_budget = args.total;
  cfg.mode = counting_mode_from(args.mode);
  if (!args.classes_file.empty()) cfg.class_filter = read_class_file(args.classes_file);
  auto plan = build_plan(corpus, taxonomy, cfg);
  print_plan(plan);
  if (!args.out.empty()) {
    write_file(args.out, plan.to_json().dump(2) + "\n");
    std::cout << "wrote " << args.out << '\n';
  }
}

struct PromptPreviewArgs {
  std::string taxonomy, keyword_table, cls, style = "formal-academic-english";
  int keywords = 3;
  std::uint64_t seed = 0;
};

void cmd_prompt_preview(const PromptPreviewArgs& args) {
  auto taxonomy = load_taxonomy_file(args.taxonomy);
  KeywordTable table;
  if (!args.keyword_table.empty())
    table = load_keyword_table_file(args.keyword_table, &taxonomy);
  PromptConfig cfg;
  cfg.keywords_per_prompt = args.keywords;
  cfg.keyword_seed = args.seed;
  cfg.language_style = args.style;
  auto spec = spec_for_class(taxonomy, table, args.cls, cfg);
  auto prompt = render(spec);
  std::cout << prompt.text;
  std::cerr << "spec_hash: " << prompt.spec_hash << '\n';
}

struct AugmentArgs {
  std::string corpus, taxonomy, keyword_table, out;
  std::string lambda = "auto", mode = "closure", backend = "mock";
  std::string base_url, model = "llama";
  std::int64_t total = 0;
  std::uint64_t seed = 0;
  double temperature = 0.8;
  int keywords_per_prompt = 3;
  std::string style = "formal-academic-english";
  int max_concurrency = 4, max_retries = 3, retry_malformed = 0;
  std::int64_t timeout_ms = 30000;
  std::int64_t max_failures = -1;  // -1 = unlimited
};

std::string augment_config_hash(const AugmentArgs& args) {
  HashBuilder h;
  h.add_u64(fnv1a64(read_file(args.corpus)));
  h.add_u64(fnv1a64(read_file(args.taxonomy)));
  h.add_u64(args.keyword_table.empty() ? 0
                                       : fnv1a64(read_file(args.keyword_table)));
  h.add(args.lambda).add(args.mode).add(args.backend).add(args.model);
  h.add_i64(args.total);
  h.add_u64(args.seed);
  h.add_i64(args.keywords_per_prompt);
  h.add(args.style);
  h.add_double(args.temperature);
  return hex16(h.digest());
}

void cmd_augment(const AugmentArgs& args) {
  auto taxonomy = load_taxonomy_file(args.taxonomy);
  auto corpus = load_corpus_file(args.corpus, taxonomy);
  KeywordTable table;
  if (!args.keyword_table.empty())
    table = load_keyword_table_file(args.keyword_table, &taxonomy);

  AugmentSettings settings;
  auto lambda = parse_lambda(args.lambda);
  settings.sampler.lambda_auto = lambda.is_auto;
  settings.sampler.lambda = lambda.value;
  settings.sampler.total_budget = args.total;
  settings.sampler.mode = counting_mode_from(args.mode);
  settings.prompt.keywords_per_prompt = args.keywords_per_prompt;
  settings.prompt.language_style = args.style;
  settings.batch.max_concurrency = args.max_concurrency;
  settings.batch.max_retries = args.max_retries;
  settings.batch.retry_malformed = args.retry_malformed;
  settings.seed = args.seed;

  std::unique_ptr<GenerationBackend> backend;
  if (backend_kind_from(args.backend) == BackendKind::mock) {
    backend = std::make_unique<MockBackend>(corpus, taxonomy);
  } else {
    EndpointConfig endpoint;
    endpoint.base_url = args.base_url;
    endpoint.model_name = args.model;
    endpoint.api_key = api_key_from_env();
    endpoint.max_concurrency = args.max_concurrency;
    endpoint.max_retries = args.max_retries;
    endpoint.temperature = args.temperature;
    endpoint.timeout = std::chrono::milliseconds(args.timeout_ms);
    backend = std::make_unique<HttpBackend>(std::move(endpoint));
  }

  auto [run, augmented] =
      run_augmentation(corpus, taxonomy, table, *backend, settings);

  ensure_dir(args.out);
  namespace fs = std::filesystem;
  const std::string config_hash = augment_config_hash(args);
  const json meta{{"config_hash", config_hash}, {"seed", args.seed}};
  auto with_meta = [&](json j) {
    j["config_hash"] = config_hash;
    j["seed"] = args.seed;
    return j;
  };
  save_corpus_file(augmented, (fs::path(args.out) / "augmented.jsonl").string(),
                   &meta);
  write_file((fs::path(args.out) / "plan.json").string(),
             with_meta(run.plan.to_json()).dump(2) + "\n");
  write_file((fs::path(args.out) / "run_report.json").string(),
             with_meta(run_report_json(run)).dump(2) + "\n");
  {
    auto out = open_output((fs::path(args.out) / "failures.jsonl").string());
    out << json{{"_meta", meta}}.dump() << '\n';
    for (const auto& f : run.failures) out << failures_json_line(f).dump() << '\n';
  }

  std::cout << "requested=" << run.total_requested()
            << " succeeded=" << run.total_succeeded()
            << " failed=" << run.total_failed() << " appended=" << run.appended
            << " dropped=" << run.dropped << '\n';
  std::cout << "corpus: " << run.original_size << " -> " << run.augmented_size
            << " (" << args.out << "/augmented.jsonl)" << '\n';
  if (args.max_failures >= 0 && run.total_failed() > args.max_failures)
    throw BackendError("failure budget exceeded: " +
                       std::to_string(run.total_failed()) + " failed, allowed " +
                       std::to_string(args.max_failures));
}

struct TrainArgs {
  std::string corpus, taxonomy, out;
  TrainConfig config;
};

void cmd_train(const TrainArgs& args) {
  auto taxonomy = load_taxonomy_file(args.taxonomy);
  auto corpus = load_corpus_file(args.corpus, taxonomy);
  auto model = train(corpus, taxonomy, args.config);
  save_model_file(model, args.out);
  std::cout << "trained " << model.classes.size() << " classes over "
            << model.vocab.tokens.size() << " features";
  if (!model.skipped.empty()) {
    std::cout << "; skipped (no positives):";
    for (const auto& code : model.skipped) std::cout << ' ' << code;
  }
  std::cout << "\nwrote " << args.out << '\n';
}

struct PredictArgs {
  std::string model, text_file;
  double threshold = std::nan("");
  bool scores = false;
};

void cmd_predict(const PredictArgs& args) {
  auto model = load_model_file(args.model);
  const std::string text = read_file(args.text_file);
  const double threshold =
      std::isnan(args.threshold) ? model.config.threshold : args.threshold;
  auto predicted = predict(model, text, threshold);
  if (args.scores) {
    auto all = predict_scores(model, text);
    for (const auto& code : predicted)
      std::cout << code << ' ' << std::fixed << std::setprecision(6)
                << all.at(code) << '\n';
  } else {
    for (const auto& code : predicted) std::cout << code << '\n';
  }
}

struct EvalArgs {
  std::string model, corpus, taxonomy, out;
  double threshold = std::nan("");
  bool leaves_only = false;
};

void cmd_eval(const EvalArgs& args) {
  auto taxonomy = load_taxonomy_file(args.taxonomy);
  auto corpus = load_corpus_file(args.corpus, taxonomy);
  auto model = load_model_file(args.model);
  const double threshold =
      std::isnan(args.threshold) ? model.config.threshold : args.threshold;
  auto report = evaluate_model(model, corpus, taxonomy, threshold,
                                       args.leaves_only);
  print_report_summary("eval", report);
  if (!args.out.empty()) {
    write_file(args.out, report.to_json().dump(2) + "\n");
    std::cout << "wrote " << args.out << '\n';
  }
}

void cmd_compare(const std::string& baseline_path, const std::string& augmented_path,
                 const std::string& out) {
  auto baseline = EvalReport::from_json(json::parse(read_file(baseline_path)));
  auto augmented = EvalReport::from_json(json::parse(read_file(augmented_path)));
  auto delta = improvement(baseline, augmented);
  std::cout << format_delta_table(delta);
  write_file(out, delta.to_json().dump(2) + "\n");
  std::cout << "wrote " << out << '\n';
}

struct SynthArgs {
  std::string profile, out;
  SynthConfig cfg;  // defaults come from the library
};

void cmd_synth(const SynthArgs& args) {
  SynthConfig cfg = args.cfg;
  cfg.profile = parse_profile(args.profile);
  auto output = synth_corpus(cfg);

  ensure_dir(args.out);
  namespace fs = std::filesystem;
  {
    auto out = open_output((fs::path(args.out) / "taxonomy.jsonl").string());
    save_taxonomy(output.taxonomy, out);
  }
  save_corpus_file(output.corpus, (fs::path(args.out) / "corpus.jsonl").string());
  {
    auto out = open_output((fs::path(args.out) / "keywords.json").string());
    save_keyword_table(output.keywords, out);
  }
  std::cout << "wrote " << output.corpus.size() << " proposals over "
            << output.taxonomy.leaves().size() << " leaf classes to "
            << args.out << '\n';
}

// experiment: config file values fill anything the flags leave unset.
struct ExperimentArgs {
  std::string config_file;
  std::map<std::string, std::string> values;  // merged key -> value
};

const char* kExperimentKeys[] = {
    "taxonomy",   "corpus",         "keywords",        "out",
    "seed",       "test_fraction",  "lambda",          "total",
    "mode",       "backend",        "base_url",        "model",
    "temperature", "epochs",        "lr",              "l2",
    "threshold",  "min_df",         "keywords_per_prompt", "language_style",
    "leaves_only", "max_concurrency", "max_retries",   "timeout_ms"};

ExperimentConfig build_experiment_config(const std::map<std::string, std::string>& v) {
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = v.find(key);
    return it == v.end() ? nullptr : &it->second;
  };
  auto require = [&](const std::string& key) -> const std::string& {
    const std::string* p = get(key);
    if (!p) throw ConfigError("experiment: missing required setting '" + key +
                              "' (flag or config file)");
    return *p;
  };
  auto to_f = [](const std::string& key, const std::string& s) {
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw ConfigError("experiment: setting '" + key + "' is not a number: " + s);
    }
  };
  auto to_i = [](const std::string& key, const std::string& s) {
    try {
      return std::stoll(s);
    } catch (const std::exception&) {
      throw ConfigError("experiment: setting '" + key + "' is not an integer: " + s);
    }
  };

  ExperimentConfig cfg;
  cfg.taxonomy_path = require("taxonomy");
  cfg.corpus_path = require("corpus");
  if (auto* p = get("keywords")) cfg.keywords_path = *p;
  cfg.out_dir = require("out");
  cfg.seed = static_cast<std::uint64_t>(to_i("seed", require("seed")));
  if (auto* p = get("test_fraction")) cfg.test_fraction = to_f("test_fraction", *p);
  auto lambda = parse_lambda(get("lambda") ? *get("lambda") : "auto");
  cfg.sampler.lambda_auto = lambda.is_auto;
  cfg.sampler.lambda = lambda.value;
  cfg.sampler.total_budget = to_i("total", require("total"));
  if (auto* p = get("mode")) cfg.sampler.mode = counting_mode_from(*p);
  if (auto* p = get("backend")) cfg.backend = backend_kind_from(*p);
  if (auto* p = get("base_url")) cfg.endpoint.base_url = *p;
  cfg.endpoint.model_name = get("model") ? *get("model") : "llama";
  if (auto* p = get("temperature"))
    cfg.endpoint.temperature = to_f("temperature", *p);
  if (auto* p = get("epochs"))
    cfg.train.epochs = static_cast<int>(to_i("epochs", *p));
  if (auto* p = get("lr")) cfg.train.lr = to_f("lr", *p);
  if (auto* p = get("l2")) cfg.train.l2 = to_f("l2", *p);
  if (auto* p = get("threshold")) cfg.train.threshold = to_f("threshold", *p);
  if (auto* p = get("min_df"))
    cfg.train.min_df = static_cast<int>(to_i("min_df", *p));
  if (auto* p = get("keywords_per_prompt"))
    cfg.prompt.keywords_per_prompt =
        static_cast<int>(to_i("keywords_per_prompt", *p));
  if (auto* p = get("language_style")) cfg.prompt.language_style = *p;
  if (auto* p = get("leaves_only"))
    cfg.leaves_only_eval = (*p == "true" || *p == "1");
  if (auto* p = get("max_concurrency"))
    cfg.batch.max_concurrency = static_cast<int>(to_i("max_concurrency", *p));
  if (auto* p = get("max_retries"))
    cfg.batch.max_retries = static_cast<int>(to_i("max_retries", *p));
  if (auto* p = get("timeout_ms"))
    cfg.endpoint.timeout = std::chrono::milliseconds(to_i("timeout_ms", *p));
  cfg.endpoint.max_concurrency = cfg.batch.max_concurrency;
  cfg.endpoint.max_retries = cfg.batch.max_retries;
  return cfg;
}

void cmd_experiment(const ExperimentArgs& args) {
  std::map<std::string, std::string> merged;
  if (!args.config_file.empty()) {
    for (const auto& [key, value] : load_kv_config_file(args.config_file)) {
      bool known = false;
      for (const char* k : kExperimentKeys) known = known || key == k;
      if (!known) throw ConfigError("experiment config: unknown key '" + key + "'");
      merged[key] = value;
    }
  }
  for (const auto& [key, value] : args.values) merged[key] = value;  // flags win

  auto cfg = build_experiment_config(merged);
  auto result = run_experiment(cfg);

  std::cout << "train/test: " << result.n_train << '/' << result.n_test << '\n';
  print_report_summary("baseline ", result.baseline);
  print_report_summary("augmented", result.augmented);
  std::cout << "generated: requested=" << result.run.total_requested()
            << " succeeded=" << result.run.total_succeeded()
            << " failed=" << result.run.total_failed()
            << " appended=" << result.run.appended << '\n';
  std::cout << '\n' << format_delta_table(result.delta);
  std::cout << "artifacts in " << cfg.out_dir << " (config " << result.config_hash
            << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchy-aware corpus rebalancing via LLM generation"};
  app.require_subcommand(1);

  // validate
  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a taxonomy file");
  validate->add_option("path", validate_path, "taxonomy JSONL")->required();
  validate->callback([&] { cmd_validate(validate_path); });

  // stats
  std::string stats_corpus, stats_taxonomy, stats_mode = "closure";
  auto* stats = app.add_subcommand("stats", "per-class proposal counts");
  stats->add_option("corpus", stats_corpus, "corpus JSONL")->required();
  stats->add_option("--taxonomy", stats_taxonomy, "taxonomy JSONL")->required();
  stats->add_option("--mode", stats_mode, "closure|direct");
  stats->callback([&] { cmd_stats(stats_corpus, stats_taxonomy, stats_mode); });

  // plan
  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "minority scores and budget allocation");
  plan->add_option("--corpus", plan_args.corpus)->required();
  plan->add_option("--taxonomy", plan_args.taxonomy)->required();
  plan->add_option("--lambda", plan_args.lambda, "positive number or 'auto'");
  plan->add_option("--total", plan_args.total, "total generation budget T")
      ->required();
  plan->add_option("--mode", plan_args.mode, "closure|direct");
  plan->add_option("--classes", plan_args.classes_file,
                   "file of participating codes, one per line");
  plan->add_option("--out", plan_args.out, "write plan.json here");
  plan->callback([&] { cmd_plan(plan_args); });

  // prompt-preview
  PromptPreviewArgs preview_args;
  auto* preview = app.add_subcommand("prompt-preview", "render one prompt");
  preview->add_option("--taxonomy", preview_args.taxonomy)->required();
  preview->add_option("--class", preview_args.cls, "target discipline code")
      ->required();
  preview->add_option("--keyword-table", preview_args.keyword_table);
  preview->add_option("--keywords", preview_args.keywords,
                      "keywords to draw per prompt");
  preview->add_option("--seed", preview_args.seed)->required();
  preview->add_option("--style", preview_args.style);
  preview->callback([&] { cmd_prompt_preview(preview_args); });

  // augment
  AugmentArgs augment_args;
  auto* augment = app.add_subcommand("augment", "plan, generate and append");
  augment->add_option("--corpus", augment_args.corpus)->required();
  augment->add_option("--taxonomy", augment_args.taxonomy)->required();
  augment->add_option("--keywords", augment_args.keyword_table,
                      "keyword table JSON");
  augment->add_option("--lambda", augment_args.lambda);
  augment->add_option("--total", augment_args.total)->required();
  augment->add_option("--mode", augment_args.mode);
  augment->add_option("--backend", augment_args.backend, "mock|http");
  augment->add_option("--base-url", augment_args.base_url);
  augment->add_option("--model", augment_args.model);
  augment->add_option("--temperature", augment_args.temperature);
  augment->add_option("--seed", augment_args.seed)->required();
  augment->add_option("--out", augment_args.out, "artifact directory")->required();
  augment->add_option("--keywords-per-prompt", augment_args.keywords_per_prompt);
  augment->add_option("--style", augment_args.style);
  augment->add_option("--max-concurrency", augment_args.max_concurrency);
  augment->add_option("--max-retries", augment_args.max_retries);
  augment->add_option("--retry-malformed", augment_args.retry_malformed);
  augment->add_option("--timeout-ms", augment_args.timeout_ms);
  augment->add_option("--max-failures", augment_args.max_failures,
                      "exit 3 when more requests fail (-1 = unlimited)");
  augment->callback([&] { cmd_augment(augment_args); });

  // train
  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "fit the hierarchical classifier");
  train_cmd->add_option("--corpus", train_args.corpus)->required();
  train_cmd->add_option("--taxonomy", train_args.taxonomy)->required();
  train_cmd->add_option("--out", train_args.out, "model file")->required();
  train_cmd->add_option("--epochs", train_args.config.epochs);
  train_cmd->add_option("--lr", train_args.config.lr);
  train_cmd->add_option("--l2", train_args.config.l2);
  train_cmd->add_option("--threshold", train_args.config.threshold);
  train_cmd->add_option("--min-df", train_args.config.min_df);
  train_cmd->add_option("--seed", train_args.config.seed);
  train_cmd->callback([&] { cmd_train(train_args); });

  // predict
  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "classify one document");
  predict_cmd->add_option("--model", predict_args.model)->required();
  predict_cmd->add_option("--text", predict_args.text_file, "document text file")
      ->required();
  predict_cmd->add_option("--threshold", predict_args.threshold);
  predict_cmd->add_flag("--scores", predict_args.scores, "print scores too");
  predict_cmd->callback([&] { cmd_predict(predict_args); });

  // eval
  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a test corpus");
  eval_cmd->add_option("--model", eval_args.model)->required();
  eval_cmd->add_option("--corpus", eval_args.corpus, "test corpus JSONL")
      ->required();
  eval_cmd->add_option("--taxonomy", eval_args.taxonomy)->required();
  eval_cmd->add_option("--out", eval_args.out, "write report.json here");
  eval_cmd->add_option("--threshold", eval_args.threshold);
  eval_cmd->add_flag("--leaves-only", eval_args.leaves_only,
                     "restrict metrics to leaf classes");
  eval_cmd->callback([&] { cmd_eval(eval_args); });

  // compare
  std::string compare_baseline, compare_augmented, compare_out = "delta.json";
  auto* compare = app.add_subcommand("compare", "baseline vs augmented deltas");
  compare->add_option("--baseline", compare_baseline, "baseline report.json")
      ->required();
  compare->add_option("--augmented", compare_augmented, "augmented report.json")
      ->required();
  compare->add_option("--out", compare_out, "delta output path");
  compare->callback(
      [&] { cmd_compare(compare_baseline, compare_augmented, compare_out); });

  // experiment
  ExperimentArgs experiment_args;
  std::map<std::string, std::string> experiment_flags;
  auto* experiment = app.add_subcommand(
      "experiment", "split, train, augment, retrain, compare");
  experiment->add_option("--config", experiment_args.config_file,
                         "key = value file; flags override it");
  for (const char* key : kExperimentKeys) {
    std::string flag = "--" + std::string(key);
    for (auto& c : flag)
      if (c == '_') c = '-';
    experiment->add_option_function<std::string>(
        flag,
        [&experiment_flags, key](const std::string& value) {
          experiment_flags[key] = value;
        },
        std::string("sets '") + key + "'");
  }
  experiment->callback([&] {
    experiment_args.values = experiment_flags;
    cmd_experiment(experiment_args);
  });

  // synth-corpus
  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth-corpus",
                                   "generate a synthetic corpus + taxonomy");
  synth->add_option("--profile", synth_args.profile,
                    "docs per leaf, e.g. 200,200,200,200,10,10")
      ->required();
  synth->add_option("--vocab-size", synth_args.cfg.vocab_size);
  synth->add_option("--seed", synth_args.cfg.seed)->required();
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--doc-words-min", synth_args.cfg.doc_words_min);
  synth->add_option("--doc-words-max", synth_args.cfg.doc_words_max);
  synth->add_option("--leaves-per-root", synth_args.cfg.leaves_per_root);
  synth->add_option("--shared-mass", synth_args.cfg.shared_mass);
  synth->add_option("--sibling-overlap", synth_args.cfg.sibling_overlap);
  synth->callback([&] { cmd_synth(synth_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage errors are exit 1; --help is success
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
