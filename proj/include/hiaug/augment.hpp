#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "hiaug/generator.hpp"
#include "hiaug/sampler.hpp"

namespace hiaug {

struct ClassTally {
  std::int64_t requested = 0;
  std::int64_t succeeded = 0;
  std::int64_t failed = 0;
};

struct FailedSlot {
  std::string code;
  std::int64_t slot = 0;  // 0 <= slot < f_c, stable across retries
  int attempt = 0;
  std::uint64_t seed = 0;
  std::int64_t request_index = 0;
  FailureKind kind = FailureKind::transport;
  std::string detail;
};

struct AugmentRun {
  MinorityPlan plan;
  std::map<std::string, ClassTally> per_class;
  std::vector<FailedSlot> failures;
  std::int64_t appended = 0;
  std::int64_t dropped = 0;
  std::int64_t original_size = 0;
  std::int64_t augmented_size = 0;
  std::uint64_t run_seed = 0;
  double duration_seconds = 0.0;  // wall clock; kept out of artifact files

  std::int64_t total_requested() const {
    std::int64_t n = 0;
    for (const auto& [code, tally] : per_class) n += tally.requested;
    return n;
  }

  std::int64_t total_succeeded() const {
    std::int64_t n = 0;
    for (const auto& [code, tally] : per_class) n += tally.succeeded;
    return n;
  }

  std::int64_t total_failed() const {
    std::int64_t n = 0;
    for (const auto& [code, tally] : per_class) n += tally.failed;
    return n;
  }
};

struct AugmentSettings {
  SamplerConfig sampler;
  PromptConfig prompt;
  BatchOptions batch;
  std::uint64_t seed = 0;
};

namespace detail {

struct SlotRequest {
  std::string code;
  std::int64_t slot = 0;
  int attempt = 0;
};

/// Builds one GenerationRequest per slot. Seeds derive from
/// (run seed, class, slot, attempt), so re-running one slot never shifts
/// another slot's output.
inline std::vector<GenerationRequest> build_requests(
    const std::vector<SlotRequest>& slots, const Taxonomy& taxonomy,
    const KeywordTable& keywords, const PromptConfig& prompt_cfg,
    std::uint64_t run_seed) {
  std::vector<GenerationRequest> requests;
  requests.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& slot = slots[i];
    GenerationRequest request;
    request.seed = derive_seed(run_seed, slot.code, slot.slot, slot.attempt);
    PromptConfig cfg = prompt_cfg;
    cfg.keyword_seed = request.seed;
    request.spec = spec_for_class(taxonomy, keywords, slot.code, cfg);
    request.prompt = render(request.spec);
    request.target_class = slot.code;
    request.request_index = static_cast<std::int64_t>(i);
    requests.push_back(std::move(request));
  }
  return requests;
}

inline std::pair<AugmentRun, LabeledCorpus> execute_slots(
    AugmentRun run, const std::vector<SlotRequest>& slots,
    const LabeledCorpus& corpus, const Taxonomy& taxonomy,
    const KeywordTable& keywords, GenerationBackend& backend,
    const AugmentSettings& settings) {
  const auto started = std::chrono::steady_clock::now();

  auto requests = build_requests(slots, taxonomy, keywords, settings.prompt,
                                 settings.seed);
  std::vector<Proposal> accepted;
  if (!requests.empty()) {
    auto outcomes = generate_batch(requests, backend, taxonomy, settings.batch);
    for (const auto& outcome : outcomes) {
      const auto& slot = slots[static_cast<std::size_t>(outcome.request_index)];
      auto& tally = run.per_class[slot.code];
      if (outcome.ok()) {
        ++tally.succeeded;
        accepted.push_back(*outcome.proposal);
      } else {
        ++tally.failed;
        run.failures.push_back(FailedSlot{
            slot.code, slot.slot, slot.attempt,
            requests[static_cast<std::size_t>(outcome.request_index)].seed,
            outcome.request_index, outcome.failure->kind,
            outcome.failure->detail});
      }
    }
  }

  auto append = append_generated(corpus, accepted);
  run.appended += append.appended;
  run.dropped += append.dropped;
  run.augmented_size = static_cast<std::int64_t>(append.corpus.size());
  run.duration_seconds += std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - started)
                              .count();
  return {std::move(run), std::move(append.corpus)};
}

}  // namespace detail

/// The end-to-end augmentation loop: plan the budget, emit exactly f_c
/// requests per class, validate and append whatever generates cleanly.
/// Failures are recorded, never fatal.
inline std::pair<AugmentRun, LabeledCorpus> run_augmentation(
    const LabeledCorpus& corpus, const Taxonomy& taxonomy,
    const KeywordTable& keywords, GenerationBackend& backend,
    const AugmentSettings& settings) {
  AugmentRun run;
  run.run_seed = settings.seed;
  run.original_size = static_cast<std::int64_t>(corpus.size());
  run.plan = build_plan(corpus, taxonomy, settings.sampler);

  std::vector<detail::SlotRequest> slots;
  for (const auto& row : run.plan.rows) {
    run.per_class[row.code].requested = row.alloc;
    for (std::int64_t i = 0; i < row.alloc; ++i)
      slots.push_back(detail::SlotRequest{row.code, i, 0});
  }
  return detail::execute_slots(std::move(run), slots, corpus, taxonomy,
                               keywords, backend, settings);
}

/// Re-requests only the failed slots of a previous run with fresh derived
/// seeds (attempt + 1). Accounting stays cumulative: requested counts keep
/// the plan's f_c, succeeded/failed move as slots recover.
inline std::pair<AugmentRun, LabeledCorpus> top_up(
    const AugmentRun& previous, const LabeledCorpus& corpus,
    const Taxonomy& taxonomy, const KeywordTable& keywords,
    GenerationBackend& backend, const AugmentSettings& settings) {
  AugmentRun run = previous;
  if (previous.failures.empty()) {
    // Nothing to do; corpus passes through untouched.
    return {std::move(run), corpus};
  }

  std::vector<detail::SlotRequest> slots;
  for (const auto& failure : previous.failures) {
    slots.push_back(
        detail::SlotRequest{failure.code, failure.slot, failure.attempt + 1});
    auto& tally = run.per_class[failure.code];
    --tally.failed;  // the slot is being retried; execute_slots re-tallies it
  }
  run.failures.clear();
  return detail::execute_slots(std::move(run), slots, corpus, taxonomy,
                               keywords, backend, settings);
}

inline json run_report_json(const AugmentRun& run,
                            const std::string& corpus_name = "augmented.jsonl") {
  json per_class = json::array();
  for (const auto& [code, tally] : run.per_class)
    per_class.push_back(json{{"code", code},
                             {"requested", tally.requested},
                             {"succeeded", tally.succeeded},
                             {"failed", tally.failed}});
  return json{{"augmented_corpus", corpus_name},
              {"seed", run.run_seed},
              {"lambda", run.plan.lambda},
              {"total", run.plan.total_budget},
              {"requested", run.total_requested()},
              {"succeeded", run.total_succeeded()},
              {"failed", run.total_failed()},
              {"appended", run.appended},
              {"dropped_duplicates", run.dropped},
              {"original_size", run.original_size},
              {"augmented_size", run.augmented_size},
              {"per_class", std::move(per_class)}};
}

inline json failures_json_line(const FailedSlot& f) {
  return json{{"class", f.code},      {"slot", f.slot},
              {"attempt", f.attempt}, {"seed", f.seed},
              {"request_index", f.request_index},
              {"kind", to_string(f.kind)},
              {"detail", f.detail}};
}

}  // namespace hiaug
