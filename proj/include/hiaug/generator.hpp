#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <httplib.h>

#include "hiaug/corpus.hpp"
#include "hiaug/promptgen.hpp"

namespace hiaug {

struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  std::string api_key;  // read from the environment, never from a flag
  int max_concurrency = 4;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  double temperature = 0.8;

  void check() const {
    if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
    if (max_retries < 0 || max_retries > 5)
      throw ConfigError("max_retries must lie in [0, 5]");
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  }
};

inline std::string api_key_from_env(const char* var = "HIAUG_API_KEY") {
  const char* value = std::getenv(var);
  return value ? value : "";
}

struct GenerationRequest {
  PromptSpec spec;
  RenderedPrompt prompt;
  std::string target_class;
  std::int64_t request_index = 0;
  std::uint64_t seed = 0;
};

enum class FailureKind { transport, malformed_output, length_violation, empty };

inline std::string to_string(FailureKind k) {
  switch (k) {
    case FailureKind::transport: return "transport";
    case FailureKind::malformed_output: return "malformed_output";
    case FailureKind::length_violation: return "length_violation";
    case FailureKind::empty: return "empty";
  }
  return "unknown";
}

struct GenerationFailure {
  FailureKind kind = FailureKind::transport;
  std::string detail;
};

struct GenerationOutcome {
  std::int64_t request_index = 0;
  std::optional<Proposal> proposal;
  std::optional<GenerationFailure> failure;

  bool ok() const { return proposal.has_value(); }
};

/// Thrown by backends for connection-level problems; generate_batch retries
/// these with exponential backoff before recording a transport failure.
class TransportError : public Error {
 public:
  using Error::Error;
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string complete(const GenerationRequest& request) = 0;
  virtual std::string model_name() const = 0;
  /// Upper bound the backend imposes on in-flight requests.
  virtual int max_parallelism() const { return std::numeric_limits<int>::max(); }
};

// -------------------------------------------------------------------------
// Output parsing. The Format contract expects one fenced block holding the
// fields TITLE:, KEYWORDS: and ABSTRACT:.

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<std::string> fenced_block(const std::string& raw) {
  std::size_t open = raw.find("```");
  if (open == std::string::npos) return std::nullopt;
  std::size_t body = raw.find('\n', open);  // skip fence line (and any tag)
  if (body == std::string::npos) return std::nullopt;
  ++body;
  std::size_t close = raw.find("```", body);
  if (close == std::string::npos) return std::nullopt;
  return raw.substr(body, close - body);
}

inline std::vector<std::string> split_semicolons(std::string_view s) {
  std::vector<std::string> parts;
  std::string buf;
  for (char c : s) {
    if (c == ';') {
      parts.push_back(buf);
      buf.clear();
    } else {
      buf.push_back(c);
    }
  }
  parts.push_back(buf);
  return parts;
}

}  // namespace detail

/// Validates raw model output against the Format contract and builds a
/// generated Proposal labeled with the target class plus its ancestors.
/// Violations come back as failures, never exceptions.
inline std::variant<Proposal, GenerationFailure> parse_output(
    const std::string& raw, const GenerationRequest& request,
    const Taxonomy& taxonomy, const std::string& model_name) {
  if (detail::trim(raw).empty())
    return GenerationFailure{FailureKind::empty, "blank model output"};

  auto block = detail::fenced_block(raw);
  if (!block)
    return GenerationFailure{FailureKind::malformed_output,
                             "no fenced block in model output"};

  // Field content runs until the next field marker or the end of the block.
  static const std::vector<std::string> field_names{"TITLE:", "KEYWORDS:",
                                                    "ABSTRACT:"};
  std::map<std::string, std::string> fields;
  std::string current_field;
  std::istringstream lines(*block);
  std::string line;
  while (std::getline(lines, line)) {
    bool is_marker = false;
    for (const auto& name : field_names) {
      if (line.rfind(name, 0) == 0) {
        current_field = name;
        fields[name] = detail::trim(line.substr(name.size()));
        is_marker = true;
        break;
      }
    }
    if (!is_marker && !current_field.empty()) {
      std::string& value = fields[current_field];
      if (!value.empty()) value += ' ';
      value += detail::trim(line);
    }
  }
  for (const auto& name : field_names)
    if (!fields.count(name) || detail::trim(fields[name]).empty())
      return GenerationFailure{FailureKind::malformed_output,
                               "missing field " + name.substr(0, name.size() - 1)};

  const SectionLengths& lengths = request.spec.lengths;
  const auto title_words = count_words(fields["TITLE:"]);
  const auto abstract_words = count_words(fields["ABSTRACT:"]);
  const double title_cap = 1.5 * lengths.title_max_words;
  const double abstract_cap = 1.5 * lengths.abstract_max_words;
  const double abstract_floor = 0.5 * lengths.abstract_min_words;
  if (static_cast<double>(title_words) > title_cap)
    return GenerationFailure{
        FailureKind::length_violation,
        "title has " + std::to_string(title_words) + " words, tolerated max " +
            std::to_string(static_cast<std::int64_t>(title_cap))};
  if (static_cast<double>(abstract_words) > abstract_cap ||
      static_cast<double>(abstract_words) < abstract_floor)
    return GenerationFailure{
        FailureKind::length_violation,
        "abstract has " + std::to_string(abstract_words) +
            " words, tolerated range [" +
            std::to_string(static_cast<std::int64_t>(abstract_floor)) + ", " +
            std::to_string(static_cast<std::int64_t>(abstract_cap)) + "]"};

  Proposal p;
  p.id = "gen-" + request.target_class + "-" + hex16(request.seed);
  p.title = fields["TITLE:"];
  p.abstract = fields["ABSTRACT:"];
  for (const auto& kw : detail::split_semicolons(fields["KEYWORDS:"])) {
    auto cleaned = detail::trim(kw);
    if (!cleaned.empty()) p.keywords.push_back(cleaned);
  }
  p.labels.insert(request.target_class);
  for (const auto& anc : taxonomy.ancestors(request.target_class))
    p.labels.insert(anc);
  p.source = Source::generated;
  p.provenance = Provenance{request.prompt.spec_hash, model_name, request.seed};
  return p;
}

// -------------------------------------------------------------------------
// Mock backend: a class-conditional unigram sampler over the target class's
// original abstracts. Offline, seeded, bit-reproducible.

inline std::string mock_generate(const GenerationRequest& request,
                                 const LabeledCorpus& corpus,
                                 const Taxonomy& taxonomy) {
  auto docs_for = [&](const std::string& code) {
    std::vector<const Proposal*> docs;
    for (const auto& p : corpus) {
      if (p.source != Source::original) continue;
      if (label_closure(p, taxonomy).count(code)) docs.push_back(&p);
    }
    return docs;
  };

  std::vector<const Proposal*> docs = docs_for(request.target_class);
  if (docs.empty())
    for (const auto& anc : taxonomy.ancestors(request.target_class)) {
      docs = docs_for(anc);
      if (!docs.empty()) break;
    }
  if (docs.empty())
    throw ValidationError("class " + request.target_class +
                          ": zero reachable exemplars in the corpus");

  // Unigram counts in lexicographic token order for deterministic sampling.
  std::map<std::string, std::int64_t> counts;
  for (const Proposal* doc : docs)
    for (const auto& token : tokenize(doc->abstract)) ++counts[token];
  if (counts.empty())
    throw ValidationError("class " + request.target_class +
                          ": exemplar abstracts contain no tokens");

  std::vector<std::pair<std::string, std::int64_t>> cumulative;
  std::int64_t total = 0;
  for (const auto& [token, n] : counts) {
    total += n;
    cumulative.emplace_back(token, total);
  }

  Rng rng(request.seed);
  auto draw_token = [&]() -> const std::string& {
    auto v = static_cast<std::int64_t>(
        rng.next_below(static_cast<std::uint64_t>(total)));
    auto it = std::upper_bound(
        cumulative.begin(), cumulative.end(), v,
        [](std::int64_t value, const auto& entry) { return value < entry.second; });
    return it->first;
  };

  const SectionLengths& lengths = request.spec.lengths;
  const auto n_words = static_cast<std::size_t>(
      rng.next_in(lengths.abstract_min_words, lengths.abstract_max_words));
  std::vector<std::string> words(n_words);
  for (auto& w : words) w = draw_token();

  // Force the requested keywords in at evenly spread positions.
  std::size_t prev_end = 0;
  for (std::size_t j = 0; j < request.spec.keywords.size(); ++j) {
    auto kw_tokens = tokenize(request.spec.keywords[j]);
    if (kw_tokens.empty() || kw_tokens.size() > n_words) continue;
    std::size_t pos = (j + 1) * n_words / (request.spec.keywords.size() + 1);
    pos = std::max(pos, prev_end);
    pos = std::min(pos, n_words - kw_tokens.size());
    for (std::size_t k = 0; k < kw_tokens.size(); ++k)
      words[pos + k] = kw_tokens[k];
    prev_end = pos + kw_tokens.size();
  }

  std::vector<std::string> title_words;
  for (int i = 0; i < 8; ++i) title_words.push_back(draw_token());
  if (!title_words.empty() && !title_words[0].empty())
    title_words[0][0] = static_cast<char>(
        std::toupper(static_cast<unsigned char>(title_words[0][0])));

  std::vector<std::string> keyword_line = request.spec.keywords;
  if (keyword_line.empty()) {
    // Top three class tokens by count, ties lexicographic.
    std::vector<std::pair<std::string, std::int64_t>> by_count(counts.begin(),
                                                               counts.end());
    std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (std::size_t i = 0; i < std::min<std::size_t>(3, by_count.size()); ++i)
      keyword_line.push_back(by_count[i].first);
  }

  std::string out = "```\n";
  out += "TITLE: " + join(title_words, " ") + "\n";
  out += "KEYWORDS: " + join(keyword_line, "; ") + "\n";
  out += "ABSTRACT: " + join(words, " ") + "\n";
  out += "```\n";
  return out;
}

class MockBackend : public GenerationBackend {
 public:
  MockBackend(const LabeledCorpus& corpus, const Taxonomy& taxonomy)
      : corpus_(&corpus), taxonomy_(&taxonomy) {}

  std::string complete(const GenerationRequest& request) override {
    return mock_generate(request, *corpus_, *taxonomy_);
  }

  std::string model_name() const override { return "mock-unigram"; }

  int max_parallelism() const override { return 1; }  // sequential by contract

 private:
  const LabeledCorpus* corpus_;
  const Taxonomy* taxonomy_;
};

// -------------------------------------------------------------------------
// HTTP backend speaking the chat-completion protocol:
// POST {base_url}/v1/chat/completions with
// {model, messages: [{role: "user", content: ...}], temperature, seed}.

class HttpBackend : public GenerationBackend {
 public:
  explicit HttpBackend(EndpointConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.check();
    if (cfg_.base_url.empty()) throw ConfigError("endpoint base_url is empty");
    // Split "scheme://host[:port][/prefix]" into client root and path prefix.
    auto scheme_end = cfg_.base_url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = cfg_.base_url.find('/', host_start);
    if (path_start == std::string::npos) {
      root_ = cfg_.base_url;
    } else {
      root_ = cfg_.base_url.substr(0, path_start);
      prefix_ = cfg_.base_url.substr(path_start);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
  }

  std::string complete(const GenerationRequest& request) override {
    httplib::Client client(root_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        cfg_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    json body{{"model", cfg_.model_name},
              {"messages", json::array({json{{"role", "user"},
                                             {"content", request.prompt.text}}})},
              {"temperature", cfg_.temperature},
              {"seed", request.seed}};
    httplib::Headers headers;
    if (!cfg_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    auto res = client.Post(prefix_ + "/v1/chat/completions", headers,
                           body.dump(), "application/json");
    if (!res)
      throw TransportError("no response from " + root_ + ": " +
                           httplib::to_string(res.error()));
    if (res->status != 200)
      throw TransportError("HTTP " + std::to_string(res->status));
    json reply;
    try {
      reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed completion envelope: ") +
                           e.what());
    }
  }

  std::string model_name() const override { return cfg_.model_name; }

  int max_parallelism() const override { return cfg_.max_concurrency; }

 private:
  EndpointConfig cfg_;
  std::string root_;
  std::string prefix_;
};

// -------------------------------------------------------------------------
// Batch execution.

struct BatchOptions {
  int max_concurrency = 4;
  int max_retries = 3;          // transport retries per request
  int retry_malformed = 0;      // extra attempts after content failures
  std::chrono::milliseconds backoff_base{250};
};

/// Runs every request, at most max_concurrency in flight, and returns one
/// outcome per request sorted by request_index. Transport failures retry
/// with exponential backoff; content failures retry only when
/// retry_malformed allows. Nothing throws per request — failures are data.
inline std::vector<GenerationOutcome> generate_batch(
    const std::vector<GenerationRequest>& requests, GenerationBackend& backend,
    const Taxonomy& taxonomy, const BatchOptions& options = {}) {
  if (requests.empty()) throw ConfigError("generate_batch: no requests");
  if (options.max_concurrency < 1)
    throw ConfigError("generate_batch: max_concurrency must be >= 1");
  {
    std::set<std::int64_t> indices;
    for (const auto& r : requests)
      if (!indices.insert(r.request_index).second)
        throw ConfigError("generate_batch: duplicate request_index " +
                          std::to_string(r.request_index));
  }

  auto run_one = [&](const GenerationRequest& request) -> GenerationOutcome {
    GenerationOutcome outcome;
    outcome.request_index = request.request_index;
    GenerationRequest attempt_request = request;
    int content_attempts = 0;
    while (true) {
      std::string raw;
      bool have_raw = false;
      for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        try {
          raw = backend.complete(attempt_request);
          have_raw = true;
          break;
        } catch (const TransportError& e) {
          if (attempt == options.max_retries) {
            outcome.failure = GenerationFailure{FailureKind::transport, e.what()};
            return outcome;
          }
          std::this_thread::sleep_for(options.backoff_base * (1ll << attempt));
        } catch (const std::exception& e) {
          // Non-transport backend error: deterministic, not worth retrying.
          outcome.failure = GenerationFailure{FailureKind::transport, e.what()};
          return outcome;
        }
      }
      if (!have_raw) return outcome;

      auto parsed = parse_output(raw, attempt_request, taxonomy,
                                 backend.model_name());
      if (std::holds_alternative<Proposal>(parsed)) {
        outcome.proposal = std::get<Proposal>(std::move(parsed));
        outcome.failure.reset();
        return outcome;
      }
      outcome.failure = std::get<GenerationFailure>(std::move(parsed));
      if (content_attempts >= options.retry_malformed) return outcome;
      ++content_attempts;
      attempt_request.seed =
          derive_seed(request.seed, "content-retry", content_attempts);
    }
  };

  std::vector<GenerationOutcome> outcomes(requests.size());
  const int workers =
      std::min<int>({options.max_concurrency, backend.max_parallelism(),
                     static_cast<int>(requests.size())});
  if (workers <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i)
      outcomes[i] = run_one(requests[i]);
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= requests.size()) break;
        outcomes[i] = run_one(requests[i]);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::sort(outcomes.begin(), outcomes.end(),
            [](const GenerationOutcome& a, const GenerationOutcome& b) {
              return a.request_index < b.request_index;
            });
  return outcomes;
}

}  // namespace hiaug
