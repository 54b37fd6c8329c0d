#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hiaug/corpus.hpp"
#include "hiaug/text.hpp"

namespace hiaug {

// -------------------------------------------------------------------------
// TF-IDF vectorizer.

struct Vocabulary {
  std::vector<std::string> tokens;  // lexicographic; position = column index
  std::vector<std::int64_t> df;     // document frequency per token
  std::int64_t n_docs = 0;
  std::map<std::string, std::size_t> index;

  double idf(std::size_t i) const {
    return std::log(static_cast<double>(1 + n_docs) /
                    static_cast<double>(1 + df[i])) +
           1.0;
  }
};

struct FeatureVector {
  std::vector<std::pair<std::size_t, double>> entries;  // strictly increasing

  double norm() const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * w;
    return std::sqrt(s);
  }
};

/// Retains tokens with document frequency >= min_df, indexed in
/// lexicographic order.
inline Vocabulary fit_vectorizer(const LabeledCorpus& train, int min_df) {
  if (train.empty()) throw ValidationError("fit_vectorizer: empty training set");
  if (min_df < 1) throw ConfigError("min_df must be >= 1");

  std::map<std::string, std::int64_t> df;
  for (const auto& p : train) {
    std::set<std::string> seen;
    for (const auto& token : tokenize(p.abstract)) seen.insert(token);
    for (const auto& token : seen) ++df[token];
  }

  Vocabulary vocab;
  vocab.n_docs = static_cast<std::int64_t>(train.size());
  for (const auto& [token, count] : df) {
    if (count < min_df) continue;
    vocab.index.emplace(token, vocab.tokens.size());
    vocab.tokens.push_back(token);
    vocab.df.push_back(count);
  }
  if (vocab.tokens.empty())
    throw ValidationError("fit_vectorizer: vocabulary is empty after the "
                          "min_df filter");
  return vocab;
}

/// tf * idf, L2-normalized. Out-of-vocabulary tokens are ignored; an
/// all-OOV document maps to the zero vector.
inline FeatureVector transform(const Vocabulary& vocab, const std::string& text) {
  std::map<std::size_t, double> tf;
  for (const auto& token : tokenize(text)) {
    auto it = vocab.index.find(token);
    if (it != vocab.index.end()) tf[it->second] += 1.0;
  }
  FeatureVector out;
  out.entries.reserve(tf.size());
  for (const auto& [i, count] : tf)
    out.entries.emplace_back(i, count * vocab.idf(i));
  double norm = out.norm();
  if (norm > 0.0)
    for (auto& [i, w] : out.entries) w /= norm;
  return out;
}

// -------------------------------------------------------------------------
// One-vs-rest logistic regression over closure labels.

struct TrainConfig {
  int epochs = 200;
  double lr = 0.5;
  double l2 = 1e-4;
  double threshold = 0.5;
  int min_df = 2;
  std::uint64_t seed = 0;

  void check() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (l2 < 0.0) throw ConfigError("l2 strength must be non-negative");
    if (min_df < 1) throw ConfigError("min_df must be >= 1");
  }
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double dot(const FeatureVector& x, const std::vector<double>& w) {
  double s = 0.0;
  for (const auto& [i, v] : x.entries) s += v * w[i];
  return s;
}

/// Mean logistic loss plus (l2/2)*||w||^2; the bias is unregularized.
inline double logistic_objective(const std::vector<FeatureVector>& docs,
                                 const std::vector<int>& labels,
                                 const std::vector<double>& weights, double bias,
                                 double l2) {
  double loss = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double z = dot(docs[d], weights) + bias;
    // max(z,0) - y*z + log1p(exp(-|z|)) is the overflow-safe cross entropy
    loss += std::max(z, 0.0) - labels[d] * z + std::log1p(std::exp(-std::abs(z)));
  }
  loss /= static_cast<double>(docs.size());
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

inline void logistic_gradient(const std::vector<FeatureVector>& docs,
                              const std::vector<int>& labels,
                              const std::vector<double>& weights, double bias,
                              double l2, std::vector<double>& grad_w,
                              double& grad_b) {
  grad_w.assign(weights.size(), 0.0);
  grad_b = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double residual = sigmoid(dot(docs[d], weights) + bias) - labels[d];
    for (const auto& [i, v] : docs[d].entries) grad_w[i] += residual * v;
    grad_b += residual;
  }
  const double inv_m = 1.0 / static_cast<double>(docs.size());
  for (std::size_t i = 0; i < grad_w.size(); ++i)
    grad_w[i] = grad_w[i] * inv_m + l2 * weights[i];
  grad_b *= inv_m;
}

struct ClassModel {
  std::string code;
  std::vector<double> weights;
  double bias = 0.0;
};

/// Per-node binary classifiers plus the hierarchy slice needed to close
/// predictions, all in one self-contained artifact.
class HierarchicalModel {
 public:
  Vocabulary vocab;
  std::vector<ClassModel> classes;  // sorted by code
  TrainConfig config;
  std::map<std::string, std::string> parent;  // code -> parent ("" for roots)
  std::set<std::string> leaf_codes;
  std::vector<std::string> skipped;  // zero-positive classes

  const ClassModel* find(const std::string& code) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), code,
                               [](const ClassModel& m, const std::string& c) {
                                 return m.code < c;
                               });
    if (it == classes.end() || it->code != code) return nullptr;
    return &*it;
  }
};

/// Full-batch gradient descent from zero weights, summing in document
/// order, so one (train set, config) pair always produces bit-identical
/// weights.
inline HierarchicalModel train(const LabeledCorpus& train_set, const Taxonomy& t,
                               const TrainConfig& config) {
  config.check();
  if (train_set.empty()) throw ValidationError("train: empty training corpus");
  train_set.validate_labels(t);

  HierarchicalModel model;
  model.config = config;
  model.vocab = fit_vectorizer(train_set, config.min_df);
  for (const auto& node : t.nodes())
    model.parent[node.code] = node.parent.value_or("");
  for (const auto& leaf : t.leaves()) model.leaf_codes.insert(leaf);

  std::vector<FeatureVector> docs;
  docs.reserve(train_set.size());
  std::vector<std::set<std::string>> closures;
  closures.reserve(train_set.size());
  for (const auto& p : train_set) {
    docs.push_back(transform(model.vocab, p.abstract));
    closures.push_back(label_closure(p, t));
  }

  const std::size_t dim = model.vocab.tokens.size();
  for (const auto& code : t.codes()) {
    std::vector<int> labels(docs.size(), 0);
    std::int64_t positives = 0;
    for (std::size_t d = 0; d < docs.size(); ++d)
      if (closures[d].count(code)) {
        labels[d] = 1;
        ++positives;
      }
    if (positives == 0) {
      model.skipped.push_back(code);
      continue;
    }

    ClassModel cm;
    cm.code = code;
    cm.weights.assign(dim, 0.0);
    std::vector<double> grad(dim, 0.0);
    double grad_b = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      logistic_gradient(docs, labels, cm.weights, cm.bias, config.l2, grad,
                        grad_b);
      for (std::size_t i = 0; i < dim; ++i) cm.weights[i] -= config.lr * grad[i];
      cm.bias -= config.lr * grad_b;
    }
    model.classes.push_back(std::move(cm));
  }
  if (model.classes.empty())
    throw ValidationError("train: no class had a positive example");
  return model;
}

inline std::map<std::string, double> predict_scores(const HierarchicalModel& model,
                                                    const std::string& text) {
  const FeatureVector x = transform(model.vocab, text);
  std::map<std::string, double> scores;
  for (const auto& cm : model.classes)
    scores[cm.code] = sigmoid(dot(x, cm.weights) + cm.bias);
  return scores;
}

/// Adds every ancestor of each member; model.parent covers all taxonomy
/// codes, so closure never dangles.
inline std::set<std::string> consistency_closure(const HierarchicalModel& model,
                                                 std::set<std::string> codes) {
  std::vector<std::string> stack(codes.begin(), codes.end());
  while (!stack.empty()) {
    std::string code = stack.back();
    stack.pop_back();
    auto it = model.parent.find(code);
    if (it == model.parent.end() || it->second.empty()) continue;
    if (codes.insert(it->second).second) stack.push_back(it->second);
  }
  return codes;
}

/// Thresholded multi-label prediction with hierarchy-consistency closure.
/// An all-below-threshold document falls back to the argmax-scoring leaf,
/// so predictions are never empty.
inline std::set<std::string> predict(const HierarchicalModel& model,
                                     const std::string& text, double threshold) {
  const auto scores = predict_scores(model, text);
  std::set<std::string> raw;
  for (const auto& [code, score] : scores)
    if (score >= threshold) raw.insert(code);

  if (raw.empty()) {
    std::string best;
    double best_score = -1.0;
    for (const auto& [code, score] : scores) {
      if (!model.leaf_codes.count(code)) continue;
      if (score > best_score) {
        best_score = score;
        best = code;
      }
    }
    if (best.empty())  // no trained leaf; fall back to the best node
      for (const auto& [code, score] : scores)
        if (score > best_score) {
          best_score = score;
          best = code;
        }
    raw.insert(best);
  }
  return consistency_closure(model, std::move(raw));
}

inline std::set<std::string> predict(const HierarchicalModel& model,
                                     const std::string& text) {
  return predict(model, text, model.config.threshold);
}

// -------------------------------------------------------------------------
// Model artifact: single binary file, little-endian, format version 1.

namespace detail {

struct BinWriter {
  std::ostream& out;

  void u8(std::uint8_t v) { out.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
  }
  void str(const std::string& s) {
    u64(s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
};

struct BinReader {
  std::istream& in;

  std::uint8_t u8() {
    int c = in.get();
    if (c == EOF) throw ValidationError("model file truncated");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string str() {
    auto len = u64();
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (static_cast<std::uint64_t>(in.gcount()) != len)
      throw ValidationError("model file truncated");
    return s;
  }
};

}  // namespace detail

inline constexpr char kModelMagic[8] = {'H', 'A', 'U', 'G', 'M', 'D', 'L', '1'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

inline void save_model(const HierarchicalModel& model, std::ostream& out,
                       const std::string& config_hash = "",
                       std::uint64_t run_seed = 0) {
  detail::BinWriter w{out};
  out.write(kModelMagic, sizeof(kModelMagic));
  w.u32(kModelFormatVersion);
  w.str(config_hash);
  w.u64(run_seed);

  w.u32(static_cast<std::uint32_t>(model.config.epochs));
  w.f64(model.config.lr);
  w.f64(model.config.l2);
  w.f64(model.config.threshold);
  w.u32(static_cast<std::uint32_t>(model.config.min_df));
  w.u64(model.config.seed);

  w.u64(static_cast<std::uint64_t>(model.vocab.n_docs));
  w.u64(model.vocab.tokens.size());
  for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i) {
    w.str(model.vocab.tokens[i]);
    w.u64(static_cast<std::uint64_t>(model.vocab.df[i]));
  }

  w.u64(model.classes.size());
  for (const auto& cm : model.classes) {
    w.str(cm.code);
    w.f64(cm.bias);
    w.u64(cm.weights.size());
    for (double v : cm.weights) w.f64(v);
  }

  w.u64(model.parent.size());
  for (const auto& [code, parent] : model.parent) {
    w.str(code);
    w.str(parent);
    w.u8(model.leaf_codes.count(code) ? 1 : 0);
  }

  w.u64(model.skipped.size());
  for (const auto& code : model.skipped) w.str(code);
}

inline HierarchicalModel load_model(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw ValidationError("not a model file (bad magic)");
  detail::BinReader r{in};
  if (r.u32() != kModelFormatVersion)
    throw ValidationError("unsupported model format version");
  r.str();  // config_hash, informational
  r.u64();  // run seed, informational

  HierarchicalModel model;
  model.config.epochs = static_cast<int>(r.u32());
  model.config.lr = r.f64();
  model.config.l2 = r.f64();
  model.config.threshold = r.f64();
  model.config.min_df = static_cast<int>(r.u32());
  model.config.seed = r.u64();

  model.vocab.n_docs = static_cast<std::int64_t>(r.u64());
  auto n_tokens = r.u64();
  for (std::uint64_t i = 0; i < n_tokens; ++i) {
    std::string token = r.str();
    model.vocab.index.emplace(token, model.vocab.tokens.size());
    model.vocab.tokens.push_back(std::move(token));
    model.vocab.df.push_back(static_cast<std::int64_t>(r.u64()));
  }

  auto n_classes = r.u64();
  for (std::uint64_t i = 0; i < n_classes; ++i) {
    ClassModel cm;
    cm.code = r.str();
    cm.bias = r.f64();
    auto dim = r.u64();
    cm.weights.resize(dim);
    for (auto& v : cm.weights) v = r.f64();
    model.classes.push_back(std::move(cm));
  }

  auto n_nodes = r.u64();
  for (std::uint64_t i = 0; i < n_nodes; ++i) {
    std::string code = r.str();
    model.parent[code] = r.str();
    if (r.u8()) model.leaf_codes.insert(code);
  }

  auto n_skipped = r.u64();
  for (std::uint64_t i = 0; i < n_skipped; ++i) model.skipped.push_back(r.str());
  return model;
}

inline void save_model_file(const HierarchicalModel& model, const std::string& path,
                            const std::string& config_hash = "",
                            std::uint64_t run_seed = 0) {
  auto out = open_output(path);
  save_model(model, out, config_hash, run_seed);
  if (!out) throw ConfigError("failed writing model file: " + path);
}

inline HierarchicalModel load_model_file(const std::string& path) {
  auto in = open_input(path);
  return load_model(in);
}

}  // namespace hiaug
