#include "synspace/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include <json.hpp>

#include "synspace/embedding_io.hpp"
#include "synspace/error.hpp"
#include "synspace/hashing.hpp"

namespace synspace {
namespace {

using nlohmann::ordered_json;

constexpr const char* kCatalogFile = "catalog.json";

std::string class_file_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "class_%04d.s3em", id);
  return buf;
}

std::string_view core_mode_name(CoreMode mode) {
  return mode == CoreMode::FixedThreshold ? "fixed" : "auto";
}

ordered_json metric_json(const MetricConfig& m) {
  ordered_json j;
  j["kind"] = std::string(metric_name(m.kind));
  j["neighborhood_n"] = m.neighborhood_n;
  j["subspace_dims"] = m.subspace_dims;
  j["renormalize_mean"] = m.renormalize_mean;
  return j;
}

MetricConfig metric_from_json(const nlohmann::json& j) {
  MetricConfig m;
  m.kind = parse_metric(j.at("kind").get<std::string>());
  m.neighborhood_n = j.at("neighborhood_n").get<std::size_t>();
  m.subspace_dims = j.at("subspace_dims").get<std::size_t>();
  m.renormalize_mean = j.at("renormalize_mean").get<bool>();
  return m;
}

ordered_json filter_json(const FilterConfig& f) {
  ordered_json j;
  j["mode"] = std::string(filter_mode_name(f.mode));
  j["epsilon"] = f.epsilon;
  return j;
}

}  // namespace

std::string_view filter_mode_name(FilterMode mode) noexcept {
  switch (mode) {
    case FilterMode::FixedThreshold: return "fixed";
    case FilterMode::AutoPersistence: return "auto";
    case FilterMode::Unfiltered: return "none";
  }
  return "unknown";
}

FilterMode parse_filter_mode(std::string_view name) {
  if (name == "fixed") return FilterMode::FixedThreshold;
  if (name == "auto") return FilterMode::AutoPersistence;
  if (name == "none") return FilterMode::Unfiltered;
  throw Error(ErrorCode::InvalidConfig, "unknown epsilon mode '" + std::string(name) + "'");
}

std::optional<EmbeddingSet> DirectoryEmbeddingProvider::embeddings_for(int class_id, const ClassLexicon& lexicon) const {
  const std::string stems[] = {std::to_string(class_id), lexicon.class_name};
  for (const auto& stem : stems) {
    for (const char* ext : {".s3em", ".tsv"}) {
      const auto p = dir_ / (stem + ext);
      if (std::filesystem::exists(p)) return load_embeddings(p);
    }
  }
  return std::nullopt;
}

std::optional<EmbeddingSet> InMemoryEmbeddingProvider::embeddings_for(int class_id, const ClassLexicon&) const {
  const auto it = sets_.find(class_id);
  if (it == sets_.end()) return std::nullopt;
  return it->second;
}

CoreComponent select_core(const EmbeddingSet& embeddings, const FilterConfig& filter) {
  if (filter.mode == FilterMode::Unfiltered) {
    if (embeddings.empty()) throw Error(ErrorCode::EmptySet, "cannot extract a component from an empty set");
    CoreComponent core;
    core.members.resize(embeddings.size());
    for (std::size_t i = 0; i < core.members.size(); ++i) core.members[i] = i;
    core.epsilon_used = -1.0;
    return core;
  }
  TopologyConfig cfg;
  cfg.mode = filter.mode == FilterMode::FixedThreshold ? CoreMode::FixedThreshold : CoreMode::AutoPersistence;
  cfg.fixed_epsilon = filter.epsilon;
  return largest_component(embeddings, cfg);
}

ClassCatalog ClassCatalog::build(const std::vector<ClassLexicon>& lexicons, const EmbeddingProvider& provider,
                                 const FilterConfig& filter, const MetricConfig& metric) {
  if (lexicons.empty()) throw Error(ErrorCode::EmptySet, "catalog needs at least one class");
  ClassCatalog cat;
  cat.filter_ = filter;
  cat.metric_ = metric;
  for (std::size_t k = 0; k < lexicons.size(); ++k) {
    const int id = static_cast<int>(k);
    const auto& lex = lexicons[k];
    auto texts = combine(lex, id).texts;
    auto raw = provider.embeddings_for(id, lex);
    if (!raw || raw->empty()) {
      throw Error(ErrorCode::MissingEmbeddings, "no embeddings for class " + std::to_string(id) + " '" + lex.class_name + "'");
    }
    if (raw->size() != texts.size()) {
      throw Error(ErrorCode::DimensionMismatch, "class '" + lex.class_name + "' has " + std::to_string(texts.size()) +
                                                    " texts but " + std::to_string(raw->size()) + " embeddings");
    }
    if (raw->has_labels() && raw->labels() != texts) {
      throw Error(ErrorCode::DimensionMismatch, "embedding labels of class '" + lex.class_name +
                                                    "' do not match its rendered texts");
    }
    if (cat.dim_ == 0) cat.dim_ = raw->dim();
    if (raw->dim() != cat.dim_) {
      throw Error(ErrorCode::DimensionMismatch, "class '" + lex.class_name + "' has dim " + std::to_string(raw->dim()) +
                                                    ", catalog dim is " + std::to_string(cat.dim_));
    }
    auto embeddings = raw->normalized();
    auto core = select_core(embeddings, filter);
    if (core.members.empty()) throw Error(ErrorCode::EmptyCore, "class '" + lex.class_name + "'");
    SemanticSpace space(embeddings.subset(core.members), metric);
    cat.classes_.push_back(ClassEntry{id, lex, std::move(texts), std::move(embeddings), std::move(core), std::move(space)});
  }
  cat.compute_hash();
  return cat;
}

void ClassCatalog::compute_hash() {
  Sha256 h;
  h.update_field(filter_json(filter_).dump());
  h.update_field(metric_json(metric_).dump());
  for (const auto& c : classes_) {
    h.update_field(dump_lexicon_cache({c.lexicon}));
    const auto bytes = encode_s3em(c.embeddings);
    h.update_field(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  input_hash_ = h.hex_digest();
}

ClassCatalog ClassCatalog::with_metric(const MetricConfig& metric) const {
  ClassCatalog cat;
  cat.dim_ = dim_;
  cat.filter_ = filter_;
  cat.metric_ = metric;
  for (const auto& c : classes_) {
    SemanticSpace space(c.embeddings.subset(c.core.members), metric);
    cat.classes_.push_back(ClassEntry{c.id, c.lexicon, c.texts, c.embeddings, c.core, std::move(space)});
  }
  cat.compute_hash();
  return cat;
}

void ClassCatalog::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  ordered_json doc;
  doc["format"] = "synspace-catalog";
  doc["version"] = 1;
  doc["input_hash"] = input_hash_;
  doc["dim"] = dim_;
  doc["filter"] = filter_json(filter_);
  doc["metric"] = metric_json(metric_);
  auto classes = ordered_json::array();
  for (const auto& c : classes_) {
    ordered_json e;
    e["id"] = c.id;
    e["name"] = c.lexicon.class_name;
    e["dataset"] = c.lexicon.dataset_name;
    e["synonyms"] = c.lexicon.synonyms;
    e["descriptors"] = c.lexicon.descriptors;
    e["embeddings"] = class_file_name(c.id);
    e["core"] = {{"members", c.core.members},
                 {"epsilon_used", c.core.epsilon_used},
                 {"mode", std::string(core_mode_name(c.core.mode))}};
    classes.push_back(std::move(e));
    save_embeddings(c.embeddings, dir / class_file_name(c.id));
  }
  doc["classes"] = std::move(classes);
  write_file_atomic(dir / kCatalogFile, doc.dump(2) + "\n");
}

ClassCatalog ClassCatalog::load(const std::filesystem::path& dir) {
  const auto bytes = read_file_bytes(dir / kCatalogFile);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "catalog: " + std::string(e.what()));
  }
  ClassCatalog cat;
  try {
    if (doc.at("format").get<std::string>() != "synspace-catalog") throw Error(ErrorCode::ParseError, "not a catalog");
    cat.dim_ = doc.at("dim").get<std::size_t>();
    cat.filter_.mode = parse_filter_mode(doc.at("filter").at("mode").get<std::string>());
    cat.filter_.epsilon = doc.at("filter").at("epsilon").get<double>();
    cat.metric_ = metric_from_json(doc.at("metric"));
    for (const auto& e : doc.at("classes")) {
      ClassLexicon lex{e.at("name").get<std::string>(), e.at("dataset").get<std::string>(),
                       e.at("synonyms").get<std::vector<std::string>>(),
                       e.at("descriptors").get<std::vector<std::string>>()};
      const int id = e.at("id").get<int>();
      if (id != static_cast<int>(cat.classes_.size())) throw Error(ErrorCode::ParseError, "class ids must be contiguous");
      auto embeddings = load_embeddings(dir / e.at("embeddings").get<std::string>());
      if (embeddings.dim() != cat.dim_) throw Error(ErrorCode::DimensionMismatch, "class " + std::to_string(id));
      CoreComponent core;
      core.members = e.at("core").at("members").get<std::vector<std::size_t>>();
      core.epsilon_used = e.at("core").at("epsilon_used").get<double>();
      core.mode = e.at("core").at("mode").get<std::string>() == "auto" ? CoreMode::AutoPersistence : CoreMode::FixedThreshold;
      if (core.members.empty()) throw Error(ErrorCode::EmptyCore, "class " + std::to_string(id));
      for (auto m : core.members) {
        if (m >= embeddings.size()) throw Error(ErrorCode::ParseError, "core index out of range in class " + std::to_string(id));
      }
      auto texts = combine(lex, id).texts;
      SemanticSpace space(embeddings.subset(core.members), cat.metric_);
      cat.classes_.push_back(ClassEntry{id, std::move(lex), std::move(texts), std::move(embeddings), std::move(core), std::move(space)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "catalog: " + std::string(e.what()));
  }
  if (cat.classes_.empty()) throw Error(ErrorCode::EmptySet, "catalog has no classes");
  cat.compute_hash();
  return cat;
}

std::vector<double> ClassCatalog::scores(std::span<const float> g) const {
  if (g.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "query dim " + std::to_string(g.size()) + " vs catalog dim " + std::to_string(dim_));
  }
  std::vector<double> out;
  out.reserve(classes_.size());
  for (const auto& c : classes_) out.push_back(c.space.score(g));
  return out;
}

int argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptySet, "argmax of no scores");
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return static_cast<int>(best);
}

Prediction predict(std::span<const float> g, const ClassCatalog& catalog) {
  Prediction p;
  p.scores = catalog.scores(g);
  p.class_id = argmax_lowest(p.scores);
  return p;
}

EvaluationReport evaluate(const EmbeddingSet& queries, std::span<const int> labels, const ClassCatalog& catalog) {
  if (queries.empty()) throw Error(ErrorCode::EmptyQuerySet, "no queries to evaluate");
  if (labels.size() != queries.size()) throw Error(ErrorCode::DimensionMismatch, "one label per query required");
  const auto k_count = catalog.class_count();
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= k_count) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(l) + " outside [0, " + std::to_string(k_count) + ")");
    }
  }

  EvaluationReport rep;
  rep.total = queries.size();
  rep.predictions.assign(queries.size(), 0);
  // Predictions land in fixed slots, so the reduction below is order-independent
  // of thread scheduling.
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  const std::size_t chunk = (queries.size() + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(queries.size(), (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) rep.predictions[i] = predict(queries.row(i), catalog).class_id;
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  rep.confusion.assign(k_count, std::vector<std::size_t>(k_count, 0));
  rep.per_class_count.assign(k_count, 0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto truth = static_cast<std::size_t>(labels[i]);
    const auto pred = static_cast<std::size_t>(rep.predictions[i]);
    ++rep.confusion[truth][pred];
    ++rep.per_class_count[truth];
    if (truth == pred) ++rep.correct;
  }
  rep.top1_accuracy = static_cast<double>(rep.correct) / static_cast<double>(rep.total);
  rep.per_class_accuracy.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    rep.per_class_accuracy[k] = rep.per_class_count[k] == 0
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : static_cast<double>(rep.confusion[k][k]) / static_cast<double>(rep.per_class_count[k]);
  }
  return rep;
}

std::vector<int> integer_labels(const EmbeddingSet& queries) {
  if (!queries.has_labels()) throw Error(ErrorCode::ParseError, "query set has no labels");
  std::vector<int> out;
  out.reserve(queries.size());
  for (const auto& l : queries.labels()) {
    int v = 0;
    const auto res = std::from_chars(l.data(), l.data() + l.size(), v);
    if (res.ec != std::errc() || res.ptr != l.data() + l.size()) {
      throw Error(ErrorCode::ParseError, "query label '" + l + "' is not an integer");
    }
    out.push_back(v);
  }
  return out;
}

bool argmax_invariance_check(const ClassCatalog& catalog, std::span<const float> g) {
  const auto base = predict(g, catalog);
  constexpr std::pair<double, double> kTransforms[] = {{1.0, 0.0}, {0.5, 0.0}, {3.0, -2.0}, {100.0, 7.5}, {1e-3, 1.0}};
  for (const auto& [c, b] : kTransforms) {
    std::vector<double> t(base.scores.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = c * base.scores[k] + b;
    if (argmax_lowest(t) != base.class_id) return false;
  }
  return true;
}

}  // namespace synspace
