#include "synspace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "synspace/embedding_io.hpp"
#include "synspace/error.hpp"
#include "synspace/rng.hpp"

namespace synspace {
namespace {

std::vector<double> offset(const std::vector<double>& base, const std::vector<double>& dir, double scale) {
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + scale * dir[i];
  return out;
}

std::vector<double> unit(std::vector<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double n = std::sqrt(sq);
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> perturb(Rng& rng, const std::vector<double>& base, double scale) {
  return unit(offset(base, rng.direction(base.size()), scale));
}

std::string two_digits(std::size_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02zu", v);
  return buf;
}

}  // namespace

std::size_t planted_outlier_count(const SynthParams& params) {
  return static_cast<std::size_t>(std::llround(params.outlier_rate * static_cast<double>(params.synonyms)));
}

SynthBenchmark generate_benchmark(const SynthParams& p) {
  if (!(p.outlier_rate >= 0.0 && p.outlier_rate < 1.0)) {
    throw Error(ErrorCode::InvalidRate, "outlier rate must lie in [0, 1)");
  }
  if (p.classes < 2) throw Error(ErrorCode::InvalidConfig, "at least two classes required");
  if (p.synonyms == 0 || p.dim == 0 || p.subconcepts == 0) {
    throw Error(ErrorCode::InvalidConfig, "synonyms, dim and subconcepts must be positive");
  }
  const std::size_t n_out = planted_outlier_count(p);
  if (n_out >= p.synonyms) throw Error(ErrorCode::InvalidRate, "outlier rate leaves no genuine synonyms");
  if (p.episodes > 0 && p.views == 0) throw Error(ErrorCode::InvalidConfig, "episodes need at least one view");

  Rng rng(p.seed);
  SynthBenchmark bench;
  bench.params = p;

  if (!(p.class_overlap >= 0.0 && p.class_overlap < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "class overlap must lie in [0, 1)");
  }
  // Classes of one dataset share a domain direction; class_overlap is the
  // squared weight of that shared part.
  const auto domain = rng.direction(p.dim);
  std::vector<std::vector<double>> class_dirs;
  std::vector<std::vector<std::vector<double>>> concepts(p.classes);
  for (std::size_t k = 0; k < p.classes; ++k) {
    const auto own = rng.direction(p.dim);
    std::vector<double> dir(p.dim);
    for (std::size_t i = 0; i < p.dim; ++i) {
      dir[i] = std::sqrt(p.class_overlap) * domain[i] + std::sqrt(1.0 - p.class_overlap) * own[i];
    }
    class_dirs.push_back(unit(std::move(dir)));
    for (std::size_t j = 0; j < p.subconcepts; ++j) concepts[k].push_back(perturb(rng, class_dirs[k], p.concept_spread));
  }

  for (std::size_t k = 0; k < p.classes; ++k) {
    SynthClass cls;
    const std::string name = "class" + two_digits(k);
    std::vector<std::string> synonyms{name};
    for (std::size_t s = 1; s < p.synonyms; ++s) synonyms.push_back(name + "-syn" + two_digits(s));
    cls.lexicon = make_lexicon(name, "synthetic", synonyms, {});

    // Choose outlier slots with a partial Fisher-Yates shuffle. Slot 0 is the
    // class name itself and always genuine.
    std::vector<std::size_t> slots(p.synonyms - 1);
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i + 1;
    for (std::size_t i = 0; i < n_out; ++i) std::swap(slots[i], slots[i + rng.below(slots.size() - i)]);
    cls.outliers.assign(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(n_out));
    std::sort(cls.outliers.begin(), cls.outliers.end());

    // Coherent hallucinations all name the same wrong concept, as when the
    // language model confuses the class with a neighbouring one.
    std::size_t confuser = rng.below(p.classes - 1);
    if (confuser >= k) ++confuser;
    const std::size_t confuser_concept = rng.below(p.subconcepts);

    const auto texts = combine(cls.lexicon, static_cast<int>(k)).texts;
    cls.embeddings = EmbeddingSet(p.dim);
    std::size_t genuine = 0;
    for (std::size_t i = 0; i < p.synonyms; ++i) {
      std::vector<double> v;
      if (std::binary_search(cls.outliers.begin(), cls.outliers.end(), i)) {
        // A hallucinated synonym: it sits on a concept of some other class.
        if (p.coherent_outliers) {
          v = perturb(rng, concepts[confuser][confuser_concept], p.synonym_noise);
        } else {
          std::size_t other = rng.below(p.classes - 1);
          if (other >= k) ++other;
          v = perturb(rng, concepts[other][rng.below(p.subconcepts)], p.synonym_noise);
        }
      } else {
        v = perturb(rng, concepts[k][genuine++ % p.subconcepts], p.synonym_noise);
      }
      const auto e = normalize(std::span<const double>(v));
      cls.embeddings.add(e.values(), texts[i]);
    }
    bench.classes.push_back(std::move(cls));
  }

  bench.queries = EmbeddingSet(p.dim);
  for (std::size_t q = 0; q < p.queries; ++q) {
    const std::size_t k = rng.below(p.classes);
    const auto v = perturb(rng, concepts[k][rng.below(p.subconcepts)], p.query_noise);
    bench.queries.add(normalize(std::span<const double>(v)).values(), std::to_string(k));
  }

  for (std::size_t e = 0; e < p.episodes; ++e) {
    const std::size_t k = rng.below(p.classes);
    const auto original = perturb(rng, concepts[k][rng.below(p.subconcepts)], p.query_noise);
    EmbeddingSet views(p.dim);
    views.add(normalize(std::span<const double>(original)).values(), "original:" + std::to_string(k));
    for (std::size_t i = 1; i < p.views; ++i) {
      const auto v = perturb(rng, original, p.view_noise);
      views.add(normalize(std::span<const double>(v)).values(), "view:" + std::to_string(i));
    }
    bench.episodes.push_back(std::move(views));
  }
  return bench;
}

void write_benchmark(const SynthBenchmark& bench, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "embeddings");
  std::vector<ClassLexicon> lexicons;
  nlohmann::ordered_json manifest;
  const auto& p = bench.params;
  manifest["generator"] = "synspace synth";
  manifest["params"] = {{"seed", p.seed},
                        {"classes", p.classes},
                        {"synonyms", p.synonyms},
                        {"outlier_rate", p.outlier_rate},
                        {"queries", p.queries},
                        {"dim", p.dim},
                        {"subconcepts", p.subconcepts},
                        {"episodes", p.episodes},
                        {"views", p.views},
                        {"class_overlap", p.class_overlap},
                        {"concept_spread", p.concept_spread},
                        {"synonym_noise", p.synonym_noise},
                        {"query_noise", p.query_noise},
                        {"view_noise", p.view_noise},
                        {"coherent_outliers", p.coherent_outliers}};
  auto classes = nlohmann::ordered_json::array();
  std::size_t total_outliers = 0;
  for (std::size_t k = 0; k < bench.classes.size(); ++k) {
    const auto& c = bench.classes[k];
    lexicons.push_back(c.lexicon);
    save_embeddings(c.embeddings, dir / "embeddings" / (std::to_string(k) + ".s3em"));
    classes.push_back({{"id", k},
                       {"name", c.lexicon.class_name},
                       {"texts", c.embeddings.size()},
                       {"outliers", c.outliers}});
    total_outliers += c.outliers.size();
  }
  manifest["classes"] = std::move(classes);
  manifest["total_outliers"] = total_outliers;
  manifest["query_count"] = bench.queries.size();
  manifest["episode_count"] = bench.episodes.size();

  save_lexicon_cache(lexicons, dir / "lexicon.json");
  save_embeddings(bench.queries, dir / "queries.s3em");
  if (!bench.episodes.empty()) {
    std::filesystem::create_directories(dir / "episodes");
    for (std::size_t e = 0; e < bench.episodes.size(); ++e) {
      char name[32];
      std::snprintf(name, sizeof(name), "ep_%04zu.s3em", e);
      save_embeddings(bench.episodes[e], dir / "episodes" / name);
    }
  }
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace synspace
