#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "synspace/embedding.hpp"
#include "synspace/textgen.hpp"

namespace synspace {

struct SynthParams {
  std::uint64_t seed = 7;
  std::size_t classes = 5;
  std::size_t synonyms = 40;     // texts per class, outliers included
  double outlier_rate = 0.1;     // fraction of each class's texts that are planted outliers
  std::size_t queries = 500;
  std::size_t dim = 64;
  std::size_t subconcepts = 4;   // synonym clusters per class
  std::size_t episodes = 20;
  std::size_t views = 64;        // views per TTA episode, original first
  double class_overlap = 0.8;    // weight of a shared domain direction in every class
  double concept_spread = 0.25;  // sub-concept offset from the class direction
  double synonym_noise = 0.15;   // member offset from its sub-concept
  double query_noise = 1.5;      // image-embedding offset from its sub-concept
  double view_noise = 0.5;       // augmentation offset from the original view
  bool coherent_outliers = true; // a class's outliers share one confusable concept
};

struct SynthClass {
  ClassLexicon lexicon;
  EmbeddingSet embeddings;  // labels are the rendered texts
  std::vector<std::size_t> outliers;
};

/// K directional clusters, each made of sub-concept clusters, with a fixed
/// number of planted outliers per class drawn from other classes' concepts.
struct SynthBenchmark {
  SynthParams params;
  std::vector<SynthClass> classes;
  EmbeddingSet queries;  // labels are decimal class ids
  std::vector<EmbeddingSet> episodes;  // row 0 labelled "original:<k>", others "view:<i>"
};

std::size_t planted_outlier_count(const SynthParams& params);

SynthBenchmark generate_benchmark(const SynthParams& params);

/// Layout: lexicon.json, embeddings/<k>.s3em, queries.s3em,
/// episodes/ep_NNNN.s3em, manifest.json.
void write_benchmark(const SynthBenchmark& bench, const std::filesystem::path& dir);

}  // namespace synspace
