#pragma once

#include <string>
#include <vector>

#include "synspace/embedding.hpp"

namespace synspace {

/// 1 - Tr(Sigma) with the 1/n covariance, i.e. 1 - (1/n) sum ||f_i - mu||^2.
/// Deviations are taken relative to the first member, so a set of identical
/// vectors yields exactly 1.
double compactness(const EmbeddingSet& set);

struct NamedGroup {
  std::string group_id;
  EmbeddingSet members;
};

struct CompactnessReport {
  std::vector<std::pair<std::string, double>> per_group;
  double mean_compactness = 0.0;
};

CompactnessReport compactness_report(const std::vector<NamedGroup>& groups);

struct PopulationComparison {
  CompactnessReport a;
  CompactnessReport b;
};

PopulationComparison compare_populations(const std::vector<NamedGroup>& groups_a,
                                         const std::vector<NamedGroup>& groups_b);

/// "population,group_id,compactness" rows, population b omitted when empty.
std::string comparison_csv(const PopulationComparison& cmp);
std::string report_csv(const CompactnessReport& report, const std::string& population = "a");

}  // namespace synspace
