#include "synspace/analysis.hpp"

#include <charconv>

#include "synspace/error.hpp"

namespace synspace {

double compactness(const EmbeddingSet& set) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "compactness of an empty set");
  const std::size_t n = set.size();
  const std::size_t dim = set.dim();
  const auto origin = set.row(0);

  std::vector<double> shift_mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = set.row(i);
    for (std::size_t d = 0; d < dim; ++d) shift_mean[d] += static_cast<double>(r[d]) - static_cast<double>(origin[d]);
  }
  for (double& x : shift_mean) x /= static_cast<double>(n);

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = set.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      const double dev = (static_cast<double>(r[d]) - static_cast<double>(origin[d])) - shift_mean[d];
      trace += dev * dev;
    }
  }
  return 1.0 - trace / static_cast<double>(n);
}

CompactnessReport compactness_report(const std::vector<NamedGroup>& groups) {
  if (groups.empty()) throw Error(ErrorCode::EmptySet, "no groups");
  CompactnessReport rep;
  double acc = 0.0;
  for (const auto& g : groups) {
    const double c = compactness(g.members);
    rep.per_group.emplace_back(g.group_id, c);
    acc += c;
  }
  rep.mean_compactness = acc / static_cast<double>(groups.size());
  return rep;
}

PopulationComparison compare_populations(const std::vector<NamedGroup>& groups_a,
                                         const std::vector<NamedGroup>& groups_b) {
  return {compactness_report(groups_a), compactness_report(groups_b)};
}

std::string report_csv(const CompactnessReport& report, const std::string& population) {
  std::string out;
  char buf[64];
  for (const auto& [id, c] : report.per_group) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), c);
    out += population + "," + id + "," + std::string(buf, res.ptr) + "\n";
  }
  return out;
}

std::string comparison_csv(const PopulationComparison& cmp) {
  return "population,group_id,compactness\n" + report_csv(cmp.a, "a") + report_csv(cmp.b, "b");
}

}  // namespace synspace
