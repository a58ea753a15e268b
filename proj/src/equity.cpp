#include "tractequity/equity.hpp"

#include <algorithm>
#include <set>

namespace tractequity {

std::size_t InequityTable::undefined_count() const {
  return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), false));
}

std::size_t InequityTable::group_index(std::string_view group) const {
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g] == group) return g;
  throw ValidationError("unknown group '" + std::string(group) + "'");
}

InequityTable inequity_index(const Matrix& distance, const Matrix& commuters,
                             std::vector<std::string> tract_ids, std::vector<std::string> groups) {
  if (distance.rows() != commuters.rows() || distance.cols() != commuters.cols() ||
      static_cast<std::size_t>(distance.rows()) != tract_ids.size() ||
      static_cast<std::size_t>(distance.cols()) != groups.size())
    throw ValidationError("inequity_index: table dimensions disagree");
  if ((distance.array() < 0.0).any() || (commuters.array() < 0.0).any())
    throw ValidationError("inequity_index: negative distance or commuter entry");

  InequityTable out;
  out.tract_ids = std::move(tract_ids);
  out.groups = std::move(groups);
  out.index = Matrix::Constant(distance.rows(), distance.cols(), kNaN);
  out.defined.assign(static_cast<std::size_t>(distance.rows()), false);
  for (Eigen::Index j = 0; j < distance.rows(); ++j) {
    const double dj = distance.row(j).sum();
    const double cj = commuters.row(j).sum();
    if (!(dj > 0.0) || !(cj > 0.0)) continue;
    out.defined[static_cast<std::size_t>(j)] = true;
    for (Eigen::Index g = 0; g < distance.cols(); ++g)
      out.index(j, g) = distance(j, g) / dj - commuters(j, g) / cj;
  }
  return out;
}

InequityTable inequity_index(const TraversalTable& t, bool exclude_home) {
  return inequity_index(t.distances(exclude_home), t.commuters, t.tract_ids, t.groups);
}

double population_weighted_mean(const InequityTable& index, const TractSet& tracts,
                                const std::vector<std::string>& subset, std::string_view group) {
  const auto g = static_cast<Eigen::Index>(index.group_index(group));
  std::set<std::string> members(subset.begin(), subset.end());
  double num = 0.0, den = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < index.tract_ids.size(); ++j) {
    if (!index.defined[j] || !members.count(index.tract_ids[j])) continue;
    const double pop = tracts.population()[static_cast<Eigen::Index>(tracts.index_of(index.tract_ids[j]))];
    num += pop * index.index(static_cast<Eigen::Index>(j), g);
    den += pop;
    ++used;
  }
  if (used == 0) throw RangeError("population_weighted_mean: no defined tracts in subset");
  if (!(den > 0.0)) throw RangeError("population_weighted_mean: subset has zero population");
  return num / den;
}

std::vector<std::string> corridor_subset(const TractSet& tracts, const HighwayNetworkGeom& highways,
                                         std::string_view route_label, double buffer_m) {
  std::vector<const Highway*> lines;
  for (const auto& h : highways.polylines)
    if (h.label == route_label) lines.push_back(&h);
  if (lines.empty()) {
    std::string known;
    for (const auto& l : highways.labels()) known += (known.empty() ? "" : ", ") + l;
    throw ValidationError("unknown route label '" + std::string(route_label) +
                          "' (available: " + known + ")");
  }
  std::vector<std::string> out;
  for (std::size_t j = 0; j < tracts.size(); ++j)
    for (const Highway* h : lines)
      if (polyline_touches(tracts.polygon(j), h->line, buffer_m)) {
        out.push_back(tracts.id(j));
        break;
      }
  return out;
}

std::vector<std::string> highway_subset(const TractSet& tracts, const HighwayNetworkGeom& highways,
                                        double buffer_m) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < tracts.size(); ++j)
    for (const auto& h : highways.polylines)
      if (polyline_touches(tracts.polygon(j), h.line, buffer_m)) {
        out.push_back(tracts.id(j));
        break;
      }
  return out;
}

std::vector<SubsetMean> summarize_equity(const InequityTable& index, const TractSet& tracts,
                                         const HighwayNetworkGeom* highways,
                                         const std::vector<std::string>& corridors,
                                         std::string_view group, double buffer_m) {
  std::vector<std::pair<std::string, std::vector<std::string>>> subsets;
  subsets.emplace_back("all tracts", tracts.ids());
  if (highways && !highways->polylines.empty()) {
    auto with = highway_subset(tracts, *highways, buffer_m);
    std::set<std::string> in(with.begin(), with.end());
    std::vector<std::string> without;
    for (const auto& id : tracts.ids())
      if (!in.count(id)) without.push_back(id);
    subsets.emplace_back("tracts with highways", std::move(with));
    subsets.emplace_back("tracts without highways", std::move(without));
    for (const auto& label : corridors)
      subsets.emplace_back("corridor " + label, corridor_subset(tracts, *highways, label, buffer_m));
  } else if (!corridors.empty()) {
    throw ValidationError("corridor summaries requested without a highway layer");
  }

  std::vector<SubsetMean> out;
  for (const auto& [name, ids] : subsets) {
    SubsetMean m{name, std::string(group)};
    std::set<std::string> members(ids.begin(), ids.end());
    for (std::size_t j = 0; j < index.tract_ids.size(); ++j) {
      if (!members.count(index.tract_ids[j])) continue;
      if (index.defined[j]) ++m.tracts;
      else ++m.undefined;
    }
    try {
      m.mean = population_weighted_mean(index, tracts, ids, group);
    } catch (const RangeError&) {
      m.mean = kNaN;
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace tractequity
