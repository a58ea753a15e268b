#pragma once

#include "tractequity/commute.hpp"
#include "tractequity/data_model.hpp"
#include "tractequity/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tractequity {

/// Per-tract, per-group difference between a group's share of distance driven
/// through the tract and its share of the tract's resident commuters.
/// Tracts with no traversal or no commuters are undefined (NaN).
struct InequityTable {
  std::vector<std::string> tract_ids;
  std::vector<std::string> groups;
  Matrix index;  // tracts × groups
  std::vector<bool> defined;

  std::size_t undefined_count() const;
  std::size_t group_index(std::string_view group) const;
};

InequityTable inequity_index(const Matrix& distance, const Matrix& commuters,
                             std::vector<std::string> tract_ids, std::vector<std::string> groups);
InequityTable inequity_index(const TraversalTable& traversal, bool exclude_home = false);

/// Σ pop·I / Σ pop over the defined tracts of `subset` (tract ids).
double population_weighted_mean(const InequityTable& index, const TractSet& tracts,
                                const std::vector<std::string>& subset, std::string_view group);

/// Tracts whose polygon meets (touches or is within `buffer_m` of) any
/// highway polyline carrying `route_label`.
std::vector<std::string> corridor_subset(const TractSet& tracts, const HighwayNetworkGeom& highways,
                                         std::string_view route_label, double buffer_m = 0.0);

/// Tracts meeting any highway polyline regardless of label.
std::vector<std::string> highway_subset(const TractSet& tracts, const HighwayNetworkGeom& highways,
                                        double buffer_m = 0.0);

struct SubsetMean {
  std::string subset;
  std::string group;
  double mean = kNaN;
  std::size_t tracts = 0;     // defined tracts that entered the mean
  std::size_t undefined = 0;  // subset members left out as undefined
};

/// Weighted means for all tracts, highway / non-highway tracts and each
/// requested corridor label. Empty effective subsets report NaN.
std::vector<SubsetMean> summarize_equity(const InequityTable& index, const TractSet& tracts,
                                         const HighwayNetworkGeom* highways,
                                         const std::vector<std::string>& corridors,
                                         std::string_view group, double buffer_m = 0.0);

}  // namespace tractequity
