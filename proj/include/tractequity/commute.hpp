#pragma once

#include "tractequity/data_model.hpp"
#include "tractequity/network.hpp"
#include "tractequity/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tractequity {

struct OdPair {
  std::size_t home = 0;  // tract index
  std::size_t work = 0;
  std::int64_t workers = 0;
};

/// Home-to-work worker counts. Pairs are unique and sorted by (home, work);
/// repeated rows are summed on load.
struct ODTable {
  std::vector<OdPair> pairs;
  std::vector<std::string> dropped;
};

/// Header: home,work,count. Unknown tract ids are dropped with a report line;
/// counts must be nonnegative integers.
ODTable load_od(const std::filesystem::path& path, const TractSet& tracts);
ODTable parse_od(const CsvTable& table, const TractSet& tracts);

enum class AssignmentMode { Bernoulli, Fractional };
AssignmentMode parse_assignment_mode(std::string_view s);

inline const std::vector<std::string> kBinaryGroups = {"White", "non-White"};

/// Trip weights per OD pair and group; row i of `weights` belongs to pairs[i].
struct TripAssignment {
  AssignmentMode mode = AssignmentMode::Fractional;
  std::uint64_t seed = 0;
  std::vector<std::string> groups = kBinaryGroups;
  std::vector<OdPair> pairs;
  Matrix weights;  // pairs × groups

  std::size_t group_index(std::string_view group) const;
};

/// Labels each worker with the first group with probability equal to the home
/// tract's group share. Bernoulli mode draws per worker from a counter-keyed
/// generator; fractional mode assigns the expectation.
TripAssignment assign_groups(const ODTable& od, const TractSet& tracts, AssignmentMode mode,
                             std::uint64_t seed = 0);

/// Multiplies every weight by its home tract's drive share (indexed by tract).
TripAssignment scale_by_drive_share(TripAssignment assignment, const Vector& drive_share);

/// Per-tract, per-group traversal distance (km) and resident commuters.
struct TraversalTable {
  std::vector<std::string> tract_ids;
  std::vector<std::string> groups;
  Matrix distance_km;            // tracts × groups, home tract included
  Matrix distance_km_excl_home;  // same, home tract's own length left out
  Matrix commuters;              // tracts × groups
  std::size_t routed_pairs = 0;
  std::size_t unreachable_pairs = 0;
  std::vector<std::string> warnings;

  const Matrix& distances(bool exclude_home) const {
    return exclude_home ? distance_km_excl_home : distance_km;
  }
};

struct SimulationOptions {
  unsigned workers = 1;
};

/// Routes each OD pair once between the graph nodes nearest the home and work
/// centroids and accumulates weighted per-tract distances. Contributions are
/// reduced in (home, work) order so output is bitwise independent of the
/// worker count and of input row order.
TraversalTable simulate(const TractSet& tracts, const Graph& graph, const EdgeTractMap& map,
                        const TripAssignment& assignment, const SimulationOptions& options = {});

}  // namespace tractequity
