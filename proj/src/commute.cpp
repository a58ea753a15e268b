#include "tractequity/commute.hpp"

#include "tractequity/parallel.hpp"
#include "tractequity/random.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>
#include <map>
#include <numeric>

namespace tractequity {

ODTable parse_od(const CsvTable& table, const TractSet& tracts) {
  const std::size_t ch = table.column("home"), cw = table.column("work"), cc = table.column("count");
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> merged;
  ODTable od;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "OD line " + std::to_string(table.line_numbers[r]);
    const std::string& cell = row[cc];
    std::int64_t count = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), count);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
      throw ValidationError(where + ": count '" + cell + "' is not an integer");
    if (count < 0) throw ValidationError(where + ": negative count " + cell);
    const auto home = tracts.find(row[ch]);
    const auto work = tracts.find(row[cw]);
    if (!home || !work) {
      od.dropped.push_back(where + ": unknown tract id '" + (home ? row[cw] : row[ch]) + "'");
      continue;
    }
    merged[{*home, *work}] += count;
  }
  for (const auto& [key, count] : merged) od.pairs.push_back({key.first, key.second, count});
  return od;
}

ODTable load_od(const std::filesystem::path& path, const TractSet& tracts) {
  return parse_od(read_csv(path), tracts);
}

AssignmentMode parse_assignment_mode(std::string_view s) {
  if (s == "bernoulli") return AssignmentMode::Bernoulli;
  if (s == "fractional") return AssignmentMode::Fractional;
  throw ValidationError("unknown assignment mode '" + std::string(s) + "'");
}

std::size_t TripAssignment::group_index(std::string_view group) const {
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g] == group) return g;
  std::string known;
  for (const auto& g : groups) known += (known.empty() ? "" : ", ") + g;
  throw ValidationError("unknown group '" + std::string(group) + "' (known: " + known + ")");
}

TripAssignment assign_groups(const ODTable& od, const TractSet& tracts, AssignmentMode mode,
                             std::uint64_t seed) {
  TripAssignment a;
  a.mode = mode;
  a.seed = seed;
  a.pairs = od.pairs;
  a.weights = Matrix::Zero(static_cast<Eigen::Index>(a.pairs.size()), 2);
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    const OdPair& pr = a.pairs[i];
    const double p = tracts.group_share()[static_cast<Eigen::Index>(pr.home)];
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError("tract '" + tracts.id(pr.home) + "': group share " + format_number(p) +
                            " outside [0, 1]");
    const auto r = static_cast<Eigen::Index>(i);
    const double count = static_cast<double>(pr.workers);
    if (mode == AssignmentMode::Fractional) {
      a.weights(r, 0) = count * p;
      a.weights(r, 1) = count * (1.0 - p);
    } else {
      std::int64_t first = 0;
      for (std::int64_t w = 0; w < pr.workers; ++w)
        if (counter_uniform(seed, tracts.id(pr.home), tracts.id(pr.work),
                            static_cast<std::uint64_t>(w)) < p)
          ++first;
      a.weights(r, 0) = static_cast<double>(first);
      a.weights(r, 1) = static_cast<double>(pr.workers - first);
    }
  }
  return a;
}

TripAssignment scale_by_drive_share(TripAssignment assignment, const Vector& drive_share) {
  for (std::size_t i = 0; i < assignment.pairs.size(); ++i) {
    const auto home = static_cast<Eigen::Index>(assignment.pairs[i].home);
    if (home >= drive_share.size()) throw ValidationError("drive share missing for home tract");
    const double s = drive_share[home];
    if (!(s >= 0.0 && s <= 1.0))
      throw ValidationError("drive share " + format_number(s) + " outside [0, 1] for tract index " +
                            std::to_string(home));
    assignment.weights.row(static_cast<Eigen::Index>(i)) *= s;
  }
  return assignment;
}

namespace {

struct HomePartial {
  std::map<std::size_t, Eigen::RowVectorXd> all;
  std::map<std::size_t, Eigen::RowVectorXd> excl_home;
  std::size_t routed = 0;
  std::size_t unreachable = 0;
};

}  // namespace

TraversalTable simulate(const TractSet& tracts, const Graph& graph, const EdgeTractMap& map,
                        const TripAssignment& assignment, const SimulationOptions& options) {
  const auto nt = static_cast<Eigen::Index>(tracts.size());
  const auto ng = static_cast<Eigen::Index>(assignment.groups.size());
  if (assignment.weights.rows() != static_cast<Eigen::Index>(assignment.pairs.size()) ||
      assignment.weights.cols() != ng)
    throw ValidationError("simulate: assignment weights do not match pairs/groups");
  if (map.tract_ids != tracts.ids())
    throw ConsistencyError("simulate: edge-tract map was built for a different tract set");

  TraversalTable out;
  out.tract_ids = tracts.ids();
  out.groups = assignment.groups;
  out.distance_km = Matrix::Zero(nt, ng);
  out.distance_km_excl_home = Matrix::Zero(nt, ng);
  out.commuters = Matrix::Zero(nt, ng);

  // Canonical order: (home, work), then input position for identical pairs.
  std::vector<std::size_t> order(assignment.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    const auto& pa = assignment.pairs[a];
    const auto& pb = assignment.pairs[b];
    return std::tie(pa.home, pa.work) < std::tie(pb.home, pb.work);
  });

  std::vector<std::size_t> homes;
  std::vector<std::size_t> home_begin;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t h = assignment.pairs[order[i]].home;
    if (homes.empty() || homes.back() != h) {
      homes.push_back(h);
      home_begin.push_back(i);
    }
  }
  home_begin.push_back(order.size());

  std::vector<std::size_t> snap(tracts.size());
  for (std::size_t t = 0; t < tracts.size(); ++t) snap[t] = graph.nearest_node(tracts.centroid(t));

  std::vector<HomePartial> partials(homes.size());
  parallel_for(homes.size(), options.workers, [&](std::size_t h) {
    const std::size_t home = homes[h];
    const ShortestPathTree tree(graph, snap[home]);
    HomePartial& part = partials[h];
    for (std::size_t i = home_begin[h]; i < home_begin[h + 1]; ++i) {
      const std::size_t pi = order[i];
      const OdPair& pr = assignment.pairs[pi];
      const auto route = tree.route_to(snap[pr.work]);
      if (!route) {
        ++part.unreachable;
        continue;
      }
      ++part.routed;
      const Eigen::RowVectorXd w = assignment.weights.row(static_cast<Eigen::Index>(pi));
      for (const EdgeShare& s : route_tract_meters(*route, map)) {
        if (s.tract == kNoIndex) continue;
        const Eigen::RowVectorXd add = w * (s.meters / 1000.0);
        auto add_to = [&](auto& acc) {
          auto it = acc.find(s.tract);
          if (it == acc.end()) acc.emplace(s.tract, add);
          else it->second += add;
        };
        add_to(part.all);
        if (s.tract != home) add_to(part.excl_home);
      }
    }
  });

  for (std::size_t i : order) {
    const OdPair& pr = assignment.pairs[i];
    out.commuters.row(static_cast<Eigen::Index>(pr.home)) +=
        assignment.weights.row(static_cast<Eigen::Index>(i));
  }
  for (const HomePartial& part : partials) {
    for (const auto& [t, v] : part.all) out.distance_km.row(static_cast<Eigen::Index>(t)) += v;
    for (const auto& [t, v] : part.excl_home)
      out.distance_km_excl_home.row(static_cast<Eigen::Index>(t)) += v;
    out.routed_pairs += part.routed;
    out.unreachable_pairs += part.unreachable;
  }

  const std::size_t total = out.routed_pairs + out.unreachable_pairs;
  if (total > 0 && 20 * out.unreachable_pairs > total)
    out.warnings.push_back(std::to_string(out.unreachable_pairs) + " of " + std::to_string(total) +
                           " OD pairs are unreachable (>5%)");
  return out;
}

}  // namespace tractequity
