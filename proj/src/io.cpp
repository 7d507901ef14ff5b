#include "martcalc/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace martcalc {

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << j.dump(2) << "\n";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void require_field(const Json& j, const char* field, const char* what) {
  if (!j.contains(field)) {
    throw std::runtime_error(std::string(what) + " is missing field '" +
                             field + "'");
  }
}

}  // namespace

Json space_to_json(const MeasureSpace& space) {
  Json j;
  j["kind"] =
      space.kind() == SpaceKind::probability ? "probability" : "sigma_finite";
  j["weights"] = space.weights();
  return j;
}

MeasureSpace space_from_json(const Json& j) {
  require_field(j, "kind", "space.json");
  require_field(j, "weights", "space.json");
  const std::string kind = j["kind"].get<std::string>();
  if (kind != "probability" && kind != "sigma_finite") {
    throw std::runtime_error("space.json kind must be probability|sigma_finite");
  }
  return MeasureSpace(kind == "probability" ? SpaceKind::probability
                                            : SpaceKind::sigma_finite,
                      j["weights"].get<std::vector<double>>());
}

Json filtration_to_json(const Filtration& filt) {
  Json j;
  j["k_min"] = filt.k_min;
  Json parts = Json::array();
  for (const Partition& p : filt.partitions) {
    parts.push_back(p.blocks);
  }
  j["partitions"] = std::move(parts);
  return j;
}

Filtration filtration_from_json(const Json& j) {
  require_field(j, "k_min", "filtration.json");
  require_field(j, "partitions", "filtration.json");
  Filtration filt;
  filt.k_min = j["k_min"].get<int>();
  for (const Json& part : j["partitions"]) {
    Partition p;
    p.blocks = part.get<std::vector<std::vector<int>>>();
    filt.partitions.push_back(std::move(p));
  }
  return filt;
}

Json func_to_json(const Func& f) {
  Json j;
  j["values"] = f;
  return j;
}

Func func_from_json(const Json& j) {
  require_field(j, "values", "func.json");
  return j["values"].get<std::vector<double>>();
}

Json metric_space_to_json(const QuasiMetricSpace& space) {
  Json j;
  j["weights"] = space.weights();
  j["A0"] = space.a0();
  if (space.has_coordinates()) {
    Json coords = Json::array();
    for (int i = 0; i < space.size(); ++i) {
      Json c = Json::array();
      for (int a = 0; a < space.dim(); ++a) c.push_back(space.coord(i)[a]);
      coords.push_back(std::move(c));
    }
    j["coordinates"] = std::move(coords);
  } else {
    Json dist = Json::array();
    for (int i = 0; i < space.size(); ++i) {
      Json row = Json::array();
      for (int k = 0; k < space.size(); ++k) row.push_back(space.distance(i, k));
      dist.push_back(std::move(row));
    }
    j["distances"] = std::move(dist);
  }
  return j;
}

QuasiMetricSpace metric_space_from_json(const Json& j) {
  require_field(j, "weights", "metric_space.json");
  auto weights = j["weights"].get<std::vector<double>>();
  const double a0 = j.contains("A0") ? j["A0"].get<double>() : 1.0;
  if (j.contains("coordinates")) {
    std::vector<std::array<double, 2>> coords;
    int dim = 0;
    for (const Json& c : j["coordinates"]) {
      const auto row = c.get<std::vector<double>>();
      if (row.empty() || row.size() > 2) {
        throw std::runtime_error("coordinates must have 1 or 2 entries");
      }
      if (dim == 0) {
        dim = static_cast<int>(row.size());
      } else if (dim != static_cast<int>(row.size())) {
        throw std::runtime_error("inconsistent coordinate dimensions");
      }
      coords.push_back({row[0], row.size() > 1 ? row[1] : 0.0});
    }
    return QuasiMetricSpace::from_coordinates(std::move(coords), dim,
                                              std::move(weights), a0);
  }
  if (j.contains("distances")) {
    return QuasiMetricSpace::from_matrix(
        j["distances"].get<std::vector<std::vector<double>>>(),
        std::move(weights), a0);
  }
  throw std::runtime_error(
      "metric_space.json needs coordinates or distances");
}

Json dyadic_system_to_json(const DyadicSystem& system) {
  Json j;
  j["k_min"] = system.k_min;
  j["delta"] = system.delta;
  j["c0"] = system.c0;
  j["C0"] = system.C0;
  j["c1"] = system.c1;
  j["C1"] = system.C1;
  Json levels = Json::array();
  for (int li = 0; li < system.level_count(); ++li) {
    Json level;
    level["k"] = system.k_min + li;
    Json cubes = Json::array();
    for (const DyadicCube& cube : system.levels[li]) {
      Json c;
      c["center"] = cube.center;
      c["points"] = cube.points;
      c["parent"] = cube.parent;
      c["diameter"] = cube.diameter;
      cubes.push_back(std::move(c));
    }
    level["cubes"] = std::move(cubes);
    levels.push_back(std::move(level));
  }
  j["levels"] = std::move(levels);
  return j;
}

DyadicSystem dyadic_system_from_json(const Json& j) {
  for (const char* field : {"k_min", "delta", "c0", "C0", "c1", "C1", "levels"}) {
    require_field(j, field, "dyadic_system.json");
  }
  DyadicSystem system;
  system.k_min = j["k_min"].get<int>();
  system.delta = j["delta"].get<double>();
  system.c0 = j["c0"].get<double>();
  system.C0 = j["C0"].get<double>();
  system.c1 = j["c1"].get<double>();
  system.C1 = j["C1"].get<double>();

  int n_points = 0;
  for (const Json& level : j["levels"]) {
    require_field(level, "cubes", "dyadic_system.json level");
    std::vector<DyadicCube> cubes;
    for (const Json& c : level["cubes"]) {
      DyadicCube cube;
      cube.center = c["center"].get<int>();
      cube.points = c["points"].get<std::vector<int>>();
      cube.parent = c["parent"].get<int>();
      if (c.contains("diameter")) cube.diameter = c["diameter"].get<double>();
      for (int p : cube.points) n_points = std::max(n_points, p + 1);
      cubes.push_back(std::move(cube));
    }
    system.levels.push_back(std::move(cubes));
  }
  system.cube_of.assign(system.level_count(),
                        std::vector<int>(n_points, -1));
  for (int li = 0; li < system.level_count(); ++li) {
    auto& cubes = system.levels[li];
    for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
      for (int p : cubes[c].points) system.cube_of[li][p] = c;
      if (li > 0 && cubes[c].parent >= 0) {
        system.levels[li - 1][cubes[c].parent].children.push_back(c);
      }
    }
  }
  return system;
}

Json adjacent_to_json(const AdjacentSystems& adjacent) {
  Json j;
  j["covering_constant"] = adjacent.covering_constant;
  Json systems = Json::array();
  for (const DyadicSystem& s : adjacent.systems) {
    systems.push_back(dyadic_system_to_json(s));
  }
  j["systems"] = std::move(systems);
  return j;
}

AdjacentSystems adjacent_from_json(const Json& j) {
  require_field(j, "systems", "adjacent.json");
  AdjacentSystems adjacent;
  if (j.contains("covering_constant")) {
    adjacent.covering_constant = j["covering_constant"].get<double>();
  }
  for (const Json& s : j["systems"]) {
    adjacent.systems.push_back(dyadic_system_from_json(s));
  }
  return adjacent;
}

Json decomposition_to_json(const AtomicDecomposition& dec) {
  Json j = Json::array();
  for (const AtomicTerm& term : dec.terms) {
    Json t;
    t["lambda"] = term.lambda;
    t["level"] = term.atom.level;
    t["block"] = term.atom.block;
    t["values"] = term.atom.values;
    j.push_back(std::move(t));
  }
  return j;
}

AtomicDecomposition decomposition_from_json(const Json& j) {
  AtomicDecomposition dec;
  for (const Json& t : j) {
    AtomicTerm term;
    term.lambda = t["lambda"].get<double>();
    term.atom.level = t["level"].get<int>();
    term.atom.block = t["block"].get<std::vector<int>>();
    term.atom.values = t["values"].get<std::vector<double>>();
    dec.terms.push_back(std::move(term));
  }
  return dec;
}

}  // namespace martcalc
