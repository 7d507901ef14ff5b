// Command-line front end: construction, norms, decompositions and the
// verification suites, all driven by the JSON artifacts documented in the
// README.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "martcalc/atomic.hpp"
#include "martcalc/dyadic_geometry.hpp"
#include "martcalc/function_norms.hpp"
#include "martcalc/homogeneous.hpp"
#include "martcalc/io.hpp"
#include "martcalc/martingale_ops.hpp"
#include "martcalc/measure_space.hpp"
#include "martcalc/verify.hpp"

namespace {

using namespace martcalc;

struct GlobalConfig {
  std::uint64_t seed = 20240603;
  int trials = 0;
  std::string format = "json";
  std::string out_dir;
};

// --config file: known keys only, values become defaults for the flags.
void apply_config_file(const std::string& path, GlobalConfig& cfg) {
  const Json j = load_json(path);
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "trials") {
      cfg.trials = value.get<int>();
    } else if (key == "format") {
      cfg.format = value.get<std::string>();
    } else if (key == "out") {
      cfg.out_dir = value.get<std::string>();
    } else {
      throw std::runtime_error("config has unknown key '" + key + "'");
    }
  }
  if (cfg.format != "json" && cfg.format != "csv") {
    throw std::runtime_error("config format must be json|csv");
  }
}

NormVariant parse_variant(const std::string& name) {
  static const std::map<std::string, NormVariant> table = {
      {"Hp_S", NormVariant::Hp_S},       {"hp_s", NormVariant::hp_s},
      {"Hp_max", NormVariant::Hp_max},   {"BMO", NormVariant::BMO},
      {"bmo", NormVariant::bmo},         {"h1_diag", NormVariant::h1_diag},
      {"Lambda_q", NormVariant::Lambda_q},
      {"Lambda_sup", NormVariant::Lambda_sup},
      {"Orlicz_Hardy", NormVariant::Orlicz_Hardy},
  };
  const auto it = table.find(name);
  if (it == table.end()) {
    throw std::runtime_error("unknown norm variant '" + name + "'");
  }
  return it->second;
}

double norm_value(const MeasureSpace& space, const Filtration& filt,
                  const Func& f, NormVariant variant, double p, int q) {
  switch (variant) {
    case NormVariant::Hp_S:
    case NormVariant::hp_s:
    case NormVariant::Hp_max:
      return hardy_norm(space, filt, f, variant, p);
    case NormVariant::BMO:
    case NormVariant::bmo:
      return bmo_norm(space, filt, f, variant);
    case NormVariant::h1_diag:
      return diagonal_norm(space, filt, f);
    case NormVariant::Lambda_q:
      return lipschitz_norm(space, filt, f, p, q);
    case NormVariant::Lambda_sup:
      return lipschitz_sup_norm(space, filt, f, p);
    case NormVariant::Orlicz_Hardy: {
      const Func s = square_function(expand(space, filt, f, true));
      return luxembourg_norm(space, OrliczFunction::t_over_log(), s);
    }
  }
  throw std::runtime_error("unhandled norm variant");
}

void print_issues(const ValidationReport& report) {
  for (const std::string& issue : report.issues) {
    std::cout << "issue: " << issue << "\n";
  }
  std::cout << (report.ok() ? "valid" : "invalid") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite martingale analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config with defaults");
  app.add_option("--seed", cfg.seed, "base seed for randomized commands");
  app.add_option("--trials", cfg.trials, "trial count override");
  app.add_option("--format", cfg.format, "report format: json|csv");
  app.add_option("--out", cfg.out_dir, "output directory for reports");

  std::string space_path, filt_path, func_path, func2_path, metric_path;
  std::string system_path, out_path;

  auto* space_cmd = app.add_subcommand("space", "measure space utilities");
  auto* space_validate = space_cmd->add_subcommand("validate", "check space.json");
  space_validate->add_option("--space", space_path, "space.json")->required();

  auto* filt_cmd = app.add_subcommand("filtration", "filtration utilities");
  auto* filt_validate =
      filt_cmd->add_subcommand("validate", "check nestedness and coverage");
  filt_validate->add_option("--space", space_path, "space.json")->required();
  filt_validate->add_option("--filtration", filt_path, "filtration.json")
      ->required();

  auto* norm_cmd = app.add_subcommand("norm", "evaluate a norm");
  std::string variant_name = "Hp_S";
  double norm_p = 1.0;
  int norm_q = 1;
  norm_cmd->add_option("--space", space_path)->required();
  norm_cmd->add_option("--filtration", filt_path)->required();
  norm_cmd->add_option("--func", func_path)->required();
  norm_cmd->add_option("--variant", variant_name, "norm variant tag");
  norm_cmd->add_option("--p", norm_p, "exponent");
  norm_cmd->add_option("--q", norm_q, "inner exponent for Lambda_q");

  auto* expand_cmd = app.add_subcommand("expand", "martingale expansion");
  bool true_base = false;
  expand_cmd->add_option("--space", space_path)->required();
  expand_cmd->add_option("--filtration", filt_path)->required();
  expand_cmd->add_option("--func", func_path)->required();
  expand_cmd->add_flag("--true-base", true_base,
                       "keep the base level instead of zeroing it");
  expand_cmd->add_option("--out-file", out_path, "write JSON here");

  auto* para_cmd = app.add_subcommand("paraproduct", "product decomposition");
  para_cmd->add_option("--space", space_path)->required();
  para_cmd->add_option("--filtration", filt_path)->required();
  para_cmd->add_option("--f", func_path)->required();
  para_cmd->add_option("--g", func2_path)->required();
  para_cmd->add_option("--out-file", out_path, "write JSON here");

  auto* atoms_cmd = app.add_subcommand("atoms", "atomic decompositions");
  auto* atoms_decompose =
      atoms_cmd->add_subcommand("decompose", "stopping-time decomposition");
  double atom_p = 1.0, atom_q = 2.0;
  atoms_decompose->add_option("--space", space_path)->required();
  atoms_decompose->add_option("--filtration", filt_path)->required();
  atoms_decompose->add_option("--func", func_path)->required();
  atoms_decompose->add_option("--p", atom_p);
  atoms_decompose->add_option("--q", atom_q, "use inf for the sup norm");
  atoms_decompose->add_option("--out-file", out_path, "write JSON here");

  auto* dyadic_cmd = app.add_subcommand("dyadic", "dyadic systems");
  auto* dyadic_build = dyadic_cmd->add_subcommand("build", "net-based build");
  DyadicParams params{1.0 / 32.0, 1.0, 2.0, 0, 2};
  dyadic_build->add_option("--metric-space", metric_path)->required();
  dyadic_build->add_option("--delta", params.delta);
  dyadic_build->add_option("--c0", params.c0);
  dyadic_build->add_option("--C0", params.C0);
  dyadic_build->add_option("--kmin", params.k_min);
  dyadic_build->add_option("--kmax", params.k_max);
  dyadic_build->add_option("--out-file", out_path, "write dyadic_system.json");

  auto* dyadic_verify = dyadic_cmd->add_subcommand("verify", "check a system");
  dyadic_verify->add_option("--metric-space", metric_path)->required();
  dyadic_verify->add_option("--system", system_path)->required();

  auto* adjacent_cmd = app.add_subcommand("adjacent", "adjacent systems");
  auto* adjacent_build = adjacent_cmd->add_subcommand("build", "build a family");
  bool euclidean = false;
  int depth = 6, K = 4;
  adjacent_build->add_option("--metric-space", metric_path)->required();
  adjacent_build->add_flag("--euclidean", euclidean, "use shifted grids");
  adjacent_build->add_option("--depth", depth, "finest level (euclidean)");
  adjacent_build->add_option("--K", K, "system count (general)");
  adjacent_build->add_option("--delta", params.delta);
  adjacent_build->add_option("--c0", params.c0);
  adjacent_build->add_option("--C0", params.C0);
  adjacent_build->add_option("--kmin", params.k_min);
  adjacent_build->add_option("--kmax", params.k_max);
  adjacent_build->add_option("--out-file", out_path, "write adjacent.json");

  auto* cover_cmd = app.add_subcommand("cover-ball", "minimal covering cube");
  int cover_center = 0;
  double cover_radius = 0.0;
  std::string adjacent_path;
  cover_cmd->add_option("--metric-space", metric_path)->required();
  cover_cmd->add_option("--adjacent", adjacent_path, "adjacent.json")
      ->required();
  cover_cmd->add_option("--center", cover_center)->required();
  cover_cmd->add_option("--radius", cover_radius)->required();

  auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
  std::vector<std::string> suites;
  bool list_suites = false;
  verify_cmd->add_option("--suite", suites, "suite ids (repeatable)");
  verify_cmd->add_flag("--list", list_suites, "list suite ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) apply_config_file(config_path, cfg);
    if (cfg.format != "json" && cfg.format != "csv") {
      throw std::runtime_error("--format must be json|csv");
    }

    if (space_validate->parsed()) {
      const MeasureSpace space = space_from_json(load_json(space_path));
      std::cout << "valid (" << space.size() << " points, total mass "
                << format_double(space.total_mass()) << ")\n";
      return 0;
    }
    if (filt_validate->parsed()) {
      const MeasureSpace space = space_from_json(load_json(space_path));
      const Filtration filt = filtration_from_json(load_json(filt_path));
      const ValidationReport report = validate_filtration(space, filt);
      print_issues(report);
      return report.ok() ? 0 : 1;
    }
    if (norm_cmd->parsed()) {
      const MeasureSpace space = space_from_json(load_json(space_path));
      const Filtration filt = filtration_from_json(load_json(filt_path));
      const Func f = func_from_json(load_json(func_path));
      const double value =
          norm_value(space, filt, f, parse_variant(variant_name), norm_p,
                     norm_q);
      std::cout << format_double(value) << "\n";
      return 0;
    }
    if (expand_cmd->parsed()) {
      const MeasureSpace space = space_from_json(load_json(space_path));
      const Filtration filt = filtration_from_json(load_json(filt_path));
      const Func f = func_from_json(load_json(func_path));
      const MartingaleExpansion exp = expand(space, filt, f, !true_base);
      Json j;
      j["k_min"] = exp.k_min;
      j["zero_base"] = exp.zero_base;
      j["base"] = exp.base;
      Json diffs = Json::array();
      for (const Func& d : exp.diffs) diffs.push_back(d);
      j["diffs"] = std::move(diffs);
      if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        save_json(out_path, j);
      }
      return 0;
    }
    if (para_cmd->parsed()) {
      const MeasureSpace space = space_from_json(load_json(space_path));
      const Filtration filt = filtration_from_json(load_json(filt_path));
      const Func f = func_from_json(load_json(func_path));
      const Func g = func_from_json(load_json(func2_path));
      const Paraproducts pp = paraproducts(space, filt, f, g);
      Json j;
      j["pi1"] = pp.pi1;
      j["pi2"] = pp.pi2;
      j["pi3"] = pp.pi3;
      if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        save_json(out_path, j);
      }
      return 0;
    }
    if (atoms_decompose->parsed()) {
      const MeasureSpace space = space_from_json(load_json(space_path));
      const Filtration filt = filtration_from_json(load_json(filt_path));
      const Func f = func_from_json(load_json(func_path));
      const AtomicDecomposition dec =
          stopping_time_decomposition(space, filt, f, atom_p, atom_q);
      const Json j = decomposition_to_json(dec);
      if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        save_json(out_path, j);
      }
      std::cout << "terms: " << dec.terms.size() << " quasi-norm: "
                << format_double(dec.terms.empty() ? 0.0 : dec.quasi_norm())
                << "\n";
      return 0;
    }
    if (dyadic_build->parsed()) {
      const QuasiMetricSpace space =
          metric_space_from_json(load_json(metric_path));
      const DyadicSystem system = build_dyadic_system(space, params, cfg.seed);
      const Json j = dyadic_system_to_json(system);
      if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        save_json(out_path, j);
      }
      return 0;
    }
    if (dyadic_verify->parsed()) {
      const QuasiMetricSpace space =
          metric_space_from_json(load_json(metric_path));
      const DyadicSystem system =
          dyadic_system_from_json(load_json(system_path));
      const ValidationReport report = verify_system(space, system);
      print_issues(report);
      return report.ok() ? 0 : 1;
    }
    if (adjacent_build->parsed()) {
      const QuasiMetricSpace space =
          metric_space_from_json(load_json(metric_path));
      const AdjacentSystems adjacent =
          euclidean ? euclidean_shifted_grids(space, depth)
                    : build_adjacent_systems(space, params, K, cfg.seed);
      std::cout << "systems: " << adjacent.systems.size()
                << " covering constant: "
                << format_double(adjacent.covering_constant) << "\n";
      if (!out_path.empty()) save_json(out_path, adjacent_to_json(adjacent));
      return 0;
    }
    if (cover_cmd->parsed()) {
      const QuasiMetricSpace space =
          metric_space_from_json(load_json(metric_path));
      AdjacentSystems adjacent = adjacent_from_json(load_json(adjacent_path));
      // Diameters are derived data; recompute them against the actual space.
      for (auto& sys : adjacent.systems) {
        for (auto& level : sys.levels) {
          for (auto& cube : level) cube.diameter = cube_diameter(space, cube);
        }
      }
      const BallCover cover =
          cover_ball(space, adjacent, cover_center, cover_radius);
      Json j;
      j["system"] = cover.system;
      j["level"] = adjacent.systems[cover.system].k_min + cover.level;
      j["cube"] = cover.cube;
      j["diameter"] = cover.diameter;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (verify_cmd->parsed()) {
      if (list_suites) {
        for (const std::string& id : suite_ids()) std::cout << id << "\n";
        return 0;
      }
      if (suites.empty()) suites = suite_ids();
      SuiteConfig sc;
      sc.seed = cfg.seed;
      sc.trials = cfg.trials;
      bool all_pass = true;
      for (const std::string& id : suites) {
        const VerificationReport report = run_suite(id, sc);
        all_pass = all_pass && report.pass;
        std::cout << (report.pass ? "PASS " : "FAIL ") << id
                  << " sup_ratio=" << format_double(report.sup_ratio)
                  << " trials=" << report.trials
                  << " skipped=" << report.skipped;
        if (!report.detail.empty()) std::cout << " detail=" << report.detail;
        std::cout << "\n";
        if (!cfg.out_dir.empty()) {
          std::filesystem::create_directories(cfg.out_dir);
          const std::string base = cfg.out_dir + "/" + id;
          if (cfg.format == "json") {
            save_json(base + ".json", report.to_json());
          } else {
            report_to_csv(report, base + ".csv");
          }
        }
      }
      return all_pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
