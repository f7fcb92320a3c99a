#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatchain/action.hpp"
#include "heatchain/dynamics.hpp"
#include "heatchain/mam.hpp"
#include "heatchain/measure.hpp"
#include "heatchain/model.hpp"
#include "heatchain/region.hpp"
#include "heatchain/sde.hpp"

namespace heatchain {

/// Invalid or unreadable experiment config. The message names the offending key and line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state given either explicitly or as a critical set plus an optional offset.
/// `critical` indexes the sets in ascending order of G.
struct StartSpec {
  std::optional<int> critical;
  Vec point;
  Vec offset;

  State resolve(const ModelParams& m, const std::vector<CriticalSet>& sets) const;
};

struct RegionSpec {
  std::string name;
  Region::Kind kind = Region::Kind::everything;
  Vec lower;
  Vec upper;
  std::optional<StartSpec> center;
  double radius = 0.0;
  /// Ellipsoid shape matrix, one row per coordinate.
  Mat shape;
  std::vector<int> coords;
  bool complement = false;

  Region resolve(const ModelParams& m, const std::vector<CriticalSet>& sets) const;
};

struct CriticalSection {
  double box = 3.0;
  int per_axis = 7;
  CriticalOptions options;
  OmegaLimitOptions omega;
};

struct SdeSection {
  SdeScheme scheme = SdeScheme::euler_maruyama;
  double h = 0.01;
  double T = 100.0;
  int thin = 10;
  int replicas = 1;
  double blowup_bound = 1e6;
  StartSpec x0;
  /// Optional hitting-time study: first entrance of the named region.
  std::string hitting_target;
  double hitting_horizon = 1e4;
  int hitting_count = 0;
};

/// Target points: explicit states and/or a tensor grid over selected coordinates of a base state.
struct TargetGrid {
  std::vector<int> coords;
  Vec lower;
  Vec upper;
  int per_axis = 5;
  StartSpec base;
};

struct QuasipotentialSection {
  std::vector<StartSpec> points;
  std::optional<TargetGrid> grid;
};

struct ActionSection {
  double T = 2.0;
  int N = 400;
  int modes = 3;
  double amplitude = 1.0;
  StartSpec x0;
  /// When set, the control grid is read from this CSV instead of drawn at random.
  std::string control_csv;
  /// Optional minimum-action path between two states.
  std::optional<StartSpec> minimize_from;
  std::optional<StartSpec> minimize_to;
};

struct KramersSection {
  StartSpec from;
  std::string target;
  std::vector<double> eps_grid;
  double h = 0.01;
  int replicas = 100;
  double horizon = 1e5;
  SdeScheme scheme = SdeScheme::semi_implicit;
};

struct MeasureSection {
  std::vector<double> eps_grid;
  std::vector<std::string> regions;
  bool direct = true;
  bool cycle = false;
  SamplingOptions sampling;
  /// Burn-in from default_burn_in() when not given.
  std::optional<double> burn_in;
  std::optional<StartSpec> x0;
  CycleOptions cycle_options;
  int bootstrap = 2000;
  std::optional<KramersSection> kramers;
};

struct VerifySection {
  /// Each listed eta replaces model.eta for one pass of the suite; default: model.eta only.
  std::vector<double> etas;
  int controls = 20;
  double control_T = 2.0;
  int control_modes = 3;
  double control_amplitude = 1.0;
  double start_box = 1.0;
  std::vector<int> segments{100, 200, 400};
  std::vector<int> sweep_segments{50, 100, 200, 400, 800, 1600};
  /// Minimum observed order of the residual under halving of h.
  double min_order = 0.9;
  double sandwich_slack = 0.05;
  double equilibrium_tol = 0.03;
  double balance_tol = 0.05;
  bool entropy = true;
  SamplingOptions entropy_sampling;
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::uint64_t hash = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  ModelParams model;
  CriticalSection critical;
  SdeSection sde;
  std::vector<RegionSpec> regions;
  PairOptions mam;
  QuasipotentialSection quasipotential;
  ActionSection action;
  MeasureSection measure;
  VerifySection verify;

  const RegionSpec& region(const std::string& name) const;
};

/// FNV-1a over bytes; used for the config hash.
std::uint64_t fnv1a64(std::string_view bytes);

ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Target points of the quasipotential section.
std::vector<State> resolve_targets(const ExperimentConfig& cfg, const std::vector<CriticalSet>& sets);

}  // namespace heatchain
