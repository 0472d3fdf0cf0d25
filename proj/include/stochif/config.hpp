#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stochif/geometry.hpp"
#include "stochif/mesh.hpp"
#include "stochif/pde.hpp"
#include "stochif/surrogate.hpp"

namespace stochif {

enum class ProblemKind { kElliptic, kHelmholtz };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

/// k0 = 200 pi / 3.
double reference_wavenumber();

struct TrainSettings {
  int epochs = 5000;
  int restarts = 3;
  double learning_rate = 2e-4;
  /// Number of affine layers and hidden width.
  int depth = 10;
  int hidden = 10;
  double beta = 0.2;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string name = "elliptic";
  ProblemKind problem = ProblemKind::kElliptic;
  GeometryConfig geometry;
  double alpha_i = 10.0;

  /// kappa_o = kappa_multiplier * k0, kappa_i = kappa_ratio * kappa_o.
  double kappa_multiplier = 1.0;
  double kappa_ratio = 0.8;
  /// Disk radius R and absorbing layer.
  double domain_radius = 0.055;
  double pml_thickness = 0.02;
  double pml_damping = 0.5;
  PmlProfile pml_profile = PmlProfile::kQuadraticScaled;

  /// N_p points equispaced on the circle of radius point_radius (0 means r0).
  int n_points = 1;
  double point_radius = 0.0;

  MeshSizing mesh;
  double cg_tolerance = 1e-10;

  int n_train = 2048;
  int n_test = 512;
  std::uint64_t data_seed = 1;
  TrainSettings train;

  std::string out_dir = "out";
  int workers = 1;

  double kappa_o() const { return kappa_multiplier * reference_wavenumber(); }
  double kappa_i() const { return kappa_ratio * kappa_o(); }
  std::vector<Vec2> points() const;
  std::vector<int> widths() const;
  TrainOptions train_options() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Fields that determine the generated samples (problem, geometry, points,
/// mesh, solver), as canonical JSON.
nlohmann::json data_fields(const ExperimentConfig& c);
/// FNV-1a of data_fields(c).dump(), as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Desk-scale presets: "elliptic", "helmholtz" and the base cell of every
/// table or figure preset. A "-full" suffix selects the full-scale
/// samples, epochs, restarts and mesh.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Full-scale sample counts, training schedule and mesh on top of an existing config.
void apply_full_scale(ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& c, const std::string& path);

}  // namespace stochif
