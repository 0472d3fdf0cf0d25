#include "stochif/config.hpp"

#include <fstream>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "stochif/detail/hash.hpp"

namespace stochif {

namespace {

const char* profile_name(PmlProfile p) { return p == PmlProfile::kQuadratic ? "quadratic" : "quadratic_scaled"; }

PmlProfile profile_from(const std::string& s) {
  if (s == "quadratic") return PmlProfile::kQuadratic;
  if (s == "quadratic_scaled") return PmlProfile::kQuadraticScaled;
  throw std::invalid_argument(fmt::format("unknown pml_profile '{}'", s));
}

nlohmann::json sizing_json(const MeshSizing& s) {
  return {{"h_interface", s.h_interface},
          {"h_far", s.h_far},
          {"grading", s.grading},
          {"radial_refine", s.radial_refine}};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid config: " + what);
}

}  // namespace

std::string to_string(ProblemKind kind) { return kind == ProblemKind::kElliptic ? "elliptic" : "helmholtz"; }

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "elliptic") return ProblemKind::kElliptic;
  if (s == "helmholtz") return ProblemKind::kHelmholtz;
  throw std::invalid_argument(fmt::format("unknown problem '{}'", s));
}

double reference_wavenumber() { return 200.0 * std::numbers::pi / 3.0; }

std::vector<Vec2> ExperimentConfig::points() const {
  return circle_points(point_radius > 0.0 ? point_radius : geometry.interface.r0, n_points);
}

std::vector<int> ExperimentConfig::widths() const {
  return default_widths(geometry.interface.d, n_points, train.depth, train.hidden);
}

TrainOptions ExperimentConfig::train_options() const {
  TrainOptions o;
  o.widths = widths();
  o.beta = train.beta;
  o.epochs = train.epochs;
  o.restarts = train.restarts;
  o.seed = train.seed;
  o.adam.learning_rate = train.learning_rate;
  o.workers = workers;
  return o;
}

void ExperimentConfig::validate() const {
  const DomainMap map = geometry.build();
  require(alpha_i > 0.0, "alpha_i must be positive");
  require(n_points >= 1, "n_points must be at least 1");
  require(point_radius >= 0.0, "point_radius must be nonnegative");
  require(n_train >= 1 && n_test >= 1, "n_train and n_test must be positive");
  require(train.epochs >= 1 && train.restarts >= 1, "epochs and restarts must be positive");
  require(train.depth >= 1 && train.hidden >= 1, "depth and hidden must be positive");
  require(train.learning_rate > 0.0, "learning_rate must be positive");
  require(workers >= 1, "workers must be positive");
  require(cg_tolerance > 0.0, "cg_tolerance must be positive");
  require(mesh.h_interface > 0.0 && mesh.h_far >= mesh.h_interface, "need 0 < h_interface <= h_far");
  if (problem == ProblemKind::kElliptic) {
    require(map.r_outer() < 1.0, "r_outer must lie inside the square (-1, 1)^2");
  } else {
    require(kappa_multiplier > 0.0 && kappa_ratio > 0.0, "wavenumbers must be positive");
    require(kappa_ratio * kappa_ratio <= alpha_i * (1.0 + 1e-12),
            fmt::format("nontrapping condition kappa_ratio^2 = {:.6g} <= alpha_i = {:.6g} violated",
                        kappa_ratio * kappa_ratio, alpha_i));
    require(map.r_outer() <= domain_radius * (1.0 + 1e-12), "r_outer must not exceed domain_radius");
    require(pml_thickness > 0.0 && pml_damping > 0.0, "absorbing layer needs positive thickness and damping");
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"name", c.name},
                     {"problem", to_string(c.problem)},
                     {"geometry", c.geometry},
                     {"alpha_i", c.alpha_i},
                     {"n_points", c.n_points},
                     {"point_radius", c.point_radius},
                     {"mesh", sizing_json(c.mesh)},
                     {"cg_tolerance", c.cg_tolerance},
                     {"n_train", c.n_train},
                     {"n_test", c.n_test},
                     {"data_seed", c.data_seed},
                     {"train",
                      {{"epochs", c.train.epochs},
                       {"restarts", c.train.restarts},
                       {"learning_rate", c.train.learning_rate},
                       {"depth", c.train.depth},
                       {"hidden", c.train.hidden},
                       {"beta", c.train.beta},
                       {"seed", c.train.seed}}},
                     {"out_dir", c.out_dir},
                     {"workers", c.workers}};
  if (c.problem == ProblemKind::kHelmholtz) {
    j["kappa_multiplier"] = c.kappa_multiplier;
    j["kappa_ratio"] = c.kappa_ratio;
    j["domain_radius"] = c.domain_radius;
    j["pml_thickness"] = c.pml_thickness;
    j["pml_damping"] = c.pml_damping;
    j["pml_profile"] = profile_name(c.pml_profile);
  }
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c.name = j.value("name", c.name);
  if (j.contains("problem")) c.problem = problem_kind_from_string(j.at("problem").get<std::string>());
  if (j.contains("geometry")) c.geometry = j.at("geometry").get<GeometryConfig>();
  c.alpha_i = j.value("alpha_i", c.alpha_i);
  c.kappa_multiplier = j.value("kappa_multiplier", c.kappa_multiplier);
  c.kappa_ratio = j.value("kappa_ratio", c.kappa_ratio);
  c.domain_radius = j.value("domain_radius", c.domain_radius);
  c.pml_thickness = j.value("pml_thickness", c.pml_thickness);
  c.pml_damping = j.value("pml_damping", c.pml_damping);
  if (j.contains("pml_profile")) c.pml_profile = profile_from(j.at("pml_profile").get<std::string>());
  c.n_points = j.value("n_points", c.n_points);
  c.point_radius = j.value("point_radius", c.point_radius);
  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    c.mesh.h_interface = m.value("h_interface", c.mesh.h_interface);
    c.mesh.h_far = m.value("h_far", c.mesh.h_far);
    c.mesh.grading = m.value("grading", c.mesh.grading);
    c.mesh.radial_refine = m.value("radial_refine", c.mesh.radial_refine);
  }
  c.cg_tolerance = j.value("cg_tolerance", c.cg_tolerance);
  c.n_train = j.value("n_train", c.n_train);
  c.n_test = j.value("n_test", c.n_test);
  c.data_seed = j.value("data_seed", c.data_seed);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.epochs = t.value("epochs", c.train.epochs);
    c.train.restarts = t.value("restarts", c.train.restarts);
    c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
    c.train.depth = t.value("depth", c.train.depth);
    c.train.hidden = t.value("hidden", c.train.hidden);
    c.train.beta = t.value("beta", c.train.beta);
    c.train.seed = t.value("seed", c.train.seed);
  }
  c.out_dir = j.value("out_dir", c.out_dir);
  c.workers = j.value("workers", c.workers);
}

nlohmann::json data_fields(const ExperimentConfig& c) {
  nlohmann::json j{{"problem", to_string(c.problem)},
                   {"geometry", c.geometry},
                   {"alpha_i", c.alpha_i},
                   {"n_points", c.n_points},
                   {"point_radius", c.point_radius},
                   {"mesh", sizing_json(c.mesh)},
                   {"cg_tolerance", c.cg_tolerance}};
  if (c.problem == ProblemKind::kHelmholtz) {
    j["kappa_multiplier"] = c.kappa_multiplier;
    j["kappa_ratio"] = c.kappa_ratio;
    j["domain_radius"] = c.domain_radius;
    j["pml_thickness"] = c.pml_thickness;
    j["pml_damping"] = c.pml_damping;
    j["pml_profile"] = profile_name(c.pml_profile);
  }
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  detail::Fnv1a h;
  h.update(data_fields(c).dump());
  return fmt::format("{:016x}", h.digest());
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config '{}'", path));
  nlohmann::json j;
  in >> j;
  auto c = j.get<ExperimentConfig>();
  c.validate();
  return c;
}

void save_config(const ExperimentConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write config '{}'", path));
  out << nlohmann::json(c).dump(2) << '\n';
}

}  // namespace stochif
