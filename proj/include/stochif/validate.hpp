#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stochif/experiment.hpp"

namespace stochif {

/// One measured quantity against a pinned bound.
struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  /// One of "<=", "<", ">=", ">".
  std::string op;
  double bound = 0.0;
  bool passed = false;
  std::string detail;
};

Check make_check(std::string suite, std::string name, double value, std::string op, double bound,
                 std::string detail = {});
std::string format_check(const Check& c);
bool all_passed(const std::vector<Check>& checks);

/// Reference maximal shape variations in percent, rows p = 1, 2, 3 and
/// columns d = 8, 16, 32, 64.
extern const double kReferenceShapeVariation[3][4];

/// Largest deviation from the reference shape variations, in percentage points.
std::vector<Check> shape_variation_checks();
/// Jacobian positivity, inverse roundtrip, Jacobian against central
/// differences and kink-set affinity on every (p, d) cell of the shape table.
std::vector<Check> geometry_checks(int samples = 10000, std::uint64_t seed = 7);
/// Manufactured-solution convergence order and the two-zone radial oracle.
std::vector<Check> fem_checks();
/// Point amplitudes against the Mie series and the transparent scatterer.
std::vector<Check> mie_checks();
/// Derivative-jump probes across the kink set and at control points.
std::vector<Check> kink_checks();
/// Backpropagation against central differences on small random networks.
std::vector<Check> gradcheck_checks(std::uint64_t seed = 11);
/// Determinism, windowed loss decrease and representable targets.
std::vector<Check> training_checks();

std::vector<std::string> suite_names();
/// Throws std::invalid_argument for an unknown suite.
std::vector<Check> run_suite(const std::string& suite, const Logger& log = {});

}  // namespace stochif
