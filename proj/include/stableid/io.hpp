#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "stableid/model.hpp"

namespace stableid {

// CSV with header `t,x1,...,xn`; one row per sample, t = k * dt.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
// Recovers dt from the first two time stamps.
Trajectory read_trajectory_csv(std::istream& is);

nlohmann::json matrix_to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json constraint_spec_to_json(const ConstraintSpec& spec);
ConstraintSpec constraint_spec_from_json(const nlohmann::json& j);

nlohmann::json point_to_json(const ProductPoint& x);
ProductPoint point_from_json(const nlohmann::json& j);

// Doubles survive a JSON round-trip bit-exactly; +-inf and NaN are written as strings.
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);

// `real,imag` rows.
void write_eigs_csv(std::ostream& os, const std::vector<std::complex<double>>& eigs);

}  // namespace stableid
