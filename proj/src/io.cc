#include "stableid/io.hpp"

#include <cmath>
#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "stableid/errors.hpp"

namespace stableid {
namespace {

std::vector<double> parse_csv_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw IoError("trajectory CSV: cannot parse '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (Eigen::Index i = 0; i < traj.n(); ++i) os << ",x" << (i + 1);
  os << "\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < traj.N(); ++k) {
    os << static_cast<double>(k) * traj.dt;
    for (Eigen::Index i = 0; i < traj.n(); ++i) os << "," << traj.states(i, k);
    os << "\n";
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("t", 0) != 0) {
    throw IoError("trajectory CSV: missing `t,x1..xn` header");
  }
  const auto n = static_cast<Eigen::Index>(std::count(header.begin(), header.end(), ','));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = parse_csv_row(line);
    if (static_cast<Eigen::Index>(row.size()) != n + 1) {
      throw IoError("trajectory CSV: row has " + std::to_string(row.size()) +
                    " cells, expected " + std::to_string(n + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw IoError("trajectory CSV: need at least two samples");
  Trajectory traj;
  traj.dt = rows[1][0] - rows[0][0];
  traj.states.resize(n, static_cast<Eigen::Index>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      traj.states(i, static_cast<Eigen::Index>(k)) = rows[k][static_cast<size_t>(i + 1)];
    }
  }
  traj.validate();
  return traj;
}

nlohmann::json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw IoError("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw IoError("matrix JSON: expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw IoError("matrix JSON: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = number_from_json(row[static_cast<size_t>(c)]);
  }
  return m;
}

nlohmann::json constraint_spec_to_json(const ConstraintSpec& spec) {
  nlohmann::json j;
  j["one_box"] = nlohmann::json::array();
  for (const auto& b : spec.one_box) {
    j["one_box"].push_back({{"i", b.i}, {"j", b.j}, {"lower", b.lower}, {"upper", b.upper}});
  }
  j["two_box"] = nlohmann::json::array();
  for (const auto& b : spec.two_box) {
    j["two_box"].push_back({{"i", b.i},
                            {"j", b.j},
                            {"lower", b.lower},
                            {"upper", b.upper},
                            {"center", b.center},
                            {"half_gap", b.half_gap}});
  }
  j["equality"] = nlohmann::json::array();
  for (const auto& e : spec.equality) {
    j["equality"].push_back({{"i", e.i}, {"j", e.j}, {"value", e.value}});
  }
  return j;
}

ConstraintSpec constraint_spec_from_json(const nlohmann::json& j) {
  ConstraintSpec spec;
  try {
    for (const auto& b : j.value("one_box", nlohmann::json::array())) {
      spec.one_box.push_back({b.at("i").get<int>(), b.at("j").get<int>(),
                              b.at("lower").get<double>(), b.at("upper").get<double>()});
    }
    for (const auto& b : j.value("two_box", nlohmann::json::array())) {
      spec.two_box.push_back({b.at("i").get<int>(), b.at("j").get<int>(),
                              b.at("lower").get<double>(), b.at("upper").get<double>(),
                              b.at("center").get<double>(), b.at("half_gap").get<double>()});
    }
    for (const auto& e : j.value("equality", nlohmann::json::array())) {
      spec.equality.push_back(
          {e.at("i").get<int>(), e.at("j").get<int>(), e.at("value").get<double>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("constraint spec JSON: ") + ex.what());
  }
  return spec;
}

nlohmann::json point_to_json(const ProductPoint& x) {
  return {{"J", matrix_to_json(x.J.matrix())},
          {"R", matrix_to_json(x.R.matrix())},
          {"Q", matrix_to_json(x.Q.matrix())}};
}

ProductPoint point_from_json(const nlohmann::json& j) {
  return {SkewMatrix(matrix_from_json(j.at("J"))), SpdMatrix(matrix_from_json(j.at("R"))),
          SpdMatrix(matrix_from_json(j.at("Q")))};
}

void write_eigs_csv(std::ostream& os, const std::vector<std::complex<double>>& eigs) {
  os << "real,imag\n" << std::setprecision(17);
  for (const auto& e : eigs) os << e.real() << "," << e.imag() << "\n";
}

}  // namespace stableid
