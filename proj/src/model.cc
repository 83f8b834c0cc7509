#include "stableid/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "stableid/errors.hpp"

namespace stableid {
namespace {

void check_entry(int i, int j, Eigen::Index n, const char* what) {
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw DimensionError(std::string(what) + ": entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") out of range for n=" + std::to_string(n));
  }
}

void check_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw DimensionError(std::string(what) + ": A must be square");
}

void check_trajectory_matches(const Matrix& a, const Trajectory& traj) {
  check_square(a, "objective");
  if (a.rows() != traj.n()) {
    throw DimensionError("objective: A is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " but the trajectory has n=" +
                         std::to_string(traj.n()));
  }
  if (traj.N() < 2) throw DimensionError("objective: trajectory needs at least two samples");
}

Matrix residual(const Matrix& a, const Trajectory& traj) {
  // X1 - (I + dt A) X0
  return traj.X1() - traj.X0() - traj.dt * (a * traj.X0());
}

Matrix standard_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  // Fill in a fixed (column-major) order so output depends only on the seed.
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) g(r, c) = normal(rng);
  }
  return g;
}

SpdMatrix random_spd(Eigen::Index n, Rng& rng) {
  const Matrix g = standard_gaussian(n, n, rng);
  const Matrix gram = g.transpose() * g / static_cast<double>(std::max<Eigen::Index>(n, 1)) +
                      1e-3 * Matrix::Identity(n, n);
  return SpdMatrix((gram + gram.transpose()) / 2.0);
}

}  // namespace

void Trajectory::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericError("Trajectory: dt must be positive");
  if (N() < 2) throw DimensionError("Trajectory: need at least two samples");
  if (!states.allFinite()) throw NumericError("Trajectory: non-finite state entries");
}

Eigen::Index ConstraintSpec::num_inequalities() const {
  const auto boxes = static_cast<Eigen::Index>(one_box.size() + two_box.size());
  return 2 * boxes + static_cast<Eigen::Index>(two_box.size());
}

void ConstraintSpec::validate(Eigen::Index n) const {
  std::set<std::pair<int, int>> one, two;
  for (const auto& b : one_box) {
    check_entry(b.i, b.j, n, "ConstraintSpec");
    if (!(b.lower < b.upper)) throw InvariantViolation("ConstraintSpec: 1-box needs l < u");
    if (!one.insert({b.i, b.j}).second) {
      throw InvariantViolation("ConstraintSpec: duplicate 1-box entry");
    }
  }
  for (const auto& b : two_box) {
    check_entry(b.i, b.j, n, "ConstraintSpec");
    if (!(b.lower < b.upper)) throw InvariantViolation("ConstraintSpec: 2-box needs l < u");
    if (!(b.half_gap > 0.0)) throw InvariantViolation("ConstraintSpec: 2-box needs d > 0");
    if (!(b.center - b.half_gap > b.lower && b.center + b.half_gap < b.upper)) {
      throw InvariantViolation("ConstraintSpec: 2-box band [c-d, c+d] must lie inside (l, u)");
    }
    if (one.count({b.i, b.j}) != 0) {
      throw InvariantViolation("ConstraintSpec: 1-box and 2-box entry sets must be disjoint");
    }
    if (!two.insert({b.i, b.j}).second) {
      throw InvariantViolation("ConstraintSpec: duplicate 2-box entry");
    }
  }
  for (const auto& e : equality) {
    check_entry(e.i, e.j, n, "ConstraintSpec");
    if (!std::isfinite(e.value)) throw NumericError("ConstraintSpec: non-finite equality target");
  }
}

Vector ConstraintValues::inequalities() const {
  Vector out(lower.size() + upper.size() + two_box.size());
  out << lower, upper, two_box;
  return out;
}

Matrix assemble_A(const ProductPoint& x) {
  return (x.J.matrix() - x.R.matrix()) * x.Q.matrix();
}

Trajectory simulate_true(const Matrix& a, const Vector& x0, double dt,
                         Eigen::Index num_samples) {
  check_square(a, "simulate_true");
  if (x0.size() != a.rows()) throw DimensionError("simulate_true: x0 has the wrong length");
  if (!(dt > 0.0)) throw NumericError("simulate_true: dt must be positive");
  if (num_samples < 2) throw DimensionError("simulate_true: need N >= 2");
  const Matrix step = (a * dt).exp();
  Trajectory traj;
  traj.dt = dt;
  traj.states.resize(a.rows(), num_samples);
  traj.states.col(0) = x0;
  for (Eigen::Index k = 1; k < num_samples; ++k) {
    traj.states.col(k) = step * traj.states.col(k - 1);
  }
  if (!traj.states.allFinite()) throw NumericError("simulate_true: non-finite states");
  return traj;
}

Trajectory add_noise(const Trajectory& traj, double snr_db, Rng& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return traj;
  if (!std::isfinite(snr_db)) throw NumericError("add_noise: snr_db must be finite or +inf");
  const double signal_power = traj.states.squaredNorm() / static_cast<double>(traj.states.size());
  const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
  Trajectory out = traj;
  out.states += sigma * standard_gaussian(traj.n(), traj.N(), rng);
  return out;
}

Trajectory scale_trajectory(const Trajectory& traj) {
  if (traj.N() < 1) throw DimensionError("scale_trajectory: empty trajectory");
  const double norm0 = traj.states.col(0).norm();
  if (!(norm0 > 0.0)) throw NumericError("scale_trajectory: initial state has zero norm");
  Trajectory out = traj;
  out.states /= norm0;
  return out;
}

double objective_value(const Matrix& a, const Trajectory& traj) {
  check_trajectory_matches(a, traj);
  return residual(a, traj).squaredNorm() / static_cast<double>(traj.N());
}

double objective_value(const ProductPoint& x, const Trajectory& traj) {
  return objective_value(assemble_A(x), traj);
}

Matrix objective_gradient_A(const Matrix& a, const Trajectory& traj) {
  check_trajectory_matches(a, traj);
  return (-2.0 * traj.dt / static_cast<double>(traj.N())) * residual(a, traj) *
         traj.X0().transpose();
}

EuclideanGradient lift_to_blocks(const ProductPoint& x, const Matrix& grad_a) {
  EuclideanGradient g;
  g.J = grad_a * x.Q.matrix().transpose();
  g.R = -g.J;
  g.Q = (x.J.matrix() - x.R.matrix()).transpose() * grad_a;
  return g;
}

EuclideanGradient objective_euclidean_gradient(const ProductPoint& x, const Trajectory& traj) {
  return lift_to_blocks(x, objective_gradient_A(assemble_A(x), traj));
}

TangentVector objective_gradient(const ProductPoint& x, const Trajectory& traj) {
  return riem_grad_from_euclidean(x, objective_euclidean_gradient(x, traj));
}

ConstraintValues constraint_values(const Matrix& a, const ConstraintSpec& spec) {
  check_square(a, "constraint_values");
  const Eigen::Index boxes = static_cast<Eigen::Index>(spec.one_box.size() + spec.two_box.size());
  ConstraintValues out;
  out.lower.resize(boxes);
  out.upper.resize(boxes);
  out.two_box.resize(static_cast<Eigen::Index>(spec.two_box.size()));
  out.equality.resize(spec.num_equalities());
  Eigen::Index k = 0;
  for (const auto& b : spec.one_box) {
    check_entry(b.i, b.j, a.rows(), "constraint_values");
    out.lower(k) = -a(b.i, b.j) + b.lower;
    out.upper(k) = a(b.i, b.j) - b.upper;
    ++k;
  }
  Eigen::Index t = 0;
  for (const auto& b : spec.two_box) {
    check_entry(b.i, b.j, a.rows(), "constraint_values");
    const double aij = a(b.i, b.j);
    out.lower(k) = -aij + b.lower;
    out.upper(k) = aij - b.upper;
    out.two_box(t) = -(aij - b.center) * (aij - b.center) + b.half_gap * b.half_gap;
    ++k;
    ++t;
  }
  Eigen::Index e = 0;
  for (const auto& q : spec.equality) {
    check_entry(q.i, q.j, a.rows(), "constraint_values");
    out.equality(e++) = a(q.i, q.j) - q.value;
  }
  return out;
}

ConstraintValues constraint_values(const ProductPoint& x, const ConstraintSpec& spec) {
  return constraint_values(assemble_A(x), spec);
}

std::vector<Matrix> constraint_gradients_A(const Matrix& a, const ConstraintSpec& spec) {
  check_square(a, "constraint_gradients");
  const Eigen::Index n = a.rows();
  auto unit = [n](int i, int j) {
    Matrix e = Matrix::Zero(n, n);
    e(i, j) = 1.0;
    return e;
  };
  std::vector<Matrix> lower, upper, gap, eq;
  for (const auto& b : spec.one_box) {
    check_entry(b.i, b.j, n, "constraint_gradients");
    lower.push_back(-unit(b.i, b.j));
    upper.push_back(unit(b.i, b.j));
  }
  for (const auto& b : spec.two_box) {
    check_entry(b.i, b.j, n, "constraint_gradients");
    lower.push_back(-unit(b.i, b.j));
    upper.push_back(unit(b.i, b.j));
    gap.push_back(-2.0 * (a(b.i, b.j) - b.center) * unit(b.i, b.j));
  }
  for (const auto& q : spec.equality) {
    check_entry(q.i, q.j, n, "constraint_gradients");
    eq.push_back(unit(q.i, q.j));
  }
  std::vector<Matrix> out;
  out.reserve(lower.size() + upper.size() + gap.size() + eq.size());
  for (auto* block : {&lower, &upper, &gap, &eq}) {
    for (auto& m : *block) out.push_back(std::move(m));
  }
  return out;
}

std::vector<TangentVector> constraint_gradients(const ProductPoint& x,
                                                const ConstraintSpec& spec) {
  std::vector<TangentVector> out;
  for (const Matrix& ga : constraint_gradients_A(assemble_A(x), spec)) {
    out.push_back(riem_grad_from_euclidean(x, lift_to_blocks(x, ga)));
  }
  return out;
}

double max_violation(const Matrix& a, const ConstraintSpec& spec) {
  const ConstraintValues v = constraint_values(a, spec);
  double worst = 0.0;
  const Vector ineq = v.inequalities();
  if (ineq.size() > 0) worst = std::max(worst, ineq.maxCoeff());
  if (v.equality.size() > 0) worst = std::max(worst, v.equality.cwiseAbs().maxCoeff());
  return worst;
}

double max_violation(const ProductPoint& x, const ConstraintSpec& spec) {
  return max_violation(assemble_A(x), spec);
}

std::vector<std::complex<double>> sorted_eigenvalues(const Matrix& a) {
  check_square(a, "sorted_eigenvalues");
  std::vector<std::complex<double>> out;
  if (a.size() == 0) return out;
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw NumericError("sorted_eigenvalues: eigensolver failed");
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()(k));
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
    if (l.real() != r.real()) return l.real() > r.real();
    return l.imag() > r.imag();
  });
  return out;
}

double eig_rel_error(const Matrix& a_opt, const Matrix& a_true, int i) {
  if (a_opt.rows() != a_true.rows()) throw DimensionError("eig_rel_error: size mismatch");
  if (i < 1 || i > a_true.rows()) throw DimensionError("eig_rel_error: index out of range");
  const auto opt = sorted_eigenvalues(a_opt);
  const auto truth = sorted_eigenvalues(a_true);
  const double denom = std::abs(truth[static_cast<size_t>(i - 1)].real());
  if (denom == 0.0) throw NumericError("eig_rel_error: true eigenvalue has zero real part");
  return std::abs(opt[static_cast<size_t>(i - 1)].real() -
                  truth[static_cast<size_t>(i - 1)].real()) /
         denom;
}

EigReport eig_report(const Matrix& a_opt, const Matrix& a_true) {
  EigReport r;
  r.eigenvalues = sorted_eigenvalues(a_opt);
  const auto truth = sorted_eigenvalues(a_true);
  for (size_t k = 0; k < truth.size(); ++k) {
    const double denom = std::abs(truth[k].real());
    r.rel_errors.push_back(denom == 0.0 ? std::numeric_limits<double>::infinity()
                                        : std::abs(r.eigenvalues[k].real() - truth[k].real()) /
                                              denom);
  }
  return r;
}

ProductPoint random_stable_triple(Eigen::Index n, Rng& rng) {
  if (n < 1) throw DimensionError("random_stable_triple: n must be >= 1");
  SkewMatrix j = skew_project(standard_gaussian(n, n, rng));
  SpdMatrix r = random_spd(n, rng);
  SpdMatrix q = random_spd(n, rng);
  return {std::move(j), std::move(r), std::move(q)};
}

ProductPoint random_initial_point(Eigen::Index n, Rng& rng) { return random_stable_triple(n, rng); }

ConstraintSpec generate_constraints(const Matrix& a_true, const ConstraintGenOptions& opts,
                                    Rng& rng) {
  check_square(a_true, "generate_constraints");
  const Eigen::Index n = a_true.rows();
  const int total = opts.num_one_box + opts.num_two_box + opts.num_equality;
  if (opts.num_one_box < 0 || opts.num_two_box < 0 || opts.num_equality < 0 ||
      total > n * n) {
    throw DimensionError("generate_constraints: requested more entries than A has");
  }
  std::vector<int> cells(static_cast<size_t>(n * n));
  std::iota(cells.begin(), cells.end(), 0);
  // Partial Fisher-Yates with an explicit uniform draw keeps the sampling
  // independent of the standard library's shuffle implementation.
  for (int k = 0; k < total; ++k) {
    std::uniform_int_distribution<int> pick(k, static_cast<int>(cells.size()) - 1);
    std::swap(cells[static_cast<size_t>(k)], cells[static_cast<size_t>(pick(rng))]);
  }
  auto bounds = [&](double a) {
    const double pad = opts.rel_margin * std::abs(a) + opts.abs_margin;
    return std::pair{a - pad, a + pad};
  };
  ConstraintSpec spec;
  int k = 0;
  for (; k < opts.num_one_box; ++k) {
    const int cell = cells[static_cast<size_t>(k)];
    const int i = cell % static_cast<int>(n);
    const int j = cell / static_cast<int>(n);
    const auto [l, u] = bounds(a_true(i, j));
    spec.one_box.push_back({i, j, l, u});
  }
  std::bernoulli_distribution upper_side(0.5);
  for (; k < opts.num_one_box + opts.num_two_box; ++k) {
    const int cell = cells[static_cast<size_t>(k)];
    const int i = cell % static_cast<int>(n);
    const int j = cell / static_cast<int>(n);
    const double a = a_true(i, j);
    const auto [l, u] = bounds(a);
    const bool up = upper_side(rng);
    const double room = up ? (u - a) : (a - l);
    const double center = up ? a + 0.5 * room : a - 0.5 * room;
    spec.two_box.push_back({i, j, l, u, center, 0.25 * room});
  }
  for (; k < total; ++k) {
    const int cell = cells[static_cast<size_t>(k)];
    const int i = cell % static_cast<int>(n);
    const int j = cell / static_cast<int>(n);
    spec.equality.push_back({i, j, a_true(i, j)});
  }
  spec.validate(n);
  return spec;
}

}  // namespace stableid
