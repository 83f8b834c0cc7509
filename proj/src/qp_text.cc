#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "stableid/errors.hpp"
#include "stableid/qp.hpp"

namespace stableid {
namespace {

void write_row(std::ostream& os, const Eigen::Ref<const Vector>& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) os << (j ? " " : "") << row(j);
  os << "\n";
}

Vector read_row(std::istream& is, Eigen::Index count, const char* what) {
  std::string line;
  while (std::getline(is, line) && line.empty()) {
  }
  std::istringstream ss(line);
  Vector v(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    if (!(ss >> v(j))) throw IoError(std::string("qp text: short ") + what + " row");
  }
  return v;
}

}  // namespace

void write_qp_text(std::ostream& os, const QpProblem& qp) {
  os << qp.dim() << " " << qp.num_ineq() << " " << qp.num_eq() << "\n";
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < qp.dim(); ++i) write_row(os, qp.H.row(i).transpose());
  write_row(os, qp.g);
  for (Eigen::Index i = 0; i < qp.num_ineq(); ++i) {
    Vector row(qp.dim() + 1);
    row << qp.A_ineq.row(i).transpose(), qp.b_ineq(i);
    write_row(os, row);
  }
  for (Eigen::Index i = 0; i < qp.num_eq(); ++i) {
    Vector row(qp.dim() + 1);
    row << qp.A_eq.row(i).transpose(), qp.b_eq(i);
    write_row(os, row);
  }
}

QpProblem read_qp_text(std::istream& is) {
  Eigen::Index d = 0, mi = 0, me = 0;
  std::string line;
  if (!std::getline(is, line)) throw IoError("qp text: empty input");
  std::istringstream header(line);
  if (!(header >> d >> mi >> me) || d < 0 || mi < 0 || me < 0) {
    throw IoError("qp text: bad `dim nineq neq` line");
  }
  QpProblem qp;
  qp.H.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) qp.H.row(i) = read_row(is, d, "H").transpose();
  qp.g = read_row(is, d, "g");
  qp.A_ineq.resize(mi, d);
  qp.b_ineq.resize(mi);
  for (Eigen::Index i = 0; i < mi; ++i) {
    const Vector row = read_row(is, d + 1, "inequality");
    qp.A_ineq.row(i) = row.head(d).transpose();
    qp.b_ineq(i) = row(d);
  }
  qp.A_eq.resize(me, d);
  qp.b_eq.resize(me);
  for (Eigen::Index i = 0; i < me; ++i) {
    const Vector row = read_row(is, d + 1, "equality");
    qp.A_eq.row(i) = row.head(d).transpose();
    qp.b_eq(i) = row(d);
  }
  return qp;
}

}  // namespace stableid
