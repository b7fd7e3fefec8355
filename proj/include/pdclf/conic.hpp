#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pdclf/errors.hpp"

namespace pdclf {

/// Variable cone layout of a conic program, in storage order:
/// [ free | nonneg | PSD blocks (svec, side s_k -> s_k(s_k+1)/2 entries) |
///   exponential triples ].
struct ConeLayout {
  int num_free = 0;
  int num_nonneg = 0;
  std::vector<int> psd_sides;
  int num_exp = 0;  // number of (x,y,z) triples

  int psd_dim() const {
    int d = 0;
    for (int s : psd_sides) d += s * (s + 1) / 2;
    return d;
  }
  int total_dim() const { return num_free + num_nonneg + psd_dim() + 3 * num_exp; }
  int free_offset() const { return 0; }
  int nonneg_offset() const { return num_free; }
  int psd_offset(int block) const {
    int off = num_free + num_nonneg;
    for (int k = 0; k < block; ++k) off += psd_sides[k] * (psd_sides[k] + 1) / 2;
    return off;
  }
  int exp_offset(int triple) const {
    return num_free + num_nonneg + psd_dim() + 3 * triple;
  }
};

/// min c'w  s.t.  G w = h,  w in K(layout).
struct ConicProgram {
  ConeLayout cones;
  std::vector<double> c;                         // size cones.total_dim()
  std::vector<Eigen::Triplet<double>> G_entries; // row, col, value
  std::vector<double> h;                         // equality right-hand sides

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(h.size()); }

  int add_rows(int k) {
    int first = num_rows();
    h.insert(h.end(), k, 0.0);
    return first;
  }

  void set_entry(int row, int col, double value) {
    if (value != 0.0) G_entries.emplace_back(row, col, value);
  }

  Eigen::SparseMatrix<double> G_matrix() const {
    Eigen::SparseMatrix<double> G(num_rows(), num_vars());
    G.setFromTriplets(G_entries.begin(), G_entries.end());
    return G;
  }

  /// Documented sparse text format (deterministic; used by the byte-identity
  /// compile test and the --dump-program CLI option):
  ///   line 1: "conic <nvars> <nrows>"
  ///   line 2: "cones free <nf> nonneg <nl> psd <s1> ... exp <ne>"
  ///   line 3: "objective <col>:<val> ..."   (sparse, ascending col)
  ///   then one line per equality row: "row <r>: <col>:<val> ... = <rhs>"
  ///   entries within a row are column-sorted, duplicates summed.
  void write_text(std::ostream& os) const {
    auto G = G_matrix();
    os << "conic " << num_vars() << " " << num_rows() << "\n";
    os << "cones free " << cones.num_free << " nonneg " << cones.num_nonneg
       << " psd";
    for (int s : cones.psd_sides) os << " " << s;
    os << " exp " << cones.num_exp << "\n";
    os.precision(17);
    os << "objective";
    for (int j = 0; j < num_vars(); ++j)
      if (c[j] != 0.0) os << " " << j << ":" << c[j];
    os << "\n";
    // Row-major traversal of the (column-major) sparse matrix.
    Eigen::SparseMatrix<double, Eigen::RowMajor> Gr(G);
    for (int r = 0; r < num_rows(); ++r) {
      os << "row " << r << ":";
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Gr, r);
           it; ++it)
        os << " " << it.col() << ":" << it.value();
      os << " = " << h[r] << "\n";
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
  }
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,   // no w with Gw = h, w in K
  kUnbounded,    // objective unbounded below over the feasible set
  kMaxIters,     // returned best iterate without meeting tolerances
  kNumericalError,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kMaxIters: return "max_iterations";
    case SolveStatus::kNumericalError: return "numerical_error";
  }
  return "unknown";
}

struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalError;
  std::vector<double> w;     // primal point (by cone layout), valid for optimal/max-iters
  double objective = 0.0;    // c'w
  int iterations = 0;
  double primal_residual = 0.0;  // ||Gw - h||_inf
  double dual_residual = 0.0;
  double gap = 0.0;
};

}  // namespace pdclf
