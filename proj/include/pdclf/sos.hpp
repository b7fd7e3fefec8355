#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pdclf/conic.hpp"
#include "pdclf/polymatrix.hpp"
#include "pdclf/polynomial.hpp"

namespace pdclf {

inline constexpr double kSvecSqrt2 = 1.4142135623730951;

/// Monomials over `vars` with total degree in [min_deg, max_deg] and
/// per-variable degree <= the cap given for that variable (no cap if absent).
/// Returned sorted in graded-lex order.
inline std::vector<Monomial> monomial_basis(const std::vector<int>& vars,
                                            int min_deg, int max_deg,
                                            const std::map<int, int>& caps = {}) {
  std::vector<int> sorted_vars = vars;
  std::sort(sorted_vars.begin(), sorted_vars.end());
  std::vector<Monomial> out;
  std::vector<std::pair<int, int>> current;
  std::function<void(size_t, int)> rec = [&](size_t k, int used) {
    if (k == sorted_vars.size()) {
      if (used >= min_deg) out.emplace_back(current);
      return;
    }
    int v = sorted_vars[k];
    int cap = max_deg - used;
    auto it = caps.find(v);
    if (it != caps.end()) cap = std::min(cap, it->second);
    for (int e = 0; e <= cap; ++e) {
      if (e > 0) current.push_back({v, e});
      rec(k + 1, used + e);
      if (e > 0) current.pop_back();
    }
  };
  rec(0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Sound Gram basis for a sum-of-squares representation of `support`:
/// degree-interval and per-variable degree-box pruning (an over-approximation
/// of the half Newton polytope, so no representation is lost).
inline std::vector<Monomial> gram_basis_for(const std::set<int>& vars,
                                            int min_total, int max_total,
                                            const std::map<int, int>& var_degs,
                                            bool prune) {
  std::vector<int> vlist(vars.begin(), vars.end());
  int dmax = (max_total + 1) / 2;
  int dmin = prune ? min_total / 2 : 0;
  std::map<int, int> caps;
  if (prune)
    for (auto& [v, d] : var_degs) caps[v] = (d + 1) / 2;
  return monomial_basis(vlist, dmin, dmax, caps);
}

/// Reference to one PSD (Gram) block created inside an SosProgram.
struct GramRef {
  std::string name;
  int block = -1;          // index among PSD blocks, -1 if empty
  int side = 0;            // side of the PSD matrix
  int first_abstract = -1; // abstract id of svec cell 0
  int mat_side = 1;        // matrix-SOS side (1 for scalar SOS)
  std::vector<Monomial> basis;
};

/// Assembles an SOS feasibility/optimization problem into a conic program:
///   decisions: free scalars, nonnegative scalars, PSD Gram blocks,
///              exponential-cone triples;
///   constraints: polynomial identities (coefficient matching) whose
///                coefficients are affine in the decisions.
/// All decision handles are "abstract ids"; compile() lays them out in conic
/// storage order deterministically (creation order within each cone group).
class SosProgram {
 public:
  explicit SosProgram(VarSpacePtr space) : space_(std::move(space)) {}

  const VarSpacePtr& space() const { return space_; }

  // ---- decision variables -------------------------------------------------

  int add_free(const std::string& name) {
    return add_abstract({Kind::kFree, -1, -1, name});
  }

  int add_nonneg(const std::string& name) {
    return add_abstract({Kind::kNonneg, -1, -1, name});
  }

  /// PSD block of the given side; returns the abstract id of svec cell 0.
  /// Cells are ordered column-major upper triangle: (0,0),(0,1),(1,1),...
  GramRef add_psd_block(const std::string& name, int side,
                        std::vector<Monomial> basis = {}, int mat_side = 1) {
    GramRef ref;
    ref.name = name;
    ref.side = side;
    ref.mat_side = mat_side;
    ref.basis = std::move(basis);
    if (side == 0) return ref;
    ref.block = static_cast<int>(psd_blocks_.size());
    int first = -1;
    for (int j = 0; j < side; ++j)
      for (int i = 0; i <= j; ++i) {
        int id = add_abstract({Kind::kPsdCell, ref.block, svec_index(i, j), name});
        if (first < 0) first = id;
      }
    ref.first_abstract = first;
    psd_blocks_.push_back({name, side, first});
    return ref;
  }

  /// One exponential-cone triple (x,y,z); returns abstract ids {x, y, z}.
  std::array<int, 3> add_exp_triple(const std::string& name) {
    int t = num_exp_++;
    return {add_abstract({Kind::kExpCell, t, 0, name}),
            add_abstract({Kind::kExpCell, t, 1, name}),
            add_abstract({Kind::kExpCell, t, 2, name})};
  }

  static int svec_index(int i, int j) {  // i <= j
    return j * (j + 1) / 2 + i;
  }

  /// Polynomial with one fresh free coefficient per basis monomial.
  APoly free_poly(const std::string& name, const std::vector<Monomial>& basis) {
    APoly p(space_);
    int k = 0;
    for (const Monomial& m : basis) {
      int id = add_free(name + "[" + std::to_string(k++) + "]");
      p.add_term(m, LinExpr::variable(id));
    }
    return p;
  }

  /// SOS-by-construction polynomial  q(z) = b(z)' Q b(z)  with Q a fresh PSD
  /// block over the given monomial basis.
  APoly gram_poly(const std::string& name, const std::vector<Monomial>& basis,
                  GramRef* ref_out = nullptr) {
    GramRef ref = add_psd_block(name, static_cast<int>(basis.size()), basis);
    APoly q(space_);
    accumulate_gram_entry(ref, basis, 0, 0, &q);
    if (ref_out) *ref_out = ref;
    gram_families_.push_back(ref);
    return q;
  }

  /// Matrix-SOS-by-construction:  M(z) = (v (x) b)' Q (v (x) b),  side n.
  APolyMat gram_poly_matrix(const std::string& name, int n,
                            const std::vector<Monomial>& basis,
                            GramRef* ref_out = nullptr) {
    int nb = static_cast<int>(basis.size());
    GramRef ref = add_psd_block(name, n * nb, basis, n);
    APolyMat M(space_, n, n);
    for (int I = 0; I < n; ++I)
      for (int J = I; J < n; ++J) {
        APoly entry(space_);
        accumulate_gram_entry(ref, basis, I, J, &entry);
        M(I, J) = entry;
        if (J > I) M(J, I) = entry;
      }
    if (ref_out) *ref_out = ref;
    gram_families_.push_back(ref);
    return M;
  }

  // ---- constraints ---------------------------------------------------------

  /// Coefficient-matching rows: every monomial of p must vanish.
  void require_zero(const APoly& p) {
    check_same_space(space_, p.space());
    for (auto& [mono, coef] : p.terms()) {
      int row = proto_.add_rows(1);
      for (auto& [id, a] : coef.terms()) proto_.set_entry(row, id, a);
      proto_.h[row] = -coef.constant();
    }
  }

  /// require_zero entrywise on the upper triangle of a symmetric matrix.
  void require_zero_sym(const APolyMat& M) {
    if (M.rows() != M.cols())
      throw DimensionMismatch("symmetric zero constraint needs a square matrix");
    for (int i = 0; i < M.rows(); ++i)
      for (int j = i; j < M.cols(); ++j) require_zero(M(i, j));
  }

  /// p must be a sum of squares: introduce a Gram block over a sound basis
  /// and match coefficients of p - b'Qb = 0 over the union of supports.
  GramRef require_sos(const APoly& p, const std::string& name,
                      bool prune = true) {
    auto basis = basis_for_poly(p, prune);
    GramRef ref;
    APoly q = gram_poly(name, basis, &ref);
    require_zero(p - q);
    return ref;
  }

  /// require_sos with a caller-supplied Gram basis (the caller is
  /// responsible for the basis being large enough; too-small bases simply
  /// constrain the residual coefficients to zero, which is sound).
  GramRef require_sos(const APoly& p, const std::string& name,
                      const std::vector<Monomial>& basis) {
    GramRef ref;
    APoly q = gram_poly(name, basis, &ref);
    require_zero(p - q);
    return ref;
  }

  /// M(z) must be matrix SOS (hence PSD for every z).
  GramRef require_matrix_sos(const APolyMat& M, const std::string& name,
                             bool prune = true) {
    if (M.rows() != M.cols())
      throw DimensionMismatch("matrix SOS constraint needs a square matrix");
    return require_matrix_sos(M, name, basis_for_matrix(M, prune));
  }

  /// require_matrix_sos with a caller-supplied Gram basis.
  GramRef require_matrix_sos(const APolyMat& M, const std::string& name,
                             const std::vector<Monomial>& basis) {
    if (M.rows() != M.cols())
      throw DimensionMismatch("matrix SOS constraint needs a square matrix");
    GramRef ref;
    APolyMat Q = gram_poly_matrix(name, M.rows(), basis, &ref);
    require_zero_sym(M - Q);
    return ref;
  }

  // ---- log det epigraph ----------------------------------------------------

  /// Returns sum_i t_i with t_i <= log of the i-th Cholesky pivot of X0, via
  /// the standard bordered-matrix + exponential-cone construction, so that
  /// sum t_i <= log det(X0).  X0 is a symmetric matrix of affine expressions.
  LinExpr logdet_lower_bound(const std::vector<std::vector<LinExpr>>& X0,
                             const std::string& name) {
    int n = static_cast<int>(X0.size());
    // Border matrix B = [[X0, Z], [Z', diag(Z)]] as one PSD block, pinned
    // entrywise by equality rows.
    GramRef block = add_psd_block(name + ".border", 2 * n);
    std::vector<std::vector<int>> Z(n, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        Z[i][j] = add_free(name + ".chol[" + std::to_string(i) + "][" +
                           std::to_string(j) + "]");
    auto cell = [&](int i, int j) {  // abstract id of B(i,j), i <= j
      return block.first_abstract + svec_index(i, j);
    };
    auto pin = [&](int i, int j, const LinExpr& val) {
      // svec stores sqrt2 * B_ij off the diagonal.
      double s = (i == j) ? 1.0 : kSvecSqrt2;
      LinExpr e = LinExpr::variable(cell(i, j)) - val * s;
      int row = proto_.add_rows(1);
      for (auto& [id, a] : e.terms()) proto_.set_entry(row, id, a);
      proto_.h[row] = -e.constant();
    };
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) pin(i, j, X0[i][j]);
    for (int i = 0; i < n; ++i)
      for (int j = n; j < 2 * n; ++j) {
        int zj = j - n;  // B(i, n+zj) = Z_{i, zj}, zero above the diagonal
        pin(i, j, zj <= i ? LinExpr::variable(Z[i][zj]) : LinExpr(0.0));
      }
    for (int i = n; i < 2 * n; ++i)
      for (int j = i; j < 2 * n; ++j)
        pin(i, j, i == j ? LinExpr::variable(Z[i - n][i - n]) : LinExpr(0.0));
    // t_i <= log Z_ii  as  (t_i, 1, Z_ii) in Kexp.
    LinExpr total(0.0);
    for (int i = 0; i < n; ++i) {
      auto tri = add_exp_triple(name + ".log[" + std::to_string(i) + "]");
      int ti = add_free(name + ".t[" + std::to_string(i) + "]");
      pin_equal(tri[0], LinExpr::variable(ti));
      pin_equal(tri[1], LinExpr(1.0));
      pin_equal(tri[2], LinExpr::variable(Z[i][i]));
      total += LinExpr::variable(ti);
    }
    return total;
  }

  /// Equality row: variable `id` equals the affine expression.
  void pin_equal(int id, const LinExpr& val) {
    LinExpr e = LinExpr::variable(id) - val;
    int row = proto_.add_rows(1);
    for (auto& [aid, a] : e.terms()) proto_.set_entry(row, aid, a);
    proto_.h[row] = -e.constant();
  }

  void set_objective(const LinExpr& minimize) { objective_ = minimize; }

  const std::vector<GramRef>& gram_families() const { return gram_families_; }

  // ---- compilation ---------------------------------------------------------

  struct Compiled {
    ConicProgram program;
    std::vector<int> column_of;   // abstract id -> conic column
    double objective_offset = 0.0;
    // Diagnosis mode: per-Gram-family slack columns (empty otherwise).
    std::vector<std::pair<std::string, int>> family_slack_cols;
  };

  /// Deterministic layout + row remap.  With diagnose=true every Gram family
  /// F gets a nonnegative slack sigma_F allowing Q_F >= -sigma_F I, and the
  /// objective becomes min sum sigma_F: solving tells which SOS families
  /// block feasibility and by how much.
  Compiled compile(bool diagnose = false) const {
    Compiled out;
    int n_abstract = static_cast<int>(abstract_.size());
    out.column_of.assign(n_abstract, -1);

    int n_free = 0, n_nonneg = 0;
    for (auto& e : abstract_) {
      if (e.kind == Kind::kFree) ++n_free;
      if (e.kind == Kind::kNonneg) ++n_nonneg;
    }
    int diag_slacks = diagnose ? static_cast<int>(gram_families_.size()) : 0;

    ConeLayout& K = out.program.cones;
    K.num_free = n_free;
    K.num_nonneg = n_nonneg + diag_slacks;
    for (auto& b : psd_blocks_) K.psd_sides.push_back(b.side);
    K.num_exp = num_exp_;

    // Assign columns in creation order within each group.
    int free_at = K.free_offset(), nonneg_at = K.nonneg_offset();
    std::vector<int> psd_off(psd_blocks_.size());
    for (size_t b = 0; b < psd_blocks_.size(); ++b)
      psd_off[b] = K.psd_offset(static_cast<int>(b));
    for (int id = 0; id < n_abstract; ++id) {
      const Entry& e = abstract_[id];
      switch (e.kind) {
        case Kind::kFree: out.column_of[id] = free_at++; break;
        case Kind::kNonneg: out.column_of[id] = nonneg_at++; break;
        case Kind::kPsdCell:
          out.column_of[id] = psd_off[e.block] + e.offset;
          break;
        case Kind::kExpCell:
          out.column_of[id] = K.exp_offset(e.block) + e.offset;
          break;
      }
    }
    // Slack columns occupy the tail of the nonneg group.
    std::map<int, int> slack_col_of_block;  // psd block -> slack column
    if (diagnose) {
      int at = nonneg_at;
      for (size_t f = 0; f < gram_families_.size(); ++f) {
        const GramRef& ref = gram_families_[f];
        out.family_slack_cols.push_back({ref.name, at});
        if (ref.block >= 0) slack_col_of_block[ref.block] = at;
        ++at;
      }
    }

    out.program.h = proto_.h;
    out.program.c.assign(K.total_dim(), 0.0);
    out.program.G_entries.reserve(proto_.G_entries.size());
    for (auto& t : proto_.G_entries) {
      int col = out.column_of[t.col()];
      out.program.G_entries.emplace_back(t.row(), col, t.value());
      if (diagnose) {
        // Substitute Q = Q' - sigma I on diagonal Gram cells.
        const Entry& e = abstract_[t.col()];
        if (e.kind == Kind::kPsdCell) {
          auto it = slack_col_of_block.find(e.block);
          if (it != slack_col_of_block.end() && is_diag_cell(e.offset))
            out.program.G_entries.emplace_back(t.row(), it->second, -t.value());
        }
      }
    }
    if (diagnose) {
      for (auto& [name, col] : out.family_slack_cols) out.program.c[col] = 1.0;
    } else {
      for (auto& [id, a] : objective_.terms())
        out.program.c[out.column_of[id]] += a;
      out.objective_offset = objective_.constant();
    }
    return out;
  }

  // ---- basis helpers -------------------------------------------------------

  std::vector<Monomial> basis_for_poly(const APoly& p, bool prune) const {
    std::set<int> vars = p.vars_appearing();
    std::map<int, int> var_degs;
    for (int v : vars) var_degs[v] = p.degree_in(v);
    return gram_basis_for(vars, p.min_total_degree(), p.total_degree(),
                          var_degs, prune);
  }

  std::vector<Monomial> basis_for_matrix(const APolyMat& M, bool prune) const {
    std::set<int> vars;
    std::map<int, int> var_degs;
    int dmax = 0;
    int dmin = std::numeric_limits<int>::max();
    for (int i = 0; i < M.rows(); ++i)
      for (int j = 0; j < M.cols(); ++j) {
        const APoly& p = M(i, j);
        if (p.is_zero()) continue;
        for (int v : p.vars_appearing()) {
          vars.insert(v);
          var_degs[v] = std::max(var_degs[v], p.degree_in(v));
        }
        dmax = std::max(dmax, p.total_degree());
        dmin = std::min(dmin, p.min_total_degree());
      }
    if (dmin > dmax) dmin = 0;  // all-zero matrix
    return gram_basis_for(vars, dmin, dmax, var_degs, prune);
  }

 private:
  enum class Kind { kFree, kNonneg, kPsdCell, kExpCell };
  struct Entry {
    Kind kind;
    int block;   // psd block index or exp triple index
    int offset;  // svec cell index or exp component
    std::string name;
  };
  struct PsdBlock {
    std::string name;
    int side;
    int first_abstract;
  };

  static bool is_diag_cell(int svec_cell) {
    // Cell j(j+1)/2 + i is diagonal iff i == j.
    int j = 0;
    while ((j + 1) * (j + 2) / 2 <= svec_cell) ++j;
    return svec_cell - j * (j + 1) / 2 == j;
  }

  int add_abstract(Entry e) {
    abstract_.push_back(std::move(e));
    return static_cast<int>(abstract_.size()) - 1;
  }

  /// Adds  sum_{i,j} Q[(I,i),(J,j)] b_i b_j  to *out (I=J=0 with mat_side 1
  /// reproduces scalar b'Qb).
  void accumulate_gram_entry(const GramRef& ref,
                             const std::vector<Monomial>& basis, int I, int J,
                             APoly* out) const {
    int nb = static_cast<int>(basis.size());
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) {
        int r = I * nb + i, c = J * nb + j;
        if (r > c) std::swap(r, c);
        double coef = (r == c) ? 1.0 : 1.0 / kSvecSqrt2;
        int id = ref.first_abstract + svec_index(r, c);
        out->add_term(basis[i] * basis[j], LinExpr::variable(id, coef));
      }
  }

  VarSpacePtr space_;
  std::vector<Entry> abstract_;
  std::vector<PsdBlock> psd_blocks_;
  std::vector<GramRef> gram_families_;
  int num_exp_ = 0;
  ConicProgram proto_;  // rows with abstract column ids
  LinExpr objective_;
};

/// Decision-value view over a solved conic program.
class SosValues {
 public:
  SosValues(const SosProgram::Compiled& compiled, const ConicSolution& sol)
      : compiled_(compiled), sol_(sol) {}

  double value(int abstract_id) const {
    return sol_.w.at(compiled_.column_of.at(abstract_id));
  }

  double value(const LinExpr& e) const {
    double r = e.constant();
    for (auto& [id, a] : e.terms()) r += a * value(id);
    return r;
  }

  Poly value(const APoly& p) const {
    Poly r(p.space());
    for (auto& [m, c] : p.terms()) r.add_term(m, value(c));
    return r;
  }

  PolyMat value(const APolyMat& M) const {
    PolyMat r(M.space(), M.rows(), M.cols());
    for (int i = 0; i < M.rows(); ++i)
      for (int j = 0; j < M.cols(); ++j) r(i, j) = value(M(i, j));
    return r;
  }

  /// Reconstruct a Gram block as a dense symmetric matrix.
  Eigen::MatrixXd gram(const GramRef& ref) const {
    Eigen::MatrixXd Q(ref.side, ref.side);
    for (int j = 0; j < ref.side; ++j)
      for (int i = 0; i <= j; ++i) {
        double w = value(ref.first_abstract + SosProgram::svec_index(i, j));
        Q(i, j) = Q(j, i) = (i == j) ? w : w / kSvecSqrt2;
      }
    return Q;
  }

  double gram_min_eigenvalue(const GramRef& ref) const {
    if (ref.side == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram(ref));
    return eig.eigenvalues().minCoeff();
  }

 private:
  const SosProgram::Compiled& compiled_;
  const ConicSolution& sol_;
};

}  // namespace pdclf
