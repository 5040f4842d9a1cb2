#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace liesde {

// Multivariate scalar polynomial with exact term arithmetic.  Terms are kept
// in graded-lexicographic order with equal monomials merged and exact zeros
// dropped, so structurally equal polynomials have identical term lists.
class Polynomial {
 public:
  using Term = std::pair<std::vector<int>, double>;  // (exponents, coeff)

  explicit Polynomial(std::size_t dim = 0) : dim_(dim) {}
  static Polynomial constant(std::size_t dim, double value);
  static Polynomial variable(std::size_t dim, std::size_t index);

  std::size_t dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  void add_term(std::vector<int> exponents, double coeff);

  double operator()(const Eigen::VectorXd& x) const;
  Polynomial derivative(std::size_t var) const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scaled(double s) const;

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;  // no monomial of positive degree
  double constant_value() const;
  int total_degree() const;  // -1 for the zero polynomial

 private:
  std::size_t dim_;
  std::vector<Term> terms_;
  void canonicalize();
};

// One monomial summand c * x^e of component `component` of a vector field.
struct PolyTerm {
  std::size_t component;
  std::vector<int> exponents;
  double coefficient;
};

// Polynomial vector field on R^n.  Canonical term order is (component,
// graded-lex exponents); equal monomials merge, exact zeros are dropped.
class PolyVectorField {
 public:
  explicit PolyVectorField(std::size_t dim = 0) : dim_(dim) {}
  static PolyVectorField zero(std::size_t dim) { return PolyVectorField(dim); }

  std::size_t dim() const { return dim_; }
  const std::vector<PolyTerm>& terms() const { return terms_; }

  void add_term(std::size_t component, std::vector<int> exponents,
                double coeff);
  void add_scaled(const PolyVectorField& other, double s);

  Eigen::VectorXd operator()(const Eigen::VectorXd& z) const;
  Polynomial component_polynomial(std::size_t i) const;

  PolyVectorField scaled(double s) const;
  PolyVectorField operator+(const PolyVectorField& o) const;

  bool is_zero(double tol = 1e-12) const;
  double max_abs_coefficient() const;
  int max_total_degree() const;  // -1 for the zero field

 private:
  std::size_t dim_;
  std::vector<PolyTerm> terms_;
  void canonicalize();
};

// Per-term comparison after canonical merge.
bool approx_equal(const PolyVectorField& a, const PolyVectorField& b,
                  double tol = 1e-12);

// Jacobi-Lie bracket [Y1, Y2] = DY2 . Y1 - DY1 . Y2, exact on polynomials.
// With this sign, matrix commutators satisfy [A., B.](z) = -( [A,B] z ) for
// linear fields z -> Az; the matching matrix convention is [A,B] = AB - BA.
PolyVectorField bracket(const PolyVectorField& y1, const PolyVectorField& y2);

// Copies the field onto each diagonal block of R^(n*copies):
// (q_0, ..., q_{m}) -> (Y(q_0), ..., Y(q_m)).  Bracket commutes with this
// extension, which is what makes joint tangency arguments work.
PolyVectorField diagonal_extend(const PolyVectorField& field,
                                std::size_t copies);

struct DiagonalExtension {
  PolyVectorField base;
  std::size_t copies = 1;
  PolyVectorField field() const { return diagonal_extend(base, copies); }
};

// Field z -> A z (components are linear forms).
PolyVectorField linear_vector_field(const Eigen::MatrixXd& a);
// Constant field z -> v.
PolyVectorField constant_vector_field(const Eigen::VectorXd& v);

// Halton points mapped to [lo, hi]^dim; deterministic sampling layout used by
// the involutivity check.
std::vector<Eigen::VectorXd> quasi_random_points(std::size_t dim,
                                                 std::size_t count = 16,
                                                 double lo = -2.0,
                                                 double hi = 2.0);

struct InvolutivityWitness {
  std::size_t pair_i = 0;
  std::size_t pair_j = 0;
  std::size_t point_index = 0;
  double residual = 0.0;
};

struct InvolutivityReport {
  bool involutive = false;
  double max_residual = 0.0;
  std::optional<InvolutivityWitness> witness;
};

// Tests whether every pairwise bracket is a fixed linear combination of the
// generators when both sides are evaluated at the sample points: one
// least-squares fit per pair across all points, residual scaled by
// max(1, |bracket value|).  A sampled certificate, not a symbolic proof.
InvolutivityReport check_involutive(const std::vector<PolyVectorField>& fields,
                                    const std::vector<Eigen::VectorXd>& points,
                                    double rank_tol = 1e-6);
InvolutivityReport check_involutive(const std::vector<PolyVectorField>& fields,
                                    double rank_tol = 1e-6);

struct ClosureReport {
  bool closed = false;
  bool cap_hit = false;
  std::size_t dimension = 0;
  std::vector<PolyVectorField> basis;
  // c[i][j][k]: [basis_i, basis_j] = sum_k c[i][j][k] basis_k; present only
  // when the closure terminated below the cap.
  std::optional<std::vector<std::vector<std::vector<double>>>>
      structure_constants;
};

// Repeatedly brackets an independent basis extracted from the generators,
// appending new directions in deterministic order (pairs are processed
// first-in first-out, new elements appended as found) until the span is
// bracket-closed or dim_cap is exceeded.  Independence uses a relative
// singular-value threshold dep_tol on coefficient vectors.
ClosureReport lie_closure(const std::vector<PolyVectorField>& generators,
                          std::size_t dim_cap, double dep_tol = 1e-9);

// Text form, one term per line: "component exponents... coefficient".
void write_field_terms(std::ostream& os, const PolyVectorField& field);
PolyVectorField read_field_terms(std::istream& is, std::size_t dim);

}  // namespace liesde
