#include "liesde/fields.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "liesde/common.hpp"

namespace liesde {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

int exponent_sum(const std::vector<int>& e) {
  int s = 0;
  for (int v : e) s += v;
  return s;
}

// graded-lex: total degree first, then plain lexicographic on exponents.
bool graded_lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  const int da = exponent_sum(a);
  const int db = exponent_sum(b);
  if (da != db) return da < db;
  return a < b;
}

void check_exponents(const std::vector<int>& e, std::size_t dim) {
  if (e.size() != dim) {
    throw std::invalid_argument("polynomial term: exponent vector length");
  }
  for (int v : e) {
    if (v < 0) throw std::invalid_argument("polynomial term: negative exponent");
  }
}

}  // namespace

Polynomial Polynomial::constant(std::size_t dim, double value) {
  Polynomial p(dim);
  p.add_term(std::vector<int>(dim, 0), value);
  return p;
}

Polynomial Polynomial::variable(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::invalid_argument("Polynomial::variable: index");
  Polynomial p(dim);
  std::vector<int> e(dim, 0);
  e[index] = 1;
  p.add_term(std::move(e), 1.0);
  return p;
}

void Polynomial::add_term(std::vector<int> exponents, double coeff) {
  check_exponents(exponents, dim_);
  terms_.emplace_back(std::move(exponents), coeff);
  canonicalize();
}

void Polynomial::canonicalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) {
              return graded_lex_less(a.first, b.first);
            });
  std::vector<Term> merged;
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().first == t.first) {
      merged.back().second += t.second;
    } else {
      merged.push_back(std::move(t));
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Term& t) { return t.second == 0.0; }),
               merged.end());
  terms_ = std::move(merged);
}

double Polynomial::operator()(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw std::invalid_argument("Polynomial: evaluation point dimension");
  }
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = c;
    for (std::size_t v = 0; v < dim_; ++v) {
      if (e[v] != 0) m *= ipow(x[static_cast<Eigen::Index>(v)], e[v]);
    }
    acc += m;
  }
  return acc;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= dim_) throw std::invalid_argument("Polynomial::derivative: var");
  Polynomial out(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    std::vector<int> d = e;
    d[var] -= 1;
    out.terms_.emplace_back(std::move(d), c * static_cast<double>(e[var]));
  }
  out.canonicalize();
  return out;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (dim_ != o.dim_) throw std::invalid_argument("Polynomial: dim mismatch");
  Polynomial out(dim_);
  out.terms_ = terms_;
  out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
  out.canonicalize();
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  return *this + o.scaled(-1.0);
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (dim_ != o.dim_) throw std::invalid_argument("Polynomial: dim mismatch");
  Polynomial out(dim_);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : o.terms_) {
      std::vector<int> e(dim_);
      for (std::size_t v = 0; v < dim_; ++v) e[v] = ea[v] + eb[v];
      out.terms_.emplace_back(std::move(e), ca * cb);
    }
  }
  out.canonicalize();
  return out;
}

Polynomial Polynomial::scaled(double s) const {
  Polynomial out(dim_);
  out.terms_ = terms_;
  for (auto& t : out.terms_) t.second *= s;
  out.canonicalize();
  return out;
}

bool Polynomial::is_constant() const {
  for (const auto& [e, c] : terms_) {
    if (exponent_sum(e) > 0) return false;
  }
  return true;
}

double Polynomial::constant_value() const {
  double v = 0.0;
  for (const auto& [e, c] : terms_) {
    if (exponent_sum(e) == 0) v = c;
  }
  return v;
}

int Polynomial::total_degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, exponent_sum(e));
  return d;
}

void PolyVectorField::add_term(std::size_t component,
                               std::vector<int> exponents, double coeff) {
  if (component >= dim_) {
    throw std::invalid_argument("PolyVectorField: component index");
  }
  check_exponents(exponents, dim_);
  terms_.push_back(PolyTerm{component, std::move(exponents), coeff});
  canonicalize();
}

void PolyVectorField::add_scaled(const PolyVectorField& other, double s) {
  if (dim_ != other.dim_) {
    throw std::invalid_argument("PolyVectorField: dim mismatch");
  }
  for (const auto& t : other.terms_) {
    terms_.push_back(PolyTerm{t.component, t.exponents, t.coefficient * s});
  }
  canonicalize();
}

void PolyVectorField::canonicalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const PolyTerm& a, const PolyTerm& b) {
              if (a.component != b.component) return a.component < b.component;
              return graded_lex_less(a.exponents, b.exponents);
            });
  std::vector<PolyTerm> merged;
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().component == t.component &&
        merged.back().exponents == t.exponents) {
      merged.back().coefficient += t.coefficient;
    } else {
      merged.push_back(std::move(t));
    }
  }
  merged.erase(
      std::remove_if(merged.begin(), merged.end(),
                     [](const PolyTerm& t) { return t.coefficient == 0.0; }),
      merged.end());
  terms_ = std::move(merged);
}

Eigen::VectorXd PolyVectorField::operator()(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != dim_) {
    throw std::invalid_argument("PolyVectorField: evaluation point dimension");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& t : terms_) {
    double m = t.coefficient;
    for (std::size_t v = 0; v < dim_; ++v) {
      if (t.exponents[v] != 0) {
        m *= ipow(z[static_cast<Eigen::Index>(v)], t.exponents[v]);
      }
    }
    out[static_cast<Eigen::Index>(t.component)] += m;
  }
  return out;
}

Polynomial PolyVectorField::component_polynomial(std::size_t i) const {
  if (i >= dim_) throw std::invalid_argument("PolyVectorField: component");
  Polynomial p(dim_);
  for (const auto& t : terms_) {
    if (t.component == i) p.add_term(t.exponents, t.coefficient);
  }
  return p;
}

PolyVectorField PolyVectorField::scaled(double s) const {
  PolyVectorField out(dim_);
  out.terms_ = terms_;
  for (auto& t : out.terms_) t.coefficient *= s;
  out.canonicalize();
  return out;
}

PolyVectorField PolyVectorField::operator+(const PolyVectorField& o) const {
  PolyVectorField out = *this;
  out.add_scaled(o, 1.0);
  return out;
}

bool PolyVectorField::is_zero(double tol) const {
  for (const auto& t : terms_) {
    if (std::abs(t.coefficient) > tol) return false;
  }
  return true;
}

double PolyVectorField::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.coefficient));
  return m;
}

int PolyVectorField::max_total_degree() const {
  int d = -1;
  for (const auto& t : terms_) d = std::max(d, exponent_sum(t.exponents));
  return d;
}

bool approx_equal(const PolyVectorField& a, const PolyVectorField& b,
                  double tol) {
  if (a.dim() != b.dim()) return false;
  PolyVectorField diff = a;
  diff.add_scaled(b, -1.0);
  return diff.is_zero(tol);
}

namespace {

// (D target) . source, exact on polynomial terms.
PolyVectorField directional_derivative(const PolyVectorField& target,
                                       const PolyVectorField& source) {
  const std::size_t n = target.dim();
  PolyVectorField acc(n);
  for (const auto& tt : target.terms()) {
    for (std::size_t v = 0; v < n; ++v) {
      if (tt.exponents[v] == 0) continue;
      const double dcoeff =
          tt.coefficient * static_cast<double>(tt.exponents[v]);
      for (const auto& ts : source.terms()) {
        if (ts.component != v) continue;
        std::vector<int> e(n);
        for (std::size_t w = 0; w < n; ++w) {
          e[w] = tt.exponents[w] + ts.exponents[w];
        }
        e[v] -= 1;
        acc.add_term(tt.component, std::move(e), dcoeff * ts.coefficient);
      }
    }
  }
  return acc;
}

}  // namespace

PolyVectorField bracket(const PolyVectorField& y1, const PolyVectorField& y2) {
  if (y1.dim() != y2.dim()) {
    throw std::invalid_argument("bracket: dimension mismatch");
  }
  PolyVectorField out = directional_derivative(y2, y1);
  out.add_scaled(directional_derivative(y1, y2), -1.0);
  return out;
}

PolyVectorField diagonal_extend(const PolyVectorField& field,
                                std::size_t copies) {
  if (copies == 0) throw std::invalid_argument("diagonal_extend: copies");
  const std::size_t n = field.dim();
  PolyVectorField out(n * copies);
  for (std::size_t c = 0; c < copies; ++c) {
    for (const auto& t : field.terms()) {
      std::vector<int> e(n * copies, 0);
      for (std::size_t v = 0; v < n; ++v) e[c * n + v] = t.exponents[v];
      out.add_term(c * n + t.component, std::move(e), t.coefficient);
    }
  }
  return out;
}

PolyVectorField linear_vector_field(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("linear_vector_field: square matrix expected");
  }
  const std::size_t n = static_cast<std::size_t>(a.rows());
  PolyVectorField out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = a(static_cast<Eigen::Index>(i),
                         static_cast<Eigen::Index>(j));
      if (c == 0.0) continue;
      std::vector<int> e(n, 0);
      e[j] = 1;
      out.add_term(i, std::move(e), c);
    }
  }
  return out;
}

PolyVectorField constant_vector_field(const Eigen::VectorXd& v) {
  const std::size_t n = static_cast<std::size_t>(v.size());
  PolyVectorField out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = v[static_cast<Eigen::Index>(i)];
    if (c == 0.0) continue;
    out.add_term(i, std::vector<int>(n, 0), c);
  }
  return out;
}

std::vector<Eigen::VectorXd> quasi_random_points(std::size_t dim,
                                                 std::size_t count, double lo,
                                                 double hi) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (dim == 0 || dim > sizeof(primes) / sizeof(primes[0])) {
    throw std::invalid_argument("quasi_random_points: dimension");
  }
  auto radical_inverse = [](int base, std::size_t index) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (index > 0) {
      r += f * static_cast<double>(index % static_cast<std::size_t>(base));
      index /= static_cast<std::size_t>(base);
      f *= inv;
    }
    return r;
  };
  std::vector<Eigen::VectorXd> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) {
      const double u = radical_inverse(primes[d], i + 1);
      p[static_cast<Eigen::Index>(d)] = lo + (hi - lo) * u;
    }
    pts[i] = p;
  }
  return pts;
}

InvolutivityReport check_involutive(const std::vector<PolyVectorField>& fields,
                                    const std::vector<Eigen::VectorXd>& points,
                                    double rank_tol) {
  if (fields.empty()) throw std::invalid_argument("check_involutive: no fields");
  const std::size_t n = fields[0].dim();
  for (const auto& f : fields) {
    if (f.dim() != n) {
      throw std::invalid_argument("check_involutive: dimension mismatch");
    }
  }
  if (points.empty()) {
    throw std::invalid_argument("check_involutive: no sample points");
  }
  const std::size_t r = fields.size();
  const std::size_t p = points.size();

  // Generator values stacked over all sample points: one coefficient vector
  // must reproduce the bracket at every point simultaneously.
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(n * p),
                          static_cast<Eigen::Index>(r));
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t i = 0; i < r; ++i) {
      stacked.block(static_cast<Eigen::Index>(s * n),
                    static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(n), 1) = fields[i](points[s]);
    }
  }
  auto solver = stacked.colPivHouseholderQr();

  InvolutivityReport report;
  report.involutive = true;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      const PolyVectorField br = bracket(fields[i], fields[j]);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(n * p));
      double scale = 1.0;
      for (std::size_t s = 0; s < p; ++s) {
        Eigen::VectorXd v = br(points[s]);
        scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
        rhs.segment(static_cast<Eigen::Index>(s * n),
                    static_cast<Eigen::Index>(n)) = v;
      }
      const Eigen::VectorXd c = solver.solve(rhs);
      const Eigen::VectorXd res = stacked * c - rhs;
      for (std::size_t s = 0; s < p; ++s) {
        const double rnorm =
            res.segment(static_cast<Eigen::Index>(s * n),
                        static_cast<Eigen::Index>(n))
                .norm();
        if (rnorm > report.max_residual) {
          report.max_residual = rnorm;
        }
        if (rnorm > rank_tol * scale) {
          report.involutive = false;
          if (!report.witness) {
            report.witness = InvolutivityWitness{i, j, s, rnorm};
          }
        }
      }
    }
  }
  return report;
}

InvolutivityReport check_involutive(const std::vector<PolyVectorField>& fields,
                                    double rank_tol) {
  if (fields.empty()) throw std::invalid_argument("check_involutive: no fields");
  return check_involutive(fields, quasi_random_points(fields[0].dim()),
                          rank_tol);
}

namespace {

using TermKey = std::pair<std::size_t, std::vector<int>>;

// Embeds fields as coefficient vectors over the union of their monomials.
struct CoefficientSpace {
  std::map<TermKey, std::size_t> index;

  void absorb(const PolyVectorField& f) {
    for (const auto& t : f.terms()) {
      index.emplace(TermKey{t.component, t.exponents}, 0);
    }
    std::size_t k = 0;
    for (auto& [key, idx] : index) idx = k++;
  }

  Eigen::VectorXd embed(const PolyVectorField& f) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(index.size()));
    for (const auto& t : f.terms()) {
      auto it = index.find(TermKey{t.component, t.exponents});
      if (it == index.end()) {
        throw std::logic_error("CoefficientSpace: unknown monomial");
      }
      v[static_cast<Eigen::Index>(it->second)] = t.coefficient;
    }
    return v;
  }
};

bool independent_of(const std::vector<PolyVectorField>& basis,
                    const PolyVectorField& candidate, double dep_tol) {
  if (candidate.is_zero(0.0)) return false;
  CoefficientSpace space;
  for (const auto& b : basis) space.absorb(b);
  space.absorb(candidate);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(basis.size() + 1),
                    static_cast<Eigen::Index>(space.index.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = space.embed(basis[i]).transpose();
  }
  m.row(static_cast<Eigen::Index>(basis.size())) =
      space.embed(candidate).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return false;
  const double cutoff = dep_tol * sv[0];
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return rank == basis.size() + 1;
}

}  // namespace

ClosureReport lie_closure(const std::vector<PolyVectorField>& generators,
                          std::size_t dim_cap, double dep_tol) {
  ClosureReport report;
  std::deque<std::pair<std::size_t, std::size_t>> pending;

  auto append = [&](const PolyVectorField& f) {
    const std::size_t idx = report.basis.size();
    report.basis.push_back(f);
    for (std::size_t i = 0; i < idx; ++i) pending.emplace_back(i, idx);
  };

  for (const auto& g : generators) {
    if (independent_of(report.basis, g, dep_tol)) append(g);
  }

  while (!pending.empty()) {
    if (report.basis.size() > dim_cap) break;
    auto [i, j] = pending.front();
    pending.pop_front();
    const PolyVectorField br = bracket(report.basis[i], report.basis[j]);
    if (independent_of(report.basis, br, dep_tol)) append(br);
  }

  report.dimension = report.basis.size();
  if (report.basis.size() > dim_cap) {
    report.cap_hit = true;
    report.closed = false;
    return report;
  }
  report.closed = true;

  // Expand each bracket over the basis; closure guarantees membership, so a
  // large residual here indicates a tolerance problem rather than geometry.
  CoefficientSpace space;
  for (const auto& b : report.basis) space.absorb(b);
  std::vector<PolyVectorField> brackets;
  for (std::size_t i = 0; i < report.basis.size(); ++i) {
    for (std::size_t j = 0; j < report.basis.size(); ++j) {
      brackets.push_back(bracket(report.basis[i], report.basis[j]));
    }
  }
  for (const auto& br : brackets) space.absorb(br);
  Eigen::MatrixXd bmat(static_cast<Eigen::Index>(space.index.size()),
                       static_cast<Eigen::Index>(report.basis.size()));
  for (std::size_t i = 0; i < report.basis.size(); ++i) {
    bmat.col(static_cast<Eigen::Index>(i)) = space.embed(report.basis[i]);
  }
  auto solver = bmat.colPivHouseholderQr();
  const std::size_t nb = report.basis.size();
  std::vector<std::vector<std::vector<double>>> c(
      nb, std::vector<std::vector<double>>(nb, std::vector<double>(nb, 0.0)));
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const Eigen::VectorXd rhs = space.embed(brackets[i * nb + j]);
      const Eigen::VectorXd sol = solver.solve(rhs);
      const double resid = (bmat * sol - rhs).norm();
      const double scale = std::max(1.0, rhs.norm());
      if (resid > 1e-6 * scale) {
        throw std::runtime_error(
            "lie_closure: bracket escaped a numerically closed span");
      }
      for (std::size_t k = 0; k < nb; ++k) {
        c[i][j][k] = sol[static_cast<Eigen::Index>(k)];
      }
    }
  }
  report.structure_constants = std::move(c);
  return report;
}

void write_field_terms(std::ostream& os, const PolyVectorField& field) {
  for (const auto& t : field.terms()) {
    os << t.component;
    for (int e : t.exponents) os << ' ' << e;
    os << ' ' << format_double(t.coefficient) << '\n';
  }
}

PolyVectorField read_field_terms(std::istream& is, std::size_t dim) {
  PolyVectorField out(dim);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t component = 0;
    if (!(ls >> component)) {
      throw std::invalid_argument("read_field_terms: bad component");
    }
    std::vector<int> e(dim);
    for (std::size_t v = 0; v < dim; ++v) {
      if (!(ls >> e[v])) {
        throw std::invalid_argument("read_field_terms: bad exponent");
      }
    }
    double coeff = 0.0;
    if (!(ls >> coeff)) {
      throw std::invalid_argument("read_field_terms: bad coefficient");
    }
    out.add_term(component, std::move(e), coeff);
  }
  return out;
}

}  // namespace liesde
