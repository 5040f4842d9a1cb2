#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liesde/fields.hpp"

namespace liesde {

// Parse failure with a 1-based source location.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Named vector fields plus named scalar coefficient polynomials, as written
// in the field description language:
//
//   field <name> dim <n>: <comp>=<polynomial>; <comp>=<polynomial>; ...
//   coeff <name> dim <l>: <polynomial>;
//
// Components are 1-based; unassigned components are zero.  Polynomials are
// over the variables x1..xn with `*` products, `^` integer powers, and
// integer/decimal coefficients.
struct FieldDslDocument {
  std::vector<std::pair<std::string, PolyVectorField>> fields;
  std::vector<std::pair<std::string, Polynomial>> coeffs;

  const PolyVectorField* find_field(const std::string& name) const;
  const Polynomial* find_coeff(const std::string& name) const;
};

// Throws ParseError on syntax errors, duplicate names, duplicate component
// assignments, out-of-range components or variables, and exponents above 64.
FieldDslDocument parse_field_dsl(const std::string& text);

// Canonical text form: one statement per line, terms in canonical order,
// shortest round-trip coefficients.  parse(to_dsl_text(doc)) reproduces doc
// and printing again is byte-identical.
std::string to_dsl_text(const FieldDslDocument& doc);

}  // namespace liesde
