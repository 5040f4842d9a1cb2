#include <stdexcept>

#include "doctest.h"
#include "liesde/dsl.hpp"

using namespace liesde;

TEST_SUITE("dsl") {

TEST_CASE("single constant component") {
  FieldDslDocument doc = parse_field_dsl("field Y1 dim 1: 1=1;");
  REQUIRE(doc.fields.size() == 1);
  CHECK(doc.fields[0].first == "Y1");
  PolyVectorField expect(1);
  expect.add_term(0, {0}, 1.0);
  CHECK(approx_equal(doc.fields[0].second, expect, 0.0));
}

TEST_CASE("mixed monomials and negative constants") {
  FieldDslDocument doc =
      parse_field_dsl("field Y2 dim 2: 1=x1^2*x2; 2=-1;");
  const PolyVectorField* y2 = doc.find_field("Y2");
  REQUIRE(y2 != nullptr);
  PolyVectorField expect(2);
  expect.add_term(0, {2, 1}, 1.0);
  expect.add_term(1, {0, 0}, -1.0);
  CHECK(approx_equal(*y2, expect, 0.0));
  CHECK(doc.find_field("nope") == nullptr);
}

TEST_CASE("polynomial syntax accepts sums, decimals, and exponent zero") {
  FieldDslDocument doc = parse_field_dsl(
      "field F dim 2: 1=2*x1^2*x2 - 0.5*x2 + x1^0; 2=-x1 + 3;");
  const PolyVectorField* f = doc.find_field("F");
  REQUIRE(f != nullptr);
  Eigen::VectorXd at(2);
  at << 2.0, 3.0;
  Eigen::VectorXd v = (*f)(at);
  CHECK(v(0) == doctest::Approx(2 * 4 * 3 - 0.5 * 3 + 1));
  CHECK(v(1) == doctest::Approx(-2 + 3));
}

TEST_CASE("coefficient statements parse into scalar polynomials") {
  FieldDslDocument doc = parse_field_dsl(
      "# driving coefficients\n"
      "coeff b11 dim 2: x1*x2;\n"
      "field Y dim 1: 1=x1;\n");
  const Polynomial* b = doc.find_coeff("b11");
  REQUIRE(b != nullptr);
  Eigen::VectorXd at(2);
  at << 3.0, -2.0;
  CHECK((*b)(at) == -6.0);
  CHECK(doc.find_coeff("Y") == nullptr);
  CHECK(doc.find_field("b11") == nullptr);
}

TEST_CASE("errors carry the source location") {
  SUBCASE("missing exponent points at the terminator") {
    try {
      parse_field_dsl("field Bad dim 1: 1=x1^;");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(e.column() == 23);
    }
  }

  SUBCASE("errors on later lines report that line") {
    try {
      parse_field_dsl("field A dim 1: 1=1;\nfield B dim 1: 1=$;\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 18);
    }
  }
}

TEST_CASE("rejection cases") {
  CHECK_THROWS_AS(parse_field_dsl("field A dim 1: 1=1; field A dim 1: 1=2;"),
                  ParseError);  // duplicate name
  CHECK_THROWS_AS(parse_field_dsl("field A dim 1: 1=1; coeff A dim 1: 1;"),
                  ParseError);  // name shared across kinds
  CHECK_THROWS_AS(parse_field_dsl("field A dim 1: 1=1; 1=2;"),
                  ParseError);  // duplicate component
  CHECK_THROWS_AS(parse_field_dsl("field A dim 1: 2=1;"),
                  ParseError);  // component out of range
  CHECK_THROWS_AS(parse_field_dsl("field A dim 1: 1=x2;"),
                  ParseError);  // variable out of range
  CHECK_THROWS_AS(parse_field_dsl("field A dim 1: 1=x1^65;"),
                  ParseError);  // exponent overflow
  CHECK_THROWS_AS(parse_field_dsl("field A dim 1: 1=1.2.3;"),
                  ParseError);  // malformed number
  CHECK_THROWS_AS(parse_field_dsl("field A dim 0: ;"),
                  ParseError);  // dimension must be positive
  CHECK_NOTHROW(parse_field_dsl("field A dim 1: 1=x1^64;"));
}

TEST_CASE("printing is canonical and round trips") {
  const std::string text =
      "# a comment\n"
      "field Y2 dim 2: 2=-1; 1=x2*x1^2;\n"
      "coeff c dim 2: 0.25*x2 + x1;\n";
  FieldDslDocument doc = parse_field_dsl(text);
  std::string printed = to_dsl_text(doc);
  FieldDslDocument reparsed = parse_field_dsl(printed);

  REQUIRE(reparsed.fields.size() == doc.fields.size());
  CHECK(approx_equal(reparsed.fields[0].second, doc.fields[0].second, 0.0));
  REQUIRE(reparsed.coeffs.size() == 1);

  // Printing the reparse is byte-identical: the text form is a fixed point.
  CHECK(to_dsl_text(reparsed) == printed);

  // Canonical layout pins component order and monomial order.
  CHECK(printed.find("field Y2 dim 2: 1=x1^2*x2; 2=-1;") != std::string::npos);
}

TEST_CASE("simple documents print exactly") {
  FieldDslDocument doc = parse_field_dsl("field Y1 dim 1: 1=1;");
  CHECK(to_dsl_text(doc) == "field Y1 dim 1: 1=1;\n");
}

}  // TEST_SUITE("dsl")
