#include "liesde/dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "liesde/common.hpp"

namespace liesde {

namespace {

constexpr int kExponentCap = 64;

std::string located(std::size_t line, std::size_t column,
                    const std::string& what) {
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": " << what;
  return os.str();
}

struct Token {
  enum Kind {
    Name,
    Number,
    Colon,
    Semicolon,
    Equals,
    Plus,
    Minus,
    Star,
    Caret,
    End
  };
  Kind kind = End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

const char* token_label(Token::Kind kind) {
  switch (kind) {
    case Token::Name: return "name";
    case Token::Number: return "number";
    case Token::Colon: return "':'";
    case Token::Semicolon: return "';'";
    case Token::Equals: return "'='";
    case Token::Plus: return "'+'";
    case Token::Minus: return "'-'";
    case Token::Star: return "'*'";
    case Token::Caret: return "'^'";
    case Token::End: return "end of input";
  }
  return "token";
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {  // comment to end of line
      std::size_t n = 0;
      while (i + n < text.size() && text[i + n] != '\n') ++n;
      advance(n);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = column;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t n = 1;
      while (i + n < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i + n])) ||
              text[i + n] == '_')) {
        ++n;
      }
      tok.kind = Token::Name;
      tok.text = text.substr(i, n);
      advance(n);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < text.size() &&
                std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t n = 0;
      while (i + n < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[i + n])) ||
              text[i + n] == '.')) {
        ++n;
      }
      if (i + n < text.size() && (text[i + n] == 'e' || text[i + n] == 'E')) {
        std::size_t m = n + 1;
        if (i + m < text.size() && (text[i + m] == '+' || text[i + m] == '-')) {
          ++m;
        }
        if (i + m < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[i + m]))) {
          n = m;
          while (i + n < text.size() &&
                 std::isdigit(static_cast<unsigned char>(text[i + n]))) {
            ++n;
          }
        }
      }
      tok.kind = Token::Number;
      tok.text = text.substr(i, n);
      advance(n);
    } else {
      switch (c) {
        case ':': tok.kind = Token::Colon; break;
        case ';': tok.kind = Token::Semicolon; break;
        case '=': tok.kind = Token::Equals; break;
        case '+': tok.kind = Token::Plus; break;
        case '-': tok.kind = Token::Minus; break;
        case '*': tok.kind = Token::Star; break;
        case '^': tok.kind = Token::Caret; break;
        default:
          throw ParseError(line, column,
                           std::string("unexpected character '") + c + "'");
      }
      tok.text = c;
      advance(1);
    }
    tokens.push_back(std::move(tok));
  }
  Token end;
  end.kind = Token::End;
  end.line = line;
  end.column = column;
  tokens.push_back(end);
  return tokens;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(tokenize(text)) {}

  FieldDslDocument parse() {
    FieldDslDocument doc;
    while (peek().kind != Token::End) {
      const Token& head = peek();
      if (head.kind == Token::Name && head.text == "field") {
        parse_field(doc);
      } else if (head.kind == Token::Name && head.text == "coeff") {
        parse_coeff(doc);
      } else {
        fail(head, "expected 'field' or 'coeff'");
      }
    }
    return doc;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const Token& tok, const std::string& what) {
    throw ParseError(tok.line, tok.column, what);
  }

  const Token& expect(Token::Kind kind, const char* what) {
    const Token& tok = peek();
    if (tok.kind != kind) {
      fail(tok, std::string("expected ") + what + ", found " +
                    token_label(tok.kind));
    }
    return take();
  }

  std::size_t expect_integer(const char* what, std::size_t min_value,
                             std::size_t max_value) {
    const Token& tok = peek();
    if (tok.kind != Token::Number ||
        tok.text.find_first_not_of("0123456789") != std::string::npos) {
      fail(tok, std::string("expected ") + what);
    }
    std::size_t value = 0;
    const auto res = std::from_chars(tok.text.data(),
                                     tok.text.data() + tok.text.size(), value);
    if (res.ec != std::errc{} || value < min_value || value > max_value) {
      fail(tok, std::string(what) + " out of range");
    }
    take();
    return value;
  }

  std::string expect_name(const FieldDslDocument& doc) {
    const Token& tok = peek();
    if (tok.kind != Token::Name || tok.text == "field" ||
        tok.text == "coeff" || tok.text == "dim") {
      fail(tok, "expected a name");
    }
    for (const auto& [name, field] : doc.fields) {
      if (name == tok.text) fail(tok, "duplicate name '" + tok.text + "'");
    }
    for (const auto& [name, poly] : doc.coeffs) {
      if (name == tok.text) fail(tok, "duplicate name '" + tok.text + "'");
    }
    return take().text;
  }

  std::size_t parse_header(FieldDslDocument& doc, std::string& name) {
    name = expect_name(doc);
    const Token& kw = peek();
    if (kw.kind != Token::Name || kw.text != "dim") fail(kw, "expected 'dim'");
    take();
    const std::size_t dim = expect_integer("a dimension", 1, 1024);
    expect(Token::Colon, "':'");
    return dim;
  }

  void parse_field(FieldDslDocument& doc) {
    take();  // 'field'
    std::string name;
    const std::size_t dim = parse_header(doc, name);
    PolyVectorField field(dim);
    std::vector<bool> assigned(dim, false);
    while (peek().kind == Token::Number) {
      const Token comp_tok = peek();
      const std::size_t comp = expect_integer("a component index", 1, dim);
      if (assigned[comp - 1]) {
        fail(comp_tok, "component assigned twice");
      }
      assigned[comp - 1] = true;
      expect(Token::Equals, "'='");
      const Polynomial poly = parse_polynomial(dim);
      expect(Token::Semicolon, "';'");
      for (const auto& [exponents, coeff] : poly.terms()) {
        field.add_term(comp - 1, exponents, coeff);
      }
    }
    doc.fields.emplace_back(std::move(name), std::move(field));
  }

  void parse_coeff(FieldDslDocument& doc) {
    take();  // 'coeff'
    std::string name;
    const std::size_t dim = parse_header(doc, name);
    const Polynomial poly = parse_polynomial(dim);
    expect(Token::Semicolon, "';'");
    doc.coeffs.emplace_back(std::move(name), poly);
  }

  Polynomial parse_polynomial(std::size_t dim) {
    Polynomial sum(dim);
    double sign = 1.0;
    if (peek().kind == Token::Plus || peek().kind == Token::Minus) {
      sign = take().kind == Token::Minus ? -1.0 : 1.0;
    }
    while (true) {
      sum = sum + parse_term(dim).scaled(sign);
      if (peek().kind == Token::Plus || peek().kind == Token::Minus) {
        sign = take().kind == Token::Minus ? -1.0 : 1.0;
        continue;
      }
      break;
    }
    return sum;
  }

  Polynomial parse_term(std::size_t dim) {
    Polynomial prod = parse_factor(dim);
    while (peek().kind == Token::Star) {
      take();
      prod = prod * parse_factor(dim);
    }
    return prod;
  }

  Polynomial parse_factor(std::size_t dim) {
    const Token& tok = peek();
    if (tok.kind == Token::Number) {
      double value = 0.0;
      const auto res = std::from_chars(
          tok.text.data(), tok.text.data() + tok.text.size(), value);
      if (res.ec != std::errc{} ||
          res.ptr != tok.text.data() + tok.text.size()) {
        fail(tok, "malformed number");
      }
      take();
      return Polynomial::constant(dim, value);
    }
    if (tok.kind == Token::Name && tok.text.size() > 1 && tok.text[0] == 'x' &&
        tok.text.find_first_not_of("0123456789", 1) == std::string::npos) {
      std::size_t index = 0;
      std::from_chars(tok.text.data() + 1, tok.text.data() + tok.text.size(),
                      index);
      if (index < 1 || index > dim) {
        fail(tok, "variable index out of range for dim " + std::to_string(dim));
      }
      take();
      int exponent = 1;
      if (peek().kind == Token::Caret) {
        take();
        exponent = static_cast<int>(
            expect_integer("an integer exponent", 0, kExponentCap));
      }
      Polynomial p(dim);
      std::vector<int> exponents(dim, 0);
      exponents[index - 1] = exponent;
      p.add_term(std::move(exponents), 1.0);
      return p;
    }
    fail(tok, "expected a number or a variable");
  }
};

void print_polynomial(std::ostream& os, const Polynomial& poly) {
  if (poly.is_zero()) {
    os << "0";
    return;
  }
  bool first = true;
  for (const auto& [exponents, coeff] : poly.terms()) {
    const double mag = std::abs(coeff);
    if (first) {
      if (coeff < 0.0) os << '-';
      first = false;
    } else {
      os << (coeff < 0.0 ? '-' : '+');
    }
    bool printed = false;
    bool has_vars = false;
    for (int e : exponents) has_vars = has_vars || e != 0;
    if (!has_vars || mag != 1.0) {
      os << format_double(mag);
      printed = true;
    }
    for (std::size_t v = 0; v < exponents.size(); ++v) {
      if (exponents[v] == 0) continue;
      if (printed) os << '*';
      os << 'x' << (v + 1);
      if (exponents[v] != 1) os << '^' << exponents[v];
      printed = true;
    }
  }
}

}  // namespace

ParseError::ParseError(std::size_t line, std::size_t column,
                       const std::string& what)
    : std::runtime_error(located(line, column, what)),
      line_(line),
      column_(column) {}

const PolyVectorField* FieldDslDocument::find_field(
    const std::string& name) const {
  for (const auto& [n, f] : fields) {
    if (n == name) return &f;
  }
  return nullptr;
}

const Polynomial* FieldDslDocument::find_coeff(const std::string& name) const {
  for (const auto& [n, p] : coeffs) {
    if (n == name) return &p;
  }
  return nullptr;
}

FieldDslDocument parse_field_dsl(const std::string& text) {
  return Parser(text).parse();
}

std::string to_dsl_text(const FieldDslDocument& doc) {
  std::ostringstream os;
  for (const auto& [name, field] : doc.fields) {
    os << "field " << name << " dim " << field.dim() << ":";
    for (std::size_t comp = 0; comp < field.dim(); ++comp) {
      const Polynomial poly = field.component_polynomial(comp);
      if (poly.is_zero()) continue;
      os << ' ' << (comp + 1) << '=';
      print_polynomial(os, poly);
      os << ';';
    }
    os << '\n';
  }
  for (const auto& [name, poly] : doc.coeffs) {
    os << "coeff " << name << " dim " << poly.dim() << ": ";
    print_polynomial(os, poly);
    os << ";\n";
  }
  return os.str();
}

}  // namespace liesde
