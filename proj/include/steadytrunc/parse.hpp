#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "steadytrunc/model.hpp"

namespace steadytrunc {

namespace detail {

struct Token {
  enum class Kind { Ident, Number, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_' || src_[pos_] == '.')) {
        s += src_[pos_];
        bump();
      }
      tok_.kind = Token::Kind::Ident;
      tok_.text = s;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      bool seen_e = false;
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
          s += d;
          bump();
        } else if ((d == 'e' || d == 'E') && !seen_e) {
          // exponent only if followed by digit or sign+digit
          std::size_t q = pos_ + 1;
          if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
          if (q < src_.size() &&
              std::isdigit(static_cast<unsigned char>(src_[q]))) {
            seen_e = true;
            s += d;
            bump();
            if (src_[pos_] == '+' || src_[pos_] == '-') {
              s += src_[pos_];
              bump();
            }
          } else {
            break;
          }
        } else {
          break;
        }
      }
      tok_.kind = Token::Kind::Number;
      tok_.text = s;
      return;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      tok_.kind = Token::Kind::Symbol;
      tok_.text = "->";
      bump();
      bump();
      return;
    }
    tok_.kind = Token::Kind::Symbol;
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

// Value of a rate expression: polynomial plus an optional saturating factor.
struct ExprVal {
  Poly poly;
  bool has_hill = false;
  int hill_species = -1;
  Rational hill_k;
};

class ModelParser {
 public:
  explicit ModelParser(const std::string& src) : lex_(src) {}

  ReactionNetwork parse() {
    ReactionNetwork net;
    bool any = false;
    while (lex_.peek().kind != Token::Kind::End) {
      any = true;
      statement(net);
    }
    if (!any) throw ParseError(1, 1, "empty model");
    if (net.reactions.empty())
      throw ParseError(lex_.peek().line, lex_.peek().col,
                       "model declares no reactions");
    validate_network(net);
    check_law_signs(net);
    return net;
  }

  // Parse a single polynomial expression against an existing network
  // (species and parameters resolve as in a rate expression).
  Poly polynomial_only(ReactionNetwork& net) {
    ExprVal v = expression(net, /*allow_species=*/true);
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      throw ParseError(t.line, t.col, "trailing input after expression");
    if (v.has_hill)
      throw ParseError(1, 1, "expected a plain polynomial");
    return v.poly;
  }

 private:
  void statement(ReactionNetwork& net) {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Ident && t.text == "species") {
      lex_.take();
      do {
        Token name = expect_ident("species name");
        declare_species(net, name, false);
      } while (accept(","));
      expect(";");
      return;
    }
    if (t.kind == Token::Kind::Ident && t.text == "modes") {
      lex_.take();
      std::vector<int> idx;
      do {
        Token name = expect_ident("mode species name");
        idx.push_back(declare_species(net, name, true));
      } while (accept(","));
      Token kw = expect_ident("'in'");
      if (kw.text != "in") throw ParseError(kw.line, kw.col, "expected 'in'");
      expect("{");
      if (!net.mode_combos.empty())
        throw ParseError(kw.line, kw.col, "multiple modes declarations");
      do {
        expect("(");
        StateVec tuple;
        do {
          Token num = expect_number("mode value");
          tuple.push_back(parse_int(num));
        } while (accept(","));
        expect(")");
        if (tuple.size() != idx.size())
          throw ParseError(t.line, t.col,
                           "mode tuple length does not match declared species");
        net.mode_combos.push_back(tuple);
      } while (accept(","));
      expect("}");
      expect(";");
      return;
    }
    if (t.kind == Token::Kind::Ident && t.text == "param") {
      lex_.take();
      Token name = expect_ident("parameter name");
      expect("=");
      ExprVal v = expression(net, /*allow_species=*/false);
      expect(";");
      Rational c = constant_of(v, name);
      if (net.parameters.count(name.text))
        throw ParseError(name.line, name.col,
                         "parameter redefined: " + name.text);
      net.parameters[name.text] = c;
      return;
    }
    if (t.kind == Token::Kind::Ident && t.text == "lyapunov") {
      lex_.take();
      expect_ident("function name");  // conventionally g
      expect("=");
      ExprVal v = expression(net, /*allow_species=*/true);
      expect(";");
      if (v.has_hill)
        throw ParseError(t.line, t.col,
                         "lyapunov function must be polynomial");
      net.lyapunov_g = v.poly;
      return;
    }
    reaction(net);
  }

  void reaction(ReactionNetwork& net) {
    const Token at = lex_.peek();
    StateVec consume = side(net);
    expect("->");
    StateVec produce = side(net);
    expect("@");
    Token lawname = expect_ident("rate law");
    Reaction r;
    r.consume = consume;
    r.produce = produce;
    const int n = net.num_species();
    r.change.resize(n);
    for (int i = 0; i < n; ++i) r.change[i] = produce[i] - consume[i];
    if (lawname.text == "mass_action") {
      expect("(");
      ExprVal v = expression(net, /*allow_species=*/false);
      expect(")");
      Rational c = constant_of(v, lawname);
      if (c.is_negative())
        throw ParseError(lawname.line, lawname.col, "negative rate constant");
      r.law.kind = RateLaw::Kind::MassAction;
      r.law.mass_action_c = c;
    } else if (lawname.text == "rate") {
      expect("(");
      ExprVal v = expression(net, /*allow_species=*/true);
      expect(")");
      if (v.has_hill) {
        r.law.kind = RateLaw::Kind::Custom;
        r.law.poly = v.poly;
        r.law.hill_species = v.hill_species;
        r.law.hill_k = v.hill_k;
      } else {
        r.law.kind = RateLaw::Kind::Polynomial;
        r.law.poly = v.poly;
      }
    } else {
      throw ParseError(lawname.line, lawname.col,
                       "unknown rate law '" + lawname.text +
                           "' (expected mass_action or rate)");
    }
    expect(";");
    (void)at;
    net.reactions.push_back(std::move(r));
  }

  StateVec side(ReactionNetwork& net) {
    StateVec v(net.num_species(), 0);
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Number && t.text == "0") {
      lex_.take();
      return v;
    }
    while (true) {
      long long k = 1;
      if (lex_.peek().kind == Token::Kind::Number) {
        Token num = lex_.take();
        k = parse_int(num);
        expect("*");
      }
      Token name = expect_ident("species name");
      int idx = net.species_index(name.text);
      if (idx < 0)
        throw ParseError(name.line, name.col,
                         "undefined species: " + name.text);
      v[idx] += k;
      if (!accept("+")) break;
    }
    return v;
  }

  // expr := ["-"] term (("+"|"-") term)*
  ExprVal expression(ReactionNetwork& net, bool allow_species) {
    bool neg = false;
    if (lex_.peek().kind == Token::Kind::Symbol && lex_.peek().text == "-") {
      lex_.take();
      neg = true;
    }
    ExprVal v = term(net, allow_species);
    if (neg) v.poly = v.poly.negate();
    while (lex_.peek().kind == Token::Kind::Symbol &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      Token op = lex_.take();
      ExprVal rhs = term(net, allow_species);
      if (v.has_hill || rhs.has_hill)
        throw ParseError(op.line, op.col,
                         "hill factor must multiply a single product term");
      v.poly = op.text == "+" ? v.poly + rhs.poly : v.poly - rhs.poly;
    }
    return v;
  }

  ExprVal term(ReactionNetwork& net, bool allow_species) {
    ExprVal v = factor(net, allow_species);
    while (lex_.peek().kind == Token::Kind::Symbol &&
           (lex_.peek().text == "*" || lex_.peek().text == "/")) {
      Token op = lex_.take();
      ExprVal rhs = factor(net, allow_species);
      if (op.text == "*") {
        if (v.has_hill && rhs.has_hill)
          throw ParseError(op.line, op.col,
                           "at most one hill factor per rate");
        ExprVal out;
        out.poly = v.poly * rhs.poly;
        out.has_hill = v.has_hill || rhs.has_hill;
        out.hill_species = v.has_hill ? v.hill_species : rhs.hill_species;
        out.hill_k = v.has_hill ? v.hill_k : rhs.hill_k;
        v = std::move(out);
      } else {
        Rational c = constant_of(rhs, op);
        if (c.is_zero())
          throw ParseError(op.line, op.col, "division by zero");
        v.poly = v.poly * (Rational(1) / c);
      }
    }
    return v;
  }

  ExprVal factor(ReactionNetwork& net, bool allow_species) {
    ExprVal v = primary(net, allow_species);
    if (lex_.peek().kind == Token::Kind::Symbol && lex_.peek().text == "^") {
      Token op = lex_.take();
      Token num = expect_number("exponent");
      long long e = parse_int(num);
      if (e < 0 || e > 8)
        throw ParseError(num.line, num.col, "exponent out of range 0..8");
      if (v.has_hill)
        throw ParseError(op.line, op.col, "cannot exponentiate a hill factor");
      Poly r = Poly::constant(v.poly.nvars(), Rational(1));
      for (long long i = 0; i < e; ++i) r = r * v.poly;
      v.poly = r;
    }
    return v;
  }

  ExprVal primary(ReactionNetwork& net, bool allow_species) {
    Token t = lex_.take();
    const int n = net.num_species();
    ExprVal v;
    v.poly = Poly(n);
    if (t.kind == Token::Kind::Number) {
      v.poly = Poly::constant(n, Rational::parse(t.text));
      return v;
    }
    if (t.kind == Token::Kind::Symbol && t.text == "(") {
      v = expression(net, allow_species);
      expect(")");
      return v;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "hill") {
        expect("(");
        Token sp = expect_ident("species name");
        int idx = net.species_index(sp.text);
        if (idx < 0)
          throw ParseError(sp.line, sp.col, "undefined species: " + sp.text);
        expect(",");
        ExprVal karg = expression(net, /*allow_species=*/false);
        expect(")");
        Rational k = constant_of(karg, sp);
        v.poly = Poly::constant(n, Rational(1));
        v.has_hill = true;
        v.hill_species = idx;
        v.hill_k = k;
        return v;
      }
      auto p = net.parameters.find(t.text);
      if (p != net.parameters.end()) {
        v.poly = Poly::constant(n, p->second);
        return v;
      }
      int idx = net.species_index(t.text);
      if (idx >= 0) {
        if (!allow_species)
          throw ParseError(t.line, t.col,
                           "species '" + t.text +
                               "' not allowed in a constant expression");
        v.poly = Poly::variable(n, idx);
        return v;
      }
      throw ParseError(t.line, t.col,
                       "undefined species or parameter: " + t.text);
    }
    throw ParseError(t.line, t.col, "unexpected token '" + t.text + "'");
  }

  Rational constant_of(const ExprVal& v, const Token& where) {
    if (v.has_hill)
      throw ParseError(where.line, where.col, "expected a constant");
    if (v.poly.is_zero()) return Rational(0);
    if (v.poly.total_degree() > 0)
      throw ParseError(where.line, where.col,
                       "expected a constant expression");
    std::vector<unsigned> z(v.poly.nvars(), 0);
    return v.poly.coefficient(z);
  }

  int declare_species(ReactionNetwork& net, const Token& name, bool mode) {
    if (net.species_index(name.text) >= 0)
      throw ParseError(name.line, name.col,
                       "duplicate species: " + name.text);
    if (!net.reactions.empty())
      throw ParseError(name.line, name.col,
                       "species must be declared before reactions");
    net.species.push_back({name.text, mode});
    return net.num_species() - 1;
  }

  // Polynomial rate laws must be nonnegative on reachable states; checked on
  // a deterministic sample lattice at load time.
  void check_law_signs(const ReactionNetwork& net) {
    const int n = net.num_species();
    std::vector<StateVec> samples;
    std::vector<long long> axis_vals = {0, 1, 2, 3, 7, 25, 400};
    StateVec cur(n, 0);
    std::uint64_t mix = 0x9e3779b97f4a7c15ull;
    int budget = 4096;
    // low-dimensional: full lattice; otherwise a deterministic hash walk
    double lattice = 1;
    for (int i = 0; i < n; ++i) lattice *= static_cast<double>(axis_vals.size());
    if (lattice <= budget) {
      std::vector<std::size_t> pos(n, 0);
      while (true) {
        for (int i = 0; i < n; ++i) cur[i] = axis_vals[pos[i]];
        samples.push_back(cur);
        int a = 0;
        while (a < n && ++pos[a] == axis_vals.size()) pos[a++] = 0;
        if (a == n) break;
      }
    } else {
      std::uint64_t s = 12345;
      for (int k = 0; k < budget; ++k) {
        for (int i = 0; i < n; ++i) {
          s = (s + mix) * 0xbf58476d1ce4e5b9ull;
          cur[i] = static_cast<long long>((s >> 33) % 401);
        }
        samples.push_back(cur);
      }
    }
    for (std::size_t j = 0; j < net.reactions.size(); ++j) {
      const auto& law = net.reactions[j].law;
      if (law.kind == RateLaw::Kind::MassAction) continue;
      for (const auto& x : samples) {
        double v = propensity(net, static_cast<int>(j), x);
        if (v < -1e-9) {
          std::ostringstream os;
          os << "rate law of reaction " << (j + 1)
             << " is negative at state (";
          for (int i = 0; i < n; ++i) os << (i ? "," : "") << x[i];
          os << "): " << v;
          throw InputError(os.str());
        }
      }
    }
  }

  bool accept(const std::string& sym) {
    if (lex_.peek().kind == Token::Kind::Symbol && lex_.peek().text == sym) {
      lex_.take();
      return true;
    }
    return false;
  }
  void expect(const std::string& sym) {
    Token t = lex_.take();
    if (t.kind != Token::Kind::Symbol || t.text != sym)
      throw ParseError(t.line, t.col,
                       "expected '" + sym + "', got '" + t.text + "'");
  }
  Token expect_ident(const std::string& what) {
    Token t = lex_.take();
    if (t.kind != Token::Kind::Ident)
      throw ParseError(t.line, t.col, "expected " + what);
    return t;
  }
  Token expect_number(const std::string& what) {
    bool neg = false;
    if (lex_.peek().kind == Token::Kind::Symbol && lex_.peek().text == "-") {
      lex_.take();
      neg = true;
    }
    Token t = lex_.take();
    if (t.kind != Token::Kind::Number)
      throw ParseError(t.line, t.col, "expected " + what);
    if (neg) t.text = "-" + t.text;
    return t;
  }
  long long parse_int(const Token& t) {
    Rational r = Rational::parse(t.text);
    if (r.den() != 1)
      throw ParseError(t.line, t.col, "expected an integer");
    return r.num();
  }

  Lexer lex_;
};

inline std::string poly_to_string(const Poly& p,
                                  const std::vector<Species>& species) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : p.terms()) {
    Rational c = t.coeff;
    if (!first) {
      os << (c.is_negative() ? " - " : " + ");
      if (c.is_negative()) c = -c;
    } else if (c.is_negative()) {
      os << "-";
      c = -c;
    }
    first = false;
    bool unit = c == Rational(1);
    bool any_var = false;
    for (unsigned e : t.exps)
      if (e) any_var = true;
    if (!unit || !any_var) {
      if (c.den() == 1)
        os << c.num();
      else
        os << c.num() << "/" << c.den();
      if (any_var) os << "*";
    }
    bool firstv = true;
    for (std::size_t a = 0; a < t.exps.size(); ++a) {
      if (t.exps[a] == 0) continue;
      if (!firstv) os << "*";
      firstv = false;
      os << species[a].name;
      if (t.exps[a] > 1) os << "^" << t.exps[a];
    }
  }
  return os.str();
}

}  // namespace detail

inline ReactionNetwork parse_model(const std::string& text) {
  detail::ModelParser p(text);
  return p.parse();
}

// Parse a polynomial over an existing network's species/parameters
// (used by the --lyapunov CLI override).
inline Poly parse_polynomial(const ReactionNetwork& net,
                             const std::string& text) {
  detail::ModelParser p(text);
  ReactionNetwork copy = net;
  return p.polynomial_only(copy);
}

// Canonical text form; parse_model(print_model(net)) reproduces the network.
inline std::string print_model(const ReactionNetwork& net) {
  std::ostringstream os;
  // declarations in species order: contiguous plain runs, one modes stmt
  bool modes_emitted = false;
  std::size_t i = 0;
  while (i < net.species.size()) {
    if (!net.species[i].mode_flag) {
      os << "species ";
      bool first = true;
      while (i < net.species.size() && !net.species[i].mode_flag) {
        os << (first ? "" : ", ") << net.species[i].name;
        first = false;
        ++i;
      }
      os << ";\n";
    } else {
      if (!modes_emitted) {
        os << "modes ";
        bool first = true;
        for (const auto& s : net.species)
          if (s.mode_flag) {
            os << (first ? "" : ", ") << s.name;
            first = false;
          }
        os << " in {";
        for (std::size_t c = 0; c < net.mode_combos.size(); ++c) {
          os << (c ? "," : "") << "(";
          for (std::size_t k = 0; k < net.mode_combos[c].size(); ++k)
            os << (k ? "," : "") << net.mode_combos[c][k];
          os << ")";
        }
        os << "};\n";
        modes_emitted = true;
      }
      while (i < net.species.size() && net.species[i].mode_flag) ++i;
    }
  }
  for (const auto& [name, value] : net.parameters)
    os << "param " << name << " = " << value.str() << ";\n";
  if (net.lyapunov_g)
    os << "lyapunov g = " << detail::poly_to_string(*net.lyapunov_g, net.species)
       << ";\n";
  auto side = [&](const StateVec& v) {
    std::string s;
    bool any = false;
    for (std::size_t a = 0; a < v.size(); ++a) {
      if (v[a] == 0) continue;
      if (any) s += " + ";
      any = true;
      if (v[a] != 1) s += std::to_string(v[a]) + "*";
      s += net.species[a].name;
    }
    return any ? s : std::string("0");
  };
  for (const auto& r : net.reactions) {
    os << side(r.consume) << " -> " << side(r.produce) << " @ ";
    switch (r.law.kind) {
      case RateLaw::Kind::MassAction:
        os << "mass_action(" << r.law.mass_action_c.str() << ")";
        break;
      case RateLaw::Kind::Polynomial:
        os << "rate(" << detail::poly_to_string(r.law.poly, net.species) << ")";
        break;
      case RateLaw::Kind::Custom:
        os << "rate((" << detail::poly_to_string(r.law.poly, net.species)
           << ") * hill(" << net.species[r.law.hill_species].name << ", "
           << r.law.hill_k.str() << "))";
        break;
    }
    os << ";\n";
  }
  return os.str();
}

// Structural equality used by the round-trip property.
inline bool networks_equal(const ReactionNetwork& a, const ReactionNetwork& b) {
  if (a.species.size() != b.species.size()) return false;
  for (std::size_t i = 0; i < a.species.size(); ++i)
    if (a.species[i].name != b.species[i].name ||
        a.species[i].mode_flag != b.species[i].mode_flag)
      return false;
  if (a.mode_combos != b.mode_combos) return false;
  if (a.parameters != b.parameters) return false;
  if (a.reactions.size() != b.reactions.size()) return false;
  auto poly_eq = [](const Poly& x, const Poly& y) {
    if (x.terms().size() != y.terms().size()) return false;
    for (std::size_t i = 0; i < x.terms().size(); ++i)
      if (x.terms()[i].coeff != y.terms()[i].coeff ||
          x.terms()[i].exps != y.terms()[i].exps)
        return false;
    return true;
  };
  for (std::size_t j = 0; j < a.reactions.size(); ++j) {
    const auto& ra = a.reactions[j];
    const auto& rb = b.reactions[j];
    if (ra.consume != rb.consume || ra.produce != rb.produce) return false;
    if (ra.law.kind != rb.law.kind) return false;
    switch (ra.law.kind) {
      case RateLaw::Kind::MassAction:
        if (ra.law.mass_action_c != rb.law.mass_action_c) return false;
        break;
      case RateLaw::Kind::Polynomial:
        if (!poly_eq(ra.law.poly, rb.law.poly)) return false;
        break;
      case RateLaw::Kind::Custom:
        if (!poly_eq(ra.law.poly, rb.law.poly) ||
            ra.law.hill_species != rb.law.hill_species ||
            ra.law.hill_k != rb.law.hill_k)
          return false;
        break;
    }
  }
  if (a.lyapunov_g.has_value() != b.lyapunov_g.has_value()) return false;
  if (a.lyapunov_g && !poly_eq(*a.lyapunov_g, *b.lyapunov_g)) return false;
  return true;
}

}  // namespace steadytrunc
