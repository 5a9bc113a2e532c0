#pragma once

// Plain-text knowledge base format and benchmark CSV output.
//
//   kb "CKB_us" {
//     context country = US;
//     var country : { US };
//     var fuel : { electro, diesel, gas, hybrid };
//     constraint c1us: fuel != hybrid;
//   }
//
// Precedence: not > and > or > ->, with -> right-associative and and/or
// folded left. `#` starts a line comment.

#include <cctype>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ckbm/bench_row.hpp"
#include "ckbm/error.hpp"
#include "ckbm/model.hpp"

namespace ckbm {

namespace detail {

enum class Tok {
  Ident,
  String,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Colon,
  Semi,
  Comma,
  Eq,
  Neq,
  Arrow,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

inline bool is_keyword(std::string_view word) {
  return word == "kb" || word == "var" || word == "context" || word == "constraint" ||
         word == "not" || word == "and" || word == "or";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      std::size_t line = line_, column = column_;
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, "", line, column});
        return out;
      }
      char c = text_[pos_];
      if (is_ident_start(c)) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
        out.push_back({Tok::Ident, std::string(text_.substr(start, pos_ - start)), line, column});
      } else if (c == '"') {
        out.push_back({Tok::String, read_string(), line, column});
      } else if (c == '!' && peek(1) == '=') {
        advance(2);
        out.push_back({Tok::Neq, "!=", line, column});
      } else if (c == '-' && peek(1) == '>') {
        advance(2);
        out.push_back({Tok::Arrow, "->", line, column});
      } else {
        Tok kind;
        switch (c) {
          case '{': kind = Tok::LBrace; break;
          case '}': kind = Tok::RBrace; break;
          case '(': kind = Tok::LParen; break;
          case ')': kind = Tok::RParen; break;
          case ':': kind = Tok::Colon; break;
          case ';': kind = Tok::Semi; break;
          case ',': kind = Tok::Comma; break;
          case '=': kind = Tok::Eq; break;
          default:
            throw SyntaxError(line, column, std::string("unexpected character '") + c + "'");
        }
        advance();
        out.push_back({kind, std::string(1, c), line, column});
      }
    }
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
    }
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string read_string() {
    std::size_t line = line_, column = column_;
    advance();  // opening quote
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\n') break;
      if (text_[pos_] == '\\' && (peek(1) == '"' || peek(1) == '\\')) advance();
      out += text_[pos_];
      advance();
    }
    if (pos_ >= text_.size() || text_[pos_] != '"')
      throw SyntaxError(line, column, "unterminated string");
    advance();
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

inline const char* describe(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'!='";
    case Tok::Arrow: return "'->'";
    case Tok::End: return "end of input";
  }
  return "token";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  KnowledgeBase parse_file() {
    KnowledgeBase kb;
    expect_keyword("kb");
    kb.name = expect(Tok::String).text;
    expect(Tok::LBrace);
    while (!at(Tok::RBrace)) {
      const Token& head = current();
      if (head.kind != Tok::Ident)
        throw SyntaxError(head.line, head.column,
                          std::string("expected declaration, found ") + describe(head.kind));
      if (head.text == "var") {
        parse_var(kb);
      } else if (head.text == "context") {
        parse_context(kb);
      } else if (head.text == "constraint") {
        parse_constraint(kb);
      } else {
        throw SyntaxError(head.line, head.column,
                          "expected 'var', 'context' or 'constraint', found '" + head.text + "'");
      }
    }
    expect(Tok::RBrace);
    expect(Tok::End);
    return kb;
  }

  Formula parse_standalone_formula() {
    Formula f = formula();
    expect(Tok::End);
    return f;
  }

 private:
  const Token& current() const { return tokens_[pos_]; }
  bool at(Tok kind) const { return current().kind == kind; }
  bool at_keyword(std::string_view word) const {
    return at(Tok::Ident) && current().text == word;
  }

  const Token& expect(Tok kind) {
    const Token& tok = current();
    if (tok.kind != kind)
      throw SyntaxError(tok.line, tok.column, std::string("expected ") + describe(kind) +
                                                  ", found " + describe(tok.kind) +
                                                  (tok.text.empty() ? "" : " '" + tok.text + "'"));
    if (kind != Tok::End) ++pos_;
    return tok;
  }

  void expect_keyword(std::string_view word) {
    const Token& tok = current();
    if (!at_keyword(word))
      throw SyntaxError(tok.line, tok.column, "expected '" + std::string(word) + "'");
    ++pos_;
  }

  const Token& name() {
    const Token& tok = expect(Tok::Ident);
    if (is_keyword(tok.text))
      throw SyntaxError(tok.line, tok.column, "reserved word '" + tok.text + "' used as a name");
    return tok;
  }

  void parse_var(KnowledgeBase& kb) {
    expect_keyword("var");
    Variable v;
    v.name = name().text;
    expect(Tok::Colon);
    expect(Tok::LBrace);
    v.domain.push_back(name().text);
    while (at(Tok::Comma)) {
      ++pos_;
      v.domain.push_back(name().text);
    }
    expect(Tok::RBrace);
    expect(Tok::Semi);
    kb.variables.push_back(std::move(v));
  }

  void parse_context(KnowledgeBase& kb) {
    const Token& head = current();
    expect_keyword("context");
    if (kb.context)
      throw Error(ErrorKind::Validation, "line " + std::to_string(head.line) +
                                             ": bad context declaration: context declared twice");
    Context ctx;
    ctx.variable = name().text;
    expect(Tok::Eq);
    ctx.value = name().text;
    expect(Tok::Semi);
    kb.context = std::move(ctx);
  }

  void parse_constraint(KnowledgeBase& kb) {
    expect_keyword("constraint");
    Constraint c{name().text, Formula::atom({}), kb.name, false};
    expect(Tok::Colon);
    c.formula = formula();
    expect(Tok::Semi);
    kb.constraints.push_back(std::move(c));
  }

  Formula formula() {
    Formula lhs = or_expr();
    if (at(Tok::Arrow)) {
      ++pos_;
      return Formula::implication(lhs, formula());
    }
    return lhs;
  }

  Formula or_expr() {
    Formula acc = and_expr();
    while (at_keyword("or")) {
      ++pos_;
      acc = Formula::disjunction(acc, and_expr());
    }
    return acc;
  }

  Formula and_expr() {
    Formula acc = unary();
    while (at_keyword("and")) {
      ++pos_;
      acc = Formula::conjunction(acc, unary());
    }
    return acc;
  }

  Formula unary() {
    if (at_keyword("not")) {
      ++pos_;
      return Formula::negation(unary());
    }
    if (at(Tok::LParen)) {
      ++pos_;
      Formula inner = formula();
      expect(Tok::RParen);
      return inner;
    }
    std::string var = name().text;
    CmpOp op;
    if (at(Tok::Eq)) {
      op = CmpOp::Eq;
    } else if (at(Tok::Neq)) {
      op = CmpOp::Neq;
    } else {
      const Token& tok = current();
      throw SyntaxError(tok.line, tok.column,
                        std::string("expected '=' or '!=', found ") + describe(tok.kind));
    }
    ++pos_;
    std::string value = name().text;
    return Formula::atom(std::move(var), op, std::move(value));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

enum class Prec { Implies = 0, Or = 1, And = 2, Unary = 3 };

inline Prec precedence(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Implies: return Prec::Implies;
    case Formula::Kind::Or: return Prec::Or;
    case Formula::Kind::And: return Prec::And;
    default: return Prec::Unary;
  }
}

inline void write_formula(std::ostream& os, const Formula& f);

inline void write_operand(std::ostream& os, const Formula& f, bool parens) {
  if (parens) os << '(';
  write_formula(os, f);
  if (parens) os << ')';
}

inline void write_formula(std::ostream& os, const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const Atom& a = f.as_atom();
      os << a.variable << (a.op == CmpOp::Eq ? " = " : " != ") << a.value;
      return;
    }
    case Formula::Kind::Not:
      os << "not ";
      write_operand(os, f.operand(), precedence(f.operand()) < Prec::Unary);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      // Left-folded chains print flat; a same-precedence right child keeps
      // its parentheses so the tree shape survives re-parsing.
      Prec p = precedence(f);
      write_operand(os, f.lhs(), precedence(f.lhs()) < p);
      os << (f.kind() == Formula::Kind::And ? " and " : " or ");
      write_operand(os, f.rhs(), precedence(f.rhs()) <= p);
      return;
    }
    case Formula::Kind::Implies:
      write_operand(os, f.lhs(), precedence(f.lhs()) <= Prec::Implies);
      os << " -> ";
      write_operand(os, f.rhs(), precedence(f.rhs()) < Prec::Implies);
      return;
  }
}

inline void write_quoted(std::ostream& os, std::string_view s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') os << '\\';
    os << c;
  }
  os << '"';
}

}  // namespace detail

/// Parses and validates a knowledge base. Constraints that have the shape
/// `ctx = value -> body` for the declared context are flagged contextualized;
/// every constraint's provenance is the KB name.
inline KnowledgeBase parse_kb(std::string_view text) {
  detail::Parser parser(detail::Lexer(text).tokenize());
  KnowledgeBase kb = parser.parse_file();
  if (kb.context)
    for (auto& c : kb.constraints)
      c.contextualized = is_guarded(c.formula, kb.context->variable, kb.context->value);
  validate(kb);
  return kb;
}

/// Parses a single formula, e.g. `fuel = electro -> couplingdev = no`.
/// No validation against variables.
inline Formula parse_formula(std::string_view text) {
  return detail::Parser(detail::Lexer(text).tokenize()).parse_standalone_formula();
}

inline std::string format_formula(const Formula& f) {
  std::ostringstream os;
  detail::write_formula(os, f);
  return os.str();
}

/// Contextualized constraints print their body in parentheses:
/// `country = US -> (fuel != hybrid)`.
inline std::string format_constraint_body(const Constraint& c) {
  if (!c.contextualized || c.formula.kind() != Formula::Kind::Implies)
    return format_formula(c.formula);
  std::ostringstream os;
  detail::write_operand(os, c.formula.lhs(),
                        detail::precedence(c.formula.lhs()) <= detail::Prec::Implies);
  os << " -> ";
  detail::write_operand(os, c.formula.rhs(), true);
  return os.str();
}

inline std::string serialize_kb(const KnowledgeBase& kb) {
  std::ostringstream os;
  os << "kb ";
  detail::write_quoted(os, kb.name);
  os << " {\n";
  if (kb.context) os << "  context " << kb.context->variable << " = " << kb.context->value << ";\n";
  for (const auto& v : kb.variables) {
    os << "  var " << v.name << " : { ";
    for (std::size_t i = 0; i < v.domain.size(); ++i) os << (i ? ", " : "") << v.domain[i];
    os << " };\n";
  }
  for (const auto& c : kb.constraints)
    os << "  constraint " << c.id << ": " << format_constraint_body(c) << ";\n";
  os << "}\n";
  return os.str();
}

inline std::string write_bench_csv(std::span<const BenchRow> rows) {
  std::ostringstream os;
  os << "kb_id,n_constraints,context_share_pct,trial,merge_ms,solve_ms,checks_phase1,"
        "checks_phase2\n";
  for (const auto& r : rows)
    os << r.kb_id << ',' << r.n_constraints << ',' << r.context_share_pct << ',' << r.trial
       << ',' << r.merge_ms << ',' << r.solve_ms << ',' << r.checks_phase1 << ','
       << r.checks_phase2 << '\n';
  return os.str();
}

}  // namespace ckbm
