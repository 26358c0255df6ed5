#include "curvlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

namespace curvlab {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprPtr number(complex v, int line = 0, int col = 0) {
  Expr e;
  e.kind = exprkind::number;
  e.value = v;
  e.line = line;
  e.col = col;
  return make(std::move(e));
}

// ---------------------------------------------------------------- lexer ---

enum class tok { number, ident, plus, minus, star, slash, caret, lparen, rparen,
                 lbracket, rbracket, comma, end };

struct Token {
  tok kind;
  double num = 0;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) bump();
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = tok::end;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit((unsigned char)c) || (c == '.' && pos_ + 1 < src_.size() &&
                                           std::isdigit((unsigned char)src_[pos_ + 1]))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isdigit((unsigned char)src_[pos_]) || src_[pos_] == '.'))
        bump();
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t mark = pos_;
        bump();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
        if (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) {
          while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) bump();
        } else {
          pos_ = mark;  // 'e' belongs to an identifier-ish context; stop the number
        }
      }
      cur_.kind = tok::number;
      cur_.text = src_.substr(start, pos_ - start);
      try {
        cur_.num = std::stod(cur_.text);
      } catch (...) {
        throw parse_error(cur_.line, cur_.col, "malformed number '" + cur_.text + "'");
      }
      return;
    }
    if (std::isalpha((unsigned char)c) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
        bump();
      cur_.kind = tok::ident;
      cur_.text = src_.substr(start, pos_ - start);
      return;
    }
    bump();
    switch (c) {
      case '+': cur_.kind = tok::plus; return;
      case '-': cur_.kind = tok::minus; return;
      case '*': cur_.kind = tok::star; return;
      case '/': cur_.kind = tok::slash; return;
      case '^': cur_.kind = tok::caret; return;
      case '(': cur_.kind = tok::lparen; return;
      case ')': cur_.kind = tok::rparen; return;
      case '[': cur_.kind = tok::lbracket; return;
      case ']': cur_.kind = tok::rbracket; return;
      case ',': cur_.kind = tok::comma; return;
      default:
        throw parse_error(cur_.line, cur_.col, std::string("unexpected character '") + c + "'");
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
  int line_ = 1, col_ = 1;
  Token cur_;
};

// --------------------------------------------------------------- parser ---
//
// expr   := term (('+'|'-') term)*
// term   := power (('*'|'/') power)*
// power  := unary ('^' power)?          right-associative
// unary  := '-' unary | atom            unary minus binds tighter than '^'
// atom   := number | ident | ident '(' expr,... ')' | '(' expr ')'

struct FnInfo {
  callfn fn;
  int min_arity, max_arity;  // max < 0 means unbounded
};

const std::map<std::string, FnInfo>& functions() {
  static const std::map<std::string, FnInfo> fns = {
      {"exp", {callfn::exp_fn, 1, 1}},  {"log", {callfn::log_fn, 1, 1}},
      {"pow", {callfn::pow_fn, 2, 2}},  {"abs2", {callfn::abs2_fn, 1, 1}},
      {"conj", {callfn::conj_fn, 1, 1}}, {"sum", {callfn::sum_fn, 1, -1}},
  };
  return fns;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  FieldExpr parse_top() {
    FieldExpr f;
    if (lex_.peek().kind == tok::lbracket) {
      parse_matrix(f);
    } else {
      f.scalar = parse_expr();
    }
    expect(tok::end, "end of input");
    return f;
  }

  ExprPtr parse_scalar_top() {
    ExprPtr e = parse_expr();
    expect(tok::end, "end of input");
    return e;
  }

 private:
  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    while (lex_.peek().kind == tok::plus || lex_.peek().kind == tok::minus) {
      Token op = lex_.take();
      ExprPtr rhs = parse_term();
      Expr e;
      e.kind = op.kind == tok::plus ? exprkind::add : exprkind::sub;
      e.kids = {lhs, rhs};
      e.line = op.line;
      e.col = op.col;
      lhs = make(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_power();
    while (lex_.peek().kind == tok::star || lex_.peek().kind == tok::slash) {
      Token op = lex_.take();
      ExprPtr rhs = parse_power();
      Expr e;
      e.kind = op.kind == tok::star ? exprkind::mul : exprkind::div;
      e.kids = {lhs, rhs};
      e.line = op.line;
      e.col = op.col;
      lhs = make(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_unary();
    if (lex_.peek().kind == tok::caret) {
      Token op = lex_.take();
      ExprPtr exponent = parse_power();
      Expr e;
      e.kind = exprkind::pow;
      e.kids = {base, exponent};
      e.line = op.line;
      e.col = op.col;
      return make(std::move(e));
    }
    return base;
  }

  ExprPtr parse_unary() {
    if (lex_.peek().kind == tok::minus) {
      Token op = lex_.take();
      ExprPtr kid = parse_unary();
      Expr e;
      e.kind = exprkind::neg;
      e.kids = {kid};
      e.line = op.line;
      e.col = op.col;
      return make(std::move(e));
    }
    return parse_atom();
  }

  ExprPtr parse_atom() {
    Token t = lex_.take();
    switch (t.kind) {
      case tok::number:
        return number(complex(t.num, 0), t.line, t.col);
      case tok::lparen: {
        ExprPtr e = parse_expr();
        expect(tok::rparen, "')'");
        return e;
      }
      case tok::ident:
        return parse_ident(t);
      default:
        throw parse_error(t.line, t.col, "expected a value, got '" + describe(t) + "'");
    }
  }

  ExprPtr parse_ident(const Token& t) {
    if (lex_.peek().kind == tok::lparen) {
      auto it = functions().find(t.text);
      if (it == functions().end())
        throw parse_error(t.line, t.col, "unknown function '" + t.text + "'");
      lex_.take();  // '('
      std::vector<ExprPtr> args;
      if (lex_.peek().kind != tok::rparen) {
        args.push_back(parse_expr());
        while (lex_.peek().kind == tok::comma) {
          lex_.take();
          args.push_back(parse_expr());
        }
      }
      expect(tok::rparen, "')'");
      const FnInfo& info = it->second;
      if ((int)args.size() < info.min_arity ||
          (info.max_arity >= 0 && (int)args.size() > info.max_arity))
        throw parse_error(t.line, t.col,
                          "function '" + t.text + "' called with " +
                              std::to_string(args.size()) + " argument(s)");
      Expr e;
      e.kind = exprkind::call;
      e.fn = info.fn;
      e.kids = std::move(args);
      e.line = t.line;
      e.col = t.col;
      return make(std::move(e));
    }
    if (t.text == "i") return number(complex(0, 1), t.line, t.col);
    varfam fam;
    char lead = t.text[0];
    if (lead == 'z') fam = varfam::base;
    else if (lead == 'w') fam = varfam::chart;
    else if (lead == 'Z') fam = varfam::homog;
    else throw parse_error(t.line, t.col, "unknown identifier '" + t.text + "'");
    if (t.text.size() < 2)
      throw parse_error(t.line, t.col, "unknown identifier '" + t.text + "'");
    for (std::size_t k = 1; k < t.text.size(); ++k)
      if (!std::isdigit((unsigned char)t.text[k]))
        throw parse_error(t.line, t.col, "unknown identifier '" + t.text + "'");
    int index = std::stoi(t.text.substr(1));
    if (fam != varfam::homog && index < 1)
      throw parse_error(t.line, t.col, "variable '" + t.text + "' is 1-based");
    Expr e;
    e.kind = exprkind::var;
    e.fam = fam;
    e.index = index;
    e.line = t.line;
    e.col = t.col;
    return make(std::move(e));
  }

  void parse_matrix(FieldExpr& f) {
    Token open = lex_.take();  // '['
    std::vector<std::vector<ExprPtr>> rows;
    while (true) {
      expect(tok::lbracket, "'[' starting a matrix row");
      std::vector<ExprPtr> row;
      row.push_back(parse_expr());
      while (lex_.peek().kind == tok::comma) {
        lex_.take();
        row.push_back(parse_expr());
      }
      expect(tok::rbracket, "']' ending a matrix row");
      rows.push_back(std::move(row));
      if (lex_.peek().kind == tok::comma) {
        lex_.take();
        continue;
      }
      break;
    }
    expect(tok::rbracket, "']' ending the matrix");
    f.rows = (int)rows.size();
    f.cols = (int)rows[0].size();
    for (const auto& row : rows) {
      if ((int)row.size() != f.cols)
        throw parse_error(open.line, open.col, "ragged matrix literal");
      for (const auto& e : row) f.entries.push_back(e);
    }
  }

  void expect(tok k, const std::string& what) {
    if (lex_.peek().kind != k) {
      Token t = lex_.peek();
      throw parse_error(t.line, t.col, "expected " + what + ", got '" + describe(t) + "'");
    }
    lex_.take();
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case tok::number: return t.text;
      case tok::ident: return t.text;
      case tok::plus: return "+";
      case tok::minus: return "-";
      case tok::star: return "*";
      case tok::slash: return "/";
      case tok::caret: return "^";
      case tok::lparen: return "(";
      case tok::rparen: return ")";
      case tok::lbracket: return "[";
      case tok::rbracket: return "]";
      case tok::comma: return ",";
      case tok::end: return "<end>";
    }
    return "?";
  }

  Lexer lex_;
};

// -------------------------------------------------------------- printer ---

int prec(const ExprPtr& e) {
  switch (e->kind) {
    case exprkind::number:
    case exprkind::var:
    case exprkind::call: return 5;
    case exprkind::neg: return 4;
    case exprkind::pow: return 3;
    case exprkind::mul:
    case exprkind::div: return 2;
    case exprkind::add:
    case exprkind::sub: return 1;
  }
  return 0;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_rec(const ExprPtr& e, std::string& out);

void print_child(const ExprPtr& kid, int min_prec, std::string& out) {
  bool parens = prec(kid) < min_prec;
  if (parens) out += '(';
  print_rec(kid, out);
  if (parens) out += ')';
}

void print_rec(const ExprPtr& e, std::string& out) {
  switch (e->kind) {
    case exprkind::number:
      if (e->value == complex(0, 1)) {
        out += 'i';
      } else {
        out += fmt_double(e->value.real());
      }
      return;
    case exprkind::var:
      out += (e->fam == varfam::base ? 'z' : e->fam == varfam::chart ? 'w' : 'Z');
      out += std::to_string(e->index);
      return;
    case exprkind::neg:
      out += '-';
      print_child(e->kids[0], 4, out);
      return;
    case exprkind::pow:
      print_child(e->kids[0], 4, out);
      out += '^';
      print_child(e->kids[1], 3, out);
      return;
    case exprkind::mul:
    case exprkind::div:
      print_child(e->kids[0], 2, out);
      out += e->kind == exprkind::mul ? '*' : '/';
      print_child(e->kids[1], 3, out);
      return;
    case exprkind::add:
    case exprkind::sub:
      print_child(e->kids[0], 1, out);
      out += e->kind == exprkind::add ? " + " : " - ";
      print_child(e->kids[1], 2, out);
      return;
    case exprkind::call: {
      const char* name = nullptr;
      switch (e->fn) {
        case callfn::exp_fn: name = "exp"; break;
        case callfn::log_fn: name = "log"; break;
        case callfn::pow_fn: name = "pow"; break;
        case callfn::abs2_fn: name = "abs2"; break;
        case callfn::conj_fn: name = "conj"; break;
        case callfn::sum_fn: name = "sum"; break;
      }
      out += name;
      out += '(';
      for (std::size_t k = 0; k < e->kids.size(); ++k) {
        if (k) out += ", ";
        print_rec(e->kids[k], out);
      }
      out += ')';
      return;
    }
  }
}

// ------------------------------------------------------------ evaluator ---

[[noreturn]] void domain_fail(const ExprPtr& e, const std::string& what) {
  throw error(errkind::domain, what + " in subtree '" + print_expr(e) + "'");
}

bool integer_exponent(const ExprPtr& exponent, long& out) {
  if (exponent->kind == exprkind::number && exponent->value.imag() == 0) {
    double r = exponent->value.real();
    if (r == std::floor(r) && std::abs(r) <= 64) {
      out = (long)r;
      return true;
    }
  }
  if (exponent->kind == exprkind::neg) {
    long inner;
    if (integer_exponent(exponent->kids[0], inner)) {
      out = -inner;
      return true;
    }
  }
  return false;
}

complex powi(complex base, long n) {
  if (n == 0) return complex(1, 0);
  bool invert = n < 0;
  unsigned long k = invert ? (unsigned long)(-n) : (unsigned long)n;
  complex acc(1, 0), b = base;
  while (k) {
    if (k & 1) acc *= b;
    b *= b;
    k >>= 1;
  }
  return invert ? complex(1, 0) / acc : acc;
}

}  // namespace

FieldExpr parse_field(const std::string& source) {
  if (source.empty()) throw error(errkind::input, "parse_field: empty source");
  Parser p(source);
  return p.parse_top();
}

ExprPtr parse_scalar(const std::string& source) {
  if (source.empty()) throw error(errkind::input, "parse_scalar: empty source");
  Parser p(source);
  return p.parse_scalar_top();
}

std::string print_expr(const ExprPtr& e) {
  std::string out;
  print_rec(e, out);
  return out;
}

std::string print_field(const FieldExpr& f) {
  if (!f.is_matrix()) return print_expr(f.scalar);
  std::string out = "[";
  for (int r = 0; r < f.rows; ++r) {
    if (r) out += ",";
    out += '[';
    for (int c = 0; c < f.cols; ++c) {
      if (c) out += ", ";
      print_rec(f.entries[r * f.cols + c], out);
    }
    out += ']';
  }
  out += ']';
  return out;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case exprkind::number:
      if (a->value != b->value) return false;
      break;
    case exprkind::var:
      if (a->fam != b->fam || a->index != b->index) return false;
      break;
    case exprkind::call:
      if (a->fn != b->fn) return false;
      break;
    default:
      break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t k = 0; k < a->kids.size(); ++k)
    if (!equal(a->kids[k], b->kids[k])) return false;
  return true;
}

bool equal(const FieldExpr& a, const FieldExpr& b) {
  if (a.is_matrix() != b.is_matrix()) return false;
  if (!a.is_matrix()) return equal(a.scalar, b.scalar);
  if (a.rows != b.rows || a.cols != b.cols) return false;
  for (std::size_t k = 0; k < a.entries.size(); ++k)
    if (!equal(a.entries[k], b.entries[k])) return false;
  return true;
}

complex eval_scalar(const ExprPtr& e, const Bindings& b) {
  switch (e->kind) {
    case exprkind::number:
      return e->value;
    case exprkind::var: {
      std::span<const complex> fam =
          e->fam == varfam::base ? b.z : e->fam == varfam::chart ? b.w : b.Z;
      int slot = e->fam == varfam::homog ? e->index : e->index - 1;
      if (slot < 0 || slot >= (int)fam.size())
        throw error(errkind::input, "unbound variable '" + print_expr(e) + "'");
      return fam[slot];
    }
    case exprkind::neg:
      return -eval_scalar(e->kids[0], b);
    case exprkind::add:
      return eval_scalar(e->kids[0], b) + eval_scalar(e->kids[1], b);
    case exprkind::sub:
      return eval_scalar(e->kids[0], b) - eval_scalar(e->kids[1], b);
    case exprkind::mul:
      return eval_scalar(e->kids[0], b) * eval_scalar(e->kids[1], b);
    case exprkind::div: {
      complex den = eval_scalar(e->kids[1], b);
      if (std::abs(den) == 0) domain_fail(e, "division by zero");
      return eval_scalar(e->kids[0], b) / den;
    }
    case exprkind::pow: {
      long n;
      if (integer_exponent(e->kids[1], n)) return powi(eval_scalar(e->kids[0], b), n);
      complex base = eval_scalar(e->kids[0], b);
      if (std::abs(base) == 0) domain_fail(e, "zero base of non-integer power");
      return std::exp(eval_scalar(e->kids[1], b) * std::log(base));
    }
    case exprkind::call:
      switch (e->fn) {
        case callfn::exp_fn:
          return std::exp(eval_scalar(e->kids[0], b));
        case callfn::log_fn: {
          complex v = eval_scalar(e->kids[0], b);
          if (std::abs(v) == 0) domain_fail(e, "log of zero");
          if (v.real() <= 0 && std::abs(v.imag()) < 1e-14 * std::abs(v.real()))
            domain_fail(e, "log of non-positive real value");
          return std::log(v);
        }
        case callfn::pow_fn: {
          long n;
          if (integer_exponent(e->kids[1], n)) return powi(eval_scalar(e->kids[0], b), n);
          complex base = eval_scalar(e->kids[0], b);
          if (std::abs(base) == 0) domain_fail(e, "zero base of non-integer power");
          return std::exp(eval_scalar(e->kids[1], b) * std::log(base));
        }
        case callfn::abs2_fn: {
          complex v = eval_scalar(e->kids[0], b);
          return complex(std::norm(v), 0);
        }
        case callfn::conj_fn:
          return std::conj(eval_scalar(e->kids[0], b));
        case callfn::sum_fn: {
          complex acc(0, 0);
          for (const auto& kid : e->kids) acc += eval_scalar(kid, b);
          return acc;
        }
      }
  }
  throw error(errkind::input, "eval: malformed expression node");
}

cmat eval_matrix(const FieldExpr& f, const Bindings& b) {
  if (!f.is_matrix()) throw error(errkind::input, "eval_matrix: field is scalar");
  cmat m(f.rows, f.cols);
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) m(r, c) = eval_scalar(f.entries[r * f.cols + c], b);
  return m;
}

void check_vars(const ExprPtr& e, int n_base, int n_chart, int n_homog) {
  if (e->kind == exprkind::var) {
    int limit = e->fam == varfam::base ? n_base : e->fam == varfam::chart ? n_chart : n_homog;
    int slot = e->fam == varfam::homog ? e->index : e->index - 1;
    if (limit < 0 || slot >= limit)
      throw error(errkind::input,
                  "variable '" + print_expr(e) + "' outside the declared dimensions");
  }
  for (const auto& kid : e->kids) check_vars(kid, n_base, n_chart, n_homog);
}

void check_vars(const FieldExpr& f, int n_base, int n_chart, int n_homog) {
  if (!f.is_matrix()) {
    check_vars(f.scalar, n_base, n_chart, n_homog);
    return;
  }
  for (const auto& e : f.entries) check_vars(e, n_base, n_chart, n_homog);
}

namespace {

WDual wd_mul(const WDual& a, const WDual& c) {
  return {a.v * c.v, a.dz * c.v + a.v * c.dz, a.dzb * c.v + a.v * c.dzb};
}

WDual wd_div(const ExprPtr& e, const WDual& a, const WDual& c) {
  if (std::abs(c.v) == 0) domain_fail(e, "division by zero");
  complex inv = complex(1, 0) / c.v;
  complex q = a.v * inv;
  return {q, (a.dz - q * c.dz) * inv, (a.dzb - q * c.dzb) * inv};
}

WDual wd_conj(const WDual& a) {
  return {std::conj(a.v), std::conj(a.dzb), std::conj(a.dz)};
}

WDual wd_pow(const ExprPtr& e, const WDual& base, const ExprPtr& exponent, const Bindings& b,
             varfam fam, int index);

WDual eval_wdual_rec(const ExprPtr& e, const Bindings& b, varfam fam, int index) {
  switch (e->kind) {
    case exprkind::number:
      return {e->value, 0, 0};
    case exprkind::var: {
      complex v = eval_scalar(e, b);
      bool active = e->fam == fam && e->index == index;
      return {v, active ? complex(1, 0) : complex(0, 0), complex(0, 0)};
    }
    case exprkind::neg: {
      WDual a = eval_wdual_rec(e->kids[0], b, fam, index);
      return {-a.v, -a.dz, -a.dzb};
    }
    case exprkind::add: {
      WDual a = eval_wdual_rec(e->kids[0], b, fam, index);
      WDual c = eval_wdual_rec(e->kids[1], b, fam, index);
      return {a.v + c.v, a.dz + c.dz, a.dzb + c.dzb};
    }
    case exprkind::sub: {
      WDual a = eval_wdual_rec(e->kids[0], b, fam, index);
      WDual c = eval_wdual_rec(e->kids[1], b, fam, index);
      return {a.v - c.v, a.dz - c.dz, a.dzb - c.dzb};
    }
    case exprkind::mul:
      return wd_mul(eval_wdual_rec(e->kids[0], b, fam, index),
                    eval_wdual_rec(e->kids[1], b, fam, index));
    case exprkind::div:
      return wd_div(e, eval_wdual_rec(e->kids[0], b, fam, index),
                    eval_wdual_rec(e->kids[1], b, fam, index));
    case exprkind::pow:
      return wd_pow(e, eval_wdual_rec(e->kids[0], b, fam, index), e->kids[1], b, fam, index);
    case exprkind::call:
      switch (e->fn) {
        case callfn::exp_fn: {
          WDual a = eval_wdual_rec(e->kids[0], b, fam, index);
          complex f = std::exp(a.v);
          return {f, f * a.dz, f * a.dzb};
        }
        case callfn::log_fn: {
          WDual a = eval_wdual_rec(e->kids[0], b, fam, index);
          if (std::abs(a.v) == 0) domain_fail(e, "log of zero");
          complex inv = complex(1, 0) / a.v;
          return {std::log(a.v), a.dz * inv, a.dzb * inv};
        }
        case callfn::pow_fn:
          return wd_pow(e, eval_wdual_rec(e->kids[0], b, fam, index), e->kids[1], b, fam,
                        index);
        case callfn::abs2_fn: {
          WDual a = eval_wdual_rec(e->kids[0], b, fam, index);
          return wd_mul(a, wd_conj(a));
        }
        case callfn::conj_fn:
          return wd_conj(eval_wdual_rec(e->kids[0], b, fam, index));
        case callfn::sum_fn: {
          WDual acc{0, 0, 0};
          for (const auto& kid : e->kids) {
            WDual a = eval_wdual_rec(kid, b, fam, index);
            acc.v += a.v;
            acc.dz += a.dz;
            acc.dzb += a.dzb;
          }
          return acc;
        }
      }
  }
  throw error(errkind::input, "eval_wdual: malformed expression node");
}

WDual wd_pow(const ExprPtr& e, const WDual& base, const ExprPtr& exponent, const Bindings& b,
             varfam fam, int index) {
  long n;
  if (integer_exponent(exponent, n)) {
    if (n == 0) return {complex(1, 0), 0, 0};
    if (std::abs(base.v) == 0) {
      if (n < 0) domain_fail(e, "zero base of negative power");
      if (n == 1) return base;
      return {complex(0, 0), 0, 0};  // n >= 2: derivative vanishes too
    }
    complex f = powi(base.v, n);
    complex g = complex((double)n, 0) * f / base.v;
    return {f, g * base.dz, g * base.dzb};
  }
  if (std::abs(base.v) == 0) domain_fail(e, "zero base of non-integer power");
  WDual ex = eval_wdual_rec(exponent, b, fam, index);
  complex lg = std::log(base.v);
  complex f = std::exp(ex.v * lg);
  return {f, f * (ex.dz * lg + ex.v * base.dz / base.v),
          f * (ex.dzb * lg + ex.v * base.dzb / base.v)};
}

}  // namespace

WDual eval_wdual(const ExprPtr& e, const Bindings& b, varfam fam, int index) {
  return eval_wdual_rec(e, b, fam, index);
}

}  // namespace curvlab
