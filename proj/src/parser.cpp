#include "scv/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace scv {

namespace {

struct Sx {
  bool atom = true;
  std::string text;
  std::vector<Sx> items;
  int line = 0, col = 0;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  std::vector<Sx> read_all() {
    std::vector<Sx> out;
    for (;;) {
      skip();
      if (i_ >= s_.size()) return out;
      out.push_back(read());
    }
  }

 private:
  void adv() {
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        adv();
      } else if (c == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') adv();
      } else if (c == '#' && i_ + 1 < s_.size() && s_[i_ + 1] == '|') {
        while (i_ + 1 < s_.size() && !(s_[i_] == '|' && s_[i_ + 1] == '#')) adv();
        if (i_ + 1 >= s_.size()) throw ParseError("unterminated block comment", line_, col_);
        adv();
        adv();
      } else {
        return;
      }
    }
  }

  Sx read() {
    skip();
    Sx x;
    x.line = line_;
    x.col = col_;
    if (i_ >= s_.size()) throw ParseError("unexpected end of input", line_, col_);
    char c = s_[i_];
    if (c == '(' || c == '[') {
      char close = c == '(' ? ')' : ']';
      adv();
      x.atom = false;
      for (;;) {
        skip();
        if (i_ >= s_.size()) throw ParseError("unbalanced parenthesis", x.line, x.col);
        if (s_[i_] == ')' || s_[i_] == ']') {
          if (s_[i_] != close) throw ParseError("mismatched bracket", line_, col_);
          adv();
          return x;
        }
        x.items.push_back(read());
      }
    }
    if (c == ')' || c == ']') throw ParseError("unexpected closing bracket", line_, col_);
    while (i_ < s_.size()) {
      char d = s_[i_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == '[' || d == ']' || d == ';')
        break;
      x.text.push_back(d);
      adv();
    }
    return x;
  }

  const std::string& s_;
  size_t i_ = 0;
  int line_ = 1, col_ = 1;
};

bool is_int_text(const std::string& t) {
  size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
  if (i >= t.size()) return false;
  for (; i < t.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  return true;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "lambda", "λ",   "if",    "let",   "let*", "cond",  "and",  "or",   "begin", "not",  "and/c", "or/c",
      "pred",   "->",  "->d",   "true",  "false", "empty", "module", "top", "define", "opaque", "•", "else",
      "any",    "any/c", "†",    "Λ",    "havoc"};
  return k;
}

class Desugar {
 public:
  Desugar(std::set<Sym> modules, bool open) : modules_(std::move(modules)), open_(open) {}

  Ex expr(const Sx& x, Sym label, const std::vector<Sym>& env) {
    if (x.atom) return atom(x, label, env);
    if (x.items.empty()) throw ParseError("empty application", x.line, x.col);
    const Sx& h = x.items[0];
    if (h.atom) {
      const std::string& k = h.text;
      bool shadowed = is_bound(intern(k), env);
      if (!shadowed) {
        if (k == "lambda" || k == "λ") return lambda(x, label, env);
        if (k == "if") {
          arity(x, 4);
          return mk_if(expr(x.items[1], label, env), expr(x.items[2], label, env), expr(x.items[3], label, env));
        }
        if (k == "let" || k == "let*") return let(x, label, env);
        if (k == "cond") return cond(x, 1, label, env);
        if (k == "and") return and_(x, 1, label, env);
        if (k == "or") return or_(x, 1, label, env);
        if (k == "begin") return begin(x, 1, label, env);
        if (k == "not") {
          arity(x, 2);
          return mk_prim(Op::FalseP, {expr(x.items[1], label, env)}, label);
        }
        if (k == "and/c" || k == "or/c") return combinator(x, k == "and/c", label, env);
        if (k == "pred") {
          arity(x, 2);
          auto o = x.items[1].atom ? op_from_name(x.items[1].text) : std::nullopt;
          if (!o || !is_pred(*o)) throw ParseError("pred expects a primitive predicate", x.line, x.col);
          return mk_pred(*o);
        }
        if (k == "->") return arrow(x, label, env);
        if (k == "->d") return dep_arrow(x, label, env);
        if (k == "opaque" || k == "•") throw ParseError("opaque is only allowed as a module body", h.line, h.col);
        if (k == "module" || k == "top" || k == "define")
          throw ParseError("'" + k + "' not allowed in expression position", h.line, h.col);
        if (auto o = op_from_name(k)) {
          if (static_cast<int>(x.items.size()) - 1 != op_arity(*o))
            throw ParseError(std::string("wrong number of arguments to ") + op_name(*o), x.line, x.col);
          std::vector<Ex> args;
          for (size_t i = 1; i < x.items.size(); ++i) args.push_back(expr(x.items[i], label, env));
          return mk_prim(*o, std::move(args), label);
        }
      }
    }
    if (x.items.size() < 2) throw ParseError("application needs an argument", x.line, x.col);
    Ex f = expr(x.items[0], label, env);
    for (size_t i = 1; i < x.items.size(); ++i) f = mk_app(f, expr(x.items[i], label, env), label);
    return f;
  }

  // contract := expr | (-> c ... d) | (->d c (lambda (x) d))
  Ex contract(const Sx& x, Sym label) { return expr(x, label, {}); }

  Ex module_body(const Sx& x, Sym label) {
    if (x.atom && (x.text == "opaque" || x.text == "•")) return nullptr;
    if (!x.atom && !x.items.empty() && x.items[0].atom && x.items[0].text == "define") {
      if (x.items.size() < 3) throw ParseError("malformed define", x.line, x.col);
      const Sx& sig = x.items[1];
      if (sig.atom) {
        arity(x, 3);
        return expr(x.items[2], label, {});
      }
      if (sig.items.size() < 2) throw ParseError("define needs at least one parameter", sig.line, sig.col);
      std::vector<Sym> params;
      for (size_t i = 1; i < sig.items.size(); ++i) params.push_back(ident(sig.items[i]));
      return curried(params, x, 2, label, {});
    }
    return expr(x, label, {});
  }

 private:
  static bool is_bound(Sym s, const std::vector<Sym>& env) {
    for (auto b : env)
      if (b == s) return true;
    return false;
  }

  static void arity(const Sx& x, size_t n) {
    if (x.items.size() != n) throw ParseError("malformed '" + x.items[0].text + "' form", x.line, x.col);
  }

  Sym ident(const Sx& x) {
    if (!x.atom || is_int_text(x.text) || keywords().count(x.text) || op_from_name(x.text))
      throw ParseError("expected an identifier", x.line, x.col);
    return intern(x.text);
  }

  Sym fresh(const char* base) { return intern(std::string("%") + base + std::to_string(++counter_)); }

  Ex atom(const Sx& x, Sym label, const std::vector<Sym>& env) {
    const std::string& t = x.text;
    if (is_int_text(t)) {
      try {
        return mk_int(std::stoll(t));
      } catch (...) {
        throw ParseError("integer out of range", x.line, x.col);
      }
    }
    Sym s = intern(t);
    if (is_bound(s, env)) return mk_var(s, label);
    if (t == "true") return mk_true();
    if (t == "false") return mk_false();
    if (t == "empty") return mk_empty();
    if (t == "any" || t == "any/c") return mk_lam(fresh("_"), mk_true());
    if (t == "opaque" || t == "•") return mk_opaque();
    if (auto o = op_from_name(t)) {
      if (is_pred(*o)) return mk_pred(*o);
      Sym a = fresh("a");
      if (op_arity(*o) == 1) return mk_lam(a, mk_prim(*o, {mk_var(a, label)}, label));
      Sym b = fresh("b");
      return mk_lam(a, mk_lam(b, mk_prim(*o, {mk_var(a, label), mk_var(b, label)}, label)));
    }
    if (keywords().count(t)) throw ParseError("unexpected keyword '" + t + "'", x.line, x.col);
    if (modules_.count(s) || open_) return mk_var(s, label);
    throw ParseError("unbound identifier '" + t + "'", x.line, x.col);
  }

  Ex curried(const std::vector<Sym>& params, const Sx& x, size_t body_from, Sym label, std::vector<Sym> env) {
    for (auto p : params) env.push_back(p);
    Ex body = begin(x, body_from, label, env);
    for (size_t i = params.size(); i-- > 0;) body = mk_lam(params[i], body);
    return body;
  }

  Ex lambda(const Sx& x, Sym label, const std::vector<Sym>& env) {
    if (x.items.size() < 3 || x.items[1].atom) throw ParseError("malformed lambda", x.line, x.col);
    std::vector<Sym> params;
    for (auto& p : x.items[1].items) params.push_back(ident(p));
    if (params.empty()) params.push_back(fresh("_"));
    return curried(params, x, 2, label, env);
  }

  Ex let(const Sx& x, Sym label, std::vector<Sym> env) {
    if (x.items.size() < 3 || x.items[1].atom) throw ParseError("malformed let", x.line, x.col);
    std::vector<std::pair<Sym, Ex>> binds;
    for (auto& b : x.items[1].items) {
      if (b.atom || b.items.size() != 2) throw ParseError("malformed binding", b.line, b.col);
      Sym v = ident(b.items[0]);
      binds.emplace_back(v, expr(b.items[1], label, env));
      env.push_back(v);
    }
    Ex body = begin(x, 2, label, env);
    for (size_t i = binds.size(); i-- > 0;) body = mk_app(mk_lam(binds[i].first, body), binds[i].second, label);
    return body;
  }

  Ex cond(const Sx& x, size_t i, Sym label, const std::vector<Sym>& env) {
    if (i >= x.items.size()) return mk_false();
    const Sx& cl = x.items[i];
    if (cl.atom || cl.items.size() < 2) throw ParseError("malformed cond clause", cl.line, cl.col);
    if (cl.items[0].atom && cl.items[0].text == "else") return begin(cl, 1, label, env);
    return mk_if(expr(cl.items[0], label, env), begin(cl, 1, label, env), cond(x, i + 1, label, env));
  }

  Ex and_(const Sx& x, size_t i, Sym label, const std::vector<Sym>& env) {
    if (i >= x.items.size()) return mk_true();
    Ex e = expr(x.items[i], label, env);
    if (i + 1 == x.items.size()) return e;
    return mk_if(e, and_(x, i + 1, label, env), mk_false());
  }

  Ex or_(const Sx& x, size_t i, Sym label, const std::vector<Sym>& env) {
    if (i >= x.items.size()) return mk_false();
    Ex e = expr(x.items[i], label, env);
    if (i + 1 == x.items.size()) return e;
    Sym t = fresh("or");
    return mk_app(mk_lam(t, mk_if(mk_var(t, label), mk_var(t, label), or_(x, i + 1, label, env))), e, label);
  }

  Ex begin(const Sx& x, size_t i, Sym label, const std::vector<Sym>& env) {
    if (i >= x.items.size()) throw ParseError("empty body", x.line, x.col);
    Ex e = expr(x.items[i], label, env);
    if (i + 1 == x.items.size()) return e;
    return mk_app(mk_lam(fresh("_"), begin(x, i + 1, label, env)), e, label);
  }

  Ex combinator(const Sx& x, bool conj, Sym label, const std::vector<Sym>& env) {
    Sym v = fresh("c");
    std::vector<Ex> tests;
    for (size_t i = 1; i < x.items.size(); ++i)
      tests.push_back(mk_app(expr(x.items[i], label, env), mk_var(v, label), label));
    Ex body = conj ? mk_true() : mk_false();
    for (size_t i = tests.size(); i-- > 0;) {
      if (i + 1 == tests.size()) {
        body = tests[i];
      } else if (conj) {
        body = mk_if(tests[i], body, mk_false());
      } else {
        Sym t = fresh("or");
        body = mk_app(mk_lam(t, mk_if(mk_var(t, label), mk_var(t, label), body)), tests[i], label);
      }
    }
    return mk_lam(v, body);
  }

  Ex arrow(const Sx& x, Sym label, const std::vector<Sym>& env) {
    if (x.items.size() < 3) throw ParseError("malformed ->", x.line, x.col);
    Ex range = expr(x.items.back(), label, env);
    for (size_t i = x.items.size() - 1; i-- > 1;) range = mk_depcon(expr(x.items[i], label, env), fresh("_"), range);
    return range;
  }

  Ex dep_arrow(const Sx& x, Sym label, std::vector<Sym> env) {
    arity(x, 3);
    Ex dom = expr(x.items[1], label, env);
    const Sx& l = x.items[2];
    if (l.atom || l.items.size() != 3 || !l.items[0].atom || (l.items[0].text != "lambda" && l.items[0].text != "λ") ||
        l.items[1].atom || l.items[1].items.size() != 1)
      throw ParseError("->d expects (lambda (x) range)", l.line, l.col);
    Sym v = ident(l.items[1].items[0]);
    env.push_back(v);
    return mk_depcon(dom, v, expr(l.items[2], label, env));
  }

  std::set<Sym> modules_;
  bool open_;
  int counter_ = 0;
};

}  // namespace

Program parse_program(const std::string& text) {
  auto forms = Reader(text).read_all();
  std::set<Sym> names;
  const Sx* top = nullptr;
  for (auto& f : forms) {
    if (f.atom || f.items.empty() || !f.items[0].atom)
      throw ParseError("expected (module ...) or (top ...)", f.line, f.col);
    const std::string& k = f.items[0].text;
    if (k == "module") {
      if (f.items.size() != 4 || !f.items[1].atom)
        throw ParseError("expected (module NAME contract body)", f.line, f.col);
      const std::string& n = f.items[1].text;
      if (keywords().count(n) || op_from_name(n) || is_int_text(n))
        throw ParseError("'" + n + "' is not a legal module name", f.items[1].line, f.items[1].col);
      if (!names.insert(intern(n)).second)
        throw ParseError("duplicate module '" + n + "'", f.items[1].line, f.items[1].col);
      if (top) throw ParseError("modules must precede (top ...)", f.line, f.col);
    } else if (k == "top") {
      if (top) throw ParseError("more than one (top ...)", f.line, f.col);
      if (f.items.size() != 2) throw ParseError("expected (top expr)", f.line, f.col);
      top = &f;
    } else {
      throw ParseError("expected (module ...) or (top ...)", f.line, f.col);
    }
  }
  if (!top) throw ParseError("missing (top ...)", 1, 1);
  Desugar d(names, false);
  Program p;
  for (auto& f : forms) {
    if (f.items[0].text != "module") continue;
    Module m;
    m.name = intern(f.items[1].text);
    m.contract = d.contract(f.items[2], m.name);
    m.body = d.module_body(f.items[3], m.name);
    p.modules.push_back(std::move(m));
  }
  p.top = d.expr(top->items[1], top_label(), {});
  return p;
}

Program parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

Ex parse_expr(const std::string& text, Sym label) {
  auto forms = Reader(text).read_all();
  if (forms.size() != 1) throw ParseError("expected exactly one expression", 1, 1);
  Desugar d({}, true);
  return d.expr(forms[0], label, {});
}

}  // namespace scv
