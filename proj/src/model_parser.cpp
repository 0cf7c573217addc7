#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "idiombn/model_format.hpp"

namespace idiombn {

std::string_view to_string(Severity severity) { return severity == Severity::Error ? "error" : "warning"; }

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  std::string out;
  if (!file.empty()) out += std::string(file) + ":";
  out += std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " + std::string(to_string(d.severity)) +
         "[" + d.code + "]: " + d.message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool same_content(const ModelDocument& a, const ModelDocument& b) {
  auto vars = [](const VariableDecl& x, const VariableDecl& y) {
    return x.name == y.name && x.states == y.states && x.role == y.role;
  };
  auto idioms = [](const IdiomDecl& x, const IdiomDecl& y) {
    return x.template_name == y.template_name && x.name == y.name &&
           std::equal(x.slots.begin(), x.slots.end(), y.slots.begin(), y.slots.end(),
                      [](const SlotBinding& s, const SlotBinding& t) { return s.slot == t.slot && s.names == t.names; });
  };
  auto edges = [](const EdgeDecl& x, const EdgeDecl& y) {
    return x.from == y.from && x.to == y.to && x.decision == y.decision;
  };
  auto cpts = [](const CptDecl& x, const CptDecl& y) {
    return x.child == y.child && x.parents == y.parents &&
           std::equal(x.rows.begin(), x.rows.end(), y.rows.begin(), y.rows.end(),
                      [](const RowDecl& r, const RowDecl& s) { return r.keys == s.keys && r.values == s.values; });
  };
  return a.preamble == b.preamble &&
         std::equal(a.variables.begin(), a.variables.end(), b.variables.begin(), b.variables.end(), vars) &&
         std::equal(a.idioms.begin(), a.idioms.end(), b.idioms.begin(), b.idioms.end(), idioms) &&
         std::equal(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(), edges) &&
         std::equal(a.cpts.begin(), a.cpts.end(), b.cpts.begin(), b.cpts.end(), cpts);
}

namespace {

enum class Tok { Ident, Number, LBrace, RBrace, LParen, RParen, LBracket, RBracket, Colon, Semi, Comma, Arrow, DArrow, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

std::string_view describe(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Arrow: return "'->'";
    case Tok::DArrow: return "'=>'";
    case Tok::End: return "end of input";
  }
  return "token";
}

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  Lexer(std::string_view text, std::vector<Diagnostic>& diags) : text_(text), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      const SourcePos pos{line_, col_};
      if (i_ >= text_.size()) {
        // Points at the last token so end-of-input errors stay inside the text.
        out.push_back({Tok::End, "", 0.0, out.empty() ? SourcePos{1, 1} : end_of(out.back())});
        return out;
      }
      const char c = text_[i_];
      if (ident_start(c)) {
        const std::size_t start = i_;
        while (i_ < text_.size() && ident_char(text_[i_])) advance();
        out.push_back({Tok::Ident, std::string(text_.substr(start, i_ - start)), 0.0, pos});
      } else if (digit(c) || (c == '.' && i_ + 1 < text_.size() && digit(text_[i_ + 1]))) {
        const std::size_t start = i_;
        while (i_ < text_.size() && digit(text_[i_])) advance();
        if (i_ < text_.size() && text_[i_] == '.') {
          advance();
          if (i_ >= text_.size() || !digit(text_[i_]))
            error(pos, "malformed number: expected digits after '.'");
          while (i_ < text_.size() && digit(text_[i_])) advance();
        }
        const auto literal = text_.substr(start, i_ - start);
        double value = 0.0;
        std::from_chars(literal.data(), literal.data() + literal.size(), value);
        out.push_back({Tok::Number, std::string(literal), value, pos});
        if (i_ < text_.size() && ident_start(text_[i_])) error({line_, col_}, "identifier cannot follow a number");
      } else if (c == '-' || c == '=') {
        if (i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
          advance();
          advance();
          out.push_back({c == '-' ? Tok::Arrow : Tok::DArrow, c == '-' ? "->" : "=>", 0.0, pos});
        } else {
          error(pos, std::string("unexpected character '") + c + "'");
          advance();
        }
      } else {
        Tok kind;
        switch (c) {
          case '{': kind = Tok::LBrace; break;
          case '}': kind = Tok::RBrace; break;
          case '(': kind = Tok::LParen; break;
          case ')': kind = Tok::RParen; break;
          case '[': kind = Tok::LBracket; break;
          case ']': kind = Tok::RBracket; break;
          case ':': kind = Tok::Colon; break;
          case ';': kind = Tok::Semi; break;
          case ',': kind = Tok::Comma; break;
          default: {
            std::string shown = static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x80
                                    ? "byte 0x" + hex(static_cast<unsigned char>(c))
                                    : std::string("'") + c + "'";
            error(pos, "unexpected character " + shown);
            advance();
            continue;
          }
        }
        advance();
        out.push_back({kind, std::string(1, c), 0.0, pos});
      }
    }
  }

 private:
  static SourcePos end_of(const Token& t) {
    return {t.pos.line, t.pos.column + std::max<std::size_t>(t.text.size(), 1) - 1};
  }

  static std::string hex(unsigned char c) {
    const char* digits = "0123456789abcdef";
    return {digits[c >> 4], digits[c & 15]};
  }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(text_[i_]) & 0xC0) != 0x80) {
      // Columns count code points, not UTF-8 continuation bytes.
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  void error(SourcePos pos, std::string message) {
    diags_.push_back({Severity::Error, pos, std::string(diag::kLexical), std::move(message)});
  }

  std::string_view text_;
  std::vector<Diagnostic>& diags_;
  std::size_t i_ = 0, line_ = 1, col_ = 1;
};

bool is_keyword(const Token& t) {
  return t.kind == Tok::Ident && (t.text == "variable" || t.text == "idiom" || t.text == "edge" || t.text == "cpt");
}

struct SyntaxError {};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags) : toks_(std::move(tokens)), diags_(diags) {}

  ModelDocument run() {
    ModelDocument doc;
    while (peek().kind != Tok::End) {
      const Token& t = peek();
      try {
        if (!is_keyword(t)) {
          error(t.pos, "expected a declaration ('variable', 'idiom', 'edge' or 'cpt'), found " + shown(t));
          throw SyntaxError{};
        }
        if (t.text == "variable")
          doc.variables.push_back(variable());
        else if (t.text == "idiom")
          doc.idioms.push_back(idiom());
        else if (t.text == "edge")
          doc.edges.push_back(edge());
        else
          doc.cpts.push_back(cpt());
        accept(Tok::Semi);
      } catch (const SyntaxError&) {
        recover();
      }
    }
    return doc;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    next();
    return true;
  }
  static std::string shown(const Token& t) {
    if (t.kind == Tok::Ident || t.kind == Tok::Number) return std::string(describe(t.kind)) + " '" + t.text + "'";
    return std::string(describe(t.kind));
  }
  const Token& expect(Tok kind, std::string_view context) {
    if (peek().kind != kind) {
      error(peek().pos, "expected " + std::string(describe(kind)) + " " + std::string(context) + ", found " + shown(peek()));
      throw SyntaxError{};
    }
    return next();
  }
  const Token& expect_word(std::string_view word) {
    if (peek().kind != Tok::Ident || peek().text != word) {
      error(peek().pos, "expected '" + std::string(word) + "', found " + shown(peek()));
      throw SyntaxError{};
    }
    return next();
  }
  const Token& name(std::string_view context) {
    const Token& t = expect(Tok::Ident, context);
    if (is_keyword(t)) {
      error(t.pos, "'" + t.text + "' is a reserved word and cannot be used " + std::string(context));
      throw SyntaxError{};
    }
    return t;
  }
  void error(SourcePos pos, std::string message) {
    diags_.push_back({Severity::Error, pos, std::string(diag::kSyntax), std::move(message)});
  }
  // Skips to the next declaration keyword.
  void recover() {
    next();
    while (peek().kind != Tok::End && !is_keyword(peek())) next();
  }

  std::vector<std::string> name_list(std::string_view context) {
    std::vector<std::string> out{name(context).text};
    while (accept(Tok::Comma)) out.push_back(name(context).text);
    return out;
  }

  VariableDecl variable() {
    VariableDecl v;
    v.pos = next().pos;
    v.name = name("as a variable name").text;
    expect(Tok::LBrace, "to open the variable body");
    bool saw_states = false, saw_role = false;
    while (!accept(Tok::RBrace)) {
      const Token& field = expect(Tok::Ident, "as a variable field");
      expect(Tok::Colon, "after field name");
      if (field.text == "states") {
        if (saw_states) error(field.pos, "field 'states' given twice");
        saw_states = true;
        v.states = name_list("as a state label");
      } else if (field.text == "role") {
        if (saw_role) error(field.pos, "field 'role' given twice");
        saw_role = true;
        const Token& r = expect(Tok::Ident, "as a role");
        if (auto role = parse_role(r.text))
          v.role = *role;
        else
          diags_.push_back({Severity::Error, r.pos, std::string(diag::kUnknownRole), "unknown role '" + r.text + "'"});
      } else {
        error(field.pos, "unknown variable field '" + field.text + "' (expected 'states' or 'role')");
        throw SyntaxError{};
      }
      if (!accept(Tok::Semi) && peek().kind != Tok::RBrace) {
        error(peek().pos, "expected ';' or '}' after field, found " + shown(peek()));
        throw SyntaxError{};
      }
    }
    if (!saw_states) error(v.pos, "variable '" + v.name + "' declares no states");
    return v;
  }

  IdiomDecl idiom() {
    IdiomDecl d;
    d.pos = next().pos;
    d.template_name = expect(Tok::Ident, "as an idiom template").text;
    d.name = name("as an idiom name").text;
    expect(Tok::LBrace, "to open the idiom body");
    while (!accept(Tok::RBrace)) {
      SlotBinding b;
      const Token& slot = expect(Tok::Ident, "as a slot name");
      b.slot = slot.text;
      b.pos = slot.pos;
      expect(Tok::Colon, "after slot name");
      if (accept(Tok::LBracket)) {
        b.list = true;
        if (!accept(Tok::RBracket)) {
          b.names = name_list("in a slot list");
          expect(Tok::RBracket, "to close the slot list");
        }
      } else {
        b.names.push_back(name("as a slot binding").text);
      }
      d.slots.push_back(std::move(b));
      if (!accept(Tok::Semi) && peek().kind != Tok::RBrace) {
        error(peek().pos, "expected ';' or '}' after slot binding, found " + shown(peek()));
        throw SyntaxError{};
      }
    }
    return d;
  }

  EdgeDecl edge() {
    EdgeDecl e;
    e.pos = next().pos;
    e.from = name("as an edge source").text;
    if (accept(Tok::DArrow)) {
      e.decision = true;
    } else if (!accept(Tok::Arrow)) {
      error(peek().pos, "expected '->' or '=>' in edge, found " + shown(peek()));
      throw SyntaxError{};
    }
    e.to = name("as an edge target").text;
    return e;
  }

  std::vector<double> numbers(std::vector<SourcePos>* positions = nullptr) {
    std::vector<double> out;
    do {
      const Token& t = expect(Tok::Number, "as a probability");
      out.push_back(t.number);
      if (positions) positions->push_back(t.pos);
    } while (accept(Tok::Comma));
    return out;
  }

  CptDecl cpt() {
    CptDecl c;
    c.pos = next().pos;
    c.child = name("as a CPT variable").text;
    bool has_parents = false;
    if (peek().kind == Tok::Ident && peek().text == "given") {
      next();
      has_parents = true;
      expect(Tok::LParen, "after 'given'");
      c.parents = name_list("as a parent name");
      expect(Tok::RParen, "to close the parent list");
    }
    expect(Tok::LBrace, "to open the CPT body");
    while (!accept(Tok::RBrace)) {
      RowDecl row;
      const Token& head = expect(Tok::Ident, "('row' or 'prior')");
      row.pos = head.pos;
      if (head.text == "row") {
        if (!has_parents) error(head.pos, "'row' entries need a 'given' parent list; use 'prior' for a root variable");
        expect(Tok::LParen, "after 'row'");
        row.keys = name_list("as a parent state");
        expect(Tok::RParen, "to close the row key");
      } else if (head.text == "prior") {
        if (has_parents) error(head.pos, "'prior' is only valid for a CPT without parents");
      } else {
        error(head.pos, "expected 'row' or 'prior', found " + shown(head));
        throw SyntaxError{};
      }
      expect(Tok::Colon, "after the row key");
      row.values = numbers();
      c.rows.push_back(std::move(row));
      if (!accept(Tok::Semi) && peek().kind != Tok::RBrace) {
        error(peek().pos, "expected ';' or '}' after row, found " + shown(peek()));
        throw SyntaxError{};
      }
    }
    return c;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
};

std::vector<std::string> read_preamble(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t end = text.find('\n', i);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(i, end - i);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    std::size_t lead = 0;
    while (lead < line.size() && (line[lead] == ' ' || line[lead] == '\t')) ++lead;
    if (lead == line.size()) {
      if (!lines.empty()) break;
    } else if (line[lead] == '#') {
      lines.emplace_back(line.substr(lead));
    } else {
      break;
    }
    i = end + 1;
  }
  return lines;
}

std::string key_text(const std::vector<std::string>& keys) {
  std::string out = "row(";
  for (std::size_t k = 0; k < keys.size(); ++k) out += (k ? ", " : "") + keys[k];
  return out + ")";
}

// Name resolution and table checks over a syntactically parsed document.
void check(const ModelDocument& doc, std::vector<Diagnostic>& diags) {
  auto add = [&](SourcePos pos, std::string_view code, std::string message) {
    diags.push_back({Severity::Error, pos, std::string(code), std::move(message)});
  };

  std::map<std::string, const VariableDecl*> vars;
  for (const auto& v : doc.variables) {
    if (!vars.emplace(v.name, &v).second)
      add(v.pos, diag::kDuplicateName, "variable '" + v.name + "' is declared more than once");
    std::set<std::string> distinct(v.states.begin(), v.states.end());
    if (!v.states.empty() && (v.states.size() < 2 || distinct.size() != v.states.size()))
      add(v.pos, diag::kInvalidStates, "variable '" + v.name + "' needs at least two distinct states");
  }
  auto known = [&](const std::string& n) { return vars.count(n) > 0; };

  std::set<std::string> idiom_names;
  for (const auto& d : doc.idioms) {
    if (!idiom_names.insert(d.name).second)
      add(d.pos, diag::kDuplicateName, "idiom instance '" + d.name + "' is declared more than once");
    auto id = parse_template(d.template_name);
    if (!id) add(d.pos, diag::kUnknownTemplate, "unknown idiom template '" + d.template_name + "'");
    std::set<std::string> slots;
    for (const auto& b : d.slots) {
      if (id && !find_template(*id).slot(b.slot))
        add(b.pos, diag::kUnknownSlot,
            "template '" + d.template_name + "' has no slot '" + b.slot + "'");
      if (!slots.insert(b.slot).second) add(b.pos, diag::kDuplicateName, "slot '" + b.slot + "' bound twice");
      for (const auto& n : b.names)
        if (!known(n)) add(b.pos, diag::kUnknownVariable, "idiom '" + d.name + "' binds undeclared variable '" + n + "'");
    }
  }

  for (const auto& e : doc.edges)
    for (const auto* n : {&e.from, &e.to})
      if (!known(*n)) add(e.pos, diag::kUnknownVariable, "edge references undeclared variable '" + *n + "'");

  std::set<std::string> with_cpt;
  for (const auto& c : doc.cpts) {
    auto child = vars.find(c.child);
    if (child == vars.end()) {
      add(c.pos, diag::kUnknownVariable, "cpt for undeclared variable '" + c.child + "'");
    } else if (!with_cpt.insert(c.child).second) {
      add(c.pos, diag::kDuplicateCpt, "variable '" + c.child + "' has more than one cpt");
    }
    std::vector<const VariableDecl*> parents;
    bool parents_known = true;
    std::set<std::string> seen_parents;
    for (const auto& p : c.parents) {
      auto it = vars.find(p);
      if (it == vars.end()) {
        add(c.pos, diag::kUnknownVariable, "cpt for '" + c.child + "' names undeclared parent '" + p + "'");
        parents_known = false;
      } else {
        parents.push_back(it->second);
      }
      if (!seen_parents.insert(p).second) add(c.pos, diag::kDuplicateName, "parent '" + p + "' listed twice");
    }

    std::set<std::vector<std::string>> seen_rows;
    for (const auto& row : c.rows) {
      const std::string where = c.parents.empty() ? "prior" : key_text(row.keys);
      double sum = 0.0;
      bool in_range = true;
      for (double q : row.values) {
        sum += q;
        if (q < 0.0 || q > 1.0) in_range = false;
      }
      if (!in_range) add(row.pos, diag::kProbabilityRange, where + " of cpt " + c.child + " has a value outside [0, 1]");
      if (std::abs(sum - 1.0) > kProbabilityTolerance)
        add(row.pos, diag::kRowSum, where + " of cpt " + c.child + " sums to " + format_number(sum) + ", expected 1");
      if (child != vars.end() && !child->second->states.empty() && row.values.size() != child->second->states.size())
        add(row.pos, diag::kRowArity,
            where + " of cpt " + c.child + " has " + std::to_string(row.values.size()) + " values but '" + c.child +
                "' has " + std::to_string(child->second->states.size()) + " states");
      if (!c.parents.empty() && row.keys.size() != c.parents.size()) {
        add(row.pos, diag::kRowArity,
            where + " has " + std::to_string(row.keys.size()) + " keys but the cpt has " +
                std::to_string(c.parents.size()) + " parents");
        continue;
      }
      if (parents_known)
        for (std::size_t k = 0; k < row.keys.size() && k < parents.size(); ++k) {
          const auto& states = parents[k]->states;
          if (std::find(states.begin(), states.end(), row.keys[k]) == states.end())
            add(row.pos, diag::kUnknownState,
                "'" + row.keys[k] + "' is not a state of '" + parents[k]->name + "'");
        }
      if (!seen_rows.insert(row.keys).second) add(row.pos, diag::kDuplicateRow, where + " of cpt " + c.child + " given twice");
    }
    if (c.parents.empty() && c.rows.size() != 1)
      add(c.pos, c.rows.empty() ? diag::kMissingRow : diag::kDuplicateRow,
          "cpt for '" + c.child + "' needs exactly one prior");

    if (parents_known && !c.parents.empty()) {
      // Every parent-state combination needs a row.
      std::vector<std::size_t> idx(parents.size(), 0);
      bool any_empty = std::any_of(parents.begin(), parents.end(), [](auto* p) { return p->states.empty(); });
      while (!any_empty) {
        std::vector<std::string> keys;
        for (std::size_t k = 0; k < parents.size(); ++k) keys.push_back(parents[k]->states[idx[k]]);
        if (!seen_rows.count(keys))
          add(c.pos, diag::kMissingRow, "cpt for '" + c.child + "' is missing " + key_text(keys));
        std::size_t k = idx.size();
        while (k-- > 0) {
          if (++idx[k] < parents[k]->states.size()) break;
          idx[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
      }
    }
  }
}

}  // namespace

ParseResult parse(std::string_view text) {
  ParseResult result;
  auto tokens = Lexer(text, result.diagnostics).run();
  ModelDocument doc = Parser(std::move(tokens), result.diagnostics).run();
  doc.preamble = read_preamble(text);
  check(doc, result.diagnostics);
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.pos.line, a.pos.column) < std::tie(b.pos.line, b.pos.column);
  });
  if (!has_errors(result.diagnostics)) result.document = std::move(doc);
  return result;
}

}  // namespace idiombn
