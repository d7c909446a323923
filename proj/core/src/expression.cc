/*
 * Copyright 2026 The adsorbxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "adsorbxai/error.h"
#include "adsorbxai/symreg.h"

namespace adsorbxai {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Binding strength used by the printer; atoms bind tightest.
int Precedence(Op op) {
  switch (op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kNeg: return 3;
    default: return 4;
  }
}

double ApplyUnary(Op op, double x) {
  switch (op) {
    case Op::kNeg: return -x;
    case Op::kSquare: return x * x;
    case Op::kSqrt: return std::sqrt(x);
    case Op::kExp: return std::isfinite(x) ? std::exp(x) : kNaN;
    case Op::kLog: return std::log(x);
    default: return kNaN;
  }
}

double ApplyBinary(Op op, double a, double b) {
  switch (op) {
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv: return std::isfinite(b) ? a / b : kNaN;
    default: return kNaN;
  }
}

std::string FormatConstant(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> variables)
      : text_(text), variables_(variables) {}

  Expression Run() {
    std::vector<ExprNode> out;
    ParseExpr(out);
    SkipSpace();
    if (pos_ < text_.size()) Fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return Expression(std::move(out));
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kSyntaxError, what + " at position " + std::to_string(pos_));
  }

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool Peek(char c) {
    SkipSpace();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool AtNumber() {
    SkipSpace();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }

  // Subtrees are assembled in prefix order by splicing the operator in front
  // of the already-parsed left operand.
  void ParseExpr(std::vector<ExprNode>& out) {
    std::vector<ExprNode> left;
    ParseTerm(left);
    while (Peek('+') || Peek('-')) {
      const Op op = text_[pos_] == '+' ? Op::kAdd : Op::kSub;
      ++pos_;
      std::vector<ExprNode> right;
      ParseTerm(right);
      left = Join(op, left, right);
    }
    out.insert(out.end(), left.begin(), left.end());
  }

  void ParseTerm(std::vector<ExprNode>& out) {
    std::vector<ExprNode> left;
    ParseUnary(left);
    while (Peek('*') || Peek('/')) {
      const Op op = text_[pos_] == '*' ? Op::kMul : Op::kDiv;
      ++pos_;
      std::vector<ExprNode> right;
      ParseUnary(right);
      left = Join(op, left, right);
    }
    out.insert(out.end(), left.begin(), left.end());
  }

  void ParseUnary(std::vector<ExprNode>& out) {
    if (Peek('-')) {
      ++pos_;
      if (AtNumber()) {
        out.push_back({Op::kConstant, -ParseNumber(), -1});
        return;
      }
      out.push_back({Op::kNeg, 0.0, -1});
      ParseUnary(out);
      return;
    }
    ParsePrimary(out);
  }

  void ParsePrimary(std::vector<ExprNode>& out) {
    SkipSpace();
    if (pos_ >= text_.size()) Fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ParseExpr(out);
      if (!Peek(')')) Fail("expected ')'");
      ++pos_;
      return;
    }
    if (AtNumber()) {
      out.push_back({Op::kConstant, ParseNumber(), -1});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view name = text_.substr(start, pos_ - start);
      if (Peek('(')) {
        const auto op = ParseUnaryOp(name);
        if (!op) {
          pos_ = start;
          Fail("unknown function '" + std::string(name) + "'");
        }
        ++pos_;
        out.push_back({*op, 0.0, -1});
        ParseExpr(out);
        if (!Peek(')')) Fail("expected ')'");
        ++pos_;
        return;
      }
      const auto it = std::find(variables_.begin(), variables_.end(), name);
      if (it == variables_.end()) {
        throw Error(ErrorCode::kUnknownVariable, "unknown variable '" + std::string(name) +
                                                     "' at position " + std::to_string(start));
      }
      out.push_back({Op::kVariable, 0.0, static_cast<int>(it - variables_.begin())});
      return;
    }
    Fail("unexpected '" + std::string(1, c) + "'");
  }

  double ParseNumber() {
    SkipSpace();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      Fail("malformed number");
    }
    return v;
  }

  static std::vector<ExprNode> Join(Op op, const std::vector<ExprNode>& a,
                                    const std::vector<ExprNode>& b) {
    std::vector<ExprNode> out;
    out.reserve(a.size() + b.size() + 1);
    out.push_back({op, 0.0, -1});
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
  }

  std::string_view text_;
  std::span<const std::string> variables_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

struct Printed {
  std::string text;
  int precedence;
};

Printed PrintAt(const Expression& e, std::size_t i, std::span<const std::string> variables) {
  const ExprNode& n = e.nodes()[i];
  switch (n.op) {
    case Op::kConstant: {
      std::string s = FormatConstant(n.value);
      if (std::signbit(n.value)) s = "(" + s + ")";
      return {s, 4};
    }
    case Op::kVariable:
      if (n.variable < 0 || static_cast<std::size_t>(n.variable) >= variables.size()) {
        throw Error(ErrorCode::kUnknownVariable,
                    "variable index " + std::to_string(n.variable) + " has no name");
      }
      return {variables[static_cast<std::size_t>(n.variable)], 4};
    default: break;
  }
  if (n.op == Op::kNeg) {
    const Printed child = PrintAt(e, i + 1, variables);
    const bool bare_number = e.nodes()[i + 1].op == Op::kConstant && child.text[0] != '(';
    const bool wrap = child.precedence < 3 || bare_number;
    return {"-" + (wrap ? "(" + child.text + ")" : child.text), 3};
  }
  if (IsUnaryOp(n.op)) {
    return {std::string(OpName(n.op)) + "(" + PrintAt(e, i + 1, variables).text + ")", 4};
  }
  const int p = Precedence(n.op);
  const std::size_t right_index = e.SubtreeEnd(i + 1);
  Printed left = PrintAt(e, i + 1, variables);
  Printed right = PrintAt(e, right_index, variables);
  if (left.precedence < p) left.text = "(" + left.text + ")";
  if (right.precedence <= p) right.text = "(" + right.text + ")";
  return {left.text + " " + std::string(OpName(n.op)) + " " + right.text, p};
}

// ---------------------------------------------------------------------------
// Simplifier

using Nodes = std::vector<ExprNode>;

bool IsConstant(const Nodes& v, double value) {
  return v.size() == 1 && v[0].op == Op::kConstant && v[0].value == value;
}

bool DivisionFree(const Nodes& v) {
  return std::none_of(v.begin(), v.end(), [](const ExprNode& n) { return n.op == Op::kDiv; });
}

// Defined and finite wherever its inputs are finite (barring overflow).
bool Total(const Nodes& v) {
  return std::all_of(v.begin(), v.end(), [](const ExprNode& n) {
    switch (n.op) {
      case Op::kConstant:
      case Op::kVariable:
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kNeg:
      case Op::kSquare: return true;
      default: return false;
    }
  });
}

Nodes SimplifyPass(const Expression& e, std::size_t i) {
  const ExprNode& n = e.nodes()[i];
  const int arity = OpArity(n.op);
  if (arity == 0) return {n};
  if (arity == 1) {
    Nodes child = SimplifyPass(e, i + 1);
    if (child.size() == 1 && child[0].op == Op::kConstant) {
      const double v = ApplyUnary(n.op, child[0].value);
      if (std::isfinite(v)) return {{Op::kConstant, v, -1}};
    }
    if (n.op == Op::kNeg && child[0].op == Op::kNeg) return Nodes(child.begin() + 1, child.end());
    child.insert(child.begin(), n);
    return child;
  }
  Nodes a = SimplifyPass(e, i + 1);
  Nodes b = SimplifyPass(e, e.SubtreeEnd(i + 1));
  if (a.size() == 1 && b.size() == 1 && a[0].op == Op::kConstant && b[0].op == Op::kConstant) {
    const double v = ApplyBinary(n.op, a[0].value, b[0].value);
    if (std::isfinite(v)) return {{Op::kConstant, v, -1}};
  }
  switch (n.op) {
    case Op::kAdd:
      if (IsConstant(b, 0.0)) return a;
      if (IsConstant(a, 0.0)) return b;
      break;
    case Op::kSub:
      if (IsConstant(b, 0.0)) return a;
      if (a == b) return {{Op::kConstant, 0.0, -1}};
      break;
    case Op::kMul:
      if (IsConstant(b, 1.0)) return a;
      if (IsConstant(a, 1.0)) return b;
      if (IsConstant(b, 0.0) && Total(a)) return b;
      if (IsConstant(a, 0.0) && Total(b)) return a;
      break;
    case Op::kDiv:
      if (IsConstant(b, 1.0)) return a;
      if (a == b && DivisionFree(a)) return {{Op::kConstant, 1.0, -1}};
      break;
    default: break;
  }
  Nodes out;
  out.reserve(a.size() + b.size() + 1);
  out.push_back(n);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

int OpArity(Op op) {
  if (op == Op::kConstant || op == Op::kVariable) return 0;
  return IsBinaryOp(op) ? 2 : 1;
}

bool IsBinaryOp(Op op) {
  return op == Op::kAdd || op == Op::kSub || op == Op::kMul || op == Op::kDiv;
}

bool IsUnaryOp(Op op) { return OpArity(op) == 1; }

std::string_view OpName(Op op) {
  switch (op) {
    case Op::kConstant: return "const";
    case Op::kVariable: return "var";
    case Op::kAdd: return "+";
    case Op::kSub: return "-";
    case Op::kMul: return "*";
    case Op::kDiv: return "/";
    case Op::kNeg: return "neg";
    case Op::kSquare: return "square";
    case Op::kSqrt: return "sqrt";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
  }
  return "?";
}

std::optional<Op> ParseUnaryOp(std::string_view name) {
  for (Op op : {Op::kNeg, Op::kSquare, Op::kSqrt, Op::kExp, Op::kLog}) {
    if (OpName(op) == name) return op;
  }
  return std::nullopt;
}

bool ExprNode::operator==(const ExprNode& other) const {
  if (op != other.op) return false;
  if (op == Op::kConstant) {
    return value == other.value && std::signbit(value) == std::signbit(other.value);
  }
  if (op == Op::kVariable) return variable == other.variable;
  return true;
}

Expression::Expression(std::vector<ExprNode> nodes) : nodes_(std::move(nodes)) {
  std::size_t need = 1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (need == 0) throw Error(ErrorCode::kInvalidArgument, "trailing nodes after a full tree");
    need = need - 1 + static_cast<std::size_t>(OpArity(nodes_[i].op));
  }
  if (need != 0) throw Error(ErrorCode::kInvalidArgument, "incomplete expression tree");
}

Expression Expression::Constant(double value) {
  return Expression({{Op::kConstant, value, -1}});
}

Expression Expression::Variable(int index) { return Expression({{Op::kVariable, 0.0, index}}); }

Expression Expression::Unary(Op op, const Expression& child) {
  if (!IsUnaryOp(op)) throw Error(ErrorCode::kInvalidArgument, "not a unary operator");
  std::vector<ExprNode> n{{op, 0.0, -1}};
  n.insert(n.end(), child.nodes_.begin(), child.nodes_.end());
  return Expression(std::move(n));
}

Expression Expression::Binary(Op op, const Expression& left, const Expression& right) {
  if (!IsBinaryOp(op)) throw Error(ErrorCode::kInvalidArgument, "not a binary operator");
  std::vector<ExprNode> n{{op, 0.0, -1}};
  n.insert(n.end(), left.nodes_.begin(), left.nodes_.end());
  n.insert(n.end(), right.nodes_.begin(), right.nodes_.end());
  return Expression(std::move(n));
}

std::size_t Expression::SubtreeEnd(std::size_t index) const {
  std::size_t need = 1;
  std::size_t j = index;
  while (need > 0) {
    need = need - 1 + static_cast<std::size_t>(OpArity(nodes_.at(j).op));
    ++j;
  }
  return j;
}

Expression Expression::Subtree(std::size_t index) const {
  Expression out;
  out.nodes_.assign(nodes_.begin() + static_cast<std::ptrdiff_t>(index),
                    nodes_.begin() + static_cast<std::ptrdiff_t>(SubtreeEnd(index)));
  return out;
}

Expression Expression::ReplaceSubtree(std::size_t index, const Expression& replacement) const {
  Expression out;
  const std::size_t end = SubtreeEnd(index);
  out.nodes_.reserve(nodes_.size() - (end - index) + replacement.nodes_.size());
  out.nodes_.insert(out.nodes_.end(), nodes_.begin(),
                    nodes_.begin() + static_cast<std::ptrdiff_t>(index));
  out.nodes_.insert(out.nodes_.end(), replacement.nodes_.begin(), replacement.nodes_.end());
  out.nodes_.insert(out.nodes_.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end),
                    nodes_.end());
  return out;
}

std::vector<double> Expression::Constants() const {
  std::vector<double> out;
  for (const ExprNode& n : nodes_) {
    if (n.op == Op::kConstant) out.push_back(n.value);
  }
  return out;
}

Expression Expression::WithConstants(std::span<const double> values) const {
  Expression out = *this;
  std::size_t k = 0;
  for (ExprNode& n : out.nodes_) {
    if (n.op != Op::kConstant) continue;
    if (k >= values.size()) throw Error(ErrorCode::kLengthMismatch, "too few constants");
    n.value = values[k++];
  }
  if (k != values.size()) throw Error(ErrorCode::kLengthMismatch, "too many constants");
  return out;
}

int Expression::MaxVariable() const {
  int m = -1;
  for (const ExprNode& n : nodes_) {
    if (n.op == Op::kVariable) m = std::max(m, n.variable);
  }
  return m;
}

Expression ParseExpression(std::string_view text, std::span<const std::string> variables) {
  return Parser(text, variables).Run();
}

std::string PrintExpression(const Expression& expression, std::span<const std::string> variables) {
  if (expression.empty()) throw Error(ErrorCode::kInvalidArgument, "empty expression");
  return PrintAt(expression, 0, variables).text;
}

Eigen::ArrayXd Evaluate(const Expression& expression, const Eigen::MatrixXd& rows) {
  if (expression.empty()) throw Error(ErrorCode::kInvalidArgument, "empty expression");
  if (expression.MaxVariable() >= rows.cols()) {
    throw Error(ErrorCode::kArityMismatch,
                "expression reads column " + std::to_string(expression.MaxVariable()) +
                    " but rows have " + std::to_string(rows.cols()));
  }
  const Eigen::Index n = rows.rows();
  thread_local std::vector<Eigen::ArrayXd> stack;
  std::size_t sp = 0;
  const auto& nodes = expression.nodes();
  for (std::size_t k = nodes.size(); k-- > 0;) {
    const ExprNode& node = nodes[k];
    switch (node.op) {
      case Op::kConstant:
      case Op::kVariable: {
        if (stack.size() <= sp) stack.emplace_back();
        Eigen::ArrayXd& slot = stack[sp++];
        if (node.op == Op::kConstant) {
          slot.setConstant(n, node.value);
        } else {
          slot = rows.col(node.variable).array();
        }
        break;
      }
      case Op::kAdd: stack[sp - 2] = stack[sp - 1] + stack[sp - 2]; --sp; break;
      case Op::kSub: stack[sp - 2] = stack[sp - 1] - stack[sp - 2]; --sp; break;
      case Op::kMul: stack[sp - 2] = stack[sp - 1] * stack[sp - 2]; --sp; break;
      case Op::kDiv:
        stack[sp - 2] = stack[sp - 2].isFinite().select(stack[sp - 1] / stack[sp - 2], kNaN);
        --sp;
        break;
      case Op::kNeg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::kSquare: stack[sp - 1] = stack[sp - 1].square(); break;
      case Op::kSqrt: stack[sp - 1] = stack[sp - 1].sqrt(); break;
      case Op::kExp:
        stack[sp - 1] = stack[sp - 1].isFinite().select(stack[sp - 1].exp(), kNaN);
        break;
      case Op::kLog: stack[sp - 1] = stack[sp - 1].log(); break;
    }
  }
  Eigen::ArrayXd out = stack[0].isFinite().select(stack[0], kNaN);
  return out;
}

double LossMae(const Expression& expression, const Eigen::MatrixXd& rows,
               const Eigen::VectorXd& labels) {
  if (rows.rows() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "rows and labels differ in length");
  }
  if (rows.rows() == 0) throw Error(ErrorCode::kEmptyDataset, "no rows to score");
  const Eigen::ArrayXd pred = Evaluate(expression, rows);
  if (!pred.isFinite().all()) return std::numeric_limits<double>::infinity();
  return (pred - labels.array()).abs().mean();
}

double LossMae(const Expression& expression, const TabularDataset& dataset) {
  return LossMae(expression, dataset.rows, dataset.labels);
}

Expression Simplify(const Expression& expression) {
  Expression current = expression;
  for (;;) {
    Expression next(SimplifyPass(current, 0));
    if (next == current) return current;
    current = std::move(next);
  }
}

}  // namespace adsorbxai
