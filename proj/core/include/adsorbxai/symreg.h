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

// Expression trees, their infix grammar, and a multi-population genetic
// programming search reporting a complexity/loss Pareto front.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := number | name | name '(' expr ')' | '(' expr ')'
// A minus sign directly before a number literal folds into a negative
// constant; elsewhere it produces a Neg node. Function names are the unary
// operator names below.

#ifndef ADSORBXAI_SYMREG_H_
#define ADSORBXAI_SYMREG_H_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adsorbxai/dataset.h"

namespace adsorbxai {

enum class Op : uint8_t {
  kConstant,
  kVariable,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSquare,
  kSqrt,
  kExp,
  kLog,
};

int OpArity(Op op);
bool IsBinaryOp(Op op);
bool IsUnaryOp(Op op);
// "neg", "square", "sqrt", "exp", "log" for unary ops; symbols for binary ops.
std::string_view OpName(Op op);
std::optional<Op> ParseUnaryOp(std::string_view name);

struct ExprNode {
  Op op = Op::kConstant;
  double value = 0.0;  // kConstant
  int variable = -1;   // kVariable: column index

  bool operator==(const ExprNode& other) const;
};

// Nodes in prefix order; the subtree rooted at i spans [i, SubtreeEnd(i)).
class Expression {
 public:
  Expression() = default;
  // Throws Error(kInvalidArgument) unless the nodes form exactly one tree.
  explicit Expression(std::vector<ExprNode> nodes);

  static Expression Constant(double value);
  static Expression Variable(int index);
  static Expression Unary(Op op, const Expression& child);
  static Expression Binary(Op op, const Expression& left, const Expression& right);

  const std::vector<ExprNode>& nodes() const { return nodes_; }
  std::size_t complexity() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::size_t SubtreeEnd(std::size_t index) const;
  Expression Subtree(std::size_t index) const;
  Expression ReplaceSubtree(std::size_t index, const Expression& replacement) const;

  // Constant values in prefix order.
  std::vector<double> Constants() const;
  Expression WithConstants(std::span<const double> values) const;

  // Largest variable index referenced, or -1.
  int MaxVariable() const;

  bool operator==(const Expression& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<ExprNode> nodes_;
};

// Throws Error(kSyntaxError) with a 0-based character position, and
// Error(kUnknownVariable) for names outside `variables`.
Expression ParseExpression(std::string_view text, std::span<const std::string> variables);

// Inverse of ParseExpression: Print(Parse(Print(t))) == Print(t). Numbers use
// the shortest round-trip decimal form; negative constants print as "(-c)".
std::string PrintExpression(const Expression& expression, std::span<const std::string> variables);

// One value per row of `rows` (columns indexed by variable). Rows on which any
// intermediate value is non-finite come back as NaN.
Eigen::ArrayXd Evaluate(const Expression& expression, const Eigen::MatrixXd& rows);

// Mean absolute error, or +inf when any row evaluates non-finite.
double LossMae(const Expression& expression, const Eigen::MatrixXd& rows,
               const Eigen::VectorXd& labels);
double LossMae(const Expression& expression, const TabularDataset& dataset);

// Rewrites to a fixpoint: constant folding (finite results only), x+0, 0+x,
// x-0, x*1, 1*x, x/1, x-x, --x, x*0 and 0*x (x free of division and
// domain-restricted functions), x/x (x division-free). Never increases
// complexity and is idempotent.
Expression Simplify(const Expression& expression);

struct ConstantFit {
  Expression expression;
  double loss;
  bool improved;  // false when nothing beat the input
};

// Nelder-Mead on the constant vector minimizing LossMae; the unperturbed start
// plus `restarts` seeded perturbed starts. A lone constant is set to the
// label median directly.
ConstantFit OptimizeConstants(const Expression& expression, const Eigen::MatrixXd& rows,
                              const Eigen::VectorXd& labels, int restarts = 3,
                              uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Search

struct MutationWeights {
  double point = 0.25;
  double constant = 0.25;
  double subtree = 0.2;
  double crossover = 0.15;
  double hoist = 0.05;
  double simplify = 0.1;
};

struct SearchConfig {
  int iterations = 5000;  // generations summed over all populations
  int populations = 15;
  int population_size = 33;
  int max_complexity = 30;
  int tournament_size = 10;
  double migration_fraction = 0.05;
  int migration_interval = 10;
  int constant_opt_interval = 25;
  int optimizer_restarts = 3;
  double parsimony = 0.0032;
  std::vector<Op> unary_ops;  // empty: binary operators only
  MutationWeights mutation;
  uint64_t seed = 0;
  unsigned workers = 1;

  // Throws Error(kInvalidArgument).
  void Validate() const;
};

struct FrontEntry {
  std::size_t complexity;
  double loss;
  double score;  // -dlog(loss)/dcomplexity against the previous entry; 0 first
  Expression expression;
};

struct ParetoFront {
  std::vector<std::string> variables;
  std::vector<FrontEntry> entries;  // ascending complexity, strictly falling loss
  std::string dataset_fingerprint;
  SearchConfig config;
};

struct SearchResult {
  ParetoFront front;
  // One JSON object per migration round.
  std::vector<std::string> telemetry;
  int generations = 0;
};

// Throws Error(kEmptyDataset) and config errors.
SearchResult Search(const TabularDataset& dataset, const SearchConfig& config);

// Keeps the lowest-loss candidate per complexity, then drops entries that do
// not strictly improve on every simpler one; fills in scores.
std::vector<FrontEntry> BuildParetoFront(std::vector<FrontEntry> candidates);

struct ReferenceRow {
  std::size_t complexity;
  double loss;
  std::string expression;
};

// Header: complexity,loss,score,expression. The optional reference row goes
// last with "reference" in the score column.
std::string WriteFrontCsv(const ParetoFront& front,
                          const std::optional<ReferenceRow>& reference = std::nullopt);

// Electronegativity-difference reference model over formation_energy, chi_cat and chi_ads.
inline constexpr std::string_view kReferenceEquation =
    "0.0104 * formation_energy + 192.9660 * (0.01036 * (chi_cat - chi_ads)) * "
    "(0.01036 * (chi_cat - chi_ads))";

// Throws Error(kUnknownVariable) when a required column is missing.
Expression ReferenceExpression(std::span<const std::string> variables);
Eigen::ArrayXd ReferencePredictions(const TabularDataset& dataset);
ReferenceRow EvaluateReferenceEquation(const TabularDataset& dataset);

// Bronsted-Evans-Polanyi estimate gamma * delta_e_ads + xi.
double BepActivationEnergy(double delta_e_ads, double gamma, double xi);

}  // namespace adsorbxai

#endif  // ADSORBXAI_SYMREG_H_
