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
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "adsorbxai/csv.h"
#include "adsorbxai/error.h"
#include "adsorbxai/parallel.h"
#include "adsorbxai/random.h"
#include "adsorbxai/symreg.h"
#include "json.hpp"

namespace adsorbxai {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Op kBinaryOps[] = {Op::kAdd, Op::kSub, Op::kMul, Op::kDiv};

struct Individual {
  Expression expr;
  double loss = kInf;
  double fitness = kInf;
  uint64_t birth = 0;
  bool optimized = false;
};

struct Context {
  const Eigen::MatrixXd& rows;
  const Eigen::VectorXd& labels;
  const SearchConfig& config;
  int num_vars;
};

using HallOfFame = std::map<std::size_t, Individual>;

void OfferToHallOfFame(HallOfFame& hof, const Individual& ind) {
  if (!std::isfinite(ind.loss)) return;
  auto it = hof.find(ind.expr.complexity());
  if (it == hof.end() || ind.loss < it->second.loss) hof[ind.expr.complexity()] = ind;
}

class Population {
 public:
  Population(const Context& ctx, uint64_t index) : ctx_(ctx), rng_(ctx.config.seed, index) {}

  void Initialize() {
    for (int i = 0; i < ctx_.config.population_size; ++i) {
      Individual ind = Score(Expression(RandomTree(1 + static_cast<int>(rng_.Below(3)))));
      ind.birth = clock_++;
      OfferToHallOfFame(hof_, ind);
      members_.push_back(std::move(ind));
    }
  }

  void RunGeneration() {
    for (int e = 0; e < ctx_.config.population_size; ++e) {
      const Individual& parent = members_[Tournament()];
      Expression child = Mutate(parent.expr);
      if (child.complexity() > static_cast<std::size_t>(ctx_.config.max_complexity)) continue;
      Individual ind = Score(std::move(child));
      if (!std::isfinite(ind.loss)) continue;
      Insert(std::move(ind));
    }
    ++generations_;
    if (generations_ % ctx_.config.constant_opt_interval == 0) OptimizeChampions();
  }

  void OptimizeChampions() {
    for (auto& [complexity, champion] : hof_) {
      if (champion.optimized) continue;
      champion.optimized = true;
      const ConstantFit fit = OptimizeConstants(champion.expr, ctx_.rows, ctx_.labels,
                                                ctx_.config.optimizer_restarts, rng_.NextBits());
      if (!fit.improved) continue;
      Individual better = Score(fit.expression);
      better.optimized = true;
      if (better.loss < champion.loss) {
        champion = better;
        Insert(std::move(better));
      }
    }
  }

  std::vector<Individual> Top(std::size_t k) const {
    std::vector<std::size_t> order(members_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return members_[a].fitness < members_[b].fitness;
    });
    std::vector<Individual> out;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(members_[order[i]]);
    return out;
  }

  void Insert(Individual ind) {
    std::size_t oldest = 0;
    for (std::size_t i = 1; i < members_.size(); ++i) {
      if (members_[i].birth < members_[oldest].birth) oldest = i;
    }
    ind.birth = clock_++;
    OfferToHallOfFame(hof_, ind);
    members_[oldest] = std::move(ind);
  }

  const HallOfFame& hall_of_fame() const { return hof_; }
  int generations() const { return generations_; }

 private:
  Individual Score(Expression expr) const {
    Individual ind;
    ind.loss = LossMae(expr, ctx_.rows, ctx_.labels);
    ind.fitness = ind.loss + ctx_.config.parsimony * static_cast<double>(expr.complexity());
    ind.expr = std::move(expr);
    return ind;
  }

  std::size_t Tournament() {
    std::size_t best = rng_.Below(members_.size());
    for (int k = 1; k < ctx_.config.tournament_size; ++k) {
      const std::size_t c = rng_.Below(members_.size());
      if (members_[c].fitness < members_[best].fitness) best = c;
    }
    return best;
  }

  ExprNode RandomLeaf() {
    if (ctx_.num_vars == 0 || rng_.Bernoulli(0.4)) return {Op::kConstant, rng_.Normal(), -1};
    return {Op::kVariable, 0.0, static_cast<int>(rng_.Below(static_cast<uint64_t>(ctx_.num_vars)))};
  }

  std::vector<ExprNode> RandomTree(int depth) {
    std::vector<ExprNode> out;
    Grow(depth, out);
    return out;
  }

  void Grow(int depth, std::vector<ExprNode>& out) {
    if (depth <= 0 || rng_.Bernoulli(0.3)) {
      out.push_back(RandomLeaf());
      return;
    }
    const auto& unary = ctx_.config.unary_ops;
    if (!unary.empty() && rng_.Bernoulli(0.2)) {
      out.push_back({unary[rng_.Below(unary.size())], 0.0, -1});
      Grow(depth - 1, out);
      return;
    }
    out.push_back({kBinaryOps[rng_.Below(4)], 0.0, -1});
    Grow(depth - 1, out);
    Grow(depth - 1, out);
  }

  Expression PointMutation(const Expression& parent) {
    std::vector<ExprNode> nodes = parent.nodes();
    ExprNode& n = nodes[rng_.Below(nodes.size())];
    const auto& unary = ctx_.config.unary_ops;
    if (IsBinaryOp(n.op)) {
      Op next = n.op;
      while (next == n.op) next = kBinaryOps[rng_.Below(4)];
      n.op = next;
    } else if (IsUnaryOp(n.op)) {
      if (unary.size() >= 2) {
        Op next = n.op;
        while (next == n.op) next = unary[rng_.Below(unary.size())];
        n.op = next;
      }
    } else if (n.op == Op::kVariable && ctx_.num_vars >= 2) {
      int next = n.variable;
      while (next == n.variable) {
        next = static_cast<int>(rng_.Below(static_cast<uint64_t>(ctx_.num_vars)));
      }
      n.variable = next;
    } else {
      n = RandomLeaf();
    }
    return Expression(std::move(nodes));
  }

  Expression ConstantMutation(const Expression& parent) {
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < parent.nodes().size(); ++i) {
      if (parent.nodes()[i].op == Op::kConstant) slots.push_back(i);
    }
    if (slots.empty()) return PointMutation(parent);
    std::vector<ExprNode> nodes = parent.nodes();
    double& v = nodes[slots[rng_.Below(slots.size())]].value;
    v *= std::exp(0.2 * rng_.Normal());
    if (rng_.Bernoulli(0.1)) v = -v;
    return Expression(std::move(nodes));
  }

  Expression Mutate(const Expression& parent) {
    const MutationWeights& w = ctx_.config.mutation;
    const double weights[] = {w.point, w.constant, w.subtree, w.crossover, w.hoist, w.simplify};
    double total = 0.0;
    for (double x : weights) total += x;
    double pick = rng_.Uniform() * total;
    int choice = 0;
    while (choice < 5 && pick >= weights[choice]) pick -= weights[choice++];
    const std::size_t n = parent.complexity();
    switch (choice) {
      case 0: return PointMutation(parent);
      case 1: return ConstantMutation(parent);
      case 2:
        return parent.ReplaceSubtree(
            rng_.Below(n), Expression(RandomTree(1 + static_cast<int>(rng_.Below(3)))));
      case 3: {
        const Expression& other = members_[Tournament()].expr;
        const std::size_t i = rng_.Below(n);
        return parent.ReplaceSubtree(i, other.Subtree(rng_.Below(other.complexity())));
      }
      case 4:
        if (n == 1) return PointMutation(parent);
        return parent.Subtree(1 + rng_.Below(n - 1));
      default: return Simplify(parent);
    }
  }

  const Context& ctx_;
  Rng rng_;
  std::vector<Individual> members_;
  HallOfFame hof_;
  uint64_t clock_ = 0;
  int generations_ = 0;
};

HallOfFame MergeHallsOfFame(const std::vector<Population>& pops) {
  HallOfFame merged;
  for (const Population& p : pops) {
    for (const auto& [c, ind] : p.hall_of_fame()) OfferToHallOfFame(merged, ind);
  }
  return merged;
}

}  // namespace

void SearchConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(iterations >= 1, "iterations must be at least 1");
  require(populations >= 1, "populations must be at least 1");
  require(population_size >= 1, "population_size must be at least 1");
  require(max_complexity >= 1, "max_complexity must be at least 1");
  require(tournament_size >= 1, "tournament_size must be at least 1");
  require(migration_interval >= 1, "migration_interval must be at least 1");
  require(constant_opt_interval >= 1, "constant_opt_interval must be at least 1");
  require(optimizer_restarts >= 0, "optimizer_restarts must be non-negative");
  require(migration_fraction > 0.0 && migration_fraction < 1.0,
          "migration_fraction must lie in (0, 1)");
  require(std::isfinite(parsimony) && parsimony >= 0.0, "parsimony must be finite and >= 0");
  const MutationWeights& w = mutation;
  const double weights[] = {w.point, w.constant, w.subtree, w.crossover, w.hoist, w.simplify};
  double total = 0.0;
  for (double x : weights) {
    require(std::isfinite(x) && x >= 0.0, "mutation weights must be finite and >= 0");
    total += x;
  }
  require(total > 0.0, "at least one mutation weight must be positive");
  for (Op op : unary_ops) require(IsUnaryOp(op), "unary_ops may only list unary operators");
}

std::vector<FrontEntry> BuildParetoFront(std::vector<FrontEntry> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const FrontEntry& a, const FrontEntry& b) {
                     if (a.complexity != b.complexity) return a.complexity < b.complexity;
                     return a.loss < b.loss;
                   });
  std::vector<FrontEntry> front;
  for (FrontEntry& e : candidates) {
    if (!std::isfinite(e.loss)) continue;
    if (!front.empty() && (e.complexity == front.back().complexity || e.loss >= front.back().loss)) {
      continue;
    }
    front.push_back(std::move(e));
  }
  constexpr double kLossFloor = 1e-300;
  for (std::size_t k = 0; k < front.size(); ++k) {
    if (k == 0) {
      front[k].score = 0.0;
      continue;
    }
    const double dlog = std::log(std::max(front[k].loss, kLossFloor)) -
                        std::log(std::max(front[k - 1].loss, kLossFloor));
    front[k].score =
        -dlog / static_cast<double>(front[k].complexity - front[k - 1].complexity);
  }
  return front;
}

SearchResult Search(const TabularDataset& dataset, const SearchConfig& config) {
  config.Validate();
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "symbolic regression needs rows");
  dataset.Validate();
  const Context ctx{dataset.rows, dataset.labels, config,
                    static_cast<int>(dataset.num_features())};

  const auto num_pops = static_cast<std::size_t>(config.populations);
  std::vector<Population> pops;
  pops.reserve(num_pops);
  for (std::size_t p = 0; p < num_pops; ++p) pops.emplace_back(ctx, p);
  std::vector<int> budget(num_pops);
  for (std::size_t p = 0; p < num_pops; ++p) {
    budget[p] = config.iterations / config.populations +
                (static_cast<int>(p) < config.iterations % config.populations ? 1 : 0);
  }
  ParallelFor(num_pops, config.workers, [&](std::size_t p) { pops[p].Initialize(); });

  SearchResult result;
  Rng migration_rng(config.seed, num_pops);
  const std::size_t migrants = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(config.migration_fraction * config.population_size)));
  const int max_budget = *std::max_element(budget.begin(), budget.end());
  for (int round = 0, done = 0; done < max_budget; ++round) {
    const int step = std::min(config.migration_interval, max_budget - done);
    ParallelFor(num_pops, config.workers, [&](std::size_t p) {
      const int todo = std::min(step, budget[p] - done);
      for (int g = 0; g < todo; ++g) pops[p].RunGeneration();
    });
    done += step;

    if (num_pops > 1) {
      std::vector<Individual> pool;
      for (const Population& p : pops) {
        for (Individual& ind : p.Top(migrants)) pool.push_back(std::move(ind));
      }
      for (Population& p : pops) {
        for (std::size_t k = 0; k < migrants; ++k) p.Insert(pool[migration_rng.Below(pool.size())]);
      }
    }

    int generations = 0;
    for (const Population& p : pops) generations += p.generations();
    nlohmann::json record = {{"round", round}, {"generations", generations}};
    nlohmann::json best = nlohmann::json::array();
    for (const auto& [c, ind] : MergeHallsOfFame(pops)) best.push_back({c, ind.loss});
    record["best_loss_by_complexity"] = std::move(best);
    result.telemetry.push_back(record.dump());
    result.generations = generations;
  }

  ParallelFor(num_pops, config.workers, [&](std::size_t p) { pops[p].OptimizeChampions(); });

  std::vector<FrontEntry> candidates;
  for (const auto& [c, ind] : MergeHallsOfFame(pops)) {
    candidates.push_back({c, ind.loss, 0.0, ind.expr});
  }
  result.front.entries = BuildParetoFront(std::move(candidates));
  result.front.variables = dataset.feature_names;
  result.front.dataset_fingerprint = DatasetFingerprint(dataset);
  result.front.config = config;
  return result;
}

std::string WriteFrontCsv(const ParetoFront& front, const std::optional<ReferenceRow>& reference) {
  std::string out = "complexity,loss,score,expression\n";
  for (const FrontEntry& e : front.entries) {
    out += csv::JoinRow({std::to_string(e.complexity), csv::FormatDouble(e.loss),
                         csv::FormatDouble(e.score),
                         PrintExpression(e.expression, front.variables)});
    out += '\n';
  }
  if (reference) {
    out += csv::JoinRow({std::to_string(reference->complexity), csv::FormatDouble(reference->loss),
                         "reference", reference->expression});
    out += '\n';
  }
  return out;
}

Expression ReferenceExpression(std::span<const std::string> variables) {
  return ParseExpression(kReferenceEquation, variables);
}

Eigen::ArrayXd ReferencePredictions(const TabularDataset& dataset) {
  return Evaluate(ReferenceExpression(dataset.feature_names), dataset.rows);
}

ReferenceRow EvaluateReferenceEquation(const TabularDataset& dataset) {
  const Expression e = ReferenceExpression(dataset.feature_names);
  return {e.complexity(), LossMae(e, dataset), PrintExpression(e, dataset.feature_names)};
}

double BepActivationEnergy(double delta_e_ads, double gamma, double xi) {
  return gamma * delta_e_ads + xi;
}

}  // namespace adsorbxai
