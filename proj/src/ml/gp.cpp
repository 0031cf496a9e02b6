#include "jss/ml/gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jss/error.hpp"
#include "jss/ml/model.hpp"
#include "jss/util/rng.hpp"

namespace jss::ml {

double gp_protected_div(double a, double b) { return std::abs(b) > 1e-3 ? a / b : 1.0; }

namespace {

int arity(GpExpr::Op op) { return op == GpExpr::Op::Feature || op == GpExpr::Op::Const ? 0 : 2; }

}  // namespace

double GpExpr::eval(std::span<const double> x) const {
  double stack[64];
  int top = -1;
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const Node& node = nodes[i];
    switch (node.op) {
      case Op::Feature:
        stack[++top] = x[static_cast<std::size_t>(node.feature)];
        break;
      case Op::Const:
        stack[++top] = node.value;
        break;
      default: {
        const double left = stack[top--];
        const double right = stack[top];
        double r = 0;
        switch (node.op) {
          case Op::Add: r = left + right; break;
          case Op::Sub: r = left - right; break;
          case Op::Mul: r = left * right; break;
          default: r = gp_protected_div(left, right); break;
        }
        stack[top] = r;
      }
    }
  }
  return stack[0];
}

std::size_t GpExpr::subtree_end(std::size_t at) const {
  int remaining = 1;
  std::size_t i = at;
  while (remaining > 0) {
    remaining += arity(nodes[i].op) - 1;
    ++i;
  }
  return i;
}

int GpExpr::depth() const {
  // Depth of the prefix tree; a lone terminal has depth 0.
  int depth = 0, max_depth = 0;
  std::vector<int> pending;  // children still expected at each level
  for (const Node& node : nodes) {
    max_depth = std::max(max_depth, depth);
    if (arity(node.op) == 2) {
      pending.push_back(2);
      ++depth;
    } else {
      while (!pending.empty() && --pending.back() == 0) {
        pending.pop_back();
        --depth;
      }
    }
  }
  return max_depth;
}

std::string GpExpr::to_prefix_string() const {
  std::ostringstream out;
  char buf[32];
  bool first = true;
  for (const Node& node : nodes) {
    if (!first) out << ' ';
    first = false;
    switch (node.op) {
      case Op::Add: out << '+'; break;
      case Op::Sub: out << '-'; break;
      case Op::Mul: out << '*'; break;
      case Op::Div: out << '/'; break;
      case Op::Feature: out << 'f' << (node.feature + 1); break;
      case Op::Const:
        std::snprintf(buf, sizeof buf, "%.17g", node.value);
        out << buf;
        break;
    }
  }
  return out.str();
}

GpExpr GpExpr::from_prefix_string(const std::string& text, int dim) {
  std::istringstream in(text);
  std::string tok;
  GpExpr expr;
  int remaining = 1;
  while (in >> tok) {
    if (remaining <= 0) throw FormatError("trailing tokens in expression: '" + tok + "'");
    Node node;
    if (tok == "+") node.op = Op::Add;
    else if (tok == "-") node.op = Op::Sub;
    else if (tok == "*") node.op = Op::Mul;
    else if (tok == "/") node.op = Op::Div;
    else if (tok.size() >= 2 && tok[0] == 'f' && std::isdigit(static_cast<unsigned char>(tok[1]))) {
      node.op = Op::Feature;
      int k = 0;
      try {
        k = std::stoi(tok.substr(1));
      } catch (const std::exception&) {
        throw FormatError("bad feature token '" + tok + "'");
      }
      if (k < 1 || k > dim) throw FormatError("feature index out of range: '" + tok + "'");
      node.feature = k - 1;
    } else {
      node.op = Op::Const;
      try {
        std::size_t pos = 0;
        node.value = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw FormatError("bad expression token '" + tok + "'");
      }
    }
    expr.nodes.push_back(node);
    remaining += arity(node.op) - 1;
  }
  if (expr.nodes.empty() || remaining != 0) throw FormatError("truncated expression");
  if (expr.depth() > 60) throw FormatError("expression too deep");
  return expr;
}

namespace {

using Op = GpExpr::Op;

constexpr int kChunk = 512;

GpExpr::Node random_terminal(Rng& rng, int dim) {
  GpExpr::Node node;
  if (rng.bounded(static_cast<std::uint64_t>(dim) + 1) == 0) {
    node.op = Op::Const;
    node.value = rng.uniform_real(-1.0, 1.0);
  } else {
    node.op = Op::Feature;
    node.feature = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(dim)));
  }
  return node;
}

Op random_function(Rng& rng) {
  switch (rng.bounded(4)) {
    case 0: return Op::Add;
    case 1: return Op::Sub;
    case 2: return Op::Mul;
    default: return Op::Div;
  }
}

void gen_tree(GpExpr& out, Rng& rng, int dim, int depth, bool full) {
  if (depth <= 0 || (!full && rng.uniform01() < 0.5)) {
    out.nodes.push_back(random_terminal(rng, dim));
    return;
  }
  GpExpr::Node node;
  node.op = random_function(rng);
  out.nodes.push_back(node);
  gen_tree(out, rng, dim, depth - 1, full);
  gen_tree(out, rng, dim, depth - 1, full);
}

GpExpr random_tree(Rng& rng, int dim, int depth_min, int depth_max, bool full) {
  GpExpr expr;
  const int depth = depth_min + static_cast<int>(rng.bounded(
                                    static_cast<std::uint64_t>(depth_max - depth_min) + 1));
  // Force at least one function node so initial programs are not bare
  // terminals.
  GpExpr::Node root;
  root.op = random_function(rng);
  expr.nodes.push_back(root);
  gen_tree(expr, rng, dim, depth - 1, full);
  gen_tree(expr, rng, dim, depth - 1, full);
  return expr;
}

// Evaluates an expression over a chunk of dataset rows at once; the value
// stack holds one buffer per tree level.
class ChunkEvaluator {
 public:
  ChunkEvaluator(const Dataset& dataset, std::span<const int> rows)
      : dataset_(dataset), rows_(rows) {}

  // Mean fitness (lower is better): MSE for regression, mean hinge for
  // classification. Non-finite evaluations score +inf.
  double fitness(const GpExpr& expr, Head head) {
    double total = 0.0;
    for (std::size_t at = 0; at < rows_.size(); at += kChunk) {
      const int take = static_cast<int>(std::min<std::size_t>(kChunk, rows_.size() - at));
      const double* pred = eval_chunk(expr, at, take);
      for (int i = 0; i < take; ++i) {
        const double y = dataset_.labels[static_cast<std::size_t>(rows_[at + static_cast<std::size_t>(i)])];
        if (head == Head::Regression) {
          const double d = pred[i] - y;
          total += d * d;
        } else {
          total += std::max(0.0, 1.0 - y * pred[i]);
        }
      }
    }
    if (!std::isfinite(total)) return std::numeric_limits<double>::infinity();
    return total / static_cast<double>(rows_.size());
  }

 private:
  const double* eval_chunk(const GpExpr& expr, std::size_t at, int take) {
    const int dim = dataset_.dim;
    int top = -1;
    for (std::size_t i = expr.nodes.size(); i-- > 0;) {
      const GpExpr::Node& node = expr.nodes[i];
      switch (node.op) {
        case Op::Feature: {
          double* buf = level(++top);
          const double* base = dataset_.features.data() + node.feature;
          for (int r = 0; r < take; ++r)
            buf[r] = base[static_cast<std::size_t>(rows_[at + static_cast<std::size_t>(r)]) *
                          static_cast<std::size_t>(dim)];
          break;
        }
        case Op::Const: {
          double* buf = level(++top);
          std::fill(buf, buf + take, node.value);
          break;
        }
        default: {
          const double* left = level(top--);
          double* out = level(top);
          switch (node.op) {
            case Op::Add:
              for (int r = 0; r < take; ++r) out[r] = left[r] + out[r];
              break;
            case Op::Sub:
              for (int r = 0; r < take; ++r) out[r] = left[r] - out[r];
              break;
            case Op::Mul:
              for (int r = 0; r < take; ++r) out[r] = left[r] * out[r];
              break;
            default:
              for (int r = 0; r < take; ++r) out[r] = gp_protected_div(left[r], out[r]);
              break;
          }
        }
      }
    }
    return level(0);
  }

  double* level(int i) {
    while (static_cast<std::size_t>(i) >= stack_.size()) stack_.emplace_back(kChunk);
    return stack_[static_cast<std::size_t>(i)].data();
  }

  const Dataset& dataset_;
  std::span<const int> rows_;
  std::vector<std::vector<double>> stack_;
};

}  // namespace

GpModel train_gp(const LearnerSpec& spec, const Dataset& dataset, std::span<const int> rows) {
  if (rows.empty()) throw std::invalid_argument("empty dataset");
  const int dim = dataset.dim;

  Rng rng(splitmix64(spec.seed ^ 0x6770ULL));
  ChunkEvaluator evaluator(dataset, rows);

  std::vector<GpExpr> pop;
  pop.reserve(static_cast<std::size_t>(spec.gp_population));
  for (int i = 0; i < spec.gp_population; ++i)
    pop.push_back(random_tree(rng, dim, spec.gp_init_depth_min, spec.gp_init_depth_max, i % 2 == 0));

  std::vector<double> fitness(pop.size());
  GpExpr best_expr;
  double best_fitness = std::numeric_limits<double>::infinity();

  auto tournament = [&]() -> const GpExpr& {
    std::size_t winner = rng.bounded(pop.size());
    for (int t = 1; t < spec.gp_tournament; ++t) {
      const std::size_t c = rng.bounded(pop.size());
      if (fitness[c] < fitness[winner]) winner = c;
    }
    return pop[winner];
  };

  for (int gen = 0; gen < spec.gp_generations; ++gen) {
    for (std::size_t i = 0; i < pop.size(); ++i) {
      fitness[i] = evaluator.fitness(pop[i], spec.head);
      if (fitness[i] < best_fitness) {
        best_fitness = fitness[i];
        best_expr = pop[i];
      }
    }
    if (gen + 1 == spec.gp_generations) break;

    std::vector<GpExpr> next;
    next.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const double roll = rng.uniform01();
      if (roll < spec.gp_crossover) {
        const GpExpr& a = tournament();
        const GpExpr& b = tournament();
        const std::size_t ia = rng.bounded(a.nodes.size());
        const std::size_t ib = rng.bounded(b.nodes.size());
        GpExpr child;
        child.nodes.insert(child.nodes.end(), a.nodes.begin(),
                           a.nodes.begin() + static_cast<std::ptrdiff_t>(ia));
        child.nodes.insert(child.nodes.end(),
                           b.nodes.begin() + static_cast<std::ptrdiff_t>(ib),
                           b.nodes.begin() + static_cast<std::ptrdiff_t>(b.subtree_end(ib)));
        child.nodes.insert(child.nodes.end(),
                           a.nodes.begin() + static_cast<std::ptrdiff_t>(a.subtree_end(ia)),
                           a.nodes.end());
        next.push_back(child.depth() <= spec.gp_max_depth ? std::move(child) : a);
      } else if (roll < spec.gp_crossover + spec.gp_mutation) {
        const GpExpr& a = tournament();
        const std::size_t ia = rng.bounded(a.nodes.size());
        GpExpr donor = random_tree(rng, dim, 1, 4, false);
        GpExpr child;
        child.nodes.insert(child.nodes.end(), a.nodes.begin(),
                           a.nodes.begin() + static_cast<std::ptrdiff_t>(ia));
        child.nodes.insert(child.nodes.end(), donor.nodes.begin(), donor.nodes.end());
        child.nodes.insert(child.nodes.end(),
                           a.nodes.begin() + static_cast<std::ptrdiff_t>(a.subtree_end(ia)),
                           a.nodes.end());
        next.push_back(child.depth() <= spec.gp_max_depth ? std::move(child) : a);
      } else {
        next.push_back(tournament());
      }
    }
    pop = std::move(next);
  }

  GpModel model;
  model.in = dim;
  model.expr = std::move(best_expr);
  return model;
}

}  // namespace jss::ml
