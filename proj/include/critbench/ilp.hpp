#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace critbench {

enum class Sense : std::uint8_t { LessEq, Equal, GreaterEq };

struct LinearTerm {
  std::uint32_t var = 0;
  std::int64_t coef = 0;
};

struct Constraint {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::LessEq;
  std::int64_t rhs = 0;
  std::string name;
};

/// Maximize objective . x subject to the constraints, x >= 0 and integer.
struct IlpModel {
  std::vector<std::string> names;
  std::vector<std::int64_t> objective;
  std::vector<Constraint> constraints;

  std::uint32_t add_var(std::string name, std::int64_t cost = 0);
  void add_constraint(std::vector<LinearTerm> terms, Sense sense, std::int64_t rhs,
                      std::string name = {});
  std::size_t size() const { return names.size(); }
};

enum class IlpStatus : std::uint8_t { Optimal, Infeasible, Unbounded };

struct IlpSolution {
  IlpStatus status = IlpStatus::Infeasible;
  std::int64_t objective = 0;
  std::vector<std::int64_t> values;
  std::uint64_t nodes = 0;        // branch-and-bound nodes solved
  bool used_bignum = false;       // int64 rationals overflowed, GMP took over
};

struct IlpOptions {
  std::uint64_t node_limit = 200000;
};

/// Exact rational two-phase simplex with branch and bound (lowest-index
/// fractional variable, floor branch first, depth first). Throws
/// Error("ilp", ...) when the node limit is hit.
IlpSolution solve_ilp(const IlpModel& model, const IlpOptions& options = {});

/// LP relaxation optimum as a reduced fraction "p/q" (or "p").
std::string solve_lp_relaxation(const IlpModel& model);

}  // namespace critbench
