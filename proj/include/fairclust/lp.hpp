#ifndef FAIRCLUST_LP_HPP
#define FAIRCLUST_LP_HPP

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "fairclust/common.hpp"

namespace fairclust {

enum class Relation { LessEq, Equal, GreaterEq };

struct ConstraintRow {
  std::vector<int> idx;
  std::vector<double> coef;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Minimization problem over bounded variables. Upper bounds may be +inf,
/// lower bounds -inf. Coefficients must be finite.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;
  std::vector<ConstraintRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  int add_variable(std::string name, double lo, double hi, double cost) {
    names.push_back(std::move(name));
    lower.push_back(lo);
    upper.push_back(hi);
    objective.push_back(cost);
    return num_vars() - 1;
  }

  void add_row(std::vector<int> idx, std::vector<double> coef, Relation rel, double rhs) {
    rows.push_back({std::move(idx), std::move(coef), rel, rhs});
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective_value = 0.0;
  std::vector<double> values;  // one per variable when status == Optimal
  int iterations = 0;
};

/// Bounded-variable revised simplex (two phases, sparse LU basis with
/// product-form updates). Deterministic: Dantzig pricing with lowest-index
/// tie-breaking, switching to Bland's rule after a degeneracy stall.
/// Tolerances: pivot 1e-9, feasibility 1e-7. Throws SolverError if an
/// optimal basis cannot be certified within 50*(num_vars+num_rows)
/// iterations.
LpSolution solve_lp(const LinearProgram& lp);

struct RowViolation {
  int row;
  double residual;  // lhs - rhs, reported only when it violates the relation
};

/// Residual check for an external candidate point; empty result means every
/// constraint holds within 1e-7.
std::vector<RowViolation> check_feasibility(const LinearProgram& lp,
                                            const std::vector<double>& values);

/// Fixed-column MPS dump, for offline inspection of any model.
void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name = "FAIRCLUST");

}  // namespace fairclust

#endif  // FAIRCLUST_LP_HPP
