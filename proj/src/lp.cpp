#include "fairclust/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

namespace fairclust {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr double kDropTol = 1e-13;
constexpr int kRefactorEvery = 64;
constexpr int kStallLimit = 300;

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, FreeZero };

struct SparseCol {
  std::vector<int> idx;
  std::vector<double> val;
};

struct Eta {
  int r = 0;
  double wr = 1.0;
  std::vector<std::pair<int, double>> entries;  // positions other than r
};

/// Sparse LU of the basis with partial pivoting (left-looking, depth-first
/// symbolic pass per column). Bases here are mostly slack and short
/// structural columns, so fill-in stays near zero.
class LuBasis {
 public:
  void reset(int m) {
    m_ = m;
    work_.assign(m, 0.0);
    visited_.assign(m, 0);
  }

  bool factorize(const std::vector<const SparseCol*>& cols) {
    lcols_.assign(m_, {});
    ucols_.assign(m_, {});
    udiag_.assign(m_, 0.0);
    pivot_row_.assign(m_, -1);
    pivot_col_.assign(m_, -1);
    std::vector<int> postorder;
    std::vector<int> stack, stage;
    postorder.reserve(64);

    for (int j = 0; j < m_; ++j) {
      const SparseCol& c = *cols[j];
      postorder.clear();
      for (std::size_t t = 0; t < c.idx.size(); ++t) work_[c.idx[t]] += c.val[t];
      // Depth-first reach over the L pattern; reverse postorder gives a
      // topological order for the elimination updates.
      for (int root : c.idx) {
        if (visited_[root]) continue;
        stack.assign(1, root);
        stage.assign(1, 0);
        visited_[root] = 1;
        while (!stack.empty()) {
          int r = stack.back();
          int& s = stage.back();
          int pc = pivot_col_[r];
          bool descended = false;
          if (pc >= 0) {
            auto& kids = lcols_[pc];
            while (s < static_cast<int>(kids.size())) {
              int child = kids[s].first;
              ++s;
              if (!visited_[child]) {
                visited_[child] = 1;
                stack.push_back(child);
                stage.push_back(0);
                descended = true;
                break;
              }
            }
          }
          if (!descended && (pc < 0 || s >= static_cast<int>(lcols_[pc].size()))) {
            postorder.push_back(r);
            stack.pop_back();
            stage.pop_back();
          }
        }
      }
      for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
        int r = *it;
        int pc = pivot_col_[r];
        if (pc < 0) continue;
        double v = work_[r];
        if (v == 0.0) continue;
        for (const auto& [rr, lv] : lcols_[pc]) work_[rr] -= v * lv;
      }
      // Partial pivoting over rows without a pivot yet.
      int prow = -1;
      double pmag = 0.0;
      for (int r : postorder) {
        if (pivot_col_[r] >= 0) continue;
        double a = std::abs(work_[r]);
        if (a > pmag) {
          pmag = a;
          prow = r;
        }
      }
      if (prow < 0 || pmag <= 1e-12) {
        for (int r : postorder) {
          work_[r] = 0.0;
          visited_[r] = 0;
        }
        return false;
      }
      double piv = work_[prow];
      udiag_[j] = piv;
      for (int r : postorder) {
        double v = work_[r];
        work_[r] = 0.0;
        visited_[r] = 0;
        if (std::abs(v) <= kDropTol) continue;
        if (pivot_col_[r] >= 0)
          ucols_[j].emplace_back(pivot_col_[r], v);
        else if (r != prow)
          lcols_[j].emplace_back(r, v / piv);
      }
      pivot_row_[j] = prow;
      pivot_col_[prow] = j;
    }
    return true;
  }

  // Solves B w = a. `x` is dense over original rows and is consumed (left
  // zeroed); `out` is dense over basis positions.
  void ftran(std::vector<double>& x, std::vector<double>& out) const {
    for (int p = 0; p < m_; ++p) {
      double v = x[pivot_row_[p]];
      if (v == 0.0) continue;
      for (const auto& [rr, lv] : lcols_[p]) x[rr] -= v * lv;
    }
    for (int j = m_ - 1; j >= 0; --j) {
      int r = pivot_row_[j];
      double wj = x[r] / udiag_[j];
      x[r] = 0.0;
      out[j] = wj;
      if (wj == 0.0) continue;
      for (const auto& [p, uv] : ucols_[j]) x[pivot_row_[p]] -= uv * wj;
    }
  }

  // Solves y^T B = c^T. `c` is dense over basis positions and is consumed;
  // `out` is dense over original rows.
  void btran(std::vector<double>& c, std::vector<double>& out) const {
    for (int j = 0; j < m_; ++j) {
      double s = c[j];
      for (const auto& [p, uv] : ucols_[j]) s -= uv * c[p];
      c[j] = s / udiag_[j];
    }
    for (int j = m_ - 1; j >= 0; --j) {
      double s = c[j];
      for (const auto& [rr, lv] : lcols_[j]) s -= lv * c[pivot_col_[rr]];
      c[j] = s;
    }
    for (int j = 0; j < m_; ++j) {
      out[pivot_row_[j]] = c[j];
      c[j] = 0.0;
    }
  }

 private:
  int m_ = 0;
  std::vector<std::vector<std::pair<int, double>>> lcols_;
  std::vector<std::vector<std::pair<int, double>>> ucols_;
  std::vector<double> udiag_;
  std::vector<int> pivot_row_;
  std::vector<int> pivot_col_;
  mutable std::vector<double> work_;
  mutable std::vector<signed char> visited_;
};

class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp) : lp_(lp) {}

  LpSolution run() {
    validate();
    build();
    iter_cap_ = 50L * (lp_.num_vars() + lp_.num_rows());
    if (iter_cap_ < 1000) iter_cap_ = 1000;

    if (!art_vars_.empty()) {
      phase_ = 1;
      refactor();
      Outcome oc = iterate();
      if (oc != Outcome::PhaseOptimal) throw SolverError("phase-1 breakdown");
      double infeas = 0.0;
      for (int a : art_vars_) infeas += std::max(0.0, xval_[a]);
      if (infeas > kFeasTol) {
        LpSolution sol;
        sol.status = LpStatus::Infeasible;
        sol.iterations = static_cast<int>(iter_);
        return sol;
      }
      for (int a : art_vars_) {
        lo_[a] = 0.0;
        hi_[a] = 0.0;
        if (stat_[a] != VarStatus::Basic) {
          stat_[a] = VarStatus::AtLower;
          xval_[a] = 0.0;
        }
      }
    }
    phase_ = 2;
    bland_ = false;
    degen_run_ = 0;
    refactor();
    Outcome oc = iterate();
    if (oc == Outcome::Unbounded) {
      LpSolution sol;
      sol.status = LpStatus::Unbounded;
      sol.iterations = static_cast<int>(iter_);
      return sol;
    }
    return extract();
  }

 private:
  enum class Outcome { PhaseOptimal, Unbounded };

  const LinearProgram& lp_;
  int nv_ = 0, m_ = 0, ntot_ = 0;
  std::vector<SparseCol> cols_;
  std::vector<double> lo_, hi_, obj_;
  std::vector<double> b_;
  std::vector<VarStatus> stat_;
  std::vector<double> xval_;
  std::vector<int> basic_;
  std::vector<int> art_vars_;
  LuBasis lu_;
  std::vector<Eta> etas_;
  int phase_ = 2;
  bool bland_ = false;
  int degen_run_ = 0;
  long iter_ = 0, iter_cap_ = 0;
  std::vector<double> scatter_, w_, posbuf_, y_;

  bool is_art(int j) const { return j >= nv_ + m_; }

  double cost_of(int j) const {
    if (phase_ == 1) return is_art(j) ? 1.0 : 0.0;
    return j < nv_ ? obj_[j] : 0.0;
  }

  void validate() const {
    for (int j = 0; j < lp_.num_vars(); ++j) {
      if (std::isnan(lp_.lower[j]) || std::isnan(lp_.upper[j]) || lp_.lower[j] > lp_.upper[j])
        throw ValidationError("solve_lp: bad bounds on variable " + std::to_string(j));
      if (!std::isfinite(lp_.objective[j]))
        throw ValidationError("solve_lp: non-finite objective on variable " + std::to_string(j));
    }
    for (int i = 0; i < lp_.num_rows(); ++i) {
      const auto& row = lp_.rows[i];
      if (row.idx.size() != row.coef.size())
        throw ValidationError("solve_lp: row " + std::to_string(i) + " index/coef size mismatch");
      if (!std::isfinite(row.rhs))
        throw ValidationError("solve_lp: row " + std::to_string(i) + " has non-finite rhs");
      for (std::size_t t = 0; t < row.idx.size(); ++t) {
        if (row.idx[t] < 0 || row.idx[t] >= lp_.num_vars())
          throw ValidationError("solve_lp: row " + std::to_string(i) + " references variable " +
                                std::to_string(row.idx[t]));
        if (!std::isfinite(row.coef[t]))
          throw ValidationError("solve_lp: row " + std::to_string(i) + " has non-finite coefficient");
      }
    }
  }

  void build() {
    nv_ = lp_.num_vars();
    m_ = lp_.num_rows();
    ntot_ = nv_ + m_;
    cols_.resize(ntot_);
    lo_.resize(ntot_);
    hi_.resize(ntot_);
    obj_ = lp_.objective;
    b_.resize(m_);
    stat_.assign(ntot_, VarStatus::AtLower);
    xval_.assign(ntot_, 0.0);
    basic_.assign(m_, -1);

    for (int j = 0; j < nv_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp_.rows[i];
      b_[i] = row.rhs;
      for (std::size_t t = 0; t < row.idx.size(); ++t) {
        if (row.coef[t] == 0.0) continue;
        cols_[row.idx[t]].idx.push_back(i);
        cols_[row.idx[t]].val.push_back(row.coef[t]);
      }
      int s = nv_ + i;
      cols_[s].idx.push_back(i);
      cols_[s].val.push_back(1.0);
      switch (row.rel) {
        case Relation::LessEq:
          lo_[s] = 0.0;
          hi_[s] = kInfinity;
          break;
        case Relation::Equal:
          lo_[s] = 0.0;
          hi_[s] = 0.0;
          break;
        case Relation::GreaterEq:
          lo_[s] = -kInfinity;
          hi_[s] = 0.0;
          break;
      }
    }
    for (int j = 0; j < ntot_; ++j) {
      if (stat_[j] == VarStatus::Basic) continue;
      if (lo_[j] > -kInfinity) {
        stat_[j] = VarStatus::AtLower;
        xval_[j] = lo_[j];
      } else if (hi_[j] < kInfinity) {
        stat_[j] = VarStatus::AtUpper;
        xval_[j] = hi_[j];
      } else {
        stat_[j] = VarStatus::FreeZero;
        xval_[j] = 0.0;
      }
    }

    // Row activity of the nonbasic start point decides whether the slack can
    // be basic or an artificial is needed.
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < nv_; ++j) {
      if (xval_[j] == 0.0) continue;
      for (std::size_t t = 0; t < cols_[j].idx.size(); ++t)
        act[cols_[j].idx[t]] += cols_[j].val[t] * xval_[j];
    }
    for (int i = 0; i < m_; ++i) {
      int s = nv_ + i;
      double target = b_[i] - act[i];
      if (target >= lo_[s] && target <= hi_[s]) {
        stat_[s] = VarStatus::Basic;
        xval_[s] = target;
        basic_[i] = s;
      } else {
        double pin = std::clamp(target, lo_[s], hi_[s]);
        stat_[s] = pin == lo_[s] ? VarStatus::AtLower : VarStatus::AtUpper;
        xval_[s] = pin;
        int a = static_cast<int>(cols_.size());
        cols_.emplace_back();
        cols_[a].idx.push_back(i);
        cols_[a].val.push_back(target - pin > 0 ? 1.0 : -1.0);
        lo_.push_back(0.0);
        hi_.push_back(kInfinity);
        stat_.push_back(VarStatus::Basic);
        xval_.push_back(std::abs(target - pin));
        basic_[i] = a;
        art_vars_.push_back(a);
      }
    }
    ntot_ = static_cast<int>(cols_.size());

    lu_.reset(m_);
    scatter_.assign(m_, 0.0);
    w_.assign(m_, 0.0);
    posbuf_.assign(m_, 0.0);
    y_.assign(m_, 0.0);
  }

  void refactor() {
    std::vector<const SparseCol*> bcols(m_);
    for (int i = 0; i < m_; ++i) bcols[i] = &cols_[basic_[i]];
    if (!lu_.factorize(bcols)) throw SolverError("basis factorization failed");
    etas_.clear();
    recompute_basics();
  }

  void recompute_basics() {
    std::fill(scatter_.begin(), scatter_.end(), 0.0);
    for (int i = 0; i < m_; ++i) scatter_[i] = b_[i];
    for (int j = 0; j < ntot_; ++j) {
      if (stat_[j] == VarStatus::Basic || xval_[j] == 0.0) continue;
      for (std::size_t t = 0; t < cols_[j].idx.size(); ++t)
        scatter_[cols_[j].idx[t]] -= cols_[j].val[t] * xval_[j];
    }
    ftran_full(scatter_, w_);
    for (int i = 0; i < m_; ++i) xval_[basic_[i]] = w_[i];
  }

  void ftran_full(std::vector<double>& x, std::vector<double>& out) {
    lu_.ftran(x, out);
    for (const Eta& e : etas_) {
      double t = out[e.r] / e.wr;
      if (t != 0.0)
        for (const auto& [i, wi] : e.entries) out[i] -= wi * t;
      out[e.r] = t;
    }
  }

  void btran_full(std::vector<double>& c, std::vector<double>& out) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->r];
      for (const auto& [i, wi] : it->entries) s -= wi * c[i];
      c[it->r] = s / it->wr;
    }
    lu_.btran(c, out);
  }

  Outcome iterate() {
    int since_refactor = 0;
    while (true) {
      if (++iter_ > iter_cap_)
        throw SolverError("simplex iteration cap exceeded (" + std::to_string(iter_cap_) +
                          "); feasibility cannot be certified");
      // Pricing.
      std::fill(posbuf_.begin(), posbuf_.end(), 0.0);
      for (int i = 0; i < m_; ++i) posbuf_[i] = cost_of(basic_[i]);
      btran_full(posbuf_, y_);

      int enter = -1;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < ntot_; ++j) {
        if (stat_[j] == VarStatus::Basic) continue;
        if (lo_[j] == hi_[j]) continue;
        double d = cost_of(j);
        for (std::size_t t = 0; t < cols_[j].idx.size(); ++t)
          d -= cols_[j].val[t] * y_[cols_[j].idx[t]];
        int cand_dir = 0;
        if (stat_[j] == VarStatus::AtLower && d < -kDualTol)
          cand_dir = 1;
        else if (stat_[j] == VarStatus::AtUpper && d > kDualTol)
          cand_dir = -1;
        else if (stat_[j] == VarStatus::FreeZero && std::abs(d) > kDualTol)
          cand_dir = d < 0 ? 1 : -1;
        if (cand_dir == 0) continue;
        if (bland_) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) return Outcome::PhaseOptimal;

      // Direction through the basis.
      std::fill(scatter_.begin(), scatter_.end(), 0.0);
      for (std::size_t t = 0; t < cols_[enter].idx.size(); ++t)
        scatter_[cols_[enter].idx[t]] = cols_[enter].val[t];
      ftran_full(scatter_, w_);

      // Ratio test: basics move as x_B(t) = x_B - t*dir*w.
      double span = hi_[enter] - lo_[enter];
      double t_best = std::isfinite(span) ? span : kInfinity;
      int leave = -1;
      double leave_mag = 0.0;
      for (int i = 0; i < m_; ++i) {
        double wi = w_[i];
        if (std::abs(wi) <= kPivotTol) continue;
        int bv = basic_[i];
        double rate = dir * wi;
        double ti;
        if (rate > 0) {
          if (lo_[bv] == -kInfinity) continue;
          ti = (xval_[bv] - lo_[bv]) / rate;
        } else {
          if (hi_[bv] == kInfinity) continue;
          ti = (xval_[bv] - hi_[bv]) / rate;
        }
        if (ti < 0) ti = 0;
        if (ti < t_best - 1e-10) {
          t_best = ti;
          leave = i;
          leave_mag = std::abs(wi);
        } else if (leave >= 0 && ti < t_best + 1e-10) {
          if (std::abs(wi) > leave_mag + 1e-12 ||
              (std::abs(std::abs(wi) - leave_mag) <= 1e-12 && bv < basic_[leave])) {
            t_best = std::min(t_best, ti);
            leave = i;
            leave_mag = std::abs(wi);
          }
        }
      }
      if (!std::isfinite(t_best)) {
        if (phase_ == 1) throw SolverError("phase-1 direction unbounded");
        return Outcome::Unbounded;
      }

      if (t_best > 0) {
        for (int i = 0; i < m_; ++i) {
          if (w_[i] == 0.0) continue;
          xval_[basic_[i]] -= t_best * dir * w_[i];
        }
      }
      if (leave < 0) {
        // Bound flip, no basis change.
        xval_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
        stat_[enter] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      } else {
        int lv = basic_[leave];
        xval_[enter] = xval_[enter] + dir * t_best;
        stat_[enter] = VarStatus::Basic;
        if (dir * w_[leave] > 0) {
          xval_[lv] = lo_[lv];
          stat_[lv] = VarStatus::AtLower;
        } else {
          xval_[lv] = hi_[lv];
          stat_[lv] = VarStatus::AtUpper;
        }
        basic_[leave] = enter;
        Eta e;
        e.r = leave;
        e.wr = w_[leave];
        for (int i = 0; i < m_; ++i)
          if (i != leave && std::abs(w_[i]) > kDropTol) e.entries.emplace_back(i, w_[i]);
        etas_.push_back(std::move(e));
        if (++since_refactor >= kRefactorEvery) {
          refactor();
          since_refactor = 0;
        }
      }

      if (t_best <= 1e-10) {
        if (++degen_run_ > kStallLimit) bland_ = true;
      } else {
        degen_run_ = 0;
        bland_ = false;
      }
    }
  }

  LpSolution extract() {
    refactor();
    for (int attempt = 0; attempt < 2; ++attempt) {
      bool ok = true;
      for (int j = 0; j < ntot_; ++j) {
        double v = xval_[j];
        if (v < lo_[j]) {
          if (lo_[j] - v > kFeasTol) ok = false;
          xval_[j] = lo_[j];
        } else if (v > hi_[j]) {
          if (v - hi_[j] > kFeasTol) ok = false;
          xval_[j] = hi_[j];
        }
      }
      std::vector<double> vals(xval_.begin(), xval_.begin() + nv_);
      if (ok && check_feasibility(lp_, vals).empty()) {
        LpSolution sol;
        sol.status = LpStatus::Optimal;
        sol.values = std::move(vals);
        sol.iterations = static_cast<int>(iter_);
        double obj = 0.0;
        for (int j = 0; j < nv_; ++j) obj += obj_[j] * sol.values[j];
        sol.objective_value = obj;
        return sol;
      }
      recompute_basics();
    }
    throw SolverError("solution failed final feasibility certification");
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  Simplex s(lp);
  return s.run();
}

std::vector<RowViolation> check_feasibility(const LinearProgram& lp,
                                            const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(lp.num_vars()))
    throw ValidationError("check_feasibility: expected " + std::to_string(lp.num_vars()) +
                          " values, got " + std::to_string(values.size()));
  std::vector<RowViolation> out;
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    double lhs = 0.0;
    for (std::size_t t = 0; t < row.idx.size(); ++t) lhs += row.coef[t] * values[row.idx[t]];
    double res = lhs - row.rhs;
    bool bad = false;
    switch (row.rel) {
      case Relation::LessEq:
        bad = res > 1e-7;
        break;
      case Relation::Equal:
        bad = std::abs(res) > 1e-7;
        break;
      case Relation::GreaterEq:
        bad = res < -1e-7;
        break;
    }
    if (bad) out.push_back({i, res});
  }
  return out;
}

namespace {

std::string mps_name(const std::vector<std::string>& names, int j) {
  if (j < static_cast<int>(names.size()) && !names[j].empty()) {
    std::string s = names[j].substr(0, 8);
    for (char& c : s)
      if (c == ' ') c = '_';
    return s;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "X%07d", j);
  return buf;
}

std::string field(const std::string& s, std::size_t width) {
  std::string out = s;
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::string num12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name) {
  out << "NAME          " << name << "\n";
  out << "ROWS\n";
  out << " N  COST\n";
  auto row_name = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "R%07d", i);
    return std::string(buf);
  };
  for (int i = 0; i < lp.num_rows(); ++i) {
    char rel = lp.rows[i].rel == Relation::LessEq ? 'L'
               : lp.rows[i].rel == Relation::Equal ? 'E'
                                                   : 'G';
    out << " " << rel << "  " << row_name(i) << "\n";
  }
  // Column-major entries: objective first, then per-row coefficients.
  std::vector<std::vector<std::pair<int, double>>> bycol(lp.num_vars());
  for (int i = 0; i < lp.num_rows(); ++i)
    for (std::size_t t = 0; t < lp.rows[i].idx.size(); ++t)
      bycol[lp.rows[i].idx[t]].emplace_back(i, lp.rows[i].coef[t]);
  out << "COLUMNS\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    std::string cn = mps_name(lp.names, j);
    if (lp.objective[j] != 0.0)
      out << "    " << field(cn, 10) << field("COST", 10) << num12(lp.objective[j]) << "\n";
    for (const auto& [i, v] : bycol[j])
      out << "    " << field(cn, 10) << field(row_name(i), 10) << num12(v) << "\n";
  }
  out << "RHS\n";
  for (int i = 0; i < lp.num_rows(); ++i)
    if (lp.rows[i].rhs != 0.0)
      out << "    " << field("RHS", 10) << field(row_name(i), 10) << num12(lp.rows[i].rhs) << "\n";
  out << "BOUNDS\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    std::string cn = mps_name(lp.names, j);
    double lo = lp.lower[j], hi = lp.upper[j];
    if (lo == 0.0 && hi == kInfinity) continue;
    if (lo == hi) {
      out << " FX " << field("BND", 10) << field(cn, 10) << num12(lo) << "\n";
      continue;
    }
    if (lo == -kInfinity && hi == kInfinity) {
      out << " FR " << field("BND", 10) << field(cn, 10) << "\n";
      continue;
    }
    if (lo == -kInfinity)
      out << " MI " << field("BND", 10) << field(cn, 10) << "\n";
    else if (lo != 0.0)
      out << " LO " << field("BND", 10) << field(cn, 10) << num12(lo) << "\n";
    if (hi != kInfinity) out << " UP " << field("BND", 10) << field(cn, 10) << num12(hi) << "\n";
  }
  out << "ENDATA\n";
}

}  // namespace fairclust
