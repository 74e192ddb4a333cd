#include "critbench/ilp.hpp"

#include <gmpxx.h>

#include <cstdlib>
#include <optional>
#include <utility>

#include "critbench/error.hpp"

namespace critbench {

std::uint32_t IlpModel::add_var(std::string name, std::int64_t cost) {
  names.push_back(std::move(name));
  objective.push_back(cost);
  return static_cast<std::uint32_t>(names.size() - 1);
}

void IlpModel::add_constraint(std::vector<LinearTerm> terms, Sense sense, std::int64_t rhs,
                              std::string name) {
  constraints.push_back(Constraint{std::move(terms), sense, rhs, std::move(name)});
}

namespace {

struct Overflow {};

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Reduced fraction with int64 parts; any result that does not fit throws
// Overflow and the caller restarts with GMP rationals.
class Rat {
 public:
  Rat(std::int64_t n = 0) : n_(n), d_(1) {}

  static Rat make(i128 n, i128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (d != 1) {
      const i128 g = gcd128(n, d);
      if (g > 1) {
        n /= g;
        d /= g;
      }
    }
    constexpr i128 lo = INT64_MIN + 1, hi = INT64_MAX;
    if (n < lo || n > hi || d > hi) throw Overflow{};
    Rat r;
    r.n_ = static_cast<std::int64_t>(n);
    r.d_ = static_cast<std::int64_t>(d);
    return r;
  }

  friend Rat operator+(const Rat& a, const Rat& b) {
    if (a.d_ == 1 && b.d_ == 1) return make(i128(a.n_) + b.n_, 1);
    return make(i128(a.n_) * b.d_ + i128(b.n_) * a.d_, i128(a.d_) * b.d_);
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    if (a.d_ == 1 && b.d_ == 1) return make(i128(a.n_) - b.n_, 1);
    return make(i128(a.n_) * b.d_ - i128(b.n_) * a.d_, i128(a.d_) * b.d_);
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    return make(i128(a.n_) * b.n_, i128(a.d_) * b.d_);
  }
  friend Rat operator/(const Rat& a, const Rat& b) {
    return make(i128(a.n_) * b.d_, i128(a.d_) * b.n_);
  }
  Rat operator-() const { return make(-i128(n_), d_); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return i128(a.n_) * b.d_ < i128(b.n_) * a.d_;
  }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator==(const Rat& a, const Rat& b) { return a.n_ == b.n_ && a.d_ == b.d_; }

  int sign() const { return (n_ > 0) - (n_ < 0); }
  bool integral() const { return d_ == 1; }
  std::int64_t floor() const {
    std::int64_t q = n_ / d_;
    if (n_ % d_ != 0 && n_ < 0) --q;
    return q;
  }
  std::string str() const {
    return d_ == 1 ? std::to_string(n_) : std::to_string(n_) + "/" + std::to_string(d_);
  }

 private:
  std::int64_t n_;
  std::int64_t d_;
};

int sign(const Rat& r) { return r.sign(); }
bool integral(const Rat& r) { return r.integral(); }
std::int64_t floor_of(const Rat& r) { return r.floor(); }
std::string str(const Rat& r) { return r.str(); }

int sign(const mpq_class& q) { return sgn(q); }
bool integral(const mpq_class& q) { return q.get_den() == 1; }
std::int64_t floor_of(const mpq_class& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!f.fits_slong_p()) throw Error("ilp", "value exceeds 64 bits");
  return f.get_si();
}
std::string str(const mpq_class& q) { return q.get_str(); }

mpq_class from_i64(std::int64_t v, const mpq_class*) { return mpq_class(static_cast<long>(v)); }
Rat from_i64(std::int64_t v, const Rat*) { return Rat(v); }

template <class Num>
Num num(std::int64_t v) {
  return from_i64(v, static_cast<const Num*>(nullptr));
}

struct Bound {
  std::uint32_t var;
  Sense sense;
  std::int64_t value;
};

template <class Num>
struct LpResult {
  IlpStatus status = IlpStatus::Infeasible;
  Num value;
  std::vector<Num> x;
};

template <class Num>
class Simplex {
 public:
  Simplex(const IlpModel& model, const std::vector<Bound>& bounds) : k_(model.size()) {
    std::vector<Constraint> rows = model.constraints;
    for (const auto& b : bounds) rows.push_back(Constraint{{{b.var, 1}}, b.sense, b.value, {}});

    // Column layout: model vars, then one slack/surplus per inequality, then
    // one artificial per >= or = row.
    std::size_t slacks = 0, arts = 0;
    for (auto& r : rows) {
      if (r.rhs < 0) {
        for (auto& t : r.terms) t.coef = -t.coef;
        r.rhs = -r.rhs;
        if (r.sense != Sense::Equal) r.sense = r.sense == Sense::LessEq ? Sense::GreaterEq : Sense::LessEq;
      }
      if (r.sense != Sense::Equal) ++slacks;
      if (r.sense != Sense::LessEq) ++arts;
    }
    art_first_ = k_ + slacks;
    n_ = art_first_ + arts;
    m_ = rows.size();
    a_.assign(m_, std::vector<Num>(n_ + 1, num<Num>(0)));
    basis_.assign(m_, 0);
    std::size_t s = k_, art = art_first_;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& r = rows[i];
      for (const auto& t : r.terms) a_[i][t.var] = a_[i][t.var] + num<Num>(t.coef);
      a_[i][n_] = num<Num>(r.rhs);
      if (r.sense == Sense::LessEq) {
        a_[i][s] = num<Num>(1);
        basis_[i] = s++;
      } else if (r.sense == Sense::GreaterEq) {
        a_[i][s++] = num<Num>(-1);
        a_[i][art] = num<Num>(1);
        basis_[i] = art++;
      } else {
        a_[i][art] = num<Num>(1);
        basis_[i] = art++;
      }
    }
    cost_.assign(n_, num<Num>(0));
    for (std::size_t j = 0; j < k_; ++j) cost_[j] = num<Num>(model.objective[j]);
  }

  LpResult<Num> solve() {
    LpResult<Num> res;
    // Phase 1: maximize -sum(artificials).
    if (art_first_ < n_) {
      std::vector<Num> c1(n_, num<Num>(0));
      for (std::size_t j = art_first_; j < n_; ++j) c1[j] = num<Num>(-1);
      price(c1);
      if (!iterate(n_)) throw Error("ilp", "phase 1 unbounded");
      if (sign(r_[n_]) != 0) return res;  // infeasible
      drive_out_artificials();
    }
    price(cost_);
    if (!iterate(art_first_)) {
      res.status = IlpStatus::Unbounded;
      return res;
    }
    res.status = IlpStatus::Optimal;
    res.value = num<Num>(0) - r_[n_];
    res.x.assign(k_, num<Num>(0));
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < k_) res.x[basis_[i]] = a_[i][n_];
    }
    return res;
  }

 private:
  // Reduced costs r_j = c_j - c_B B^-1 A_j; r_[n_] holds minus the objective.
  void price(const std::vector<Num>& c) {
    r_.assign(n_ + 1, num<Num>(0));
    for (std::size_t j = 0; j < n_; ++j) r_[j] = c[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const Num& cb = c[basis_[i]];
      if (sign(cb) == 0) continue;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (sign(a_[i][j]) != 0) r_[j] = r_[j] - cb * a_[i][j];
      }
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    auto& row = a_[pr];
    const Num p = row[pc];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j <= n_; ++j) {
      if (sign(row[j]) != 0) {
        row[j] = row[j] / p;
        nz.push_back(j);
      }
    }
    auto eliminate = [&](std::vector<Num>& target) {
      const Num f = target[pc];
      if (sign(f) == 0) return;
      for (std::size_t j : nz) target[j] = target[j] - f * row[j];
    };
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != pr) eliminate(a_[i]);
    }
    eliminate(r_);
    basis_[pr] = pc;
  }

  // Runs pivots over columns [0, limit); false when unbounded.
  bool iterate(std::size_t limit) {
    bool bland = false;
    int degenerate = 0;
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < limit; ++j) {
        if (sign(r_[j]) <= 0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (!enter || r_[j] > r_[*enter]) enter = j;
      }
      if (!enter) return true;
      const std::size_t pc = *enter;
      std::optional<std::size_t> leave;
      Num best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (sign(a_[i][pc]) <= 0) continue;
        Num ratio = a_[i][n_] / a_[i][pc];
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      if (sign(best) == 0) {
        if (++degenerate > 50) bland = true;
      } else {
        degenerate = 0;
      }
      pivot(*leave, pc);
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < art_first_) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < art_first_ && !col; ++j) {
        if (sign(a_[i][j]) != 0) col = j;
      }
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        // Redundant row.
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        --m_;
      }
    }
  }

  std::size_t k_ = 0;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t art_first_ = 0;
  std::vector<std::vector<Num>> a_;
  std::vector<Num> r_;
  std::vector<Num> cost_;
  std::vector<std::size_t> basis_;
};

template <class Num>
IlpSolution branch_and_bound(const IlpModel& model, const IlpOptions& options) {
  IlpSolution best;
  std::optional<std::int64_t> incumbent;
  std::vector<std::vector<Bound>> stack{{}};
  while (!stack.empty()) {
    auto bounds = std::move(stack.back());
    stack.pop_back();
    if (++best.nodes > options.node_limit) throw Error("ilp", "branch-and-bound node limit reached");
    auto lp = Simplex<Num>(model, bounds).solve();
    if (lp.status == IlpStatus::Infeasible) continue;
    if (lp.status == IlpStatus::Unbounded) {
      best.status = IlpStatus::Unbounded;
      best.values.clear();
      return best;
    }
    if (incumbent && floor_of(lp.value) <= *incumbent) continue;
    std::optional<std::size_t> frac;
    for (std::size_t j = 0; j < lp.x.size() && !frac; ++j) {
      if (!integral(lp.x[j])) frac = j;
    }
    if (!frac) {
      incumbent = floor_of(lp.value);
      best.status = IlpStatus::Optimal;
      best.objective = *incumbent;
      best.values.clear();
      for (const auto& v : lp.x) best.values.push_back(floor_of(v));
      continue;
    }
    const auto var = static_cast<std::uint32_t>(*frac);
    const std::int64_t f = floor_of(lp.x[*frac]);
    auto up = bounds;
    up.push_back({var, Sense::GreaterEq, f + 1});
    auto down = std::move(bounds);
    down.push_back({var, Sense::LessEq, f});
    stack.push_back(std::move(up));
    stack.push_back(std::move(down));
  }
  return best;
}

void check_model(const IlpModel& model) {
  if (model.objective.size() != model.names.size()) throw Error("ilp", "objective size mismatch");
  for (const auto& c : model.constraints) {
    for (const auto& t : c.terms) {
      if (t.var >= model.size()) throw Error("ilp", "constraint names an unknown variable");
    }
  }
}

}  // namespace

IlpSolution solve_ilp(const IlpModel& model, const IlpOptions& options) {
  check_model(model);
  try {
    return branch_and_bound<Rat>(model, options);
  } catch (const Overflow&) {
    auto s = branch_and_bound<mpq_class>(model, options);
    s.used_bignum = true;
    return s;
  }
}

std::string solve_lp_relaxation(const IlpModel& model) {
  check_model(model);
  auto describe = [](const auto& lp) -> std::string {
    if (lp.status == IlpStatus::Infeasible) return "infeasible";
    if (lp.status == IlpStatus::Unbounded) return "unbounded";
    return str(lp.value);
  };
  try {
    return describe(Simplex<Rat>(model, {}).solve());
  } catch (const Overflow&) {
    return describe(Simplex<mpq_class>(model, {}).solve());
  }
}

}  // namespace critbench
