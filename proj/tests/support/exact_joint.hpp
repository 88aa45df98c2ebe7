#ifndef MMG_TESTS_SUPPORT_EXACT_JOINT_HPP_
#define MMG_TESTS_SUPPORT_EXACT_JOINT_HPP_

// Exact finite joints over binary study variables and response patterns,
// used as independent oracles for the identification algebra.  Everything
// here works by direct summation over states; nothing reuses the library's
// fitting or estimation paths.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "mmg/dataset.hpp"
#include "mmg/graph.hpp"
#include "mmg/pattern.hpp"

namespace mmg_test {

// One observed-data atom: probability mass of (x restricted to r, R = r).
// x is stored as a full d-bit assignment; coordinates missing under r are
// ignored by every observed-data computation.
struct ObservedAtom {
  std::uint32_t x = 0;  // bit j-1 = value of variable j
  mmg::Pattern r;
  double prob = 0;
};

class ExactJoint {
 public:
  ExactJoint(int d, std::vector<ObservedAtom> atoms)
      : d_(d), atoms_(std::move(atoms)) {}

  int dim() const { return d_; }
  const std::vector<ObservedAtom>& atoms() const { return atoms_; }

  static bool bit(std::uint32_t x, int var) { return (x >> (var - 1)) & 1u; }

  // p(x_S = values restricted to S, R >= required), summing over patterns
  // that observe `required` and over unconstrained coordinates.
  double prob_values_at_least(const mmg::Pattern& required, std::uint32_t x,
                              const mmg::Pattern& value_vars) const {
    double acc = 0;
    for (const auto& a : atoms_) {
      if (!a.r.contains(required)) continue;
      if (!match(a.x, x, value_vars)) continue;
      acc += a.prob;
    }
    return acc;
  }

  // Conditional p(x_T = x | x_C = x, R >= required); T and C disjoint.
  double conditional_at_least(const mmg::Pattern& required, std::uint32_t x,
                              const mmg::Pattern& target_vars,
                              const mmg::Pattern& cond_vars) const {
    double num = prob_values_at_least(required, x, target_vars | cond_vars);
    double den = prob_values_at_least(required, x, cond_vars);
    return den == 0 ? 0.0 : num / den;
  }

  // The extrapolation law the graph implies: product over connected
  // components s of the missing set of p(x_s | x_{N(s)}, R >= Nbar(s)).
  double mmg_extrapolation(const mmg::UndirectedGraph& g,
                           const mmg::Pattern& r, std::uint32_t x) const {
    double acc = 1.0;
    for (const auto& s : g.missing_components(r)) {
      const mmg::Pattern nb = g.neighbors(s);
      acc *= conditional_at_least(g.closed_neighborhood(s), x, s, nb);
    }
    return acc;
  }

  // Complete-case extrapolation p(x_miss | x_obs, R = 1...1).
  double ccmv_extrapolation(const mmg::Pattern& r, std::uint32_t x) const {
    const mmg::Pattern full = mmg::Pattern::ones(d_);
    return conditional_at_least(full, x, r.complement(), r);
  }

  // Full joint with the graph-implied extrapolation filled in:
  // q(x, r) = p(x_r, r) * mmg_extrapolation(x_rbar | x_r, r).
  // Calls fn(x, r, prob) for every completed state with positive mass.
  void for_each_completed(
      const mmg::UndirectedGraph& g,
      const std::function<void(std::uint32_t, const mmg::Pattern&, double)>&
          fn) const {
    for (const auto& a : atoms_) {
      const mmg::Pattern miss = a.r.complement();
      const auto miss_idx = miss.indices();
      const std::uint32_t n_fill = 1u << miss_idx.size();
      for (std::uint32_t b = 0; b < n_fill; ++b) {
        std::uint32_t x = a.x;
        for (std::size_t k = 0; k < miss_idx.size(); ++k) {
          const std::uint32_t bitmask = 1u << (miss_idx[k] - 1);
          if ((b >> k) & 1u)
            x |= bitmask;
          else
            x &= ~bitmask;
        }
        const double p = a.prob * mmg_extrapolation(g, a.r, x);
        if (p > 0) fn(x, a.r, p);
      }
    }
  }

  double total_mass() const {
    double acc = 0;
    for (const auto& a : atoms_) acc += a.prob;
    return acc;
  }

 private:
  static bool match(std::uint32_t a, std::uint32_t b,
                    const mmg::Pattern& vars) {
    const std::uint32_t m = static_cast<std::uint32_t>(vars.bits());
    return (a & m) == (b & m);
  }

  int d_;
  std::vector<ObservedAtom> atoms_;
};

// Expands an exact joint whose probabilities are integer counts / total
// into a DataMatrix whose empirical distribution equals the joint.
inline mmg::DataMatrix expand_to_data(
    int d, const std::vector<std::pair<ObservedAtom, int>>& counted_atoms) {
  std::vector<std::vector<double>> rows;
  for (const auto& [atom, count] : counted_atoms) {
    std::vector<double> row(d, std::numeric_limits<double>::quiet_NaN());
    for (int j = 1; j <= d; ++j)
      if (atom.r.test(j)) row[j - 1] = ExactJoint::bit(atom.x, j) ? 1.0 : 0.0;
    for (int c = 0; c < count; ++c) rows.push_back(row);
  }
  std::vector<mmg::ColumnSpec> cols;
  for (int j = 1; j <= d; ++j)
    cols.push_back({"x" + std::to_string(j), mmg::ColumnKind::Binary, 0});
  Eigen::MatrixXd values(static_cast<int>(rows.size()), d);
  std::vector<mmg::ResponsePattern> pats;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    mmg::Pattern r = mmg::Pattern::zeros(d);
    for (int j = 0; j < d; ++j) {
      values(static_cast<int>(i), j) = rows[i][j];
      if (!std::isnan(rows[i][j])) r.set(j + 1);
    }
    pats.push_back(r);
  }
  return mmg::DataMatrix(std::move(cols), std::move(values), std::move(pats));
}

// The three-variable binary chain toy joint used by the estimator algebra
// tests.  Patterns: 111 (complete), 011, 010, 001, 110.  Counts sum to
// `total()`; probabilities are counts / total.
struct ChainToy {
  // count111[x] over x in {0..7} (bit j-1 = variable j), etc.
  std::vector<int> count111 = {30, 20, 40, 60, 25, 45, 55, 85};  // 360
  // r = 011: observed (x2, x3); index = x2 + 2*x3
  std::vector<int> count011 = {40, 30, 20, 50};  // 140
  // r = 010: observed x2; index = x2
  std::vector<int> count010 = {60, 80};  // 140
  // r = 001: observed x3; index = x3
  std::vector<int> count001 = {70, 90};  // 160
  // r = 110: observed (x1, x2); index = x1 + 2*x2
  std::vector<int> count110 = {50, 40, 60, 50};  // 200

  int total() const { return 360 + 140 + 140 + 160 + 200; }  // 1000

  std::vector<std::pair<ObservedAtom, int>> counted_atoms() const {
    std::vector<std::pair<ObservedAtom, int>> out;
    const double t = total();
    auto add = [&](std::uint32_t x, const char* r, int count) {
      if (count > 0)
        out.push_back({{x, mmg::Pattern::from_string(r),
                        static_cast<double>(count) / t},
                       count});
    };
    for (std::uint32_t x = 0; x < 8; ++x) add(x, "111", count111[x]);
    for (int x2 = 0; x2 < 2; ++x2)
      for (int x3 = 0; x3 < 2; ++x3)
        add(static_cast<std::uint32_t>(2 * x2 + 4 * x3), "011",
            count011[x2 + 2 * x3]);
    for (int x2 = 0; x2 < 2; ++x2)
      add(static_cast<std::uint32_t>(2 * x2), "010", count010[x2]);
    for (int x3 = 0; x3 < 2; ++x3)
      add(static_cast<std::uint32_t>(4 * x3), "001", count001[x3]);
    for (int x1 = 0; x1 < 2; ++x1)
      for (int x2 = 0; x2 < 2; ++x2)
        add(static_cast<std::uint32_t>(x1 + 2 * x2), "110",
            count110[x1 + 2 * x2]);
    return out;
  }

  ExactJoint joint() const {
    std::vector<ObservedAtom> atoms;
    for (const auto& [a, c] : counted_atoms()) atoms.push_back(a);
    return ExactJoint(3, atoms);
  }

  mmg::DataMatrix data() const { return expand_to_data(3, counted_atoms()); }
};

}  // namespace mmg_test

#endif  // MMG_TESTS_SUPPORT_EXACT_JOINT_HPP_
