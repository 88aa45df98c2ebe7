#ifndef MMG_PATTERN_HPP_
#define MMG_PATTERN_HPP_

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mmg {

// Hard limit on the number of study variables; patterns are stored as
// 64-bit masks.
inline constexpr int kMaxVariables = 64;

// Fixed-width binary vector over d study variables (1-based indices).
//
// The same representation serves three roles:
//   - response pattern: bit j set  <=>  variable j observed;
//   - connected pattern: bit j set <=>  variable j belongs to one connected
//     vertex subset of the working graph;
//   - model pattern: bit j set    <=>  variable j must be observed for a
//     row to qualify for fitting the associated submodel.
//
// String form writes variable 1 first, so "00110" has variables 3 and 4 set.
class Pattern {
 public:
  Pattern() = default;
  Pattern(int d, std::uint64_t bits);

  static Pattern zeros(int d) { return Pattern(d, 0); }
  static Pattern ones(int d);
  static Pattern from_string(std::string_view s);
  // 1-based variable indices.
  static Pattern from_indices(int d, const std::vector<int>& indices);

  int size() const { return d_; }
  bool test(int j) const;       // 1-based
  void set(int j, bool value = true);
  std::uint64_t bits() const { return bits_; }
  int count() const { return std::popcount(bits_); }
  bool none() const { return bits_ == 0; }
  bool all() const;

  // Flip every bit: observed <-> missing.
  Pattern complement() const;
  // Set inclusion of the marked variables.
  bool contains(const Pattern& other) const;
  bool intersects(const Pattern& other) const;
  // Smallest set variable index, or 0 when empty.
  int lowest() const;

  Pattern operator&(const Pattern& o) const;
  Pattern operator|(const Pattern& o) const;
  // Set difference: bits set here and not in o.
  Pattern minus(const Pattern& o) const;

  std::vector<int> indices() const;  // ascending, 1-based
  std::string to_string() const;

  friend bool operator==(const Pattern& a, const Pattern& b) = default;
  // Orders by raw mask value; used for map keys and deterministic output.
  friend bool operator<(const Pattern& a, const Pattern& b) {
    return a.bits_ < b.bits_;
  }

 private:
  void check_index(int j) const;
  void check_same_size(const Pattern& o) const;

  int d_ = 0;
  std::uint64_t bits_ = 0;
};

using ResponsePattern = Pattern;
using ConnectedPattern = Pattern;
using ModelPattern = Pattern;

enum class PatternOrder { Equal, Greater, Less, Incomparable };

// Componentwise dominance: r1 > r2 iff r1 >= r2 everywhere with at least
// one strict coordinate, so e.g. 101 > 001 while 101 and 011 are
// incomparable.
PatternOrder pattern_compare(const ResponsePattern& r1,
                             const ResponsePattern& r2);

}  // namespace mmg

#endif  // MMG_PATTERN_HPP_
