#include "mmg/pattern.hpp"

#include <stdexcept>

namespace mmg {

Pattern::Pattern(int d, std::uint64_t bits) : d_(d), bits_(bits) {
  if (d < 0 || d > kMaxVariables)
    throw std::invalid_argument("pattern width must be in 0..64, got " +
                                std::to_string(d));
  if (d < kMaxVariables && (bits >> d) != 0)
    throw std::invalid_argument("pattern bits exceed declared width");
}

Pattern Pattern::ones(int d) {
  if (d < 0 || d > kMaxVariables)
    throw std::invalid_argument("pattern width must be in 0..64");
  return Pattern(d, d == kMaxVariables ? ~0ull : ((1ull << d) - 1));
}

Pattern Pattern::from_string(std::string_view s) {
  if (s.size() > static_cast<std::size_t>(kMaxVariables))
    throw std::invalid_argument("pattern string longer than 64");
  Pattern p(static_cast<int>(s.size()), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      p.set(static_cast<int>(i) + 1);
    else if (s[i] != '0')
      throw std::invalid_argument("pattern string must be 0/1, got '" +
                                  std::string(s) + "'");
  }
  return p;
}

Pattern Pattern::from_indices(int d, const std::vector<int>& indices) {
  Pattern p(d, 0);
  for (int j : indices) p.set(j);
  return p;
}

bool Pattern::test(int j) const {
  check_index(j);
  return (bits_ >> (j - 1)) & 1ull;
}

void Pattern::set(int j, bool value) {
  check_index(j);
  if (value)
    bits_ |= 1ull << (j - 1);
  else
    bits_ &= ~(1ull << (j - 1));
}

bool Pattern::all() const { return *this == Pattern::ones(d_); }

Pattern Pattern::complement() const {
  return Pattern(d_, bits_ ^ Pattern::ones(d_).bits_);
}

bool Pattern::contains(const Pattern& other) const {
  check_same_size(other);
  return (bits_ & other.bits_) == other.bits_;
}

bool Pattern::intersects(const Pattern& other) const {
  check_same_size(other);
  return (bits_ & other.bits_) != 0;
}

int Pattern::lowest() const {
  return bits_ == 0 ? 0 : std::countr_zero(bits_) + 1;
}

Pattern Pattern::operator&(const Pattern& o) const {
  check_same_size(o);
  return Pattern(d_, bits_ & o.bits_);
}

Pattern Pattern::operator|(const Pattern& o) const {
  check_same_size(o);
  return Pattern(d_, bits_ | o.bits_);
}

Pattern Pattern::minus(const Pattern& o) const {
  check_same_size(o);
  return Pattern(d_, bits_ & ~o.bits_);
}

std::vector<int> Pattern::indices() const {
  std::vector<int> out;
  out.reserve(count());
  for (std::uint64_t b = bits_; b != 0; b &= b - 1)
    out.push_back(std::countr_zero(b) + 1);
  return out;
}

std::string Pattern::to_string() const {
  std::string s(d_, '0');
  for (int j = 1; j <= d_; ++j)
    if (test(j)) s[j - 1] = '1';
  return s;
}

void Pattern::check_index(int j) const {
  if (j < 1 || j > d_)
    throw std::invalid_argument("variable index " + std::to_string(j) +
                                " out of range 1.." + std::to_string(d_));
}

void Pattern::check_same_size(const Pattern& o) const {
  if (d_ != o.d_)
    throw std::invalid_argument("pattern width mismatch: " +
                                std::to_string(d_) + " vs " +
                                std::to_string(o.d_));
}

PatternOrder pattern_compare(const ResponsePattern& r1,
                             const ResponsePattern& r2) {
  if (r1.size() != r2.size())
    throw std::invalid_argument("pattern_compare: width mismatch");
  if (r1.bits() == r2.bits()) return PatternOrder::Equal;
  bool geq = (r1.bits() & r2.bits()) == r2.bits();
  bool leq = (r1.bits() & r2.bits()) == r1.bits();
  if (geq) return PatternOrder::Greater;
  if (leq) return PatternOrder::Less;
  return PatternOrder::Incomparable;
}

}  // namespace mmg
