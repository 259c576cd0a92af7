#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abel/errors.hpp"

namespace abel {

// A countable abelian group in the representable class:
//
//   Z^free_rank  (+)  Z/d_1 (+) ... (+) Z/d_t  (+)  (+)_{k in N} Z/q_{k mod m}
//
// finite_orders are normalized to an invariant-factor chain d_1 | d_2 | ...
// on construction; the tail pattern is kept verbatim (it describes the
// shape of the infinite direct sum, not an isomorphism invariant list).
class GroupDescriptor {
public:
    GroupDescriptor() = default;
    GroupDescriptor(long long free_rank, std::vector<long long> finite_orders,
                    std::vector<long long> tail_pattern);

    long long free_rank() const { return free_rank_; }
    const std::vector<long long>& finite_orders() const { return finite_orders_; }
    const std::vector<long long>& tail_pattern() const { return tail_pattern_; }

    bool has_tail() const { return !tail_pattern_.empty(); }
    long long tail_period() const { return static_cast<long long>(tail_pattern_.size()); }
    long long tail_order(long long k) const {
        return tail_pattern_[static_cast<std::size_t>(k % tail_period())];
    }
    long long finite_order(std::size_t i) const { return finite_orders_[i]; }

    // 0 when some element has infinite order (free_rank >= 1), otherwise
    // lcm of all cyclic orders.
    long long exponent() const;
    bool is_bounded() const { return free_rank_ == 0; }
    bool is_finite_group() const { return free_rank_ == 0 && tail_pattern_.empty(); }

    // Least m >= 1 with m*G finite, or 0 when no such m exists
    // (free_rank >= 1).
    long long least_finite_scale() const;

    bool operator==(const GroupDescriptor& o) const = default;

private:
    long long free_rank_ = 0;
    std::vector<long long> finite_orders_;
    std::vector<long long> tail_pattern_;
};

// A group element with finite support, one sparse map per block.  Stored
// canonically: no zero entries, residues reduced into [0, order).
struct Element {
    std::map<long long, long long> free;   // coordinate -> integer
    std::map<long long, long long> finite; // index -> residue
    std::map<long long, long long> tail;   // coordinate -> residue

    bool is_zero() const { return free.empty() && finite.empty() && tail.empty(); }
    auto operator<=>(const Element&) const = default;
};

void validate_element(const GroupDescriptor& g, const Element& x);
Element canonicalize(const GroupDescriptor& g, Element x);

Element add(const GroupDescriptor& g, const Element& x, const Element& y);
Element negate(const GroupDescriptor& g, const Element& x);
Element sub(const GroupDescriptor& g, const Element& x, const Element& y);
Element scale(const GroupDescriptor& g, long long k, const Element& x);

// Least n >= 1 with n*x = 0, or 0 when x has infinite order.
long long element_order(const GroupDescriptor& g, const Element& x);

// A subgroup that is a product of one subgroup per coordinate, e.g. G[n]
// or mG.  For a cyclic coordinate of order q the field stores the ORDER of
// the allowed subgroup (a divisor of q); membership of residue a is
// a % (q / sub_order) == 0.  The free block is all-or-nothing up to an
// index: multiples_of(m) covers mZ (m=1 meaning all of Z).
struct SubgroupSpec {
    enum class FreeKind { zero, multiples };
    FreeKind free_kind = FreeKind::zero;
    long long free_index = 1; // meaningful for multiples: the subgroup mZ per coordinate
    std::vector<long long> finite_sub_order; // per finite coordinate
    std::vector<long long> tail_sub_order;   // per tail pattern slot

    bool contains(const GroupDescriptor& g, const Element& x) const;
    bool is_zero_subgroup(const GroupDescriptor& g) const;
    bool is_whole_group(const GroupDescriptor& g) const;
    bool is_finite(const GroupDescriptor& g) const;
};

// G[n] = {x : nx = 0}.  n = 0 gives all of G, n = 1 the zero subgroup.
SubgroupSpec n_torsion(const GroupDescriptor& g, long long n);

// mG = {mx : x in G}, m >= 1.
SubgroupSpec scale_group(const GroupDescriptor& g, long long m);

// Proper divisors of n: every d with d | n and d not in {0, n}.  For n = 0
// the result is the symbolic ALL-POSITIVE marker; callers must supply their
// own finite bound in that case.
struct ProperDivisors {
    bool all_positive = false;
    std::vector<long long> list; // populated when !all_positive
};
ProperDivisors proper_divisors(long long n);

// Divisors of n >= 1, ascending.
std::vector<long long> divisors_of(long long n);

long long gcd_ll(long long a, long long b);
long long lcm_ll(long long a, long long b); // throws on overflow

std::string to_string(const GroupDescriptor& g);
std::string to_string(const Element& x);

} // namespace abel
