#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abel/setexpr.hpp"

namespace abel {

// A coset rep + G[modulus].  modulus 0 denotes the whole group (unbounded
// case) and is stored with rep 0; modulus 1 never appears (singletons live
// in the finite part).
struct Coset {
    Element rep;
    long long modulus = 0;
    auto operator<=>(const Coset&) const = default;
};

// Closed set in normal form: a finite part plus finitely many cosets of
// torsion subgroups, no coset contained in another, no finite element
// inside a coset, cosets sorted by (modulus, rep), reps reduced modulo
// their subgroup.
struct ClosedSet {
    std::vector<Element> finite_part; // sorted, unique
    std::vector<Coset> cosets;

    bool structurally_equal(const ClosedSet& o) const {
        return finite_part == o.finite_part && cosets == o.cosets;
    }
};

// x in g + G[n], i.e. n*(x - g) = 0.
bool elementary_member(const Element& x, const Element& g, long long n,
                       const GroupDescriptor& grp);

// Reduce a coset to canonical form: minimal equivalent modulus, rep reduced
// modulo G[modulus].
Coset canonical_coset(const GroupDescriptor& grp, Element rep, long long modulus);

ClosedSet normalize_closed(const GroupDescriptor& grp, ClosedSet raw);

bool closed_member(const GroupDescriptor& grp, const ClosedSet& a, const Element& x);
// Exact subset decision; correct for arbitrary normal-form operands.
// Enumeration over a finite quotient caps at an internal budget.
bool closed_subset(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b);
bool closed_equal(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b);
bool closed_is_whole_group(const GroupDescriptor& grp, const ClosedSet& a);

ClosedSet closed_union(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b);
ClosedSet closed_intersect(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b);

ClosedSet whole_group_closed(const GroupDescriptor& grp);

// Exact closure of a symbolic set in the topology whose closed sets are
// finite unions of finite sets and torsion-subgroup cosets: finite leaves
// contribute themselves, each infinite leaf contributes shift + G[level]
// from its almost-torsion decomposition.
ClosedSet zariski_closure(const SetExprPtr& x, const GroupDescriptor& grp);

// Density decision with a certificate.
struct DensityCertificate {
    bool dense = false;
    // Unbounded case: the scale that kills the set (not dense), or
    // witness_affine (dense).  Bounded case: the translate g that admits no
    // almost-m-torsion part (not dense), or per-translate extraction count.
    std::optional<long long> killing_scale;
    bool witness_affine = false;
    std::optional<Element> failing_translate;
    std::size_t translates_checked = 0;
    std::string mode; // "unbounded", "bounded", "finite-group"
};

DensityCertificate is_zariski_dense(const SetExprPtr& x, const GroupDescriptor& grp);

// Independent finite-evidence oracle: the cheapest normal-form closed set
// covering the first n enumerated elements, searching unions of at most
// coset_bound cosets with moduli dividing exponent(G) (modulus_bound caps
// them further) and reps drawn from the prefix.  A coset is eligible only
// when it covers at least ceil(n/4) prefix points, so finite sets win at
// small n and stream structure wins as n grows.
ClosedSet closure_oracle_prefix(const SetExprPtr& x, const GroupDescriptor& grp, std::size_t n,
                                long long modulus_bound, std::size_t coset_bound);

std::string to_string(const GroupDescriptor& grp, const ClosedSet& a);

} // namespace abel
