#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "abel/group.hpp"

namespace abel {

// Symbolic countable subsets of a group.  Leaves:
//
//   Finite(L)                     the listed elements
//   Affine(a, b)                  { a + k*b : k in N }
//   BlockStream(c, u, start, step){ c + shift_k(u) : k in N }, where
//                                 shift_k moves u's tail support (inside
//                                 [0, step)) to offset start + k*step
//
// plus Translate(g, inner) and Union(parts).  BlockStream invariants: step
// is a multiple of the tail period, template support lies in tail
// coordinates within [0, step), and blocks sit past supp(c) (the
// constructor raises start, in step increments, until they do).
struct SetExpr;
using SetExprPtr = std::shared_ptr<const SetExpr>;

struct FiniteLeaf {
    std::vector<Element> elements; // sorted, deduplicated in normal form
};

struct AffineLeaf {
    Element a;
    Element b;
};

struct BlockLeaf {
    Element c;        // offset; tail support < start
    Element templ;    // support only in tail coordinates within [0, step)
    long long start = 0;
    long long step = 1;
};

struct TranslateNode {
    Element g;
    SetExprPtr inner;
};

struct UnionNode {
    std::vector<SetExprPtr> parts;
};

struct SetExpr {
    std::variant<FiniteLeaf, AffineLeaf, BlockLeaf, TranslateNode, UnionNode> node;
};

SetExprPtr make_finite(std::vector<Element> elements);
SetExprPtr make_affine(Element a, Element b);
// Validates the block invariants against g and raises start past supp(c).
SetExprPtr make_block(const GroupDescriptor& g, Element c, Element templ, long long start,
                      long long step);
SetExprPtr make_translate(Element g, SetExprPtr inner);
SetExprPtr make_union(std::vector<SetExprPtr> parts);

// The k-th element of a BlockStream leaf.
Element block_element(const GroupDescriptor& g, const BlockLeaf& b, long long k);
// The template placed at block offset start + k*step (no c added).
Element placed_template(const GroupDescriptor& g, const BlockLeaf& b, long long k);
// Order of the placed template (independent of k).
long long placed_template_order(const GroupDescriptor& g, const BlockLeaf& b);

// Canonical form: Translate absorbed into leaves, degenerate leaves folded
// to Finite, unions flattened (at most one Finite leaf, kept first).
// Denotes the same subset of g.
SetExprPtr normalize(const SetExprPtr& x, const GroupDescriptor& g);

bool is_infinite(const SetExprPtr& x, const GroupDescriptor& g); // x normalized

// First n distinct elements in canonical order (round-robin across union
// parts, k ascending within leaves, first occurrence wins).
std::vector<Element> enumerate_prefix(const SetExprPtr& x, const GroupDescriptor& g,
                                      std::size_t n);

// { n*e : e in X }, n >= 1.
SetExprPtr scale_set(long long n, const SetExprPtr& x, const GroupDescriptor& g);

// Outcome of the almost-torsion classification.
struct NotWitness {
    long long d = 0; // divisor whose fiber is infinite
    Element g;       // the fiber's value: infinitely many x with d*x = g
    bool operator==(const NotWitness&) const = default;
};

struct TorsionClass {
    enum class Kind { finite_set, almost_torsion, not_almost_torsion };
    Kind kind = Kind::finite_set;
    long long level = 0;               // for almost_torsion (never 1)
    std::optional<NotWitness> witness; // for not_almost_torsion
    bool operator==(const TorsionClass&) const = default;
};

// Exact classification of a normalized expression: the denoted set either
// is finite, is almost-n-torsion for a unique n != 1, or has an infinite
// fiber {x : dx = g} over some proper divisor d of its level bound.
TorsionClass classify(const SetExprPtr& x, const GroupDescriptor& g);

// Finite-evidence report over a prefix of the enumeration.
struct FiberStat {
    long long d = 0;
    Element value;
    std::size_t count = 0;
};

struct PrefixReport {
    std::size_t prefix_len = 0;
    long long candidate_level = 0; // lcm of prefix orders when finite and stable, else 0
    bool candidate_stable = false;
    std::size_t threshold = 0; // fibers above this are flagged
    std::vector<FiberStat> max_fiber_per_divisor;
    std::vector<FiberStat> flagged;
    bool consistent = false; // no flagged fiber
    // Any finite threshold is a heuristic stand-in for "fiber is finite";
    // the report carries that caveat explicitly.
    std::string caveat;
};

PrefixReport classify_prefix(const std::vector<Element>& prefix, const GroupDescriptor& g,
                             long long d_bound, std::optional<std::size_t> threshold = {});
PrefixReport classify_prefix(const SetExprPtr& x, const GroupDescriptor& g, std::size_t n,
                             long long d_bound, std::optional<std::size_t> threshold = {});

// Decompose an infinite normalized expression as g + S with S almost-n-torsion.
struct Extraction {
    Element shift;
    SetExprPtr set;
    long long level = 0;
};
std::optional<Extraction> extract_almost_torsion(const SetExprPtr& x, const GroupDescriptor& g);

std::string to_string(const SetExprPtr& x);

} // namespace abel
