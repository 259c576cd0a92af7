#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abel/setexpr.hpp"
#include "abel/torus.hpp"

namespace abel {

// Random-access view of an integer stream in canonical enumeration order;
// nullopt past the end of a truncated stream.
using IntStreamFn = std::function<std::optional<long long>(std::size_t)>;

IntStreamFn stream_from_vector(std::vector<long long> values);
// G must be Z (free rank 1, no torsion); elements map to their single free
// coordinate.
IntStreamFn stream_from_setexpr(const SetExprPtr& x, const GroupDescriptor& g);

// One density request: hit `box` (intersected with T[level]^d when
// level >= 2) with the image of the referenced set.
struct Requirement {
    std::size_t id = 0;
    long long level = 0; // target subgroup T[level]^d; 0 means the full torus
    ArcBox box;

    void validate(std::size_t dim) const;
};

// Verified solution record: | s*x_i - y_i - n_i | < eps_i per dimension,
// margins strictly positive under exact rational arithmetic.
struct Witness {
    std::size_t requirement_id = 0;
    long long s = 0;
    std::vector<Int> shifts;
    TorusPoint achieved; // s*x on the torus
    std::vector<Rat> margins;
};

// Re-check a witness against the point it certifies.  Exact.
bool verify_witness(const Requirement& req, long long s, const TorusPoint& x);

struct DyadicBoxState {
    std::vector<Rat> center;
    std::vector<Rat> radius;
};

struct RefineStep {
    std::size_t requirement_id = 0;
    long long s = 0;
    DyadicBoxState box_after;
};

struct OrbitResult {
    TorusPoint x;
    std::vector<Witness> witnesses;
    std::vector<RefineStep> trace;
};

// Nested-interval constructor: shrink a product of dyadic arcs through the
// requirement list, drawing for each requirement the first stream element
// with |s| * len(I) >= 2, and return the exact center with per-requirement
// witnesses.  Requirements must be at level 0.
OrbitResult find_orbit_point(const IntStreamFn& stream, const std::vector<Requirement>& reqs,
                             std::size_t dim);

struct GenId {
    enum class Block { free_blk = 0, finite_blk = 1, tail_blk = 2 };
    Block block = Block::free_blk;
    long long index = 0;
    auto operator<=>(const GenId&) const = default;
};

std::string to_string(const GenId& g);

// Partial homomorphism into T^d presented on finitely many generators.
struct GeneratorAssignment {
    std::size_t dim = 0;
    std::map<GenId, TorusPoint> images;
};

// Image of an element whose whole support is assigned.
std::optional<TorusPoint> image_of(const GroupDescriptor& g, const GeneratorAssignment& asg,
                                   const Element& x);

struct HomWitness {
    std::size_t family = 0;
    std::size_t requirement_id = 0;
    Element element;
    TorusPoint image;
};

struct HomResult {
    GeneratorAssignment assignment;
    std::vector<HomWitness> witnesses;
    std::size_t backtracks = 0;
};

// Assign images to finitely many generators so that, for every requirement
// attached to family member j, some enumerated element of S_j lands in the
// requested box intersected with T[n_j]^d.  Families must classify as
// almost-torsion; level-0 members must be affine progressions along a
// single free coordinate (they run through the nested-interval engine, so
// the Z case coincides with find_orbit_point exactly).
HomResult construct_dense_homomorphism(const GroupDescriptor& g,
                                       const std::vector<SetExprPtr>& family, std::size_t dim,
                                       const std::vector<std::vector<Requirement>>& reqs,
                                       std::size_t backtrack_budget = 32);

// Formal-valued assignment used when exact irrational coordinates are
// needed for injectivity.
struct FormalAssignment {
    std::size_t dim = 0;
    std::map<GenId, FormalTorusPoint> images;
};

FormalAssignment to_formal(const GroupDescriptor& g, const GeneratorAssignment& asg);
std::optional<FormalTorusPoint> image_of(const GroupDescriptor& g, const FormalAssignment& asg,
                                         const Element& x);

// Augment unassigned generators (fresh exact-independent symbols on free
// generators, exact order-q coordinates on torsion generators) until the
// induced map is injective on the first `window` enumerated elements of
// the subgroup generated by the assignment domain plus the free and finite
// blocks.  A forced collision throws validation_error naming the pair.
FormalAssignment ensure_injective_window(const GroupDescriptor& g, const FormalAssignment& asg,
                                         std::size_t window);

struct BoxHit {
    std::size_t hits = 0;
    std::optional<std::size_t> first_hit;
};

struct FlowReport {
    std::size_t points = 0;
    std::vector<BoxHit> boxes;
    double mean_star_discrepancy = 0;
    // Finite-dimensional, finite-precision scale-down; stated on every report.
    std::string scope_note;
};

// Visit { x0 + s*alpha : s among the first n stream elements } and report
// per-box coverage plus the empirical discrepancy of the visited points.
FlowReport flow_simulate(const IntStreamFn& stream, const TorusPoint& alpha, const TorusPoint& x0,
                         const std::vector<ArcBox>& boxes, std::size_t n);

// Finite net of requirements expressing "dense in T[level]^d" at pitch eps:
// level 0 covers the torus with a dyadic grid of eps-radius boxes; level
// n >= 2 places one tight box per point of T[n]^d.  level 1 is rejected.
std::vector<Requirement> requirement_net(long long level, std::size_t dim, const Rat& eps);

} // namespace abel
