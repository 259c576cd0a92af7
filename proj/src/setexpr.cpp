#include "abel/setexpr.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace abel {

namespace {

template <class T>
SetExprPtr wrap(T node) {
    return std::make_shared<const SetExpr>(SetExpr{std::move(node)});
}

long long max_tail_coord(const Element& x) {
    return x.tail.empty() ? -1 : x.tail.rbegin()->first;
}

} // namespace

SetExprPtr make_finite(std::vector<Element> elements) {
    return wrap(FiniteLeaf{std::move(elements)});
}

SetExprPtr make_affine(Element a, Element b) { return wrap(AffineLeaf{std::move(a), std::move(b)}); }

SetExprPtr make_block(const GroupDescriptor& g, Element c, Element templ, long long start,
                      long long step) {
    if (step < 1) throw validation_error("block step must be >= 1");
    if (start < 0) throw validation_error("block start must be >= 0");
    c = canonicalize(g, std::move(c));

    if (!templ.free.empty() || !templ.finite.empty())
        throw validation_error("block template must live in tail coordinates");
    if (!templ.tail.empty()) {
        if (!g.has_tail()) throw validation_error("block template in group without tail");
        if (step % g.tail_period() != 0)
            throw validation_error("block step must be a multiple of the tail period");
        // Residues are interpreted at offset start; reduce them there.
        std::map<long long, long long> reduced;
        for (const auto& [j, v] : templ.tail) {
            if (j < 0 || j >= step)
                throw validation_error("block template support must lie within [0, step)");
            long long q = g.tail_order(start + j);
            long long r = ((v % q) + q) % q;
            if (r != 0) reduced[j] = r;
        }
        templ.tail = std::move(reduced);
    }

    // Blocks must sit past supp(c); raise start in step increments.
    long long mc = max_tail_coord(c);
    if (mc >= start) {
        long long deficit = mc + 1 - start;
        start += ((deficit + step - 1) / step) * step;
    }
    return wrap(BlockLeaf{std::move(c), std::move(templ), start, step});
}

SetExprPtr make_translate(Element g, SetExprPtr inner) {
    return wrap(TranslateNode{std::move(g), std::move(inner)});
}

SetExprPtr make_union(std::vector<SetExprPtr> parts) { return wrap(UnionNode{std::move(parts)}); }

Element placed_template(const GroupDescriptor& g, const BlockLeaf& b, long long k) {
    Element e;
    long long offset = b.start + k * b.step;
    for (const auto& [j, v] : b.templ.tail) e.tail[offset + j] = v;
    return canonicalize(g, std::move(e));
}

Element block_element(const GroupDescriptor& g, const BlockLeaf& b, long long k) {
    return add(g, b.c, placed_template(g, b, k));
}

long long placed_template_order(const GroupDescriptor& g, const BlockLeaf& b) {
    long long n = 1;
    for (const auto& [j, v] : b.templ.tail) {
        long long q = g.tail_order(b.start + j);
        n = lcm_ll(n, q / gcd_ll(q, v));
    }
    return n;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

SetExprPtr translate_into(const GroupDescriptor& grp, const Element& t, const SetExprPtr& x);

SetExprPtr normalize_rec(const SetExprPtr& x, const GroupDescriptor& g) {
    return std::visit(
        [&](const auto& node) -> SetExprPtr {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FiniteLeaf>) {
                std::vector<Element> es;
                es.reserve(node.elements.size());
                for (const Element& e : node.elements) es.push_back(canonicalize(g, e));
                std::sort(es.begin(), es.end());
                es.erase(std::unique(es.begin(), es.end()), es.end());
                return make_finite(std::move(es));
            } else if constexpr (std::is_same_v<T, AffineLeaf>) {
                Element a = canonicalize(g, node.a);
                Element b = canonicalize(g, node.b);
                long long ord = element_order(g, b);
                if (ord == 0) return make_affine(std::move(a), std::move(b));
                // Torsion direction: the orbit closes after ord steps.
                std::vector<Element> es;
                Element cur = a;
                for (long long k = 0; k < ord; ++k) {
                    es.push_back(cur);
                    cur = add(g, cur, b);
                }
                return normalize_rec(make_finite(std::move(es)), g);
            } else if constexpr (std::is_same_v<T, BlockLeaf>) {
                SetExprPtr rebuilt = make_block(g, node.c, node.templ, node.start, node.step);
                const auto& bl = std::get<BlockLeaf>(rebuilt->node);
                if (bl.templ.tail.empty()) return make_finite({bl.c});
                return rebuilt;
            } else if constexpr (std::is_same_v<T, TranslateNode>) {
                SetExprPtr inner = normalize_rec(node.inner, g);
                return normalize_rec(translate_into(g, canonicalize(g, node.g), inner), g);
            } else {
                std::vector<SetExprPtr> leaves;
                std::vector<Element> finite_pool;
                for (const SetExprPtr& p : node.parts) {
                    SetExprPtr q = normalize_rec(p, g);
                    if (const auto* u = std::get_if<UnionNode>(&q->node)) {
                        for (const SetExprPtr& sub : u->parts) {
                            if (const auto* f = std::get_if<FiniteLeaf>(&sub->node))
                                finite_pool.insert(finite_pool.end(), f->elements.begin(),
                                                   f->elements.end());
                            else
                                leaves.push_back(sub);
                        }
                    } else if (const auto* f = std::get_if<FiniteLeaf>(&q->node)) {
                        finite_pool.insert(finite_pool.end(), f->elements.begin(),
                                           f->elements.end());
                    } else {
                        leaves.push_back(q);
                    }
                }
                std::sort(finite_pool.begin(), finite_pool.end());
                finite_pool.erase(std::unique(finite_pool.begin(), finite_pool.end()),
                                  finite_pool.end());
                std::vector<SetExprPtr> parts;
                if (!finite_pool.empty() || leaves.empty())
                    parts.push_back(make_finite(std::move(finite_pool)));
                parts.insert(parts.end(), leaves.begin(), leaves.end());
                if (parts.size() == 1) return parts.front();
                return make_union(std::move(parts));
            }
        },
        x->node);
}

SetExprPtr translate_into(const GroupDescriptor& grp, const Element& t, const SetExprPtr& x) {
    if (t.is_zero()) return x;
    return std::visit(
        [&](const auto& node) -> SetExprPtr {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FiniteLeaf>) {
                std::vector<Element> es;
                for (const Element& e : node.elements) es.push_back(add(grp, t, e));
                return make_finite(std::move(es));
            } else if constexpr (std::is_same_v<T, AffineLeaf>) {
                return make_affine(add(grp, t, node.a), node.b);
            } else if constexpr (std::is_same_v<T, BlockLeaf>) {
                return make_block(grp, add(grp, t, node.c), node.templ, node.start, node.step);
            } else if constexpr (std::is_same_v<T, TranslateNode>) {
                return translate_into(grp, add(grp, t, node.g), node.inner);
            } else {
                std::vector<SetExprPtr> parts;
                for (const SetExprPtr& p : node.parts) parts.push_back(translate_into(grp, t, p));
                return make_union(std::move(parts));
            }
        },
        x->node);
}

// Leaves of a normalized expression, finite leaf (if any) first.
std::vector<const SetExpr*> normalized_leaves(const SetExprPtr& x) {
    std::vector<const SetExpr*> out;
    if (const auto* u = std::get_if<UnionNode>(&x->node)) {
        for (const SetExprPtr& p : u->parts) out.push_back(p.get());
    } else {
        out.push_back(x.get());
    }
    return out;
}

} // namespace

SetExprPtr normalize(const SetExprPtr& x, const GroupDescriptor& g) { return normalize_rec(x, g); }

bool is_infinite(const SetExprPtr& x, const GroupDescriptor& g) {
    (void)g;
    for (const SetExpr* leaf : normalized_leaves(x))
        if (!std::holds_alternative<FiniteLeaf>(leaf->node)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

class LeafCursor {
public:
    LeafCursor(const SetExpr* leaf, const GroupDescriptor* g) : leaf_(leaf), g_(g) {}

    std::optional<Element> next() {
        if (const auto* f = std::get_if<FiniteLeaf>(&leaf_->node)) {
            if (k_ >= static_cast<long long>(f->elements.size())) return std::nullopt;
            return f->elements[static_cast<std::size_t>(k_++)];
        }
        if (const auto* a = std::get_if<AffineLeaf>(&leaf_->node)) {
            Element e = add(*g_, a->a, scale(*g_, k_, a->b));
            ++k_;
            return e;
        }
        const auto& b = std::get<BlockLeaf>(leaf_->node);
        return block_element(*g_, b, k_++);
    }

private:
    const SetExpr* leaf_;
    const GroupDescriptor* g_;
    long long k_ = 0;
};

} // namespace

std::vector<Element> enumerate_prefix(const SetExprPtr& x, const GroupDescriptor& g,
                                      std::size_t n) {
    std::vector<Element> out;
    if (n == 0) return out;
    std::vector<LeafCursor> cursors;
    for (const SetExpr* leaf : normalized_leaves(x)) cursors.emplace_back(leaf, &g);
    std::vector<bool> done(cursors.size(), false);
    std::set<Element> seen;
    std::size_t live = cursors.size();
    std::size_t turn = 0;
    while (out.size() < n && live > 0) {
        std::size_t i = turn % cursors.size();
        ++turn;
        if (done[i]) continue;
        std::optional<Element> e = cursors[i].next();
        if (!e) {
            done[i] = true;
            --live;
            continue;
        }
        if (seen.insert(*e).second) out.push_back(std::move(*e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scaling

SetExprPtr scale_set(long long n, const SetExprPtr& x, const GroupDescriptor& g) {
    if (n < 1) throw validation_error("scale_set requires n >= 1");
    SetExprPtr scaled = std::visit(
        [&](const auto& node) -> SetExprPtr {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FiniteLeaf>) {
                std::vector<Element> es;
                for (const Element& e : node.elements) es.push_back(scale(g, n, e));
                return make_finite(std::move(es));
            } else if constexpr (std::is_same_v<T, AffineLeaf>) {
                return make_affine(scale(g, n, node.a), scale(g, n, node.b));
            } else if constexpr (std::is_same_v<T, BlockLeaf>) {
                Element u = node.templ;
                for (auto& [j, v] : u.tail) v *= n; // reduced by make_block at placement
                return make_block(g, scale(g, n, node.c), std::move(u), node.start, node.step);
            } else if constexpr (std::is_same_v<T, TranslateNode>) {
                return make_translate(scale(g, n, node.g), scale_set(n, node.inner, g));
            } else {
                std::vector<SetExprPtr> parts;
                for (const SetExprPtr& p : node.parts) parts.push_back(scale_set(n, p, g));
                return make_union(std::move(parts));
            }
        },
        x->node);
    return normalize(scaled, g);
}

// ---------------------------------------------------------------------------
// Classification
//
// Leaf facts (derivations in docs/classification-rules.md):
//   * An Affine leaf that survives normalization has a direction of
//     infinite order; x -> dx is injective on it for every d >= 1, so it
//     contributes no infinite fiber and lies at level 0.
//   * A BlockStream leaf with offset c and placed template u of order t
//     has elements x_k = c + u_k with pairwise disjoint, nonzero template
//     supports.  For d >= 1 the fiber {x_k : d x_k = v} is infinite
//     exactly when d*u = 0 (i.e. t | d), and then v = d*c; otherwise every
//     fiber has at most one point.
//   * The least n with S in G[n] is the lcm of the per-leaf order bounds,
//     with 0 (infinite order anywhere) absorbing.

namespace {

struct LeafFacts {
    // Order bound: least n >= 0 with leaf subset of G[n] (0 = unbounded).
    long long order_bound = 0;
    // Present for BlockStream leaves: placed template order and offset.
    std::optional<long long> template_order;
    Element offset;
};

std::vector<LeafFacts> gather_facts(const SetExprPtr& x, const GroupDescriptor& g,
                                    bool& any_infinite) {
    std::vector<LeafFacts> facts;
    any_infinite = false;
    for (const SetExpr* leaf : normalized_leaves(x)) {
        LeafFacts f;
        if (const auto* fin = std::get_if<FiniteLeaf>(&leaf->node)) {
            f.order_bound = 1;
            for (const Element& e : fin->elements) {
                long long o = element_order(g, e);
                f.order_bound = (o == 0) ? 0 : (f.order_bound == 0 ? 0 : lcm_ll(f.order_bound, o));
                if (f.order_bound == 0) break;
            }
        } else if (std::holds_alternative<AffineLeaf>(leaf->node)) {
            any_infinite = true;
            f.order_bound = 0;
        } else {
            any_infinite = true;
            const auto& b = std::get<BlockLeaf>(leaf->node);
            long long t = placed_template_order(g, b);
            long long co = element_order(g, b.c);
            f.template_order = t;
            f.offset = b.c;
            f.order_bound = (co == 0) ? 0 : lcm_ll(co, t);
        }
        facts.push_back(std::move(f));
    }
    return facts;
}

} // namespace

TorsionClass classify(const SetExprPtr& x, const GroupDescriptor& g) {
    bool any_infinite = false;
    std::vector<LeafFacts> facts = gather_facts(x, g, any_infinite);
    if (!any_infinite) return TorsionClass{TorsionClass::Kind::finite_set, 0, std::nullopt};

    long long level = 1;
    for (const LeafFacts& f : facts)
        level = (f.order_bound == 0 || level == 0) ? 0 : lcm_ll(level, f.order_bound);

    // Infinite-fiber witnesses: (d, d*c) for block leaves with t | d, d a
    // proper divisor of the level bound.  Pick the lexicographically least.
    std::optional<NotWitness> best;
    auto consider = [&](long long d, const LeafFacts& f) {
        Element val = scale(g, d, f.offset);
        if (!best || d < best->d || (d == best->d && val < best->g))
            best = NotWitness{d, std::move(val)};
    };
    if (level == 0) {
        for (const LeafFacts& f : facts)
            if (f.template_order) consider(*f.template_order, f);
    } else {
        for (long long d : proper_divisors(level).list)
            for (const LeafFacts& f : facts)
                if (f.template_order && d % *f.template_order == 0) consider(d, f);
    }
    if (best) return TorsionClass{TorsionClass::Kind::not_almost_torsion, 0, std::move(best)};
    return TorsionClass{TorsionClass::Kind::almost_torsion, level, std::nullopt};
}

PrefixReport classify_prefix(const std::vector<Element>& prefix, const GroupDescriptor& g,
                             long long d_bound, std::optional<std::size_t> threshold) {
    if (prefix.empty()) throw validation_error("classify_prefix requires a nonempty prefix");
    if (d_bound < 1) throw validation_error("classify_prefix requires d_bound >= 1");

    PrefixReport rep;
    rep.prefix_len = prefix.size();

    std::vector<long long> orders;
    orders.reserve(prefix.size());
    bool all_finite = true;
    for (const Element& e : prefix) {
        long long o = element_order(g, e);
        orders.push_back(o);
        if (o == 0) all_finite = false;
    }
    long long full = 1, half = 1;
    std::size_t half_len = (prefix.size() + 1) / 2;
    if (all_finite) {
        for (std::size_t i = 0; i < orders.size(); ++i) {
            full = lcm_ll(full, orders[i]);
            if (i < half_len) half = lcm_ll(half, orders[i]);
        }
    }
    rep.candidate_stable = all_finite && half == full;
    rep.candidate_level = rep.candidate_stable ? full : 0;

    std::vector<long long> ds;
    if (rep.candidate_level >= 1) {
        ds = proper_divisors(rep.candidate_level).list;
    } else {
        for (long long d = 1; d <= d_bound; ++d) ds.push_back(d);
    }

    std::size_t thr = threshold.value_or(static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(prefix.size())))));
    rep.threshold = thr;

    for (long long d : ds) {
        std::map<Element, std::size_t> counts;
        for (const Element& e : prefix) ++counts[scale(g, d, e)];
        FiberStat maxstat;
        maxstat.d = d;
        for (const auto& [val, cnt] : counts) {
            if (cnt > maxstat.count) {
                maxstat.value = val;
                maxstat.count = cnt;
            }
            if (cnt > thr) rep.flagged.push_back(FiberStat{d, val, cnt});
        }
        rep.max_fiber_per_divisor.push_back(std::move(maxstat));
    }
    rep.consistent = rep.flagged.empty();
    rep.caveat =
        "finite-prefix evidence only: the flag threshold is a heuristic stand-in for fiber "
        "finiteness";
    return rep;
}

PrefixReport classify_prefix(const SetExprPtr& x, const GroupDescriptor& g, std::size_t n,
                             long long d_bound, std::optional<std::size_t> threshold) {
    return classify_prefix(enumerate_prefix(x, g, n), g, d_bound, threshold);
}

std::optional<Extraction> extract_almost_torsion(const SetExprPtr& x, const GroupDescriptor& g) {
    for (const SetExpr* leaf : normalized_leaves(x)) {
        if (const auto* a = std::get_if<AffineLeaf>(&leaf->node)) {
            return Extraction{Element{}, make_affine(a->a, a->b), 0};
        }
        if (const auto* b = std::get_if<BlockLeaf>(&leaf->node)) {
            long long t = placed_template_order(g, *b);
            SetExprPtr pure = make_block(g, Element{}, b->templ, b->start, b->step);
            return Extraction{b->c, std::move(pure), t};
        }
    }
    return std::nullopt;
}

std::string to_string(const SetExprPtr& x) {
    std::ostringstream os;
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FiniteLeaf>) {
                os << "{";
                for (std::size_t i = 0; i < node.elements.size(); ++i)
                    os << (i ? ", " : "") << to_string(node.elements[i]);
                os << "}";
            } else if constexpr (std::is_same_v<T, AffineLeaf>) {
                os << "affine(" << to_string(node.a) << " + k*" << to_string(node.b) << ")";
            } else if constexpr (std::is_same_v<T, BlockLeaf>) {
                os << "blocks(" << to_string(node.c) << " + shift_k" << to_string(node.templ)
                   << " @" << node.start << "+" << node.step << "k)";
            } else if constexpr (std::is_same_v<T, TranslateNode>) {
                os << to_string(node.g) << " + " << to_string(node.inner);
            } else {
                for (std::size_t i = 0; i < node.parts.size(); ++i)
                    os << (i ? " u " : "") << to_string(node.parts[i]);
            }
        },
        x->node);
    return os.str();
}

} // namespace abel
