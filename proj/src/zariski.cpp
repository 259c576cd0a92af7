#include "abel/zariski.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace abel {

namespace {

constexpr std::size_t kEnumBudget = 1 << 20;
constexpr std::size_t kOracleComboBudget = 200000;
constexpr std::size_t kOraclePoolCap = 24;

long long gcd0(long long n, long long q) { return n == 0 ? q : gcd_ll(n, q); }

// G[n] subgroup of G[m], decided per coordinate class.
bool torsion_contained(const GroupDescriptor& g, long long n, long long m) {
    if (g.free_rank() >= 1 && n == 0 && m != 0) return false;
    for (long long q : g.finite_orders())
        if (gcd0(m, q) % gcd0(n, q) != 0) return false;
    for (long long q : g.tail_pattern())
        if (gcd0(m, q) % gcd0(n, q) != 0) return false;
    return true;
}

bool torsion_is_finite(const GroupDescriptor& g, long long n) {
    if (g.free_rank() >= 1 && n == 0) return false;
    for (long long q : g.tail_pattern())
        if (gcd0(n, q) != 1) return false;
    return true;
}

// Solve x = a (mod alpha), x = b (mod beta); alpha, beta >= 1.
std::optional<long long> crt(long long a, long long alpha, long long b, long long beta) {
    long long g = gcd_ll(alpha, beta);
    long long diff = b - a;
    if (diff % g != 0) return std::nullopt;
    long long beta_g = beta / g;
    // Modular inverse of alpha/g modulo beta/g by extended gcd.
    long long a0 = (alpha / g) % beta_g, m0 = beta_g;
    long long x0 = 1, x1 = 0, r0 = ((a0 % m0) + m0) % m0, r1 = m0;
    while (r1 != 0) {
        long long q = r0 / r1;
        r0 -= q * r1;
        std::swap(r0, r1);
        x0 -= q * x1;
        std::swap(x0, x1);
    }
    long long inv = ((x0 % beta_g) + beta_g) % beta_g;
    long long t = ((diff / g) % beta_g) * inv % beta_g;
    return a + alpha * t;
}

} // namespace

bool elementary_member(const Element& x, const Element& g, long long n,
                       const GroupDescriptor& grp) {
    return scale(grp, n, sub(grp, x, g)).is_zero();
}

Coset canonical_coset(const GroupDescriptor& grp, Element rep, long long modulus) {
    if (modulus < 0) throw validation_error("coset modulus must be >= 0");
    rep = canonicalize(grp, std::move(rep));

    // Minimal modulus generating the same torsion subgroup.
    long long eff;
    if (modulus == 0 && grp.free_rank() >= 1) {
        eff = 0;
    } else {
        eff = 1;
        for (long long q : grp.finite_orders()) eff = lcm_ll(eff, gcd0(modulus, q));
        for (long long q : grp.tail_pattern()) eff = lcm_ll(eff, gcd0(modulus, q));
    }

    if (eff == 0) return Coset{Element{}, 0}; // whole group, rep folds away

    Element reduced;
    for (const auto& [i, v] : rep.finite) {
        long long q = grp.finite_order(static_cast<std::size_t>(i));
        long long sub = q / gcd_ll(eff, q); // G[eff] component = multiples of sub
        long long r = v % sub;
        if (r != 0) reduced.finite[i] = r;
    }
    for (const auto& [k, v] : rep.tail) {
        long long q = grp.tail_order(k);
        long long sub = q / gcd_ll(eff, q);
        long long r = v % sub;
        if (r != 0) reduced.tail[k] = r;
    }
    reduced.free = rep.free; // G[eff>=1] has zero free part
    return Coset{std::move(reduced), eff};
}

namespace {

bool coset_contains_coset(const GroupDescriptor& grp, const Coset& inner, const Coset& outer) {
    return torsion_contained(grp, inner.modulus, outer.modulus) &&
           elementary_member(inner.rep, outer.rep, outer.modulus, grp);
}

// All elements of a finite coset, throwing past the budget.
std::vector<Element> enumerate_coset(const GroupDescriptor& grp, const Coset& c) {
    std::vector<Element> out{c.rep};
    auto extend = [&](auto block_of, long long coord, long long sub, long long q) {
        std::vector<Element> next;
        next.reserve(out.size() * static_cast<std::size_t>(q / sub));
        for (const Element& e : out) {
            for (long long v = 0; v < q; v += sub) {
                Element e2 = e;
                auto& blk = block_of(e2);
                blk[coord] += v;
                next.push_back(canonicalize(grp, std::move(e2)));
            }
        }
        if (next.size() > kEnumBudget) throw budget_error("coset enumeration too large");
        out = std::move(next);
    };
    for (std::size_t i = 0; i < grp.finite_orders().size(); ++i) {
        long long q = grp.finite_order(i);
        long long sub = q / gcd_ll(c.modulus, q);
        if (sub != q)
            extend([](Element& e) -> auto& { return e.finite; }, static_cast<long long>(i), sub, q);
    }
    // Finite torsion subgroup: every tail slot is trivial, so only the
    // rep's own tail coordinates appear and stay fixed.
    return out;
}

} // namespace

ClosedSet normalize_closed(const GroupDescriptor& grp, ClosedSet raw) {
    ClosedSet out;
    std::vector<Coset> cosets;
    for (Coset& c : raw.cosets) {
        Coset cc = canonical_coset(grp, std::move(c.rep), c.modulus);
        if (cc.modulus == 1)
            raw.finite_part.push_back(std::move(cc.rep));
        else
            cosets.push_back(std::move(cc));
    }
    std::sort(cosets.begin(), cosets.end());
    cosets.erase(std::unique(cosets.begin(), cosets.end()), cosets.end());
    for (std::size_t i = 0; i < cosets.size(); ++i) {
        // Mutual containment of distinct canonical cosets cannot happen, so
        // any hit means strict redundancy.
        bool redundant = false;
        for (std::size_t j = 0; j < cosets.size() && !redundant; ++j)
            redundant = i != j && coset_contains_coset(grp, cosets[i], cosets[j]);
        if (!redundant) out.cosets.push_back(cosets[i]);
    }
    for (Element& e : raw.finite_part) {
        Element ce = canonicalize(grp, std::move(e));
        bool inside = false;
        for (const Coset& c : out.cosets)
            if (elementary_member(ce, c.rep, c.modulus, grp)) {
                inside = true;
                break;
            }
        if (!inside) out.finite_part.push_back(std::move(ce));
    }
    std::sort(out.finite_part.begin(), out.finite_part.end());
    out.finite_part.erase(std::unique(out.finite_part.begin(), out.finite_part.end()),
                          out.finite_part.end());
    return out;
}

bool closed_member(const GroupDescriptor& grp, const ClosedSet& a, const Element& x) {
    if (std::binary_search(a.finite_part.begin(), a.finite_part.end(), x)) return true;
    for (const Coset& c : a.cosets)
        if (elementary_member(x, c.rep, c.modulus, grp)) return true;
    return false;
}

namespace {

// Is the coset c covered by b?  Exact: a single containing coset, pointwise
// enumeration when the torsion subgroup is finite, or covering on the
// finite-coordinate block by finite-index sub-cosets.  Cosets of infinite
// index and the finite part cannot jointly cover an infinite coset.
bool coset_covered(const GroupDescriptor& grp, const Coset& c, const ClosedSet& b) {
    for (const Coset& h : b.cosets)
        if (coset_contains_coset(grp, c, h)) return true;

    if (torsion_is_finite(grp, c.modulus)) {
        for (const Element& e : enumerate_coset(grp, c))
            if (!closed_member(grp, b, e)) return false;
        return true;
    }

    if (c.modulus == 0) return false; // whole group; single-coset path only

    // Finite-index pieces: intersections whose tail components match the
    // target's on every slot.  Those cover each tail component fully, so
    // covering is decided on the finite-coordinate block alone.
    struct Piece {
        Element rep;
        long long modulus;
    };
    std::vector<Piece> pieces;
    for (const Coset& h : b.cosets) {
        ClosedSet lhs{{}, {c}};
        ClosedSet rhs{{}, {h}};
        ClosedSet inter = closed_intersect(grp, lhs, rhs);
        for (const Coset& d : inter.cosets) {
            bool finite_index = true;
            for (long long q : grp.tail_pattern())
                if (gcd0(d.modulus, q) != gcd0(c.modulus, q)) {
                    finite_index = false;
                    break;
                }
            if (finite_index) pieces.push_back(Piece{d.rep, d.modulus});
        }
    }
    if (pieces.empty()) return false;

    // Enumerate the target's finite-coordinate classes.
    std::vector<std::vector<long long>> combos{{}};
    for (std::size_t i = 0; i < grp.finite_orders().size(); ++i) {
        long long q = grp.finite_order(i);
        long long sub = q / gcd_ll(c.modulus, q);
        long long base = 0;
        if (auto it = c.rep.finite.find(static_cast<long long>(i)); it != c.rep.finite.end())
            base = it->second;
        std::vector<std::vector<long long>> next;
        for (const auto& combo : combos)
            for (long long v = base % sub; v < q; v += sub) {
                next.push_back(combo);
                next.back().push_back(v);
            }
        if (next.size() > kEnumBudget) throw budget_error("coset covering check too large");
        combos = std::move(next);
    }
    for (const auto& combo : combos) {
        bool hit = false;
        for (const Piece& p : pieces) {
            bool ok = true;
            for (std::size_t i = 0; i < combo.size() && ok; ++i) {
                long long q = grp.finite_order(i);
                long long sub = q / gcd_ll(p.modulus, q);
                long long pv = 0;
                if (auto it = p.rep.finite.find(static_cast<long long>(i));
                    it != p.rep.finite.end())
                    pv = it->second;
                ok = ((combo[i] - pv) % sub + sub) % sub == 0;
            }
            if (ok) {
                hit = true;
                break;
            }
        }
        if (!hit) return false;
    }
    return true;
}

} // namespace

bool closed_subset(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b) {
    for (const Element& e : a.finite_part)
        if (!closed_member(grp, b, e)) return false;
    for (const Coset& c : a.cosets)
        if (!coset_covered(grp, c, b)) return false;
    return true;
}

bool closed_equal(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b) {
    if (a.structurally_equal(b)) return true;
    return closed_subset(grp, a, b) && closed_subset(grp, b, a);
}

ClosedSet whole_group_closed(const GroupDescriptor& grp) {
    return normalize_closed(grp, ClosedSet{{}, {Coset{Element{}, 0}}});
}

bool closed_is_whole_group(const GroupDescriptor& grp, const ClosedSet& a) {
    return closed_subset(grp, whole_group_closed(grp), a);
}

ClosedSet closed_union(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b) {
    ClosedSet raw = a;
    raw.finite_part.insert(raw.finite_part.end(), b.finite_part.begin(), b.finite_part.end());
    raw.cosets.insert(raw.cosets.end(), b.cosets.begin(), b.cosets.end());
    return normalize_closed(grp, std::move(raw));
}

namespace {

std::optional<Coset> coset_intersect(const GroupDescriptor& grp, const Coset& a, const Coset& b) {
    long long n = a.modulus, m = b.modulus;
    long long res_mod = n == 0 ? m : (m == 0 ? n : gcd_ll(n, m));

    Element rep;
    std::set<long long> free_keys, finite_keys, tail_keys;
    for (const auto& [k, v] : a.rep.free) free_keys.insert(k);
    for (const auto& [k, v] : b.rep.free) free_keys.insert(k);
    for (const auto& [k, v] : a.rep.finite) finite_keys.insert(k);
    for (const auto& [k, v] : b.rep.finite) finite_keys.insert(k);
    for (const auto& [k, v] : a.rep.tail) tail_keys.insert(k);
    for (const auto& [k, v] : b.rep.tail) tail_keys.insert(k);

    auto at = [](const std::map<long long, long long>& blk, long long k) {
        auto it = blk.find(k);
        return it == blk.end() ? 0LL : it->second;
    };

    for (long long k : free_keys) {
        long long av = at(a.rep.free, k), bv = at(b.rep.free, k);
        if (n == 0 && m == 0) continue; // both sides unconstrained, rep 0
        if (n == 0) {
            rep.free[k] = bv;
        } else if (m == 0) {
            rep.free[k] = av;
        } else {
            if (av != bv) return std::nullopt;
            rep.free[k] = av;
        }
    }
    auto solve_cyclic = [&](long long q, long long av, long long bv,
                            long long& out) -> bool {
        long long alpha = q / gcd0(n, q);
        long long beta = q / gcd0(m, q);
        auto x = crt(av, alpha, bv, beta);
        if (!x) return false;
        out = ((*x % q) + q) % q;
        return true;
    };
    for (long long k : finite_keys) {
        long long q = grp.finite_order(static_cast<std::size_t>(k));
        long long v;
        if (!solve_cyclic(q, at(a.rep.finite, k), at(b.rep.finite, k), v)) return std::nullopt;
        if (v != 0) rep.finite[k] = v;
    }
    for (long long k : tail_keys) {
        long long q = grp.tail_order(k);
        long long v;
        if (!solve_cyclic(q, at(a.rep.tail, k), at(b.rep.tail, k), v)) return std::nullopt;
        if (v != 0) rep.tail[k] = v;
    }
    return canonical_coset(grp, std::move(rep), res_mod);
}

} // namespace

ClosedSet closed_intersect(const GroupDescriptor& grp, const ClosedSet& a, const ClosedSet& b) {
    ClosedSet raw;
    for (const Element& e : a.finite_part)
        if (closed_member(grp, b, e)) raw.finite_part.push_back(e);
    for (const Element& e : b.finite_part)
        if (closed_member(grp, a, e)) raw.finite_part.push_back(e);
    for (const Coset& ca : a.cosets)
        for (const Coset& cb : b.cosets)
            if (auto c = coset_intersect(grp, ca, cb)) {
                if (c->modulus == 1)
                    raw.finite_part.push_back(std::move(c->rep));
                else
                    raw.cosets.push_back(std::move(*c));
            }
    return normalize_closed(grp, std::move(raw));
}

ClosedSet zariski_closure(const SetExprPtr& x, const GroupDescriptor& grp) {
    SetExprPtr nx = normalize(x, grp);
    ClosedSet raw;
    auto add_leaf = [&](const SetExprPtr& leaf) {
        if (const auto* f = std::get_if<FiniteLeaf>(&leaf->node)) {
            raw.finite_part.insert(raw.finite_part.end(), f->elements.begin(),
                                   f->elements.end());
            return;
        }
        auto ext = extract_almost_torsion(leaf, grp);
        raw.cosets.push_back(Coset{ext->shift, ext->level});
    };
    if (const auto* u = std::get_if<UnionNode>(&nx->node))
        for (const SetExprPtr& p : u->parts) add_leaf(p);
    else
        add_leaf(nx);
    return normalize_closed(grp, std::move(raw));
}

DensityCertificate is_zariski_dense(const SetExprPtr& x, const GroupDescriptor& grp) {
    SetExprPtr nx = normalize(x, grp);
    DensityCertificate cert;

    if (grp.is_finite_group()) {
        cert.mode = "finite-group";
        cert.dense = closed_is_whole_group(grp, zariski_closure(nx, grp));
        return cert;
    }

    struct BlockInfo {
        const BlockLeaf* leaf;
        long long template_order;
    };
    std::vector<BlockInfo> blocks;
    bool has_affine = false;
    auto scan = [&](const SetExprPtr& leaf) {
        if (std::holds_alternative<AffineLeaf>(leaf->node)) has_affine = true;
        if (const auto* b = std::get_if<BlockLeaf>(&leaf->node))
            blocks.push_back(BlockInfo{b, placed_template_order(grp, *b)});
    };
    if (const auto* u = std::get_if<UnionNode>(&nx->node))
        for (const SetExprPtr& p : u->parts) scan(p);
    else
        scan(nx);

    if (!grp.is_bounded()) {
        cert.mode = "unbounded";
        if (has_affine) {
            // n * affine stays infinite for every n >= 1.
            cert.dense = true;
            cert.witness_affine = true;
            return cert;
        }
        long long killer = 1;
        for (const BlockInfo& b : blocks) killer = lcm_ll(killer, b.template_order);
        cert.dense = false;
        cert.killing_scale = killer; // killer * X is finite
        return cert;
    }

    // Bounded infinite group: m = least scale with mG finite; dense iff
    // every translate g+X keeps an almost-m-torsion part.  Only g's values
    // on the finite block and on the block offsets' tail support matter:
    // fresh tail coordinates have order dividing m by minimality of m.
    cert.mode = "bounded";
    long long m = grp.least_finite_scale();

    std::set<long long> tail_coords;
    for (const BlockInfo& b : blocks)
        for (const auto& [k, v] : b.leaf->c.tail) tail_coords.insert(k);

    std::vector<Element> family{Element{}};
    std::size_t budget = 1;
    auto extend = [&](bool tail_block, long long coord, long long q) {
        budget *= static_cast<std::size_t>(q);
        if (budget > kEnumBudget) throw budget_error("density translate family too large");
        std::vector<Element> next;
        next.reserve(family.size() * static_cast<std::size_t>(q));
        for (const Element& e : family)
            for (long long v = 0; v < q; ++v) {
                Element e2 = e;
                if (v != 0) (tail_block ? e2.tail : e2.finite)[coord] = v;
                next.push_back(std::move(e2));
            }
        family = std::move(next);
    };
    for (std::size_t i = 0; i < grp.finite_orders().size(); ++i)
        extend(false, static_cast<long long>(i), grp.finite_order(i));
    for (long long k : tail_coords) extend(true, k, grp.tail_order(k));

    cert.translates_checked = family.size();
    for (const Element& g : family) {
        bool ok = false;
        for (const BlockInfo& b : blocks) {
            if (b.template_order != m) continue;
            long long o = element_order(grp, add(grp, g, b.leaf->c));
            if (o != 0 && m % o == 0) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            cert.dense = false;
            cert.failing_translate = g;
            return cert;
        }
    }
    cert.dense = true;
    return cert;
}

ClosedSet closure_oracle_prefix(const SetExprPtr& x, const GroupDescriptor& grp, std::size_t n,
                                long long modulus_bound, std::size_t coset_bound) {
    if (!grp.is_bounded())
        throw validation_error("closure oracle requires a bounded group");

    std::vector<Element> prefix = enumerate_prefix(normalize(x, grp), grp, n);
    if (prefix.empty()) return ClosedSet{};

    std::vector<long long> moduli;
    for (long long d : divisors_of(grp.exponent()))
        if (d >= 2 && d <= modulus_bound) moduli.push_back(d);

    const std::size_t support = std::max<std::size_t>(1, (prefix.size() + 3) / 4);

    struct Candidate {
        Coset coset;
        std::vector<bool> covers;
        std::size_t covered = 0;
    };
    std::vector<Candidate> pool;
    std::set<std::pair<Element, long long>> seen;
    for (const Element& p : prefix) {
        for (long long d : moduli) {
            Coset c = canonical_coset(grp, p, d);
            if (c.modulus == 1) continue;
            if (!seen.insert({c.rep, c.modulus}).second) continue;
            Candidate cand;
            cand.coset = c;
            cand.covers.resize(prefix.size());
            for (std::size_t i = 0; i < prefix.size(); ++i) {
                cand.covers[i] = elementary_member(prefix[i], c.rep, c.modulus, grp);
                if (cand.covers[i]) ++cand.covered;
            }
            if (cand.covered >= support) pool.push_back(std::move(cand));
        }
    }
    // Same coverage: keep only the smallest-denotation candidate.
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size();) {
            if (pool[i].covers == pool[j].covers) {
                if (coset_contains_coset(grp, pool[j].coset, pool[i].coset))
                    std::swap(pool[i], pool[j]);
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
            } else {
                ++j;
            }
        }
    if (pool.size() > kOraclePoolCap) throw budget_error("closure oracle candidate pool too large");

    // Exhaustive search over subsets of at most coset_bound candidates,
    // minimizing 8 * (#cosets) + |finite remainder|.
    // A solution is a subset of candidates plus the uncovered remainder as
    // finite part.  Admissible solutions keep the remainder below the
    // support threshold (an all-finite answer never stabilizes on a genuine
    // stream); among admissible ones the set-theoretically smallest
    // denotation wins, with remainder size, coset count and serialization
    // as deterministic tie-breaks.
    const std::size_t pool_n = pool.size();
    struct Solution {
        ClosedSet set;
        std::size_t remainder = 0;
        std::size_t cosets = 0;
        bool admissible = false;
    };
    std::optional<Solution> best;

    auto better = [&](const Solution& cand, const Solution& cur) {
        if (cand.admissible != cur.admissible) return cand.admissible;
        bool cand_le = closed_subset(grp, cand.set, cur.set);
        bool cur_le = closed_subset(grp, cur.set, cand.set);
        if (cand_le != cur_le) return cand_le;
        if (cand.remainder != cur.remainder) return cand.remainder < cur.remainder;
        if (cand.cosets != cur.cosets) return cand.cosets < cur.cosets;
        return to_string(grp, cand.set) < to_string(grp, cur.set);
    };

    std::vector<std::size_t> pick;
    std::size_t combos = 0;
    auto consider = [&]() {
        std::vector<bool> covered(prefix.size(), false);
        for (std::size_t idx : pick)
            for (std::size_t i = 0; i < prefix.size(); ++i)
                if (pool[idx].covers[i]) covered[i] = true;
        Solution sol;
        ClosedSet raw;
        for (std::size_t i = 0; i < prefix.size(); ++i)
            if (!covered[i]) {
                raw.finite_part.push_back(prefix[i]);
                ++sol.remainder;
            }
        for (std::size_t idx : pick) raw.cosets.push_back(pool[idx].coset);
        sol.set = normalize_closed(grp, std::move(raw));
        sol.cosets = pick.size();
        sol.admissible = sol.remainder <= support;
        if (!best || better(sol, *best)) best = std::move(sol);
    };
    auto rec = [&](auto&& self, std::size_t from) -> void {
        if (++combos > kOracleComboBudget) throw budget_error("closure oracle search budget");
        consider();
        if (pick.size() == coset_bound) return;
        for (std::size_t i = from; i < pool_n; ++i) {
            pick.push_back(i);
            self(self, i + 1);
            pick.pop_back();
        }
    };
    rec(rec, 0);
    return best->set;
}

std::string to_string(const GroupDescriptor& grp, const ClosedSet& a) {
    std::ostringstream os;
    bool first = true;
    if (!a.finite_part.empty()) {
        os << "{";
        for (std::size_t i = 0; i < a.finite_part.size(); ++i)
            os << (i ? ", " : "") << to_string(a.finite_part[i]);
        os << "}";
        first = false;
    }
    for (const Coset& c : a.cosets) {
        if (!first) os << " u ";
        first = false;
        if (!c.rep.is_zero()) os << to_string(c.rep) << " + ";
        os << "G[" << c.modulus << "]";
    }
    if (first) os << "{}";
    return os.str();
}

} // namespace abel
