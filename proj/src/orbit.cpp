#include "abel/orbit.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "abel/equidist.hpp"

namespace abel {

namespace {

constexpr std::size_t kElementScanBudget = 4096;
constexpr std::size_t kWindowBudget = 1 << 18;

long long free_value(const Element& e) {
    auto it = e.free.find(0);
    return it == e.free.end() ? 0 : it->second;
}

} // namespace

IntStreamFn stream_from_vector(std::vector<long long> values) {
    auto data = std::make_shared<std::vector<long long>>(std::move(values));
    return [data](std::size_t i) -> std::optional<long long> {
        if (i >= data->size()) return std::nullopt;
        return (*data)[i];
    };
}

IntStreamFn stream_from_setexpr(const SetExprPtr& x, const GroupDescriptor& g) {
    if (g.free_rank() != 1 || !g.finite_orders().empty() || g.has_tail())
        throw validation_error("integer streams require the group Z");
    auto nx = normalize(x, g);
    struct State {
        SetExprPtr expr;
        GroupDescriptor grp;
        std::vector<long long> memo;
        bool exhausted = false;
    };
    auto st = std::make_shared<State>(State{nx, g, {}, false});
    return [st](std::size_t i) -> std::optional<long long> {
        while (st->memo.size() <= i && !st->exhausted) {
            std::size_t want = std::max<std::size_t>(2 * st->memo.size() + 8, i + 1);
            std::vector<Element> pref = enumerate_prefix(st->expr, st->grp, want);
            if (pref.size() < want) st->exhausted = true;
            st->memo.clear();
            for (const Element& e : pref) st->memo.push_back(free_value(e));
        }
        if (i >= st->memo.size()) return std::nullopt;
        return st->memo[i];
    };
}

void Requirement::validate(std::size_t dim) const {
    box.validate();
    if (box.dim() != dim) throw validation_error("requirement box dimension mismatch");
    if (level == 1)
        throw validation_error("level 1 is empty: T[1] is the trivial subgroup");
    if (level < 0) throw validation_error("requirement level must be >= 0");
    if (level >= 2 && !box.meets_torsion_lattice(level))
        throw validation_error("requirement box misses T[level]^d");
}

bool verify_witness(const Requirement& req, long long s, const TorusPoint& x) {
    if (x.dim() != req.box.dim()) return false;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        Rat v = make_rat(s) * x.coords[i] - req.box.center[i];
        Int n = round_nearest(v);
        Rat margin = req.box.radius[i] - abs(v - Rat(n));
        if (margin <= 0) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Nested-interval engine
//
// Shared by find_orbit_point and the level-0 path of the homomorphism
// builder, which is what makes the two agree bit for bit on Z.

namespace {

struct RefineOutcome {
    DyadicBoxState box;
    std::vector<std::pair<std::size_t, long long>> chosen; // requirement id -> s
    std::vector<RefineStep> trace;
};

RefineOutcome refine_through(const IntStreamFn& stream, const std::vector<Requirement>& reqs,
                             std::size_t dim, const std::vector<Rat>& offset) {
    RefineOutcome out;
    out.box.center.assign(dim, Rat(1, 2));
    out.box.radius.assign(dim, Rat(1, 2));

    for (const Requirement& req : reqs) {
        req.validate(dim);
        if (req.level != 0)
            throw validation_error("nested-interval refinement serves level-0 requirements");

        Rat len = 2 * out.box.radius[0];
        for (std::size_t i = 1; i < dim; ++i) len = std::min(len, Rat(2 * out.box.radius[i]));

        // First stream element that wraps the current box at least twice.
        std::optional<long long> s;
        for (std::size_t idx = 0;; ++idx) {
            std::optional<long long> v = stream(idx);
            if (!v)
                throw insufficient_stream_error(
                    "stream exhausted before |s| >= 2/len(I) at requirement " +
                    std::to_string(req.id));
            if (*v != 0 && make_rat(std::abs(*v)) * len >= 2) {
                s = *v;
                break;
            }
        }

        for (std::size_t i = 0; i < dim; ++i) {
            Rat y = req.box.center[i] - (offset.empty() ? Rat(0) : offset[i]);
            Rat eps_safe = req.box.radius[i] / 2;
            Rat a = out.box.center[i] - out.box.radius[i];
            Rat b = out.box.center[i] + out.box.radius[i];
            Rat lo = std::min(Rat(make_rat(*s) * a), Rat(make_rat(*s) * b));
            Rat hi = std::max(Rat(make_rat(*s) * a), Rat(make_rat(*s) * b));

            // Integer shifts whose full safety arc sits inside s*I.
            Rat nlo = lo - y + eps_safe;
            Rat nhi = hi - y - eps_safe;
            Int n_first, n_last;
            mpz_cdiv_q(n_first.get_mpz_t(), nlo.get_num().get_mpz_t(), nlo.get_den().get_mpz_t());
            mpz_fdiv_q(n_last.get_mpz_t(), nhi.get_num().get_mpz_t(), nhi.get_den().get_mpz_t());
            if (n_first > n_last) throw std::logic_error("refinement lost its wrap guarantee");

            // Candidate with the least nonnegative representative.
            std::optional<Int> pick;
            Rat pick_frac;
            for (Int n = n_first; n <= n_last; ++n) {
                Rat c = (y + Rat(n)) / make_rat(*s);
                Rat f = frac(c);
                if (!pick || f < pick_frac) {
                    pick = n;
                    pick_frac = f;
                }
            }
            Rat c_pre = (y + Rat(*pick)) / make_rat(*s);

            // Dyadic sub-arc inside the preimage arc.
            Rat want = eps_safe / (2 * make_rat(std::abs(*s)));
            unsigned long t = 1;
            while (pow2(-static_cast<long>(t)) > want) ++t;
            Rat rho = pow2(-static_cast<long>(t));
            Rat chat = frac(dyadic_round(c_pre, t));
            out.box.center[i] = chat;
            out.box.radius[i] = rho;
        }

        out.chosen.emplace_back(req.id, *s);
        out.trace.push_back(RefineStep{req.id, *s, out.box});
    }
    return out;
}

} // namespace

OrbitResult find_orbit_point(const IntStreamFn& stream, const std::vector<Requirement>& reqs,
                             std::size_t dim) {
    if (dim == 0) throw validation_error("dimension must be >= 1");
    OrbitResult res;
    if (reqs.empty()) {
        res.x = TorusPoint(dim);
        return res;
    }
    RefineOutcome out = refine_through(stream, reqs, dim, {});
    res.x = TorusPoint(out.box.center);
    res.trace = std::move(out.trace);
    for (std::size_t j = 0; j < reqs.size(); ++j) {
        const Requirement& req = reqs[j];
        long long s = out.chosen[j].second;
        Witness w;
        w.requirement_id = req.id;
        w.s = s;
        w.achieved = torus_scale(make_int(s), res.x);
        for (std::size_t i = 0; i < dim; ++i) {
            Rat v = make_rat(s) * res.x.coords[i] - req.box.center[i];
            Int n = round_nearest(v);
            w.shifts.push_back(n);
            Rat margin = req.box.radius[i] - abs(v - Rat(n));
            if (margin <= 0) throw std::logic_error("constructed witness fails its own margin");
            w.margins.push_back(margin);
        }
        res.witnesses.push_back(std::move(w));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Homomorphism builder

std::string to_string(const GenId& g) {
    const char* tags[] = {"z", "f", "t"};
    return std::string(tags[static_cast<int>(g.block)]) + std::to_string(g.index);
}

namespace {

std::vector<std::pair<GenId, long long>> support_gens(const Element& x) {
    std::vector<std::pair<GenId, long long>> out;
    for (const auto& [k, v] : x.free) out.push_back({GenId{GenId::Block::free_blk, k}, v});
    for (const auto& [k, v] : x.finite) out.push_back({GenId{GenId::Block::finite_blk, k}, v});
    for (const auto& [k, v] : x.tail) out.push_back({GenId{GenId::Block::tail_blk, k}, v});
    return out;
}

long long gen_order(const GroupDescriptor& g, const GenId& id) {
    switch (id.block) {
        case GenId::Block::free_blk: return 0;
        case GenId::Block::finite_blk: return g.finite_order(static_cast<std::size_t>(id.index));
        case GenId::Block::tail_blk: return g.tail_order(id.index);
    }
    return 0;
}

// Smallest w in [0, q) with a*w = r (mod q), or nullopt.
std::optional<long long> solve_modular(long long a, long long r, long long q) {
    a = ((a % q) + q) % q;
    r = ((r % q) + q) % q;
    long long g = std::gcd(a, q); // a == 0 gives g = q
    if (r % g != 0) return std::nullopt;
    long long q2 = q / g;
    if (q2 == 1) return 0;
    long long a2 = (a / g) % q2;
    long long x0 = 1, x1 = 0, r0 = a2, r1 = q2;
    while (r1 != 0) {
        long long qq = r0 / r1;
        r0 -= qq * r1;
        std::swap(r0, r1);
        x0 -= qq * x1;
        std::swap(x0, x1);
    }
    long long inv = ((x0 % q2) + q2) % q2;
    return (r / g) % q2 * inv % q2;
}

// Solve a * v = target - known on T[q], coordinatewise; v in T[q]^d.
std::optional<TorusPoint> solve_fresh_image(long long a, long long q, const TorusPoint& known,
                                            const TorusPoint& target) {
    TorusPoint v(known.dim());
    for (std::size_t i = 0; i < known.dim(); ++i) {
        Rat r = frac(target.coords[i] - known.coords[i]);
        // r must be representable with denominator dividing q.
        if (!mpz_divisible_p(make_int(q).get_mpz_t(), r.get_den().get_mpz_t()))
            return std::nullopt;
        long long num = Rat(r * make_rat(q)).get_num().get_si();
        auto w = solve_modular(a, num, q);
        if (!w) return std::nullopt;
        v.coords[i] = make_rat(*w, q);
    }
    return v;
}

// Lattice points of T[n]^d strictly inside the box, lexicographic order.
std::vector<TorusPoint> lattice_targets(const ArcBox& box, long long n) {
    std::vector<std::vector<Rat>> per_dim(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i)
        for (long long j = 0; j < n; ++j) {
            Rat p = make_rat(j, n);
            if (circle_dist(p - box.center[i]) < box.radius[i]) per_dim[i].push_back(p);
        }
    std::vector<TorusPoint> out;
    std::vector<std::size_t> idx(box.dim(), 0);
    while (true) {
        TorusPoint p(box.dim());
        for (std::size_t i = 0; i < box.dim(); ++i) {
            if (per_dim[i].empty()) return out;
            p.coords[i] = per_dim[i][idx[i]];
        }
        out.push_back(std::move(p));
        std::size_t i = box.dim();
        while (i > 0) {
            if (++idx[i - 1] < per_dim[i - 1].size()) break;
            idx[i - 1] = 0;
            --i;
        }
        if (i == 0) break;
    }
    return out;
}

struct AffineShape {
    Element a;
    long long free_coord = 0;
    long long a_free = 0;
    long long b_free = 0;
};

// Level-0 families must be affine progressions along one free coordinate.
AffineShape affine_shape(const GroupDescriptor& g, const SetExprPtr& family) {
    const AffineLeaf* leaf = nullptr;
    if (const auto* a = std::get_if<AffineLeaf>(&family->node)) leaf = a;
    if (const auto* u = std::get_if<UnionNode>(&family->node))
        for (const SetExprPtr& p : u->parts)
            if (const auto* a = std::get_if<AffineLeaf>(&p->node)) {
                leaf = a;
                break;
            }
    if (!leaf) throw validation_error("level-0 family without an affine progression");
    if (leaf->b.free.size() != 1 || !leaf->b.finite.empty() || !leaf->b.tail.empty())
        throw validation_error(
            "level-0 families must step along a single free coordinate");
    AffineShape sh;
    sh.a = leaf->a;
    sh.free_coord = leaf->b.free.begin()->first;
    sh.b_free = leaf->b.free.begin()->second;
    auto it = leaf->a.free.find(sh.free_coord);
    sh.a_free = it == leaf->a.free.end() ? 0 : it->second;
    (void)g;
    return sh;
}

} // namespace

std::optional<TorusPoint> image_of(const GroupDescriptor& g, const GeneratorAssignment& asg,
                                   const Element& x) {
    (void)g;
    TorusPoint acc(asg.dim);
    for (const auto& [id, coeff] : support_gens(x)) {
        auto it = asg.images.find(id);
        if (it == asg.images.end()) return std::nullopt;
        acc = torus_add(acc, torus_scale(make_int(coeff), it->second));
    }
    return acc;
}

HomResult construct_dense_homomorphism(const GroupDescriptor& g,
                                       const std::vector<SetExprPtr>& family, std::size_t dim,
                                       const std::vector<std::vector<Requirement>>& reqs,
                                       std::size_t backtrack_budget) {
    if (dim == 0) throw validation_error("dimension must be >= 1");
    if (reqs.size() != family.size())
        throw validation_error("one requirement list per family member expected");

    HomResult res;
    res.assignment.dim = dim;

    std::vector<SetExprPtr> fam;
    std::vector<long long> levels;
    for (const SetExprPtr& s : family) {
        SetExprPtr ns = normalize(s, g);
        TorsionClass tc = classify(ns, g);
        if (tc.kind != TorsionClass::Kind::almost_torsion)
            throw validation_error("family members must classify as almost-torsion");
        fam.push_back(ns);
        levels.push_back(tc.level);
    }
    for (std::size_t j = 0; j < fam.size(); ++j)
        for (const Requirement& r : reqs[j]) {
            r.validate(dim);
            if (r.level != levels[j])
                throw validation_error("requirement level must match the family level");
        }

    for (std::size_t j = 0; j < fam.size(); ++j) {
        if (reqs[j].empty()) continue;

        if (levels[j] == 0) {
            // Single free direction: run the nested-interval engine on the
            // progression's coefficients.  Coincides with find_orbit_point
            // on G = Z.
            AffineShape sh = affine_shape(g, fam[j]);
            GenId gstar{GenId::Block::free_blk, sh.free_coord};
            if (res.assignment.images.count(gstar))
                throw validation_error("free direction already forced; cannot refine");

            // Fresh torsion support of the base point maps to zero.
            Element a_rest = sh.a;
            a_rest.free.erase(sh.free_coord);
            for (const auto& [id, coeff] : support_gens(a_rest)) {
                (void)coeff;
                if (!res.assignment.images.count(id))
                    res.assignment.images[id] = TorusPoint(dim);
            }
            auto known = image_of(g, res.assignment, a_rest);

            IntStreamFn coeffs = [&sh](std::size_t i) -> std::optional<long long> {
                return sh.a_free + static_cast<long long>(i) * sh.b_free;
            };
            RefineOutcome out = refine_through(coeffs, reqs[j], dim, known->coords);
            res.assignment.images[gstar] = TorusPoint(out.box.center);
            for (std::size_t r = 0; r < reqs[j].size(); ++r) {
                long long s = out.chosen[r].second;
                long long k = (s - sh.a_free) / sh.b_free;
                Element x = add(g, sh.a, scale(g, k, Element{{{sh.free_coord, sh.b_free}}, {}, {}}));
                HomWitness w;
                w.family = j;
                w.requirement_id = reqs[j][r].id;
                w.element = x;
                w.image = *image_of(g, res.assignment, x);
                res.witnesses.push_back(std::move(w));
            }
            continue;
        }

        // Torsion level: walk the enumeration, prefer elements introducing
        // a fresh generator, and place the fresh image on the requested
        // lattice point.  Failed requirements roll back earlier choices.
        struct Choice {
            std::size_t req_index = 0;
            std::size_t elem_index = 0;
            std::size_t target_index = 0;
            std::vector<GenId> assigned;
            std::size_t witnesses_before = 0;
        };
        std::vector<Choice> stack;
        std::size_t r = 0;
        std::size_t resume_elem = 0, resume_target = 0;
        std::size_t rollbacks = 0;

        std::vector<Element> enum_memo;
        auto element_at = [&](std::size_t i) -> std::optional<Element> {
            while (enum_memo.size() <= i) {
                std::size_t want = std::max<std::size_t>(2 * enum_memo.size() + 8, i + 1);
                enum_memo = enumerate_prefix(fam[j], g, want);
                if (enum_memo.size() < want && enum_memo.size() <= i) return std::nullopt;
            }
            return enum_memo[i];
        };

        while (r < reqs[j].size()) {
            const Requirement& req = reqs[j][r];
            std::vector<TorusPoint> targets = lattice_targets(req.box, levels[j]);
            if (targets.empty())
                throw validation_error("requirement box misses T[level]^d");

            bool satisfied = false;
            for (std::size_t ei = resume_elem; ei < kElementScanBudget && !satisfied; ++ei) {
                auto xe = element_at(ei);
                if (!xe) break;
                const Element& x = *xe;
                auto gens = support_gens(x);
                std::vector<std::pair<GenId, long long>> fresh;
                TorusPoint known(dim);
                bool known_ok = true;
                for (const auto& [id, coeff] : gens) {
                    auto it = res.assignment.images.find(id);
                    if (it == res.assignment.images.end())
                        fresh.push_back({id, coeff});
                    else
                        known = torus_add(known, torus_scale(make_int(coeff), it->second));
                }
                (void)known_ok;

                if (fresh.empty()) {
                    // A forced element offers a single option; skip it when
                    // this very choice is the one being retried.
                    if (ei == resume_elem && resume_target > 0) continue;
                    if (known.in_torsion(levels[j]) && req.box.contains(known)) {
                        Choice ch;
                        ch.req_index = r;
                        ch.elem_index = ei;
                        ch.witnesses_before = res.witnesses.size();
                        res.witnesses.push_back(HomWitness{j, req.id, x, known});
                        stack.push_back(std::move(ch));
                        satisfied = true;
                    }
                    continue;
                }

                // Solve with the first fresh generator; remaining fresh
                // generators pin to zero.
                std::size_t t0 = (ei == resume_elem) ? resume_target : 0;
                for (std::size_t ti = t0; ti < targets.size() && !satisfied; ++ti) {
                    const auto& [id, coeff] = fresh.front();
                    long long q = gen_order(g, id);
                    if (q == 0) continue; // torsion walk only places torsion generators
                    auto v = solve_fresh_image(coeff, q, known, targets[ti]);
                    if (!v) continue;
                    Choice ch;
                    ch.req_index = r;
                    ch.elem_index = ei;
                    ch.target_index = ti;
                    ch.witnesses_before = res.witnesses.size();
                    res.assignment.images[id] = *v;
                    ch.assigned.push_back(id);
                    for (std::size_t fi = 1; fi < fresh.size(); ++fi) {
                        res.assignment.images[fresh[fi].first] = TorusPoint(dim);
                        ch.assigned.push_back(fresh[fi].first);
                    }
                    TorusPoint img = *image_of(g, res.assignment, x);
                    if (!img.in_torsion(levels[j]) || !req.box.contains(img)) {
                        for (const GenId& gid : ch.assigned) res.assignment.images.erase(gid);
                        continue;
                    }
                    res.witnesses.push_back(HomWitness{j, req.id, x, img});
                    stack.push_back(std::move(ch));
                    satisfied = true;
                }
            }

            if (satisfied) {
                ++r;
                resume_elem = 0;
                resume_target = 0;
                continue;
            }

            // Roll back the previous choice and retry it on its next option.
            if (stack.empty() || ++rollbacks > backtrack_budget) {
                res.backtracks = rollbacks;
                throw budget_error("homomorphism backtrack budget exhausted at requirement " +
                                   std::to_string(req.id));
            }
            Choice last = stack.back();
            stack.pop_back();
            for (const GenId& gid : last.assigned) res.assignment.images.erase(gid);
            res.witnesses.resize(last.witnesses_before);
            r = last.req_index;
            resume_elem = last.elem_index;
            resume_target = last.target_index + 1;
        }
        res.backtracks += rollbacks;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Injectivity on a finite window

FormalAssignment to_formal(const GroupDescriptor& g, const GeneratorAssignment& asg) {
    (void)g;
    FormalAssignment f;
    f.dim = asg.dim;
    for (const auto& [id, p] : asg.images) f.images[id] = to_formal(p);
    return f;
}

std::optional<FormalTorusPoint> image_of(const GroupDescriptor& g, const FormalAssignment& asg,
                                         const Element& x) {
    (void)g;
    FormalTorusPoint acc;
    acc.coords.assign(asg.dim, FormalReal(Rat(0)));
    for (const auto& [id, coeff] : support_gens(x)) {
        auto it = asg.images.find(id);
        if (it == asg.images.end()) return std::nullopt;
        acc = formal_add(acc, formal_scale(coeff, it->second));
    }
    return acc;
}

FormalAssignment ensure_injective_window(const GroupDescriptor& g, const FormalAssignment& asg,
                                         std::size_t window) {
    FormalAssignment out = asg;
    if (out.dim == 0) throw validation_error("assignment dimension must be >= 1");

    // Generator set: assignment domain plus the free and finite blocks.
    std::set<GenId> gens;
    for (const auto& [id, p] : out.images) {
        (void)p;
        gens.insert(id);
    }
    for (long long i = 0; i < g.free_rank(); ++i) gens.insert(GenId{GenId::Block::free_blk, i});
    for (long long i = 0; i < static_cast<long long>(g.finite_orders().size()); ++i)
        gens.insert(GenId{GenId::Block::finite_blk, i});

    // Fresh symbol indices continue past any already in use.
    int next_symbol = 1;
    for (const auto& [id, p] : out.images)
        for (const FormalReal& c : p.coords)
            for (const auto& [si, v] : c.coeffs) {
                (void)v;
                next_symbol = std::max(next_symbol, si + 1);
            }

    std::size_t ordinal = 0;
    for (const GenId& id : gens) {
        if (!out.images.count(id)) {
            FormalTorusPoint p;
            p.coords.assign(out.dim, FormalReal(Rat(0)));
            long long q = gen_order(g, id);
            std::size_t coord = ordinal % out.dim;
            if (q == 0) {
                p.coords[coord] = FormalReal::symbol(next_symbol++);
            } else {
                p.coords[coord] = FormalReal(make_rat(1, q));
            }
            out.images[id] = std::move(p);
        }
        ++ordinal;
    }

    // Exact independence of the symbolic directions in use.
    std::vector<FormalReal> symbolic;
    for (const auto& [id, p] : out.images)
        for (const FormalReal& c : p.coords)
            if (!c.coeffs.empty()) symbolic.push_back(c);
    if (!symbolic.empty() && !kronecker_independence(symbolic).dense)
        throw validation_error("assigned coordinates are rationally dependent");

    // Enumerate the generated subgroup by coefficient height and verify
    // injectivity on the first `window` elements.
    std::vector<GenId> glist(gens.begin(), gens.end());
    std::vector<Element> window_elems;
    std::set<Element> seen;
    for (long long h = 0; window_elems.size() < window; ++h) {
        std::vector<std::vector<long long>> coeff_lists;
        for (const GenId& id : glist) {
            long long q = gen_order(g, id);
            std::vector<long long> cs;
            if (q == 0) {
                for (long long c = -h; c <= h; ++c) cs.push_back(c);
            } else {
                for (long long c = 0; c < std::min(q, h + 1); ++c) cs.push_back(c);
            }
            coeff_lists.push_back(std::move(cs));
        }
        std::size_t total = 1;
        for (const auto& cs : coeff_lists) {
            total *= cs.size();
            if (total > kWindowBudget) throw budget_error("injectivity window too large");
        }
        bool grew = false;
        std::vector<std::size_t> idx(glist.size(), 0);
        while (true) {
            Element e;
            for (std::size_t i = 0; i < glist.size(); ++i) {
                long long c = coeff_lists[i][idx[i]];
                if (c != 0) {
                    switch (glist[i].block) {
                        case GenId::Block::free_blk: e.free[glist[i].index] = c; break;
                        case GenId::Block::finite_blk: e.finite[glist[i].index] = c; break;
                        case GenId::Block::tail_blk: e.tail[glist[i].index] = c; break;
                    }
                }
            }
            e = canonicalize(g, std::move(e));
            if (seen.insert(e).second) {
                window_elems.push_back(e);
                grew = true;
                if (window_elems.size() >= window) break;
            }
            std::size_t i = glist.size();
            while (i > 0) {
                if (++idx[i - 1] < coeff_lists[i - 1].size()) break;
                idx[i - 1] = 0;
                --i;
            }
            if (i == 0) break;
        }
        if (window_elems.size() >= window) break;
        if (!grew && h > 0) break; // subgroup exhausted
    }

    std::vector<FormalTorusPoint> images;
    for (const Element& e : window_elems) images.push_back(*image_of(g, out, e));
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t k = i + 1; k < images.size(); ++k)
            if (torus_equal(images[i], images[k]))
                throw validation_error("window collision: " + to_string(window_elems[i]) +
                                       " and " + to_string(window_elems[k]) +
                                       " share an image");
    return out;
}

// ---------------------------------------------------------------------------
// Flow simulation

FlowReport flow_simulate(const IntStreamFn& stream, const TorusPoint& alpha, const TorusPoint& x0,
                         const std::vector<ArcBox>& boxes, std::size_t n) {
    if (n == 0) throw validation_error("flow_simulate requires n >= 1");
    if (alpha.dim() != x0.dim()) throw validation_error("alpha/x0 dimension mismatch");
    for (const ArcBox& b : boxes) {
        b.validate();
        if (b.dim() != alpha.dim()) throw validation_error("box dimension mismatch");
    }

    FlowReport rep;
    rep.boxes.assign(boxes.size(), BoxHit{});
    rep.scope_note = "finite-dimensional, finite-precision orbit sample";

    std::vector<std::vector<double>> visited_cols(alpha.dim());
    std::size_t produced = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<long long> s = stream(i);
        if (!s) break;
        TorusPoint p = torus_add(x0, torus_scale(make_int(*s), alpha));
        for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
            if (boxes[bi].contains(p)) {
                if (!rep.boxes[bi].first_hit) rep.boxes[bi].first_hit = i;
                ++rep.boxes[bi].hits;
            }
        }
        for (std::size_t c = 0; c < alpha.dim(); ++c)
            visited_cols[c].push_back(p.coords[c].get_d());
        ++produced;
    }
    rep.points = produced;

    if (produced > 0) {
        double acc = 0;
        for (auto& col : visited_cols) {
            std::sort(col.begin(), col.end());
            acc += star_discrepancy_1d(col);
        }
        rep.mean_star_discrepancy = acc / static_cast<double>(alpha.dim());
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Requirement nets

std::vector<Requirement> requirement_net(long long level, std::size_t dim, const Rat& eps) {
    if (dim == 0) throw validation_error("dimension must be >= 1");
    if (eps <= 0 || eps > Rat(1, 2)) throw validation_error("eps must lie in (0, 1/2]");
    if (level == 1)
        throw validation_error("level 1 is empty: T[1] is the trivial subgroup");
    if (level < 0) throw validation_error("level must be >= 0");

    std::vector<Requirement> out;
    std::size_t id = 0;
    if (level == 0) {
        long t = 0;
        while (pow2(-t) > eps) ++t; // dyadic pitch <= eps
        long long cells = 1;
        for (long i = 0; i < t; ++i) cells *= 2;
        std::vector<long long> idx(dim, 0);
        while (true) {
            Requirement r;
            r.id = id++;
            r.level = 0;
            for (std::size_t i = 0; i < dim; ++i) {
                r.box.center.push_back(frac(make_rat(idx[i]) * pow2(-t)));
                r.box.radius.push_back(eps);
            }
            out.push_back(std::move(r));
            std::size_t i = dim;
            while (i > 0) {
                if (++idx[i - 1] < cells) break;
                idx[i - 1] = 0;
                --i;
            }
            if (i == 0) break;
        }
        return out;
    }

    Rat radius = std::min(eps, make_rat(1, 2 * level));
    std::vector<long long> idx(dim, 0);
    while (true) {
        Requirement r;
        r.id = id++;
        r.level = level;
        for (std::size_t i = 0; i < dim; ++i) {
            r.box.center.push_back(make_rat(idx[i], level));
            r.box.radius.push_back(radius);
        }
        out.push_back(std::move(r));
        std::size_t i = dim;
        while (i > 0) {
            if (++idx[i - 1] < level) break;
            idx[i - 1] = 0;
            --i;
        }
        if (i == 0) break;
    }
    return out;
}

} // namespace abel
