#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "abel/setexpr.hpp"

using namespace abel;

namespace {

Element elem(std::map<long long, long long> free, std::map<long long, long long> finite,
             std::map<long long, long long> tail) {
    Element e;
    e.free = std::move(free);
    e.finite = std::move(finite);
    e.tail = std::move(tail);
    return e;
}

Element zint(long long v) { return v == 0 ? Element{} : elem({{0, v}}, {}, {}); }

long long zval(const Element& e) {
    auto it = e.free.find(0);
    return it == e.free.end() ? 0 : it->second;
}

const GroupDescriptor Z(1, {}, {});
const GroupDescriptor W2(0, {}, {2});
const GroupDescriptor W4(0, {}, {4});

Element tailu(long long coord, long long v) { return elem({}, {}, {{coord, v}}); }

struct RandomExpr {
    SetExprPtr expr;
    GroupDescriptor grp;
};

RandomExpr random_expr(std::mt19937_64& rng) {
    static const std::vector<GroupDescriptor> groups = {
        GroupDescriptor(0, {}, {2}),     GroupDescriptor(0, {}, {4}),
        GroupDescriptor(0, {}, {3}),     GroupDescriptor(0, {4}, {2}),
        GroupDescriptor(0, {3}, {2, 6}), GroupDescriptor(0, {12}, {2, 4}),
        GroupDescriptor(1, {}, {2}),     GroupDescriptor(1, {6}, {4}),
    };
    const GroupDescriptor& g = groups[rng() % groups.size()];

    auto random_element = [&](bool tail_low_only) {
        Element e;
        if (g.free_rank() > 0 && rng() % 3 == 0)
            e.free[0] = static_cast<long long>(rng() % 5) - 2;
        if (!g.finite_orders().empty() && rng() % 2)
            e.finite[0] = static_cast<long long>(rng() % g.finite_order(0));
        if (g.has_tail() && rng() % 2) {
            long long coord = static_cast<long long>(rng() % (tail_low_only ? 3 : 6));
            e.tail[coord] = 1 + static_cast<long long>(rng() % (g.tail_order(coord) - 1));
        }
        return canonicalize(g, e);
    };

    std::vector<SetExprPtr> parts;
    std::size_t nparts = 1 + rng() % 3;
    for (std::size_t i = 0; i < nparts; ++i) {
        switch (rng() % 3) {
            case 0: {
                std::vector<Element> es;
                for (std::size_t k = 0; k < rng() % 4; ++k) es.push_back(random_element(false));
                parts.push_back(make_finite(std::move(es)));
                break;
            }
            case 1: {
                parts.push_back(make_affine(random_element(false), random_element(false)));
                break;
            }
            default: {
                if (!g.has_tail()) {
                    parts.push_back(make_finite({random_element(false)}));
                    break;
                }
                long long period = g.tail_period();
                long long step = period * (1 + static_cast<long long>(rng() % 2));
                Element tmpl;
                for (long long j = 0; j < step; ++j)
                    if (rng() % 2) {
                        long long q = g.tail_order(j);
                        tmpl.tail[j] = 1 + static_cast<long long>(rng() % (q - 1));
                    }
                if (tmpl.tail.empty()) tmpl.tail[0] = 1;
                parts.push_back(make_block(g, random_element(true), tmpl, 4, step));
                break;
            }
        }
    }
    SetExprPtr e = make_union(std::move(parts));
    if (rng() % 3 == 0) e = make_translate(random_element(false), e);
    return RandomExpr{normalize(e, g), g};
}

} // namespace

TEST_CASE("normalize folds and flattens") {
    SetExprPtr t = make_translate(zint(3), make_finite({zint(1)}));
    SetExprPtr n = normalize(t, Z);
    const auto* f = std::get_if<FiniteLeaf>(&n->node);
    REQUIRE(f);
    CHECK(f->elements == std::vector<Element>{zint(4)});

    GroupDescriptor z9(0, {9}, {});
    SetExprPtr a = make_affine(elem({}, {{0, 1}}, {}), elem({}, {{0, 3}}, {}));
    SetExprPtr na = normalize(a, z9);
    const auto* fa = std::get_if<FiniteLeaf>(&na->node);
    REQUIRE(fa);
    CHECK(fa->elements.size() == 3); // {1, 4, 7}

    SetExprPtr u = make_union({make_finite({}), make_affine(zint(0), zint(2))});
    SetExprPtr nu = normalize(u, Z);
    CHECK(std::holds_alternative<AffineLeaf>(nu->node));

    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        RandomExpr re = random_expr(rng);
        SetExprPtr twice = normalize(re.expr, re.grp);
        CHECK(to_string(twice) == to_string(re.expr));
    }
}

TEST_CASE("block constructor invariants") {
    CHECK_THROWS_AS(make_block(W2, Element{}, tailu(1, 1), 0, 1), validation_error);
    GroupDescriptor mixed(0, {}, {2, 4});
    CHECK_THROWS_AS(make_block(mixed, Element{}, tailu(0, 1), 0, 1), validation_error);

    SetExprPtr b = make_block(W2, tailu(5, 1), tailu(0, 1), 0, 1);
    const auto* bl = std::get_if<BlockLeaf>(&b->node);
    REQUIRE(bl);
    CHECK(bl->start == 6);

    SetExprPtr zero = normalize(make_block(W2, Element{}, tailu(0, 2), 0, 1), W2);
    CHECK(std::holds_alternative<FiniteLeaf>(zero->node));
}

TEST_CASE("is_infinite") {
    CHECK(is_infinite(normalize(make_affine(zint(0), zint(2)), Z), Z));
    CHECK(is_infinite(normalize(make_block(W2, Element{}, tailu(0, 1), 0, 1), W2), W2));
    CHECK_FALSE(is_infinite(normalize(make_finite({zint(0), zint(1)}), Z), Z));
}

TEST_CASE("enumerate_prefix canonical order") {
    SetExprPtr a = normalize(make_affine(zint(1), zint(2)), Z);
    std::vector<Element> p = enumerate_prefix(a, Z, 3);
    CHECK(p == std::vector<Element>{zint(1), zint(3), zint(5)});

    SetExprPtr u = normalize(
        make_union({make_affine(zint(0), zint(2)), make_affine(zint(1), zint(2))}), Z);
    std::vector<Element> q = enumerate_prefix(u, Z, 4);
    CHECK(q == std::vector<Element>{zint(0), zint(1), zint(2), zint(3)});

    SetExprPtr f = normalize(make_finite({zint(5)}), Z);
    CHECK(enumerate_prefix(f, Z, 3) == std::vector<Element>{zint(5)});
    CHECK(enumerate_prefix(f, Z, 0).empty());

    SetExprPtr dup = normalize(
        make_union({make_affine(zint(0), zint(1)), make_affine(zint(0), zint(2))}), Z);
    std::vector<Element> d = enumerate_prefix(dup, Z, 6);
    std::set<Element> uniq(d.begin(), d.end());
    CHECK(uniq.size() == d.size());
}

TEST_CASE("scale_set") {
    SetExprPtr a = normalize(make_affine(zint(1), zint(3)), Z);
    SetExprPtr s = scale_set(2, a, Z);
    const auto* al = std::get_if<AffineLeaf>(&s->node);
    REQUIRE(al);
    CHECK(zval(al->a) == 2);
    CHECK(zval(al->b) == 6);

    SetExprPtr b = normalize(make_block(W4, tailu(0, 1), tailu(0, 2), 1, 1), W4);
    SetExprPtr sb = scale_set(2, b, W4);
    const auto* fl = std::get_if<FiniteLeaf>(&sb->node);
    REQUIRE(fl);
    CHECK(fl->elements == std::vector<Element>{tailu(0, 2)});

    SetExprPtr f = scale_set(3, normalize(make_finite({zint(1), zint(2)}), Z), Z);
    const auto* ff = std::get_if<FiniteLeaf>(&f->node);
    REQUIRE(ff);
    CHECK(ff->elements == std::vector<Element>{zint(3), zint(6)});
}

TEST_CASE("classify: pinned examples") {
    TorsionClass c1 = classify(normalize(make_affine(zint(1), zint(2)), Z), Z);
    CHECK(c1.kind == TorsionClass::Kind::almost_torsion);
    CHECK(c1.level == 0);

    GroupDescriptor W3(0, {}, {3});
    TorsionClass c2 = classify(normalize(make_block(W3, Element{}, tailu(0, 1), 0, 1), W3), W3);
    CHECK(c2.kind == TorsionClass::Kind::almost_torsion);
    CHECK(c2.level == 3);

    TorsionClass c3 = classify(normalize(make_block(W4, tailu(0, 1), tailu(0, 2), 1, 1), W4), W4);
    CHECK(c3.kind == TorsionClass::Kind::not_almost_torsion);
    REQUIRE(c3.witness);
    CHECK(c3.witness->d == 2);
    CHECK(c3.witness->g == tailu(0, 2));

    TorsionClass c4 = classify(normalize(make_finite({zint(1)}), Z), Z);
    CHECK(c4.kind == TorsionClass::Kind::finite_set);

    GroupDescriptor zw(1, {}, {2});
    SetExprPtr mixed =
        normalize(make_block(zw, elem({{0, 1}}, {}, {}), tailu(0, 1), 0, 1), zw);
    TorsionClass c5 = classify(mixed, zw);
    CHECK(c5.kind == TorsionClass::Kind::not_almost_torsion);
    REQUIRE(c5.witness);
    CHECK(c5.witness->d == 2);
    CHECK(c5.witness->g == elem({{0, 2}}, {}, {}));
}

TEST_CASE("classify union rules") {
    SetExprPtr u = normalize(make_union({make_block(W2, Element{}, tailu(0, 1), 0, 2),
                                         make_block(W2, tailu(0, 1), tailu(0, 1), 1, 2)}),
                             W2);
    TorsionClass cu = classify(u, W2);
    CHECK(cu.kind == TorsionClass::Kind::almost_torsion);
    CHECK(cu.level == 2);

    GroupDescriptor w24(0, {}, {2, 4});
    SetExprPtr mix = normalize(make_union({make_block(w24, Element{}, tailu(0, 1), 0, 2),
                                           make_block(w24, Element{}, tailu(1, 1), 0, 2)}),
                               w24);
    TorsionClass cm = classify(mix, w24);
    CHECK(cm.kind == TorsionClass::Kind::not_almost_torsion);
    REQUIRE(cm.witness);
    CHECK(cm.witness->d == 2);

    GroupDescriptor zw(1, {}, {2});
    SetExprPtr with_free = normalize(make_union({make_finite({elem({{0, 1}}, {}, {})}),
                                                 make_block(zw, Element{}, tailu(0, 1), 0, 1)}),
                                     zw);
    TorsionClass cf = classify(with_free, zw);
    CHECK(cf.kind == TorsionClass::Kind::not_almost_torsion);

    SetExprPtr ab = normalize(
        make_union({make_affine(elem({{0, 0}}, {}, {}), elem({{0, 1}}, {}, {})),
                    make_block(zw, Element{}, tailu(0, 1), 0, 1)}),
        zw);
    TorsionClass ca = classify(ab, zw);
    CHECK(ca.kind == TorsionClass::Kind::not_almost_torsion);
    CHECK(ca.witness->d == 2);
}

TEST_CASE("classify never returns level 1 and is stable under re-normalization") {
    std::mt19937_64 rng(23);
    int almost = 0, nat = 0, fin = 0;
    for (int trial = 0; trial < 1200; ++trial) {
        RandomExpr re = random_expr(rng);
        TorsionClass c = classify(re.expr, re.grp);
        if (c.kind == TorsionClass::Kind::almost_torsion) {
            ++almost;
            CHECK(c.level != 1);
        } else if (c.kind == TorsionClass::Kind::not_almost_torsion) {
            ++nat;
        } else {
            ++fin;
        }
        TorsionClass again = classify(normalize(re.expr, re.grp), re.grp);
        CHECK(c == again);
    }
    CHECK(almost > 100);
    CHECK(nat > 100);
    CHECK(fin > 50);
}

TEST_CASE("thinned sub-streams keep the classification level") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 300; ++trial) {
        RandomExpr re = random_expr(rng);
        const BlockLeaf* bl = nullptr;
        if (const auto* b = std::get_if<BlockLeaf>(&re.expr->node)) bl = b;
        if (const auto* u = std::get_if<UnionNode>(&re.expr->node))
            for (const SetExprPtr& p : u->parts)
                if (const auto* b = std::get_if<BlockLeaf>(&p->node)) {
                    bl = b;
                    break;
                }
        if (!bl) continue;
        SetExprPtr whole = make_block(re.grp, bl->c, bl->templ, bl->start, bl->step);
        TorsionClass c = classify(normalize(whole, re.grp), re.grp);
        if (c.kind != TorsionClass::Kind::almost_torsion) continue;

        long long jump = 1 + static_cast<long long>(rng() % 3);
        long long offset = static_cast<long long>(rng() % 4);
        SetExprPtr thinned = make_block(re.grp, bl->c, bl->templ,
                                        bl->start + offset * bl->step, bl->step * jump);
        TorsionClass ct = classify(normalize(thinned, re.grp), re.grp);
        CHECK(ct == c);
    }
}

TEST_CASE("translation by torsion of the level fixes the class") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 400; ++trial) {
        RandomExpr re = random_expr(rng);
        TorsionClass c = classify(re.expr, re.grp);
        if (c.kind != TorsionClass::Kind::almost_torsion || c.level == 0) continue;
        Element g;
        if (!re.grp.finite_orders().empty()) {
            long long q = re.grp.finite_order(0);
            long long sub = q / gcd_ll(c.level, q);
            long long mult = static_cast<long long>(rng()) % gcd_ll(c.level, q);
            if (mult) g.finite[0] = sub * mult;
        }
        if (re.grp.has_tail()) {
            long long coord = static_cast<long long>(rng() % 8);
            long long q = re.grp.tail_order(coord);
            long long sub = q / gcd_ll(c.level, q);
            long long mult = static_cast<long long>(rng()) % gcd_ll(c.level, q);
            if (mult) g.tail[coord] = sub * mult;
        }
        g = canonicalize(re.grp, g);
        TorsionClass ct = classify(normalize(make_translate(g, re.expr), re.grp), re.grp);
        CHECK(ct.kind == TorsionClass::Kind::almost_torsion);
        CHECK(ct.level == c.level);
    }
}

TEST_CASE("level 0 classifications scale to infinite sets") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 300; ++trial) {
        RandomExpr re = random_expr(rng);
        TorsionClass c = classify(re.expr, re.grp);
        if (c.kind != TorsionClass::Kind::almost_torsion || c.level != 0) continue;
        for (long long n = 1; n <= 12; ++n)
            CHECK(is_infinite(scale_set(n, re.expr, re.grp), re.grp));
    }
}

TEST_CASE("classify_prefix: pinned examples") {
    SetExprPtr basis = normalize(make_block(W2, Element{}, tailu(0, 1), 0, 1), W2);
    PrefixReport r1 = classify_prefix(basis, W2, 16, 4);
    CHECK(r1.candidate_level == 2);
    CHECK(r1.consistent);
    for (const FiberStat& f : r1.max_fiber_per_divisor) CHECK(f.count <= 1);

    SetExprPtr shifted = normalize(make_block(W4, tailu(0, 1), tailu(0, 2), 1, 1), W4);
    PrefixReport r2 = classify_prefix(shifted, W4, 16, 4);
    CHECK(r2.candidate_level == 4);
    CHECK_FALSE(r2.consistent);
    REQUIRE(!r2.flagged.empty());
    CHECK(r2.flagged.front().d == 2);
    CHECK(r2.flagged.front().count == 16);
    CHECK(r2.flagged.front().value == tailu(0, 2));

    PrefixReport r3 = classify_prefix(std::vector<Element>{tailu(0, 1)}, W4, 4);
    CHECK(r3.candidate_level == 4);
    CHECK(r3.consistent);
}

TEST_CASE("prefix reports cohere with the exact classification") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        RandomExpr re = random_expr(rng);
        TorsionClass c = classify(re.expr, re.grp);
        if (c.kind == TorsionClass::Kind::almost_torsion && c.level >= 1) {
            for (std::size_t n : {16u, 64u, 256u}) {
                PrefixReport r = classify_prefix(re.expr, re.grp, n, 12);
                if (r.candidate_level >= 1) CHECK(c.level % r.candidate_level == 0);
                CHECK(r.consistent);
            }
        }
        if (c.kind == TorsionClass::Kind::not_almost_torsion) {
            std::size_t prev = 0;
            bool grew = true;
            for (std::size_t n : {16u, 64u, 256u}) {
                std::vector<Element> prefix = enumerate_prefix(re.expr, re.grp, n);
                std::size_t count = 0;
                for (const Element& x : prefix)
                    if (scale(re.grp, c.witness->d, x) == c.witness->g) ++count;
                if (count <= prev) grew = false;
                prev = count;
            }
            CHECK(grew);
        }
    }
}

TEST_CASE("extract_almost_torsion: pinned examples") {
    SetExprPtr x1 = normalize(make_block(W2, tailu(0, 1), tailu(0, 1), 1, 1), W2);
    auto e1 = extract_almost_torsion(x1, W2);
    REQUIRE(e1);
    CHECK(e1->shift == tailu(0, 1));
    CHECK(e1->level == 2);
    TorsionClass c1 = classify(normalize(e1->set, W2), W2);
    CHECK(c1.kind == TorsionClass::Kind::almost_torsion);
    CHECK(c1.level == 2);

    SetExprPtr x2 = normalize(make_affine(zint(5), zint(3)), Z);
    auto e2 = extract_almost_torsion(x2, Z);
    REQUIRE(e2);
    CHECK(e2->shift.is_zero());
    CHECK(e2->level == 0);

    SetExprPtr x3 = normalize(make_block(W4, tailu(0, 1), tailu(0, 2), 1, 1), W4);
    auto e3 = extract_almost_torsion(x3, W4);
    REQUIRE(e3);
    CHECK(e3->shift == tailu(0, 1));
    CHECK(e3->level == 2);
    TorsionClass c3 = classify(normalize(e3->set, W4), W4);
    CHECK(c3.kind == TorsionClass::Kind::almost_torsion);
    CHECK(c3.level == 2);
}
