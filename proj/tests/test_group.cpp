#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "abel/group.hpp"
#include "abel/smith.hpp"

using namespace abel;

namespace {

// Independent oracle: the product of the first k invariant factors equals
// the gcd of all k x k minors.
Int minor_gcd(const IntMatrix& m, std::size_t k) {
    std::size_t rows = m.size(), cols = m.empty() ? 0 : m[0].size();
    Int acc = 0;

    std::function<Int(std::vector<std::vector<Int>>)> det =
        [&](std::vector<std::vector<Int>> a) -> Int {
        if (a.size() == 1) return a[0][0];
        Int d = 0;
        int sign = 1;
        for (std::size_t c = 0; c < a.size(); ++c) {
            std::vector<std::vector<Int>> minor;
            for (std::size_t i = 1; i < a.size(); ++i) {
                std::vector<Int> row;
                for (std::size_t j = 0; j < a.size(); ++j)
                    if (j != c) row.push_back(a[i][j]);
                minor.push_back(std::move(row));
            }
            d += sign * a[0][c] * det(minor);
            sign = -sign;
        }
        return d;
    };

    std::vector<std::size_t> rpick, cpick;
    std::function<void(std::size_t)> cols_rec;
    std::function<void(std::size_t)> rows_rec = [&](std::size_t from) {
        if (rpick.size() == k) {
            cols_rec(0);
            return;
        }
        for (std::size_t r = from; r < rows; ++r) {
            rpick.push_back(r);
            rows_rec(r + 1);
            rpick.pop_back();
        }
    };
    cols_rec = [&](std::size_t from) {
        if (cpick.size() == k) {
            std::vector<std::vector<Int>> sub(k, std::vector<Int>(k));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) sub[i][j] = m[rpick[i]][cpick[j]];
            Int dd = det(sub);
            mpz_gcd(acc.get_mpz_t(), acc.get_mpz_t(), dd.get_mpz_t());
            return;
        }
        for (std::size_t c = from; c < cols; ++c) {
            cpick.push_back(c);
            cols_rec(c + 1);
            cpick.pop_back();
        }
    };
    rows_rec(0);
    return abs(acc);
}

Element elem(std::map<long long, long long> free, std::map<long long, long long> finite,
             std::map<long long, long long> tail) {
    Element e;
    e.free = std::move(free);
    e.finite = std::move(finite);
    e.tail = std::move(tail);
    return e;
}

// Brute force order: smallest n >= 1 with nx = 0, scanning up to bound.
long long order_oracle(const GroupDescriptor& g, const Element& x, long long bound) {
    for (long long n = 1; n <= bound; ++n)
        if (scale(g, n, x).is_zero()) return n;
    return 0;
}

} // namespace

TEST_CASE("smith normal form on pinned examples") {
    auto to_m = [](std::vector<std::vector<long long>> v) {
        IntMatrix m;
        for (auto& row : v) {
            std::vector<Int> r;
            for (long long x : row) r.push_back(make_int(x));
            m.push_back(std::move(r));
        }
        return m;
    };
    auto to_ll = [](const std::vector<Int>& v) {
        std::vector<long long> r;
        for (const Int& x : v) r.push_back(x.get_si());
        return r;
    };

    CHECK(to_ll(smith_normal_form(to_m({{1, 0}, {0, 1}}))) == std::vector<long long>{1, 1});
    CHECK(to_ll(smith_normal_form(to_m({{2, 0}, {0, 3}}))) == std::vector<long long>{1, 6});
    CHECK(to_ll(smith_normal_form(to_m({{2, 4}, {6, 8}}))) == std::vector<long long>{2, 4});
    CHECK(smith_normal_form({}).empty());
    CHECK(to_ll(smith_normal_form(to_m({{0, 0}, {0, 0}}))) == std::vector<long long>{0, 0});
}

TEST_CASE("smith normal form agrees with the minor-gcd oracle") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long long> entry(-9, 9);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t rows = 1 + rng() % 3, cols = 1 + rng() % 3;
        IntMatrix m(rows, std::vector<Int>(cols));
        for (auto& row : m)
            for (auto& v : row) v = make_int(entry(rng));
        std::vector<Int> f = smith_normal_form(m);

        Int prod = 1;
        for (std::size_t k = 0; k < f.size(); ++k) {
            prod *= f[k];
            CHECK(abs(prod) == minor_gcd(m, k + 1));
        }
        for (std::size_t k = 0; k + 1 < f.size(); ++k) {
            if (f[k] != 0) {
                CHECK(f[k + 1] % f[k] == 0);
            } else {
                CHECK(f[k + 1] == 0);
            }
        }
    }
}

TEST_CASE("smith normal form is invariant under row and column permutation") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long long> entry(-6, 6);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 2 + rng() % 2;
        IntMatrix m(n, std::vector<Int>(n));
        for (auto& row : m)
            for (auto& v : row) v = make_int(entry(rng));
        IntMatrix p = m;
        std::shuffle(p.begin(), p.end(), rng);
        std::vector<std::size_t> cperm(n);
        std::iota(cperm.begin(), cperm.end(), 0);
        std::shuffle(cperm.begin(), cperm.end(), rng);
        for (auto& row : p) {
            std::vector<Int> permuted(n);
            for (std::size_t c = 0; c < n; ++c) permuted[c] = row[cperm[c]];
            row = std::move(permuted);
        }
        CHECK(smith_normal_form(m) == smith_normal_form(p));
    }
}

TEST_CASE("group construction normalizes the finite part") {
    GroupDescriptor g(0, {2, 3}, {});
    CHECK(g.finite_orders() == std::vector<long long>{6});
    GroupDescriptor h(0, {6}, {});
    CHECK(g == h);
    GroupDescriptor chain(0, {2, 4, 8}, {});
    CHECK(chain.finite_orders() == std::vector<long long>{2, 4, 8});
    GroupDescriptor again(0, chain.finite_orders(), {});
    CHECK(again == chain);

    CHECK_THROWS_AS(GroupDescriptor(-1, {}, {}), validation_error);
    CHECK_THROWS_AS(GroupDescriptor(0, {1}, {}), validation_error);
    CHECK_THROWS_AS(GroupDescriptor(0, {}, {0}), validation_error);
}

TEST_CASE("exponent and boundedness") {
    CHECK(GroupDescriptor(1, {6}, {}).exponent() == 0);
    CHECK(GroupDescriptor(0, {6}, {4}).exponent() == 12);
    CHECK(GroupDescriptor(0, {}, {}).exponent() == 1);
    CHECK(GroupDescriptor(0, {}, {2}).least_finite_scale() == 2);
    CHECK(GroupDescriptor(0, {8}, {2, 4}).least_finite_scale() == 4);
    CHECK(GroupDescriptor(2, {}, {}).least_finite_scale() == 0);
}

TEST_CASE("element order: pinned examples") {
    GroupDescriptor g(1, {6}, {});
    CHECK(element_order(g, elem({}, {{0, 3}}, {})) == 2);
    CHECK(element_order(g, elem({{0, 1}}, {}, {})) == 0);
    GroupDescriptor z6(0, {6}, {});
    CHECK(element_order(z6, elem({}, {{0, 4}}, {})) == 3);
    CHECK(element_order(z6, Element{}) == 1);

    Element bad;
    bad.finite[0] = 7; // out of range residue
    CHECK_THROWS_AS(element_order(z6, bad), validation_error);
}

TEST_CASE("element order respects scaling and matches brute force") {
    std::mt19937_64 rng(3);
    GroupDescriptor g(1, {4, 12}, {2, 3});
    for (int trial = 0; trial < 200; ++trial) {
        Element x;
        if (rng() % 4 == 0) x.free[0] = static_cast<long long>(rng() % 5) - 2;
        if (rng() % 2) x.finite[0] = static_cast<long long>(rng() % 4);
        if (rng() % 2) x.finite[1] = static_cast<long long>(rng() % 12);
        if (rng() % 2) x.tail[static_cast<long long>(rng() % 6)] = 1;
        x = canonicalize(g, x);

        long long o = element_order(g, x);
        CHECK(o == order_oracle(g, x, 12));
        if (o != 0) {
            for (long long k = 1; k <= 5; ++k) {
                long long ok = element_order(g, scale(g, k, x));
                CHECK(o % ok == 0);
            }
        }
    }
}

TEST_CASE("n_torsion: pinned examples") {
    GroupDescriptor g(1, {6}, {});
    SubgroupSpec t4 = n_torsion(g, 4);
    CHECK(t4.free_kind == SubgroupSpec::FreeKind::zero);
    CHECK(t4.finite_sub_order == std::vector<long long>{2});
    CHECK(t4.contains(g, elem({}, {{0, 3}}, {})));
    CHECK_FALSE(t4.contains(g, elem({}, {{0, 2}}, {})));
    CHECK_FALSE(t4.contains(g, elem({{0, 1}}, {}, {})));

    CHECK(n_torsion(g, 1).is_zero_subgroup(g));
    CHECK(n_torsion(g, 0).is_whole_group(g));

    GroupDescriptor tail4(0, {}, {4});
    SubgroupSpec t2 = n_torsion(tail4, 2);
    CHECK(t2.tail_sub_order == std::vector<long long>{2});
    CHECK(t2.contains(tail4, elem({}, {}, {{5, 2}})));
    CHECK_FALSE(t2.contains(tail4, elem({}, {}, {{5, 1}})));
}

TEST_CASE("n_torsion membership iff order divides n") {
    GroupDescriptor g(0, {4, 12}, {2, 3});
    std::vector<Element> pool;
    for (long long a = 0; a < 4; ++a)
        for (long long b = 0; b < 12; ++b)
            for (long long c = 0; c < 2; ++c)
                for (long long d = 0; d < 3; ++d)
                    pool.push_back(canonicalize(g, elem({}, {{0, a}, {1, b}}, {{0, c}, {1, d}})));
    for (long long n = 1; n <= 12; ++n) {
        SubgroupSpec tor = n_torsion(g, n);
        for (const Element& x : pool) {
            bool member = tor.contains(g, x);
            bool divides = n % element_order(g, x) == 0;
            CHECK(member == divides);
        }
    }
}

TEST_CASE("scale_group: pinned examples") {
    GroupDescriptor z6(0, {6}, {});
    SubgroupSpec m2 = scale_group(z6, 2);
    CHECK(m2.finite_sub_order == std::vector<long long>{3}); // {0,2,4}
    CHECK(m2.contains(z6, elem({}, {{0, 2}}, {})));
    CHECK_FALSE(m2.contains(z6, elem({}, {{0, 3}}, {})));
    CHECK(scale_group(z6, 1).is_whole_group(z6));

    GroupDescriptor tail2(0, {6}, {2});
    SubgroupSpec s = scale_group(tail2, 2);
    CHECK(s.tail_sub_order == std::vector<long long>{1});
    CHECK(s.is_finite(tail2));
    CHECK_FALSE(scale_group(tail2, 3).is_finite(tail2));
    GroupDescriptor zfree(1, {}, {});
    CHECK_FALSE(scale_group(zfree, 2).is_finite(zfree));
}

TEST_CASE("proper divisors") {
    CHECK(proper_divisors(4).list == std::vector<long long>{1, 2});
    CHECK(proper_divisors(1).list.empty());
    CHECK_FALSE(proper_divisors(1).all_positive);
    CHECK(proper_divisors(0).all_positive);
    CHECK(proper_divisors(12).list == std::vector<long long>{1, 2, 3, 4, 6});
}

TEST_CASE("element arithmetic canonicalizes") {
    GroupDescriptor g(2, {4}, {3});
    Element a = elem({{0, 2}}, {{0, 3}}, {{1, 2}});
    Element b = elem({{0, -2}}, {{0, 1}}, {{1, 1}});
    CHECK(add(g, a, b).is_zero());
    CHECK(add(g, a, negate(g, a)).is_zero());
    CHECK(sub(g, a, a).is_zero());
    CHECK(scale(g, 4, elem({}, {{0, 1}}, {})).is_zero());
}
