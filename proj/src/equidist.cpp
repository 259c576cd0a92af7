#include "abel/equidist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace abel {

namespace {

struct Kahan {
    double sum = 0, comp = 0;
    void add(double v) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

WeylSum finish(Kahan re, Kahan im, std::size_t n) {
    WeylSum w;
    w.terms = n;
    w.magnitude = std::hypot(re.sum, im.sum) / static_cast<double>(n);
    w.phase = std::atan2(im.sum, re.sum);
    // Each term costs a few ulp (argument reduction is exact for the
    // rational path, one fmod for the numeric path); compensated summation
    // keeps the accumulation error O(eps).  Normalizing by n preserves the
    // per-term scale.
    w.error_bound = 8.0 * std::numeric_limits<double>::epsilon() *
                    (2.0 + std::log2(static_cast<double>(n) + 1.0));
    return w;
}

} // namespace

WeylSum weyl_sum(const std::vector<TorusPoint>& points, const CharacterIndex& k) {
    if (points.empty()) throw validation_error("weyl_sum requires a nonempty prefix");
    Kahan re, im;
    for (const TorusPoint& p : points) {
        if (p.dim() != k.k.size()) throw validation_error("character dimension mismatch");
        // k.x mod 1, exactly, then one sin/cos pair on [0, 2*pi).
        Rat dot(0);
        for (std::size_t i = 0; i < p.dim(); ++i) dot += make_rat(k.k[i]) * p.coords[i];
        double arg = 2.0 * std::numbers::pi * frac(dot).get_d();
        re.add(std::cos(arg));
        im.add(std::sin(arg));
    }
    return finish(re, im, points.size());
}

WeylSum weyl_sum(const std::vector<std::vector<double>>& points, const CharacterIndex& k) {
    if (points.empty()) throw validation_error("weyl_sum requires a nonempty prefix");
    Kahan re, im;
    for (const auto& p : points) {
        if (p.size() != k.k.size()) throw validation_error("character dimension mismatch");
        double dot = 0;
        for (std::size_t i = 0; i < p.size(); ++i)
            dot += static_cast<double>(k.k[i]) * (p[i] - std::floor(p[i]));
        double arg = 2.0 * std::numbers::pi * (dot - std::floor(dot));
        re.add(std::cos(arg));
        im.add(std::sin(arg));
    }
    return finish(re, im, points.size());
}

double star_discrepancy_1d(const std::vector<double>& pts) {
    if (pts.empty()) throw validation_error("star discrepancy of an empty sample");
    const double n = static_cast<double>(pts.size());
    double worst = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i + 1 < pts.size() && pts[i] > pts[i + 1])
            throw validation_error("star discrepancy input must be sorted");
        double centered = std::fabs(pts[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
        worst = std::max(worst, centered);
    }
    return 1.0 / (2.0 * n) + worst;
}

Rat star_discrepancy_1d_exact(const std::vector<Rat>& pts) {
    if (pts.empty()) throw validation_error("star discrepancy of an empty sample");
    const long long n = static_cast<long long>(pts.size());
    Rat worst(0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i + 1 < pts.size() && pts[i] > pts[i + 1])
            throw validation_error("star discrepancy input must be sorted");
        Rat centered = abs(pts[i] - make_rat(2 * static_cast<long long>(i) + 1, 2 * n));
        if (centered > worst) worst = centered;
    }
    return make_rat(1, 2 * n) + worst;
}

namespace {

// All nonzero integer vectors with |k|_inf <= k_max, lexicographic.
std::vector<CharacterIndex> character_grid(std::size_t dim, long long k_max) {
    std::vector<CharacterIndex> out;
    std::vector<long long> k(dim, -k_max);
    while (true) {
        CharacterIndex ci{k};
        if (!ci.is_trivial()) out.push_back(ci);
        std::size_t i = dim;
        while (i > 0) {
            if (++k[i - 1] <= k_max) break;
            k[i - 1] = -k_max;
            --i;
        }
        if (i == 0) break;
    }
    return out;
}

template <class Points>
std::vector<UdRow> ud_test_impl(const Points& prefix, long long k_max, long long m) {
    if (prefix.empty()) throw validation_error("ud_test requires a nonempty prefix");
    if (k_max < 1 || m < 1) throw validation_error("ud_test requires k_max, m >= 1");
    std::size_t dim = prefix.front().size();
    std::vector<UdRow> rows;
    for (const CharacterIndex& k : character_grid(dim, k_max)) {
        WeylSum w = weyl_sum(prefix, k);
        UdRow row;
        row.k = k;
        row.magnitude = w.magnitude;
        row.bound = 1.0 / static_cast<double>(m);
        row.pass = w.magnitude <= row.bound;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

std::vector<UdRow> ud_test(const std::vector<std::vector<double>>& prefix, long long k_max,
                           long long m) {
    return ud_test_impl(prefix, k_max, m);
}

std::vector<UdRow> ud_test(const std::vector<TorusPoint>& prefix, long long k_max, long long m) {
    if (prefix.empty()) throw validation_error("ud_test requires a nonempty prefix");
    std::vector<std::vector<double>> pts;
    pts.reserve(prefix.size());
    for (const TorusPoint& p : prefix) {
        std::vector<double> row;
        for (const Rat& c : p.coords) row.push_back(c.get_d());
        pts.push_back(std::move(row));
    }
    return ud_test_impl(pts, k_max, m);
}

KroneckerResult kronecker_independence(const std::vector<FormalReal>& xs) {
    if (xs.empty()) throw validation_error("kronecker_independence requires inputs");

    // Column space: the declared symbols appearing anywhere.
    std::vector<int> symbols;
    for (const FormalReal& x : xs)
        for (const auto& [i, v] : x.coeffs) {
            (void)v;
            if (std::find(symbols.begin(), symbols.end(), i) == symbols.end())
                symbols.push_back(i);
        }
    std::sort(symbols.begin(), symbols.end());

    const std::size_t d = xs.size(), b = symbols.size();
    std::vector<std::vector<Rat>> mat(d, std::vector<Rat>(b, Rat(0)));
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < b; ++c)
            if (auto it = xs[r].coeffs.find(symbols[c]); it != xs[r].coeffs.end())
                mat[r][c] = it->second;

    // Fraction-free style elimination over Q on the transpose system
    // m^T * mat = 0, tracking the transformation to read off a kernel
    // vector of the row space when the rank drops.
    std::vector<std::vector<Rat>> rows = mat;
    std::vector<std::vector<Rat>> trans(d, std::vector<Rat>(d, Rat(0)));
    for (std::size_t i = 0; i < d; ++i) trans[i][i] = 1;

    std::size_t rank = 0;
    std::optional<std::size_t> dependent_row;
    for (std::size_t r = 0; r < d; ++r) {
        std::optional<std::size_t> pivot;
        for (std::size_t c = 0; c < b; ++c)
            if (rows[r][c] != 0) {
                pivot = c;
                break;
            }
        if (!pivot) {
            dependent_row = r;
            break;
        }
        ++rank;
        for (std::size_t r2 = r + 1; r2 < d; ++r2) {
            if (rows[r2][*pivot] == 0) continue;
            Rat f = rows[r2][*pivot] / rows[r][*pivot];
            for (std::size_t c = 0; c < b; ++c) rows[r2][c] -= f * rows[r][c];
            for (std::size_t c = 0; c < d; ++c) trans[r2][c] -= f * trans[r][c];
        }
    }

    KroneckerResult res;
    if (!dependent_row) {
        res.dense = true;
        return res;
    }

    // trans[dependent_row] combines the inputs to a rational number; scale
    // to a primitive integer relation with the constant folded in front.
    std::vector<Rat> rel(d + 1, Rat(0));
    for (std::size_t i = 0; i < d; ++i) rel[i + 1] = trans[*dependent_row][i];
    for (std::size_t i = 0; i < d; ++i) rel[0] -= rel[i + 1] * xs[i].c0;

    Int denom_lcm = 1;
    for (const Rat& v : rel)
        mpz_lcm(denom_lcm.get_mpz_t(), denom_lcm.get_mpz_t(), v.get_den().get_mpz_t());
    std::vector<Int> irel;
    Int content = 0;
    for (const Rat& v : rel) {
        Rat scaled = v * Rat(denom_lcm);
        irel.push_back(scaled.get_num());
        mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), irel.back().get_mpz_t());
    }
    if (content > 1)
        for (Int& v : irel) v /= content;
    // Sign convention: first nonzero symbol coefficient positive.
    for (std::size_t i = 1; i < irel.size(); ++i) {
        if (irel[i] == 0) continue;
        if (irel[i] < 0)
            for (Int& v : irel) v = -v;
        break;
    }
    res.dense = false;
    res.relation = std::move(irel);
    return res;
}

std::vector<std::size_t> reorder_uniform(const std::vector<TorusPoint>& points) {
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j]) throw validation_error("reorder_uniform needs distinct points");
    if (points.empty()) return {};

    const std::size_t dim = points.front().dim();
    std::vector<std::size_t> order;
    std::vector<bool> used(points.size(), false);
    std::vector<std::vector<Rat>> per_dim(dim); // chosen prefix, per coordinate

    for (std::size_t step = 0; step < points.size(); ++step) {
        std::optional<std::size_t> best;
        Rat best_score;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (used[i]) continue;
            Rat score(0);
            for (std::size_t c = 0; c < dim; ++c) {
                std::vector<Rat> col = per_dim[c];
                col.push_back(points[i].coords[c]);
                std::sort(col.begin(), col.end());
                score += star_discrepancy_1d_exact(col);
            }
            if (!best || score < best_score) {
                best = i;
                best_score = score;
            }
        }
        used[*best] = true;
        order.push_back(*best);
        for (std::size_t c = 0; c < dim; ++c) per_dim[c].push_back(points[*best].coords[c]);
    }
    return order;
}

} // namespace abel
