#include "abel/torus.hpp"

#include <cmath>
#include <sstream>

namespace abel {

TorusPoint torus_add(const TorusPoint& a, const TorusPoint& b) {
    if (a.dim() != b.dim()) throw validation_error("torus dimension mismatch");
    TorusPoint r(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) r.coords[i] = frac(a.coords[i] + b.coords[i]);
    return r;
}

TorusPoint torus_scale(const Int& k, const TorusPoint& a) {
    TorusPoint r(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) r.coords[i] = frac(Rat(k) * a.coords[i]);
    return r;
}

void ArcBox::validate() const {
    if (center.size() != radius.size()) throw validation_error("arc box shape mismatch");
    if (center.empty()) throw validation_error("arc box needs at least one dimension");
    for (const Rat& r : radius)
        if (r <= 0 || r > Rat(1, 2))
            throw validation_error("arc radius must lie in (0, 1/2]");
}

bool ArcBox::contains(const TorusPoint& p) const {
    return margin(p) > 0;
}

Rat ArcBox::margin(const TorusPoint& p) const {
    if (p.dim() != dim()) throw validation_error("arc box dimension mismatch");
    std::optional<Rat> worst;
    for (std::size_t i = 0; i < dim(); ++i) {
        Rat m = radius[i] - circle_dist(p.coords[i] - center[i]);
        if (!worst || m < *worst) worst = m;
    }
    return *worst;
}

bool ArcBox::meets_torsion_lattice(long long n) const {
    if (n < 2) throw validation_error("lattice level must be >= 2");
    for (std::size_t i = 0; i < dim(); ++i) {
        // Nearest multiple of 1/n to the center.
        Int j = round_nearest(center[i] * make_rat(n));
        if (circle_dist(Rat(j) / make_rat(n) - center[i]) >= radius[i]) return false;
    }
    return true;
}

FormalReal operator+(const FormalReal& a, const FormalReal& b) {
    FormalReal r = a;
    r.c0 += b.c0;
    for (const auto& [i, v] : b.coeffs) r.coeffs[i] += v;
    r.prune();
    return r;
}

FormalReal operator-(const FormalReal& a, const FormalReal& b) {
    FormalReal r = a;
    r.c0 -= b.c0;
    for (const auto& [i, v] : b.coeffs) r.coeffs[i] -= v;
    r.prune();
    return r;
}

FormalReal operator*(const Rat& k, const FormalReal& a) {
    FormalReal r;
    r.c0 = k * a.c0;
    for (const auto& [i, v] : a.coeffs) r.coeffs[i] = k * v;
    r.prune();
    return r;
}

double default_symbol_value(int i) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    if (i < 1) throw validation_error("symbol indices start at 1");
    if (i <= 10) return std::sqrt(static_cast<double>(primes[i - 1]));
    // Past the table: continue with square roots of odd non-squares.
    return std::sqrt(29.0 + 2.0 * (i - 10));
}

double evaluate(const FormalReal& f, const std::vector<double>& symbol_values) {
    double v = f.c0.get_d();
    for (const auto& [i, c] : f.coeffs) {
        double s = (i >= 1 && static_cast<std::size_t>(i) <= symbol_values.size())
                       ? symbol_values[static_cast<std::size_t>(i) - 1]
                       : default_symbol_value(i);
        v += c.get_d() * s;
    }
    return v;
}

bool torus_equal(const FormalReal& a, const FormalReal& b) {
    FormalReal d = a - b;
    if (!d.coeffs.empty()) return false;
    return d.c0.get_den() == 1;
}

bool torus_equal(const FormalTorusPoint& a, const FormalTorusPoint& b) {
    if (a.dim() != b.dim()) return false;
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (!torus_equal(a.coords[i], b.coords[i])) return false;
    return true;
}

FormalTorusPoint formal_add(const FormalTorusPoint& a, const FormalTorusPoint& b) {
    if (a.dim() != b.dim()) throw validation_error("torus dimension mismatch");
    FormalTorusPoint r;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        FormalReal c = a.coords[i] + b.coords[i];
        c.c0 = frac(c.c0);
        r.coords.push_back(std::move(c));
    }
    return r;
}

FormalTorusPoint formal_scale(long long k, const FormalTorusPoint& a) {
    FormalTorusPoint r;
    for (const FormalReal& c : a.coords) {
        FormalReal s = make_rat(k) * c;
        s.c0 = frac(s.c0);
        r.coords.push_back(std::move(s));
    }
    return r;
}

FormalTorusPoint to_formal(const TorusPoint& p) {
    FormalTorusPoint r;
    for (const Rat& c : p.coords) r.coords.push_back(FormalReal(c));
    return r;
}

std::string to_string(const TorusPoint& p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.dim(); ++i) os << (i ? ", " : "") << p.coords[i].get_str();
    os << ")";
    return os.str();
}

std::string to_string(const FormalReal& f) {
    std::ostringstream os;
    os << f.c0.get_str();
    for (const auto& [i, v] : f.coeffs) os << " + " << v.get_str() << "*b" << i;
    return os.str();
}

} // namespace abel
