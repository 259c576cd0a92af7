#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abel/rational.hpp"

namespace abel {

// A point of T^d with exact rational coordinates in [0, 1).
struct TorusPoint {
    std::vector<Rat> coords;

    explicit TorusPoint(std::size_t dim = 0) : coords(dim, Rat(0)) {}
    explicit TorusPoint(std::vector<Rat> cs) : coords(std::move(cs)) { reduce(); }

    std::size_t dim() const { return coords.size(); }
    void reduce() {
        for (Rat& c : coords) c = frac(c);
    }
    // Every coordinate has denominator dividing n (membership in T[n]^d).
    bool in_torsion(long long n) const {
        if (n <= 0) return n == 0;
        for (const Rat& c : coords)
            if (!mpz_divisible_p(make_int(n).get_mpz_t(), c.get_den().get_mpz_t())) return false;
        return true;
    }
    bool operator==(const TorusPoint&) const = default;
};

TorusPoint torus_add(const TorusPoint& a, const TorusPoint& b);
TorusPoint torus_scale(const Int& k, const TorusPoint& a);

// Product of circular arcs given by center and radius per dimension, arcs
// read mod 1.  Radii lie in (0, 1/2].
struct ArcBox {
    std::vector<Rat> center;
    std::vector<Rat> radius;

    std::size_t dim() const { return center.size(); }
    void validate() const;
    bool contains(const TorusPoint& p) const;          // strict
    Rat margin(const TorusPoint& p) const;             // min over dims of radius - dist
    bool meets_torsion_lattice(long long n) const;     // intersects T[n]^dim
};

// Index of a character of T^d: x -> exp(2*pi*i * k.x), nonzero for
// non-trivial characters.
struct CharacterIndex {
    std::vector<long long> k;
    bool is_trivial() const {
        for (long long v : k)
            if (v != 0) return false;
        return true;
    }
};

// A real number presented as rational + rational combination of declared
// irrational symbols.  Rational dependence questions about these values
// reduce to exact linear algebra over the coefficients.
struct FormalReal {
    Rat c0;
    std::map<int, Rat> coeffs; // symbol index -> coefficient

    FormalReal() = default;
    explicit FormalReal(Rat c) : c0(std::move(c)) {}
    static FormalReal symbol(int i) {
        FormalReal f;
        f.coeffs[i] = 1;
        return f;
    }
    bool is_rational() const { return coeffs.empty(); }
    void prune() {
        for (auto it = coeffs.begin(); it != coeffs.end();)
            it = it->second == 0 ? coeffs.erase(it) : std::next(it);
    }
};

FormalReal operator+(const FormalReal& a, const FormalReal& b);
FormalReal operator-(const FormalReal& a, const FormalReal& b);
FormalReal operator*(const Rat& k, const FormalReal& a);

// Default numeric meanings sqrt(2), sqrt(3), sqrt(5), sqrt(7), ... for
// symbols 1, 2, 3, 4, ...
double default_symbol_value(int i);
double evaluate(const FormalReal& f, const std::vector<double>& symbol_values = {});

// Torus-valued formal point: coordinates read mod 1.  Two values are equal
// on the torus when their difference has integer rational part and zero
// symbol part.
struct FormalTorusPoint {
    std::vector<FormalReal> coords;
    std::size_t dim() const { return coords.size(); }
};

bool torus_equal(const FormalReal& a, const FormalReal& b);
bool torus_equal(const FormalTorusPoint& a, const FormalTorusPoint& b);
FormalTorusPoint formal_add(const FormalTorusPoint& a, const FormalTorusPoint& b);
FormalTorusPoint formal_scale(long long k, const FormalTorusPoint& a);
FormalTorusPoint to_formal(const TorusPoint& p);

std::string to_string(const TorusPoint& p);
std::string to_string(const FormalReal& f);

} // namespace abel
