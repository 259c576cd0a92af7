#include "abel/group.hpp"

#include <numeric>
#include <sstream>

#include "abel/smith.hpp"

namespace abel {

long long gcd_ll(long long a, long long b) { return std::gcd(a, b); }

long long lcm_ll(long long a, long long b) {
    if (a == 0 || b == 0) return 0;
    long long g = std::gcd(a, b);
    long long q = a / g;
    if (q > std::numeric_limits<long long>::max() / b)
        throw validation_error("lcm overflow");
    return q * b;
}

GroupDescriptor::GroupDescriptor(long long free_rank, std::vector<long long> finite_orders,
                                 std::vector<long long> tail_pattern)
    : free_rank_(free_rank), tail_pattern_(std::move(tail_pattern)) {
    if (free_rank_ < 0) throw validation_error("free_rank must be >= 0");
    for (long long d : finite_orders)
        if (d < 2) throw validation_error("finite orders must be >= 2");
    for (long long q : tail_pattern_)
        if (q < 2) throw validation_error("tail orders must be >= 2");

    // Normalize the finite part to an invariant-factor chain via the Smith
    // form of the diagonal matrix; factors equal to 1 are trivial summands.
    if (!finite_orders.empty()) {
        IntMatrix diag(finite_orders.size(), std::vector<Int>(finite_orders.size(), 0));
        for (std::size_t i = 0; i < finite_orders.size(); ++i) diag[i][i] = make_int(finite_orders[i]);
        for (const Int& f : smith_normal_form(std::move(diag))) {
            long long v = f.get_si();
            if (v > 1) finite_orders_.push_back(v);
        }
    }
}

long long GroupDescriptor::exponent() const {
    if (free_rank_ >= 1) return 0;
    long long e = 1;
    for (long long d : finite_orders_) e = lcm_ll(e, d);
    for (long long q : tail_pattern_) e = lcm_ll(e, q);
    return e;
}

long long GroupDescriptor::least_finite_scale() const {
    if (free_rank_ >= 1) return 0;
    long long m = 1;
    for (long long q : tail_pattern_) m = lcm_ll(m, q);
    return m;
}

void validate_element(const GroupDescriptor& g, const Element& x) {
    for (const auto& [i, v] : x.free) {
        if (i < 0 || i >= g.free_rank())
            throw validation_error("free coordinate out of range");
        if (v == 0) throw validation_error("element not canonical: stored zero");
    }
    for (const auto& [i, v] : x.finite) {
        if (i < 0 || i >= static_cast<long long>(g.finite_orders().size()))
            throw validation_error("finite coordinate out of range");
        if (v <= 0 || v >= g.finite_order(static_cast<std::size_t>(i)))
            throw validation_error("finite residue out of range");
    }
    for (const auto& [k, v] : x.tail) {
        if (k < 0) throw validation_error("tail coordinate out of range");
        if (!g.has_tail()) throw validation_error("tail coordinate in group without tail");
        if (v <= 0 || v >= g.tail_order(k))
            throw validation_error("tail residue out of range");
    }
}

Element canonicalize(const GroupDescriptor& g, Element x) {
    for (auto it = x.free.begin(); it != x.free.end();) {
        if (it->first < 0 || it->first >= g.free_rank())
            throw validation_error("free coordinate out of range");
        it = it->second == 0 ? x.free.erase(it) : std::next(it);
    }
    for (auto it = x.finite.begin(); it != x.finite.end();) {
        if (it->first < 0 || it->first >= static_cast<long long>(g.finite_orders().size()))
            throw validation_error("finite coordinate out of range");
        long long q = g.finite_order(static_cast<std::size_t>(it->first));
        long long r = ((it->second % q) + q) % q;
        if (r == 0) {
            it = x.finite.erase(it);
        } else {
            it->second = r;
            ++it;
        }
    }
    for (auto it = x.tail.begin(); it != x.tail.end();) {
        if (it->first < 0 || !g.has_tail())
            throw validation_error("tail coordinate out of range");
        long long q = g.tail_order(it->first);
        long long r = ((it->second % q) + q) % q;
        if (r == 0) {
            it = x.tail.erase(it);
        } else {
            it->second = r;
            ++it;
        }
    }
    return x;
}

namespace {

template <typename Fold>
void merge_block(std::map<long long, long long>& out, const std::map<long long, long long>& b,
                 Fold fold) {
    for (const auto& [k, v] : b) {
        auto [it, fresh] = out.try_emplace(k, 0);
        it->second = fold(it->second, v);
        (void)fresh;
    }
}

} // namespace

Element add(const GroupDescriptor& g, const Element& x, const Element& y) {
    Element r = x;
    auto plus = [](long long a, long long b) { return a + b; };
    merge_block(r.free, y.free, plus);
    merge_block(r.finite, y.finite, plus);
    merge_block(r.tail, y.tail, plus);
    return canonicalize(g, std::move(r));
}

Element negate(const GroupDescriptor& g, const Element& x) {
    Element r = x;
    for (auto& [k, v] : r.free) v = -v;
    for (auto& [k, v] : r.finite) v = -v;
    for (auto& [k, v] : r.tail) v = -v;
    return canonicalize(g, std::move(r));
}

Element sub(const GroupDescriptor& g, const Element& x, const Element& y) {
    return add(g, x, negate(g, y));
}

Element scale(const GroupDescriptor& g, long long k, const Element& x) {
    Element r = x;
    for (auto& [c, v] : r.free) v *= k;
    for (auto& [c, v] : r.finite) v *= k;
    for (auto& [c, v] : r.tail) v *= k;
    return canonicalize(g, std::move(r));
}

long long element_order(const GroupDescriptor& g, const Element& x) {
    validate_element(g, x);
    if (!x.free.empty()) return 0;
    long long n = 1;
    for (const auto& [i, v] : x.finite) {
        long long q = g.finite_order(static_cast<std::size_t>(i));
        n = lcm_ll(n, q / gcd_ll(q, v));
    }
    for (const auto& [k, v] : x.tail) {
        long long q = g.tail_order(k);
        n = lcm_ll(n, q / gcd_ll(q, v));
    }
    return n;
}

bool SubgroupSpec::contains(const GroupDescriptor& g, const Element& x) const {
    for (const auto& [i, v] : x.free) {
        (void)i;
        if (free_kind == FreeKind::zero) return false;
        if (v % free_index != 0) return false;
    }
    for (const auto& [i, v] : x.finite) {
        long long q = g.finite_order(static_cast<std::size_t>(i));
        long long t = finite_sub_order[static_cast<std::size_t>(i)];
        if (v % (q / t) != 0) return false;
    }
    for (const auto& [k, v] : x.tail) {
        long long q = g.tail_order(k);
        long long t = tail_sub_order[static_cast<std::size_t>(k % g.tail_period())];
        if (v % (q / t) != 0) return false;
    }
    return true;
}

bool SubgroupSpec::is_zero_subgroup(const GroupDescriptor& g) const {
    (void)g;
    if (free_kind == FreeKind::multiples && g.free_rank() > 0) return false;
    for (long long t : finite_sub_order)
        if (t != 1) return false;
    for (long long t : tail_sub_order)
        if (t != 1) return false;
    return true;
}

bool SubgroupSpec::is_whole_group(const GroupDescriptor& g) const {
    if (g.free_rank() > 0 && (free_kind != FreeKind::multiples || free_index != 1)) return false;
    for (std::size_t i = 0; i < finite_sub_order.size(); ++i)
        if (finite_sub_order[i] != g.finite_order(i)) return false;
    for (std::size_t j = 0; j < tail_sub_order.size(); ++j)
        if (tail_sub_order[j] != g.tail_pattern()[j]) return false;
    return true;
}

bool SubgroupSpec::is_finite(const GroupDescriptor& g) const {
    if (g.free_rank() > 0 && free_kind == FreeKind::multiples) return false;
    for (long long t : tail_sub_order)
        if (t != 1) return false;
    return true;
}

SubgroupSpec n_torsion(const GroupDescriptor& g, long long n) {
    if (n < 0) throw validation_error("n_torsion requires n >= 0");
    SubgroupSpec s;
    s.free_kind = (n == 0) ? SubgroupSpec::FreeKind::multiples : SubgroupSpec::FreeKind::zero;
    s.free_index = 1;
    for (long long q : g.finite_orders())
        s.finite_sub_order.push_back(n == 0 ? q : gcd_ll(n, q));
    for (long long q : g.tail_pattern())
        s.tail_sub_order.push_back(n == 0 ? q : gcd_ll(n, q));
    return s;
}

SubgroupSpec scale_group(const GroupDescriptor& g, long long m) {
    if (m < 1) throw validation_error("scale_group requires m >= 1");
    SubgroupSpec s;
    s.free_kind = SubgroupSpec::FreeKind::multiples;
    s.free_index = m;
    for (long long q : g.finite_orders()) s.finite_sub_order.push_back(q / gcd_ll(m, q));
    for (long long q : g.tail_pattern()) s.tail_sub_order.push_back(q / gcd_ll(m, q));
    return s;
}

ProperDivisors proper_divisors(long long n) {
    if (n < 0) throw validation_error("proper_divisors requires n >= 0");
    ProperDivisors r;
    if (n == 0) {
        r.all_positive = true;
        return r;
    }
    for (long long d : divisors_of(n))
        if (d != n) r.list.push_back(d);
    return r;
}

std::vector<long long> divisors_of(long long n) {
    std::vector<long long> lo, hi;
    for (long long d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        lo.push_back(d);
        if (d != n / d) hi.push_back(n / d);
    }
    lo.insert(lo.end(), hi.rbegin(), hi.rend());
    return lo;
}

std::string to_string(const GroupDescriptor& g) {
    std::ostringstream os;
    bool first = true;
    auto sep = [&] {
        if (!first) os << " + ";
        first = false;
    };
    if (g.free_rank() > 0) {
        sep();
        os << "Z^" << g.free_rank();
    }
    for (long long d : g.finite_orders()) {
        sep();
        os << "Z/" << d;
    }
    if (g.has_tail()) {
        sep();
        os << "sum_k Z/(";
        for (std::size_t j = 0; j < g.tail_pattern().size(); ++j)
            os << (j ? "," : "") << g.tail_pattern()[j];
        os << ")";
    }
    if (first) os << "0";
    return os.str();
}

std::string to_string(const Element& x) {
    std::ostringstream os;
    os << "(";
    bool first = true;
    auto emit = [&](const char* tag, const std::map<long long, long long>& blk) {
        for (const auto& [k, v] : blk) {
            if (!first) os << " ";
            first = false;
            os << tag << k << ":" << v;
        }
    };
    emit("z", x.free);
    emit("f", x.finite);
    emit("t", x.tail);
    if (first) os << "0";
    os << ")";
    return os.str();
}

} // namespace abel
