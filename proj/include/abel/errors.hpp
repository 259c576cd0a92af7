#pragma once

#include <stdexcept>
#include <string>

namespace abel {

// Bad input: malformed documents, out-of-range residues, boxes that miss
// their target lattice, and similar contract violations.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A bounded search (closure oracle, homomorphism backtracking, coset
// covering) ran out of its configured budget.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// A truncated integer stream ended before an element large enough for the
// current refinement step appeared.
class insufficient_stream_error : public std::runtime_error {
public:
    explicit insufficient_stream_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace abel
