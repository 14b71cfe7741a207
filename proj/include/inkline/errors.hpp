#pragma once

#include <stdexcept>
#include <string>

namespace inkline {

// Raised when user-supplied data (files, CLI values, config) is unusable.
// The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an internal consistency guarantee is broken — always a bug in
// this program, never the user's fault. The CLI maps this to exit code 2.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

inline void require_input(bool ok, const std::string& what) {
    if (!ok) throw InputError(what);
}

inline void require_invariant(bool ok, const std::string& what) {
    if (!ok) throw InvariantError(what);
}

}  // namespace inkline
