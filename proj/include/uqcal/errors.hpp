#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uqcal {

// Exit-code taxonomy used by the CLI: invalid_input -> 2, model_error -> 3,
// solver_error -> 4.

struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct solver_error : std::runtime_error {
    solver_error(const std::string& what, std::size_t rows, std::size_t cols)
        : std::runtime_error(what + " (LP size " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ")"),
          lp_rows(rows), lp_cols(cols) {}
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
    std::size_t lp_rows = 0;
    std::size_t lp_cols = 0;
};

// Requested bound/range over a polytope that turned out to be empty.
struct infeasible_error : solver_error {
    using solver_error::solver_error;
};

// No eligible records to work with.
struct empty_set_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace uqcal
