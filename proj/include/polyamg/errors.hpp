#pragma once

#include <stdexcept>
#include <string>

namespace polyamg {

/// Base class for all errors thrown by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition on a user-supplied parameter was violated.
struct invalid_parameter : error {
    using error::error;
};

/// Operand shapes are not conformable.
struct dimension_mismatch : error {
    using error::error;
};

/// A smoother hit a zero diagonal entry.
struct singular_diagonal_error : error {
    using error::error;
};

/// Cholesky factorization met a non-positive pivot.
struct not_spd_error : error {
    not_spd_error(const std::string& what, int row) : error(what), row(row) {}
    int row;
};

/// A mesh or matrix file could not be parsed.
struct parse_error : error {
    parse_error(const std::string& what, int line) : error(what), line(line) {}
    int line;
};

/// A cell is too degenerate to build VEM operators on.
struct degenerate_element_error : error {
    degenerate_element_error(const std::string& what, int cell) : error(what), cell(cell) {}
    int cell;
};

/// A partition part is disconnected or its union has a hole.
struct agglomeration_topology_error : error {
    agglomeration_topology_error(const std::string& what, int part) : error(what), part(part) {}
    int part;
};

/// Mesh invariant violated (non-CCW cell, bad conformity, ...).
struct mesh_validation_error : error {
    using error::error;
};

/// AMG coarsening failed to reduce the problem at the finest level.
struct degenerate_coarsening_error : error {
    using error::error;
};

/// Preconditioner produced a non-positive inner product inside CG.
struct indefinite_preconditioner_error : error {
    using error::error;
};

/// Operator produced a non-positive curvature inside CG.
struct indefinite_operator_error : error {
    using error::error;
};

} // namespace polyamg
