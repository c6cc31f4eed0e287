#pragma once

#include <stdexcept>
#include <string>

namespace cylflow {

/// Invalid argument or a query outside the domain of a trajectory or map.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation whose mathematical precondition does not hold (for example a
/// negative-energy audit run on a trajectory that starts with E >= 0).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace cylflow
