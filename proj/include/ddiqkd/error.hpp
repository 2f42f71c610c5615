#pragma once

#include <stdexcept>
#include <string>

namespace ddiqkd {

/// Input that violates a documented range or shape. `field()` names the
/// offending config path when one applies.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what, std::string field = {})
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A scenario that is well-formed but cannot be realized, e.g. a covert
/// target rate above the achievable rate or a blinding grid with no viable plan.
class InfeasibleScenario : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoViablePlan : public InfeasibleScenario {
public:
    using InfeasibleScenario::InfeasibleScenario;
};

/// API misuse, e.g. asking a disabled adversary to act.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace ddiqkd
