#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mtfee {

/// Bad input: parameters, configuration, or a precondition the caller controls.
/// Maps to CLI exit status 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> violations);
    explicit ValidationError(const std::string& violation)
        : ValidationError(std::vector<std::string>{violation}) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// A numerical guard tripped (blow-up, failed factorisation, invalid thinning bound).
/// Maps to CLI exit status 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mtfee
