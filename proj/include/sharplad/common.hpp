#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sharplad {

/// Violation of a documented precondition.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed to bracket or converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Amplitude |<a,x>| or intensity <a,x>^2 measurements.
enum class Kind { Amplitude, Intensity };

inline int exponent(Kind kind) { return kind == Kind::Amplitude ? 1 : 2; }

inline std::string to_string(Kind kind) { return kind == Kind::Amplitude ? "amplitude" : "intensity"; }

inline Kind parse_kind(std::string_view text) {
    if (text == "amplitude") return Kind::Amplitude;
    if (text == "intensity") return Kind::Intensity;
    throw DomainError("unknown measurement kind: " + std::string(text));
}

}  // namespace sharplad
