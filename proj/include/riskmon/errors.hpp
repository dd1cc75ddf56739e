#pragma once

#include <stdexcept>
#include <string>

namespace riskmon {

// Library-wide error with a stable machine-readable code (used for CLI
// diagnostics and exit-code mapping).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* NonUniformDepth = "NonUniformDepth";
inline constexpr const char* BadProbability = "BadProbability";
inline constexpr const char* OrphanNode = "OrphanNode";
inline constexpr const char* UnknownNode = "UnknownNode";
inline constexpr const char* DepthOrder = "DepthOrder";
inline constexpr const char* ArityMismatch = "ArityMismatch";
inline constexpr const char* GridTooLarge = "GridTooLarge";
inline constexpr const char* NegativeInput = "NegativeInput";
inline constexpr const char* NegativePayoff = "NegativePayoff";
inline constexpr const char* ZeroMassAtom = "ZeroMassAtom";
inline constexpr const char* InconsistentInputs = "InconsistentInputs";
inline constexpr const char* BudgetExceeded = "BudgetExceeded";
inline constexpr const char* IncompleteProcess = "IncompleteProcess";
inline constexpr const char* ParseError = "ParseError";
} // namespace errc

} // namespace riskmon
