#pragma once

#include <stdexcept>
#include <string>

namespace lamina {

// Error taxonomy shared by all modules. `kind` is stable (used by the CLI to
// classify exit codes and by tests to assert the failing path).
enum class ErrorKind {
    input,          // malformed arguments, unknown scenario, schema violation
    numeric,        // non-finite values
    domain,         // leaf parameter outside a line-axis domain
    geometry,       // non-transverse frames / splittings
    transversality, // Newton divergence or intersection outside the tube
    truncation,     // inverse-limit depth exhausted
    non_contraction,// fixed-point iteration stopped contracting
    hypothesis,     // shadowing closeness hypotheses violated
    continuation,   // deformation left the warm-start basin
    scheme          // preorbit branch solver inconsistency
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::input: return "input";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::domain: return "domain";
        case ErrorKind::geometry: return "geometry";
        case ErrorKind::transversality: return "transversality";
        case ErrorKind::truncation: return "truncation";
        case ErrorKind::non_contraction: return "non_contraction";
        case ErrorKind::hypothesis: return "hypothesis";
        case ErrorKind::continuation: return "continuation";
        case ErrorKind::scheme: return "scheme";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace lamina
