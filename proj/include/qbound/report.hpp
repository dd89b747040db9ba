#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qbound/bounds.hpp"
#include "qbound/instance.hpp"

namespace qbound {

// Bad input files or flags (exit code 1).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// LP solver breakdown (exit code 2).
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computed quantity contradicts a proven inequality (exit code 3).
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// FNV-1a 64-bit over the raw spec bytes, as "fnv1a64:<16 hex digits>".
std::string spec_hash(const std::string& text);

struct SolveOptions {
    BoundKind kind = BoundKind::polymatroid();
    std::optional<double> rmax;
    bool per_relation_caps = false;
    bool include_timing = false;
};

struct SolveOutput {
    nlohmann::json report;
    std::string lp_text;
};

SolveOutput solve_report(const std::string& spec_text, const SolveOptions& options);

struct VerifyOptions {
    SearchOptions search;
    std::size_t samples = 200;
    bool include_timing = false;
};

// "sound" is false when any evaluated instance or sampled distribution
// exceeds a computed exponent.
nlohmann::json verify_report(const std::string& spec_text, const VerifyOptions& options);

struct EntropyOptions {
    std::vector<double> alphas{0.5};
    bool include_timing = false;
};

nlohmann::json entropy_report(const std::string& spec_text, const std::string& instance_text,
                              const EntropyOptions& options);

// Sorted keys, doubles rounded to 12 significant digits, non-finite values
// as the strings "inf" / "-inf" / "nan".
std::string render_json(const nlohmann::json& report);
// One "path = value" line per leaf.
std::string render_text(const nlohmann::json& report);

std::string format_alpha(double alpha);

}  // namespace qbound
