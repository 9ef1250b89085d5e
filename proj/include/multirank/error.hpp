#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace multirank {

/// Validation failure categories. The CLI maps every one of these to exit code 1.
enum class Errc {
    DuplicateNodeId,
    EdgeEndpointMissing,
    NonPositiveWeight,
    NegativeStickiness,
    EmptyNetwork,
    EmptySourceSet,
    SourceNotCommonNode,
    NotStochastic,
    MissingColumn,
    BadDate,
    BadRecord,
    AreaDistrictConflict,
    BorrowerNotInTail,
    MissingScenarioRun,
    DegenerateLabels,
    SpanTooShort,
    InvalidConfig,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// File could not be opened, read or written (CLI exit code 2).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace multirank
