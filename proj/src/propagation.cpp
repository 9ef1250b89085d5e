#include "multirank/propagation.hpp"

namespace multirank {

std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::intra: return "intra";
        case Scenario::inter: return "inter";
        case Scenario::combined: return "combined";
    }
    return "combined";
}

std::string_view to_string(RestartMode m) noexcept {
    return m == RestartMode::faithful_matrix ? "faithful_matrix" : "collapsed_vector";
}

Scenario parse_scenario(std::string_view text) {
    if (text == "intra") return Scenario::intra;
    if (text == "inter") return Scenario::inter;
    if (text == "combined") return Scenario::combined;
    throw Error(Errc::InvalidConfig, "unknown scenario '" + std::string(text) + "' (intra, inter, combined)");
}

RestartMode parse_restart_mode(std::string_view text) {
    if (text == "faithful_matrix" || text == "faithful") return RestartMode::faithful_matrix;
    if (text == "collapsed_vector" || text == "collapsed") return RestartMode::collapsed_vector;
    throw Error(Errc::InvalidConfig,
                "unknown restart mode '" + std::string(text) + "' (faithful_matrix, collapsed_vector)");
}

}  // namespace multirank
