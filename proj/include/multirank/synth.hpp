#pragma once

#include <cstdint>
#include <vector>

#include "multirank/loans.hpp"

namespace multirank {

/// Synthetic loan book with planted default clustering. Area and product shock
/// episodes start at random and persist; during an episode the monthly default
/// hazard of exposed loans is multiplied by (1 + strength).
struct SynthConfig {
    int n_borrowers = 5000;
    int n_products = 8;
    int n_districts = 5;
    int areas_per_district = 4;
    int months = 80;
    double base_default_rate = 0.01;  // monthly hazard outside shocks
    double area_shock_strength = 0.0;
    double product_shock_strength = 0.0;
    std::uint64_t seed = 1;

    int loans_per_borrower = 1;
    int term_months = 12;             // months at risk after origination
    double shock_start_rate = 0.004;  // chance per entity-month that an episode begins
    int shock_duration = 96;          // long enough to outlast most data spans
    int start_year = 2000;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Loans sorted by origination month; ids are sequential in that order.
std::vector<LoanRecord> synth_generate(const SynthConfig& cfg);

}  // namespace multirank
