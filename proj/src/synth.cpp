#include "multirank/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "multirank/error.hpp"

namespace multirank {

void SynthConfig::validate() const {
    auto fail = [](const char* what) { throw Error(Errc::InvalidConfig, std::string("synth: ") + what); };
    if (n_borrowers <= 0 || n_products <= 0 || n_districts <= 0 || areas_per_district <= 0 || months <= 0)
        fail("counts must be positive");
    if (!(base_default_rate > 0 && base_default_rate < 1)) fail("base_default_rate must lie in (0, 1)");
    if (!(area_shock_strength >= 0) || !(product_shock_strength >= 0)) fail("shock strengths must be >= 0");
    if (loans_per_borrower <= 0 || loans_per_borrower > months) fail("loans_per_borrower must lie in [1, months]");
    if (term_months <= 0) fail("term_months must be positive");
    if (!(shock_start_rate >= 0 && shock_start_rate <= 1)) fail("shock_start_rate must lie in [0, 1]");
    if (shock_duration <= 0) fail("shock_duration must be positive");
}

namespace {

std::string padded(char prefix, long value, int width) {
    auto digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

/// shocked[e][m] for months [0, horizon).
std::vector<std::vector<bool>> shock_schedule(std::mt19937_64& rng, int entities, int horizon, double rate,
                                               int duration) {
    std::bernoulli_distribution start(rate);
    std::vector<std::vector<bool>> out(static_cast<std::size_t>(entities), std::vector<bool>(static_cast<std::size_t>(horizon)));
    for (auto& row : out) {
        int remaining = 0;
        for (int m = 0; m < horizon; ++m) {
            if (remaining == 0 && start(rng)) remaining = duration;
            if (remaining > 0) {
                row[static_cast<std::size_t>(m)] = true;
                --remaining;
            }
        }
    }
    return out;
}

}  // namespace

std::vector<LoanRecord> synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    const int areas = cfg.n_districts * cfg.areas_per_district;
    const int horizon = cfg.months + cfg.term_months + 1;
    const auto area_shock = shock_schedule(rng, areas, horizon, cfg.shock_start_rate, cfg.shock_duration);
    const auto product_shock = shock_schedule(rng, cfg.n_products, horizon, cfg.shock_start_rate, cfg.shock_duration);

    const Month origin = Month::from_year_month(cfg.start_year, 1);
    std::uniform_int_distribution<int> pick_area(0, areas - 1), pick_count(1, std::min(3, cfg.n_products));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> product_ids(static_cast<std::size_t>(cfg.n_products));
    std::iota(product_ids.begin(), product_ids.end(), 0);
    std::vector<int> month_ids(static_cast<std::size_t>(cfg.months));
    std::iota(month_ids.begin(), month_ids.end(), 0);

    struct Draft {
        int month;
        long borrower;
        LoanRecord rec;
    };
    std::vector<Draft> drafts;
    drafts.reserve(static_cast<std::size_t>(cfg.n_borrowers) * static_cast<std::size_t>(cfg.loans_per_borrower));
    const int width = std::max(6, static_cast<int>(std::to_string(cfg.n_borrowers).size()));
    for (long b = 0; b < cfg.n_borrowers; ++b) {
        const int area = pick_area(rng);
        const int district = area / cfg.areas_per_district;
        std::vector<int> products;
        std::sample(product_ids.begin(), product_ids.end(), std::back_inserter(products), pick_count(rng), rng);
        std::vector<int> loan_months;
        std::sample(month_ids.begin(), month_ids.end(), std::back_inserter(loan_months), cfg.loans_per_borrower, rng);

        for (int m0 : loan_months) {
            LoanRecord r;
            r.borrower_id = padded('B', b, width);
            r.origination = origin + m0;
            for (int p : products) r.products.push_back(padded('P', p, 2));
            r.district = padded('D', district, 2);
            r.area = r.district + padded('A', area % cfg.areas_per_district, 2);
            for (int k = 1; k <= cfg.term_months; ++k) {
                const auto m = static_cast<std::size_t>(m0 + k);
                double hazard = cfg.base_default_rate;
                if (area_shock[static_cast<std::size_t>(area)][m]) hazard *= 1.0 + cfg.area_shock_strength;
                if (std::any_of(products.begin(), products.end(),
                                [&](int p) { return product_shock[static_cast<std::size_t>(p)][m]; }))
                    hazard *= 1.0 + cfg.product_shock_strength;
                if (unit(rng) < std::min(hazard, 1.0)) {
                    r.defaulted = true;
                    r.default_month = origin + (m0 + k);
                    break;
                }
            }
            drafts.push_back({m0, b, std::move(r)});
        }
    }
    std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) { return a.month < b.month; });

    std::vector<LoanRecord> out;
    out.reserve(drafts.size());
    const int loan_width = std::max(7, static_cast<int>(std::to_string(drafts.size()).size()));
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        drafts[i].rec.loan_id = padded('L', static_cast<long>(i + 1), loan_width);
        out.push_back(std::move(drafts[i].rec));
    }
    return out;
}

}  // namespace multirank
