#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multirank/network.hpp"

namespace multirank {

/// Calendar month, stored as a month count so arithmetic is plain integer math.
struct Month {
    int value = 0;

    static constexpr Month from_year_month(int year, int month) { return Month{year * 12 + (month - 1)}; }
    constexpr int year() const { return value / 12; }
    constexpr int month() const { return value % 12 + 1; }

    constexpr Month operator+(int months) const { return Month{value + months}; }
    constexpr Month operator-(int months) const { return Month{value - months}; }
    constexpr int operator-(Month other) const { return value - other.value; }
    constexpr auto operator<=>(const Month&) const = default;
};

/// Parses `YYYY-MM`; nullopt on any other shape or an out-of-range month.
std::optional<Month> parse_month(std::string_view text);
std::string to_string(Month m);

struct LoanRecord {
    std::string loan_id;
    std::string borrower_id;
    Month origination;
    std::vector<std::string> products;  // nonempty, distinct
    std::string district;
    std::string area;
    bool defaulted = false;
    std::optional<Month> default_month;  // present iff defaulted, never before origination
};

/// A window [start, start + length_months); its final tail_months months are the
/// scoring tail.
struct WindowSpec {
    Month start;
    int length_months = 60;
    int tail_months = 1;

    Month end() const { return start + length_months; }
    Month tail_start() const { return end() - tail_months; }
    bool contains(Month m) const { return start <= m && m < end(); }
    bool in_tail(Month m) const { return tail_start() <= m && m < end(); }

    /// Throws InvalidConfig unless length_months > tail_months >= 1.
    void validate() const;
};

/// Reads the loan table: header naming at least loan_id, borrower_id,
/// origination, products, district, area, defaulted, default_month (any order,
/// extra columns ignored). Products are `;`-separated.
///
/// Errors carry `source:line`. Throws MissingColumn, BadDate, BadRecord or
/// AreaDistrictConflict.
std::vector<LoanRecord> parse_loans(std::istream& in, const std::string& source = "<input>");
std::vector<LoanRecord> read_loans(const std::filesystem::path& path);

void write_loans(std::ostream& out, std::span<const LoanRecord> records);

enum class Entity { product, district, area };

std::string_view to_string(Entity e) noexcept;

/// Network id of a connector value, e.g. "area:A1". Prefixes keep product,
/// district and area values apart from each other and from borrower ids.
std::string entity_node_id(Entity kind, std::string_view value);
std::optional<Entity> entity_of(std::string_view node_id);

inline constexpr std::string_view kProductLayer = "product";
inline constexpr std::string_view kGeographyLayer = "geography";

/// Product layer (borrower-product per product per loan) and geography layer
/// (borrower-area and borrower-district per loan) over the loans originated in
/// the window. Repeated ties add up.
MultilayerNetwork build_window_network(std::span<const LoanRecord> records, const WindowSpec& window,
                                       double stickiness);

/// Layer inputs behind build_window_network, for writing edge files.
std::vector<LayerSpec> window_layers(std::span<const LoanRecord> records, const WindowSpec& window);

/// V_I: borrowers with a loan originated before the tail whose default month also
/// falls before the tail. Sorted by id.
std::vector<std::string> defaulter_set(std::span<const LoanRecord> records, const WindowSpec& window);

/// Borrowers with a loan originated in the scoring tail, sorted by id.
std::vector<std::string> tail_borrowers(std::span<const LoanRecord> records, const WindowSpec& window);

}  // namespace multirank
