#include "multirank/loans.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "multirank/error.hpp"

namespace multirank {

std::optional<Month> parse_month(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    int year = 0, month = 0;
    auto digits = [](std::string_view s, int& out) {
        if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
        return std::from_chars(s.data(), s.data() + s.size(), out).ec == std::errc{};
    };
    if (!digits(text.substr(0, 4), year) || !digits(text.substr(5, 2), month)) return std::nullopt;
    if (month < 1 || month > 12) return std::nullopt;
    return Month::from_year_month(year, month);
}

std::string to_string(Month m) {
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d", m.year(), m.month());
    return buf.data();
}

void WindowSpec::validate() const {
    if (!(tail_months >= 1 && length_months > tail_months))
        throw Error(Errc::InvalidConfig, "window needs length_months > tail_months >= 1 (got " +
                                             std::to_string(length_months) + ", " + std::to_string(tail_months) + ")");
}

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(delim, pos);
        out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

constexpr std::array<std::string_view, 8> kColumns = {"loan_id", "borrower_id", "origination", "products",
                                                      "district", "area",        "defaulted",   "default_month"};

}  // namespace

std::vector<LoanRecord> parse_loans(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    auto where = [&] { return source + ":" + std::to_string(line_no); };

    if (!std::getline(in, line)) throw Error(Errc::MissingColumn, source + ": empty input, header row expected");
    ++line_no;
    const auto header = split(trim(line), ',');
    std::array<std::size_t, kColumns.size()> col{};
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) { return trim(h) == kColumns[k]; });
        if (it == header.end()) throw Error(Errc::MissingColumn, where() + ": missing column '" + std::string(kColumns[k]) + "'");
        col[k] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<LoanRecord> records;
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> area_district;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto fields = split(row, ',');
        if (fields.size() != header.size())
            throw Error(Errc::BadRecord, where() + ": expected " + std::to_string(header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
        auto field = [&](std::size_t k) { return trim(fields[col[k]]); };

        LoanRecord rec;
        rec.loan_id = field(0);
        rec.borrower_id = field(1);
        if (rec.loan_id.empty() || rec.borrower_id.empty())
            throw Error(Errc::BadRecord, where() + ": loan_id and borrower_id must be nonempty");
        const auto orig = parse_month(field(2));
        if (!orig) throw Error(Errc::BadDate, where() + ": origination '" + std::string(field(2)) + "' is not YYYY-MM");
        rec.origination = *orig;

        std::set<std::string> seen;
        for (auto p : split(field(3), ';')) {
            p = trim(p);
            if (!p.empty() && seen.insert(std::string(p)).second) rec.products.emplace_back(p);
        }
        if (rec.products.empty()) throw Error(Errc::BadRecord, where() + ": products must list at least one value");
        rec.district = field(4);
        rec.area = field(5);
        if (rec.district.empty() || rec.area.empty())
            throw Error(Errc::BadRecord, where() + ": district and area must be nonempty");

        const auto flag = field(6);
        if (flag == "1" || flag == "true")
            rec.defaulted = true;
        else if (flag == "0" || flag == "false")
            rec.defaulted = false;
        else
            throw Error(Errc::BadRecord, where() + ": defaulted must be 0 or 1, got '" + std::string(flag) + "'");

        const auto dm = field(7);
        if (!dm.empty()) {
            const auto m = parse_month(dm);
            if (!m) throw Error(Errc::BadDate, where() + ": default_month '" + std::string(dm) + "' is not YYYY-MM");
            rec.default_month = *m;
        }
        if (rec.defaulted != rec.default_month.has_value())
            throw Error(Errc::BadDate, where() + ": default_month must be set exactly when defaulted is 1");
        if (rec.default_month && *rec.default_month < rec.origination)
            throw Error(Errc::BadDate, where() + ": default_month precedes origination");

        auto [it, fresh] = area_district.emplace(rec.area, std::make_pair(rec.district, line_no));
        if (!fresh && it->second.first != rec.district)
            throw Error(Errc::AreaDistrictConflict, where() + ": area '" + rec.area + "' is in district '" + rec.district +
                                                        "' but line " + std::to_string(it->second.second) +
                                                        " puts it in '" + it->second.first + "'");
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<LoanRecord> read_loans(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open loan file '" + path.string() + "'");
    return parse_loans(in, path.string());
}

void write_loans(std::ostream& out, std::span<const LoanRecord> records) {
    out << "loan_id,borrower_id,origination,products,district,area,defaulted,default_month\n";
    for (const auto& r : records) {
        out << r.loan_id << ',' << r.borrower_id << ',' << to_string(r.origination) << ',';
        for (std::size_t k = 0; k < r.products.size(); ++k) out << (k ? ";" : "") << r.products[k];
        out << ',' << r.district << ',' << r.area << ',' << (r.defaulted ? 1 : 0) << ','
            << (r.default_month ? to_string(*r.default_month) : std::string()) << '\n';
    }
}

std::string_view to_string(Entity e) noexcept {
    switch (e) {
        case Entity::product: return "product";
        case Entity::district: return "district";
        case Entity::area: return "area";
    }
    return "product";
}

std::string entity_node_id(Entity kind, std::string_view value) {
    std::string id(to_string(kind));
    id += ':';
    id += value;
    return id;
}

std::optional<Entity> entity_of(std::string_view node_id) {
    for (Entity e : {Entity::product, Entity::district, Entity::area}) {
        const auto prefix = to_string(e);
        if (node_id.size() > prefix.size() && node_id.substr(0, prefix.size()) == prefix && node_id[prefix.size()] == ':')
            return e;
    }
    return std::nullopt;
}

std::vector<LayerSpec> window_layers(std::span<const LoanRecord> records, const WindowSpec& window) {
    window.validate();
    LayerSpec product{std::string(kProductLayer), {}, {}};
    LayerSpec geography{std::string(kGeographyLayer), {}, {}};
    std::unordered_set<std::string> declared;
    auto declare = [&](LayerSpec& layer, const std::string& id) {
        if (declared.insert(id).second) layer.specific_nodes.push_back(id);
    };
    for (const auto& r : records) {
        if (!window.contains(r.origination)) continue;
        for (const auto& p : r.products) {
            const auto id = entity_node_id(Entity::product, p);
            declare(product, id);
            product.edges.push_back({r.borrower_id, id, 1.0});
        }
        const auto area = entity_node_id(Entity::area, r.area);
        const auto district = entity_node_id(Entity::district, r.district);
        declare(geography, area);
        declare(geography, district);
        geography.edges.push_back({r.borrower_id, area, 1.0});
        geography.edges.push_back({r.borrower_id, district, 1.0});
    }
    return {std::move(product), std::move(geography)};
}

MultilayerNetwork build_window_network(std::span<const LoanRecord> records, const WindowSpec& window,
                                       double stickiness) {
    return build_network(window_layers(records, window), stickiness);
}

std::vector<std::string> defaulter_set(std::span<const LoanRecord> records, const WindowSpec& window) {
    window.validate();
    std::set<std::string> out;
    for (const auto& r : records) {
        if (!window.contains(r.origination) || r.origination >= window.tail_start()) continue;
        if (r.default_month && window.contains(*r.default_month) && *r.default_month < window.tail_start())
            out.insert(r.borrower_id);
    }
    return {out.begin(), out.end()};
}

std::vector<std::string> tail_borrowers(std::span<const LoanRecord> records, const WindowSpec& window) {
    window.validate();
    std::set<std::string> out;
    for (const auto& r : records)
        if (window.in_tail(r.origination)) out.insert(r.borrower_id);
    return {out.begin(), out.end()};
}

}  // namespace multirank
