#include <gtest/gtest.h>

#include <sstream>

#include "multirank/error.hpp"
#include "multirank/loans.hpp"

using namespace multirank;

namespace {

const char* kHeader = "loan_id,borrower_id,origination,products,district,area,defaulted,default_month\n";

std::vector<LoanRecord> parse(const std::string& body) {
    std::istringstream in(std::string(kHeader) + body);
    return parse_loans(in, "t.csv");
}

std::pair<Errc, std::string> failure(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_loans(in, "t.csv");
    } catch (const Error& e) {
        return {e.code(), e.what()};
    }
    ADD_FAILURE() << "no error";
    return {Errc::InvalidConfig, ""};
}

Month m(const char* s) { return *parse_month(s); }

}  // namespace

TEST(Month, ParseAndFormat) {
    EXPECT_EQ(to_string(m("2004-01")), "2004-01");
    EXPECT_EQ(m("2004-12") + 1, m("2005-01"));
    EXPECT_EQ(m("2005-03") - m("2004-12"), 3);
    for (const char* bad : {"2004-13", "2004-00", "2004-1", "04-01", "2004/01", "2004-0a", ""})
        EXPECT_FALSE(parse_month(bad).has_value()) << bad;
}

TEST(ParseLoans, ReadsFields) {
    const auto recs = parse("L1,B1,2004-02,wheat;rice;wheat,D1,A1,1,2004-09\nL2,B2,2004-03,rice,D1,A2,0,\n");
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].products, (std::vector<std::string>{"wheat", "rice"}));
    EXPECT_TRUE(recs[0].defaulted);
    EXPECT_EQ(recs[0].default_month, m("2004-09"));
    EXPECT_FALSE(recs[1].default_month.has_value());
}

TEST(ParseLoans, ColumnsInAnyOrder) {
    std::istringstream in("area,extra,district,products,origination,borrower_id,loan_id,defaulted,default_month\n"
                          "A1,x,D1,p,2004-01,B1,L1,0,\n");
    const auto recs = parse_loans(in);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].area, "A1");
    EXPECT_EQ(recs[0].loan_id, "L1");
}

TEST(ParseLoans, Errors) {
    EXPECT_EQ(failure("loan_id,borrower_id\nL1,B1\n").first, Errc::MissingColumn);
    auto [code, msg] = failure(std::string(kHeader) + "L1,B1,2004-01,p,D1,A1,0,\nL2,B2,2004-1,p,D1,A1,0,\n");
    EXPECT_EQ(code, Errc::BadDate);
    EXPECT_NE(msg.find("t.csv:3"), std::string::npos) << msg;
    EXPECT_EQ(failure(std::string(kHeader) + "L1,B1,2004-01,p,D1,A1,1,\n").first, Errc::BadDate);
    EXPECT_EQ(failure(std::string(kHeader) + "L1,B1,2004-01,p,D1,A1,0,2004-03\n").first, Errc::BadDate);
    EXPECT_EQ(failure(std::string(kHeader) + "L1,B1,2004-05,p,D1,A1,1,2004-03\n").first, Errc::BadDate);
    EXPECT_EQ(failure(std::string(kHeader) + "L1,B1,2004-01,;,D1,A1,0,\n").first, Errc::BadRecord);
    EXPECT_EQ(failure(std::string(kHeader) + "L1,B1,2004-01,p,D1,A1,2,\n").first, Errc::BadRecord);
    EXPECT_EQ(failure(std::string(kHeader) + "L1,B1,2004-01,p,D1\n").first, Errc::BadRecord);
    EXPECT_EQ(failure(std::string(kHeader) + "L1,B1,2004-01,p,D1,A1,0,\nL2,B2,2004-01,p,D2,A1,0,\n").first,
              Errc::AreaDistrictConflict);
}

TEST(ParseLoans, RoundTrip) {
    const auto recs = parse("L1,B1,2004-02,wheat;rice,D1,A1,1,2004-09\nL2,B2,2004-03,rice,D1,A2,0,\n");
    std::ostringstream out;
    write_loans(out, recs);
    EXPECT_EQ(out.str(), std::string(kHeader) + "L1,B1,2004-02,wheat;rice,D1,A1,1,2004-09\nL2,B2,2004-03,rice,D1,A2,0,\n");
}

TEST(Window, Bounds) {
    const WindowSpec w{m("2000-01"), 60, 1};
    EXPECT_EQ(w.end(), m("2005-01"));
    EXPECT_TRUE(w.contains(m("2004-12")));
    EXPECT_FALSE(w.contains(m("2005-01")));
    EXPECT_TRUE(w.in_tail(m("2004-12")));
    EXPECT_FALSE(w.in_tail(m("2004-11")));
    EXPECT_THROW((WindowSpec{m("2000-01"), 1, 1}.validate()), Error);
    EXPECT_THROW((WindowSpec{m("2000-01"), 60, 0}.validate()), Error);
}

TEST(WindowNetwork, LayersAndMerging) {
    const auto recs = parse(
        "L1,B1,2000-01,p1;p2,D1,A1,0,\n"
        "L2,B1,2000-05,p1,D1,A1,0,\n"
        "L3,B2,2000-02,p2,D1,A2,0,\n"
        "L4,B3,2005-01,p1,D1,A1,0,\n");  // outside the window
    const WindowSpec w{m("2000-01"), 60, 1};
    const auto net = build_window_network(recs, w, 1.0);
    EXPECT_EQ(net.num_common(), 2u);
    EXPECT_EQ(net.num_layers(), 2u);
    EXPECT_EQ(net.layer(0).name, "product");
    EXPECT_EQ(net.layer(1).name, "geography");
    EXPECT_EQ(net.layer(0).edges.size(), 3u);  // B1-p1 (weight 2), B1-p2, B2-p2
    EXPECT_EQ(net.layer(1).edges.size(), 4u);  // B1-A1, B1-D1, B2-A2, B2-D1
    EXPECT_EQ(net.layer(0).edges[0].weight, 2.0);
    EXPECT_FALSE(net.index_of("B3").has_value());
    EXPECT_TRUE(net.index_of("area:A2").has_value());
    EXPECT_EQ(entity_of("district:D1"), Entity::district);
    EXPECT_FALSE(entity_of("B1").has_value());
}

TEST(DefaulterSet, UsesEventMonthBeforeTail) {
    const auto recs = parse(
        "L1,B1,2000-01,p,D1,A1,1,2003-01\n"   // in
        "L2,B2,2000-01,p,D1,A1,1,2004-12\n"   // defaults in the tail
        "L3,B3,2004-12,p,D1,A1,1,2004-12\n"   // originated in the tail
        "L4,B4,1999-12,p,D1,A1,1,2000-02\n"   // originated before the window
        "L5,B5,2002-01,p,D1,A1,0,\n");
    const WindowSpec w{m("2000-01"), 60, 1};
    EXPECT_EQ(defaulter_set(recs, w), (std::vector<std::string>{"B1"}));
    EXPECT_EQ(tail_borrowers(recs, w), (std::vector<std::string>{"B3"}));
}
