#include <sstream>

#include <doctest.h>

#include "robbins/report.hpp"

using namespace robbins::report;

TEST_CASE("range parsing") {
    CHECK(parse_range("0.5") == std::vector<double>{0.5});
    CHECK(parse_range("0,0.2,0.34328,0.5") == std::vector<double>{0.0, 0.2, 0.34328, 0.5});
    const auto r = parse_range("1.5:2.5:11");
    REQUIRE(r.size() == 11);
    CHECK(r.front() == 1.5);
    CHECK(r.back() == 2.5);
    CHECK(r[5] == doctest::Approx(2.0));
    CHECK(parse_range("2:2:1") == std::vector<double>{2.0});
    CHECK_THROWS_AS(parse_range("1:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_range("1:2:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_range("2:1:3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_range("abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_range("1,,2"), std::invalid_argument);
}

TEST_CASE("sweep grid is lexicographic in (alpha, b, c)") {
    const auto g = sweep_grid({0.0, 0.1}, {1.0, 2.0}, {1.5, 2.5});
    REQUIRE(g.size() == 8);
    CHECK(g[0].alpha == 0.0);
    CHECK(g[0].b == 1.0);
    CHECK(g[0].c == 1.5);
    CHECK(g[1].c == 2.5);
    CHECK(g[2].b == 2.0);
    CHECK(g[4].alpha == 0.1);
}

TEST_CASE("sweep CSV format") {
    const auto rows = run_sweep(sweep_grid({0.0}, {1.0}, {2.0}), {}, 1);
    std::ostringstream os;
    write_sweep_csv(os, rows);
    const std::string s = os.str();
    CHECK(s.rfind("alpha,b,c,expected_rank,quad_error\n", 0) == 0);
    CHECK(s.find("0,1,2,2.333333333,") != std::string::npos);
    CHECK(s.find('\r') == std::string::npos);
    CHECK(s.back() == '\n');
}

TEST_CASE("reports omit absent parts") {
    RunReport r;
    r.command = "eval";
    r.params = {0.3, 2.0, 2.0};
    r.analytic = robbins::analytic::RiskBreakdown{1.0, 1.3, 2.3, 1e-12, true};
    const Json j = to_json(r);
    CHECK(j["command"] == "eval");
    CHECK(j["params"]["alpha"] == 0.3);
    CHECK(j.contains("tool_version"));
    CHECK(j.contains("analytic"));
    CHECK_FALSE(j.contains("mc"));
    CHECK_FALSE(j.contains("opt"));
    CHECK(j["analytic"]["total"] == 2.3);
}
