#include <doctest.h>

#include "wigner/output.hpp"

namespace ex = wigner::experiment;
namespace out = wigner::output;

namespace {

ex::Protocol default_protocol() {
    return ex::build_protocol(wigner::config::ProtocolConfig::paper_default());
}

} // namespace

TEST_CASE("symbolic annotation recognizes the closed value set") {
    CHECK(out::symbolic_annotation(1.0 / 12.0) == std::string("1/12"));
    CHECK(out::symbolic_annotation(0.5) == std::string("1/2"));
    CHECK(out::symbolic_annotation(0.8535533906) ==
          std::string("1/(4-2*sqrt(2))"));
    CHECK(out::symbolic_annotation(0.1464466094) ==
          std::string("1/(4+2*sqrt(2))"));
    CHECK_FALSE(out::symbolic_annotation(0.123456).has_value());
}

TEST_CASE("exact document carries the joint table and symbolic forms") {
    const auto protocol = default_protocol();
    const auto doc = out::exact_document(protocol, false);
    CHECK(doc["command"] == "exact");
    CHECK(doc["joint"].size() == 4);
    CHECK(doc["joint"][0]["outcome_wbar"] == "okbar");
    CHECK(doc["joint"][0]["symbolic"] == "1/12");
    CHECK(doc["joint"][3]["symbolic"] == "3/4");
    CHECK(doc["marginals"]["wbar"]["okbar"]["symbolic"] == "1/6");
    CHECK(doc["conditionals"]["w_given_wbar"]["failsbar"]["ok"]["symbolic"] ==
          "1/10");
    CHECK(doc["metadata"]["version"] == out::kVersion);
    CHECK_FALSE(doc["metadata"].contains("generated_at"));
}

TEST_CASE("documents are byte-identical across invocations") {
    const auto protocol = default_protocol();
    const auto a = out::render_json(out::exact_document(protocol, false));
    const auto b = out::render_json(out::exact_document(protocol, false));
    CHECK(a == b);

    const auto table = ex::monte_carlo(protocol, 5000, 11, 2);
    const auto sa = out::render_json(out::simulate_document(protocol, table, false));
    const auto sb = out::render_json(out::simulate_document(protocol, table, false));
    CHECK(sa == sb);
}

TEST_CASE("simulate document excludes the worker count") {
    const auto protocol = default_protocol();
    const auto t1 = ex::monte_carlo(protocol, 20000, 42, 1);
    const auto t4 = ex::monte_carlo(protocol, 20000, 42, 4);
    const auto d1 = out::render_json(out::simulate_document(protocol, t1, false));
    const auto d4 = out::render_json(out::simulate_document(protocol, t4, false));
    CHECK(d1 == d4);
}

TEST_CASE("csv layout: one row per outcome cell") {
    const auto protocol = default_protocol();
    const auto doc = out::exact_document(protocol, false);
    const auto csv = out::render_csv(doc);
    CHECK(csv.rfind("outcome_wbar,outcome_w,probability,stderr\n", 0) == 0);
    // exact rows leave stderr empty
    CHECK(csv.find("okbar,ok,0.0833333333333,\n") != std::string::npos);

    const auto table = ex::monte_carlo(protocol, 100, 3, 1);
    const auto sim_csv =
        out::render_csv(out::simulate_document(protocol, table, false));
    CHECK(sim_csv.find("okbar,ok,") != std::string::npos);

    const auto report = wigner::reasoning::consistency_report(protocol);
    CHECK_THROWS_AS(
        out::render_csv(out::report_document(protocol, report, false)),
        ex::InvalidArgumentError);
}

TEST_CASE("markdown rendering uses six significant digits") {
    const auto protocol = default_protocol();
    const auto md = out::render_markdown(out::exact_document(protocol, false));
    CHECK(md.find("0.0833333") != std::string::npos);
    CHECK(md.find("1/12") != std::string::npos);
}

TEST_CASE("report document aggregates every section") {
    const auto protocol = default_protocol();
    const auto report = wigner::reasoning::consistency_report(protocol);
    const auto doc = out::report_document(protocol, report, false);
    CHECK(doc["joint"].size() == 4);
    CHECK(doc["verdicts"].size() == 9);
    CHECK(doc["overall"]["consistent"] == true);
    CHECK(doc["non_equal_time"]["contradiction"] == true);
    CHECK(doc["equal_time"]["prediction"].get<double>() ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(doc.contains("semantics_note"));
    CHECK(doc["equal_time"].contains("literal_variant_value"));
}
