#include <doctest.h>

#include <cmath>
#include <vector>

#include "wigner/reasoning.hpp"

namespace ex = wigner::experiment;
namespace pv = wigner::perspectives;
namespace rs = wigner::reasoning;
using ex::TimePoint;
using pv::Agent;

namespace {

ex::Protocol default_protocol() {
    return ex::build_protocol(wigner::config::ProtocolConfig::paper_default());
}

rs::Statement claim(Agent subject, TimePoint at, double p) {
    return rs::Statement{subject, at, rs::ProbabilityClaim{"w=ok", p, at}};
}

} // namespace

TEST_CASE("equal-time certainty transfer") {
    SUBCASE("four-level equal-time chain lifts to the averaged claim") {
        const auto t = rs::derive_equal_time_prediction(default_protocol());
        CHECK(t.statement_a_i.depth() == 4);
        CHECK(t.statement_a_ii.subject == Agent::W);
        const auto& body =
            std::get<rs::ProbabilityClaim>(t.statement_a_ii.body);
        CHECK(body.value == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("mismatched reasoning times are refused") {
        const auto inner = claim(Agent::F, TimePoint::t2, 0.5);
        const auto outer =
            rs::make_nested(Agent::WBar, TimePoint::t3, inner, TimePoint::t2);
        CHECK_THROWS_AS(rs::apply_improved_C(outer), rs::EqualTimeViolation);
        // The original rule performs the same lift without the time check.
        const auto lifted = rs::apply_assumption_C(outer, rs::CRule::Original);
        CHECK(lifted.subject == Agent::WBar);
        CHECK(std::get<rs::ProbabilityClaim>(lifted.body).value ==
              doctest::Approx(0.5));
    }
    SUBCASE("lifting an unconditional statement leaves it unchanged") {
        const auto x = claim(Agent::W, TimePoint::t3, 0.25);
        const auto lifted = rs::apply_improved_C(x);
        CHECK(rs::body_equal(lifted.body, x.body));
        CHECK(lifted.subject == x.subject);
    }
    SUBCASE("random mismatched times always raise the violation") {
        wigner::RngStream rng(13, 0, 0);
        const std::array<TimePoint, 3> ts = {TimePoint::t1, TimePoint::t2,
                                             TimePoint::t3};
        int checked = 0;
        for (int i = 0; i < 200; ++i) {
            const TimePoint outer_t =
                ts[static_cast<std::size_t>(rng.next_u64() % 3)];
            const TimePoint inner_t =
                ts[static_cast<std::size_t>(rng.next_u64() % 3)];
            if (outer_t == inner_t) continue;
            const auto outer = rs::make_nested(
                Agent::WBar, outer_t, claim(Agent::F, inner_t, 0.5), inner_t);
            CHECK_THROWS_AS(rs::apply_improved_C(outer), rs::EqualTimeViolation);
            ++checked;
        }
        CHECK(checked > 50);
    }
    SUBCASE("nesting deeper than the four agents is rejected") {
        auto s = claim(Agent::FBar, TimePoint::t3, 0.5);
        s = rs::make_nested(Agent::F, TimePoint::t3, s, TimePoint::t3);
        s = rs::make_nested(Agent::WBar, TimePoint::t3, s, TimePoint::t3);
        s = rs::make_nested(Agent::W, TimePoint::t3, s, TimePoint::t3);
        CHECK_THROWS(rs::make_nested(Agent::W, TimePoint::t3, s, TimePoint::t3));
    }
}

TEST_CASE("single-outcome constraint") {
    std::vector<rs::Statement> fine = {
        rs::Statement{Agent::F, TimePoint::t2,
                      rs::OutcomeCertain{"z", "plus", TimePoint::t2}},
        rs::Statement{Agent::F, TimePoint::t3,
                      rs::OutcomeCertain{"z", "plus", TimePoint::t3}},
        rs::Statement{Agent::FBar, TimePoint::t1,
                      rs::OutcomeCertain{"r", "tails", TimePoint::t1}},
    };
    CHECK_NOTHROW(rs::check_single_outcome(fine));

    std::vector<rs::Statement> clash = fine;
    clash.push_back(rs::Statement{Agent::F, TimePoint::t2,
                                  rs::OutcomeCertain{"z", "minus", TimePoint::t2}});
    CHECK_THROWS_AS(rs::check_single_outcome(clash), rs::SingleOutcomeViolation);
}

TEST_CASE("probability-one assertion gate") {
    const auto protocol = default_protocol();
    const auto& okbar_branch = protocol.tree().wbar_branch("okbar");
    CHECK(rs::certain_by_Q(okbar_branch.state,
                           wigner::statevec::Projector(protocol.l_record("plus"))));
    CHECK_FALSE(rs::certain_by_Q(
        protocol.tree().after_f().state,
        wigner::statevec::Projector(protocol.l_record("plus"))));
}

TEST_CASE("pathway enumeration") {
    const auto all = rs::enumerate_pathways();
    CHECK(all.size() == 9);
    CHECK(all.front() == rs::Pathway{TimePoint::t1, TimePoint::t1, TimePoint::t1});
    CHECK(all.back() == rs::Pathway{TimePoint::t3, TimePoint::t3, TimePoint::t3});

    bool has_equal_time = false, has_backdated = false;
    for (const auto& p : all) {
        if (p == rs::Pathway{TimePoint::t3, TimePoint::t3, TimePoint::t3})
            has_equal_time = true;
        if (p == rs::Pathway{TimePoint::t3, TimePoint::t2, TimePoint::t1})
            has_backdated = true;
    }
    CHECK(has_equal_time);
    CHECK(has_backdated);

    // Distinctness.
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            CHECK_FALSE(all[i] == all[j]);
}

TEST_CASE("pathway parsing") {
    const auto p = rs::parse_pathway("WBAR:t3,F:t2,FBAR:t1");
    REQUIRE(p.has_value());
    CHECK(*p == rs::Pathway{TimePoint::t3, TimePoint::t2, TimePoint::t1});
    CHECK(rs::parse_pathway("wbar:t3,f:t3,fbar:t3").has_value());
    CHECK_FALSE(rs::parse_pathway("WBAR:t3,F:t3,FBAR:t2").has_value()); // not cataloged
    CHECK_FALSE(rs::parse_pathway("nonsense").has_value());
    CHECK_FALSE(rs::parse_pathway("WBAR:t9,F:t1,FBAR:t1").has_value());
}

TEST_CASE("pathway verdicts") {
    const auto protocol = default_protocol();

    SUBCASE("equal-time pathway predicts 1/2") {
        const auto v = rs::evaluate_pathway(
            protocol, rs::Pathway{TimePoint::t3, TimePoint::t3, TimePoint::t3});
        const auto* cp = std::get_if<rs::ConsistentPrediction>(&v.kind);
        REQUIRE(cp != nullptr);
        CHECK(cp->probability == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("fully backdated pathway contradicts the quantum conditional") {
        const auto v = rs::evaluate_pathway(
            protocol, rs::Pathway{TimePoint::t3, TimePoint::t2, TimePoint::t1});
        const auto* cq = std::get_if<rs::ContradictionWithQM>(&v.kind);
        REQUIRE(cq != nullptr);
        CHECK(cq->claimed == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(cq->quantum == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("uniform t1 pathway fails on the missing announcement record") {
        const auto v = rs::evaluate_pathway(
            protocol, rs::Pathway{TimePoint::t1, TimePoint::t1, TimePoint::t1});
        const auto* bp = std::get_if<rs::BrokenPremise>(&v.kind);
        REQUIRE(bp != nullptr);
        CHECK(bp->description.find("WBAR has no measurement record at t1") !=
              std::string::npos);
    }
    SUBCASE("every pathway gets exactly one verdict; exactly one contradiction") {
        int consistent = 0, contradiction = 0, broken = 0;
        for (const auto& p : rs::enumerate_pathways()) {
            const auto v = rs::evaluate_pathway(protocol, p);
            if (std::holds_alternative<rs::ConsistentPrediction>(v.kind))
                ++consistent;
            else if (std::holds_alternative<rs::ContradictionWithQM>(v.kind))
                ++contradiction;
            else
                ++broken;
        }
        CHECK(consistent == 1);
        CHECK(contradiction == 1);
        CHECK(broken == 7);
    }
}

TEST_CASE("conditional chain probability") {
    const auto protocol = default_protocol();
    const auto factors = rs::conditional_chain_factors(protocol);
    CHECK(factors.p_tails == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(factors.p_zplus_given_tails == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(factors.p_okbar_given_zplus == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(factors.p_ok_given_okbar == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rs::conditional_chain_probability(protocol) ==
          doctest::Approx(1.0 / 12.0).epsilon(1e-12));

    const auto table = ex::joint_distribution(protocol.tree());
    CHECK(rs::conditional_chain_probability(protocol) ==
          doctest::Approx(table.joint("okbar", "ok")).epsilon(1e-12));

    // Degenerate config: the tails branch never occurs, the chain is 0.
    auto cfg = wigner::config::ProtocolConfig::paper_default();
    cfg.a_heads = 1.0;
    cfg.a_tails = 0.0;
    CHECK(rs::conditional_chain_probability(ex::build_protocol(cfg)) == 0.0);
}

TEST_CASE("consistency report") {
    const auto protocol = default_protocol();
    const auto report = rs::consistency_report(protocol);

    CHECK(report.consistent);
    CHECK(report.equal_time_prediction == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.quantum_conditional == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.joint.p[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(report.chain.product == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(report.non_equal_time.contradiction);
    CHECK(report.verdicts.size() == 9);
    CHECK_FALSE(report.semantics_note.empty());

    // The variant reading of the final claim (extra 1/2 on the second term)
    // is recorded and differs from the value actually used.
    CHECK(report.equal_time.literal_variant_value ==
          doctest::Approx(0.4633883476).epsilon(1e-9));
    CHECK(report.equal_time.prediction.probability ==
          doctest::Approx(0.5).epsilon(1e-12));
}
