#include "wigner/reasoning.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace wigner::reasoning {

namespace sv = wigner::statevec;
namespace ex = wigner::experiment;
namespace pv = wigner::perspectives;
using ex::names::kFails;
using ex::names::kFailsbar;
using ex::names::kMinus;
using ex::names::kOk;
using ex::names::kOkbar;
using ex::names::kPlus;
using ex::names::kTails;
using ex::names::kTbar;

// ---------------------------------------------------------------------------
// Statements

int Statement::depth() const {
    if (const auto* nested = std::get_if<Nested>(&body))
        return 1 + nested->inner->depth();
    return 1;
}

std::string Statement::describe() const {
    std::ostringstream os;
    os << pv::to_string(subject) << "@" << ex::to_string(asserted_at) << ": ";
    if (const auto* oc = std::get_if<OutcomeCertain>(&body)) {
        os << "certain that " << oc->variable << " = " << oc->value << " at "
           << ex::to_string(oc->at);
    } else if (const auto* pc = std::get_if<ProbabilityClaim>(&body)) {
        os << "certain that P(" << pc->event << ") = " << pc->value << " at "
           << ex::to_string(pc->at);
    } else {
        const auto& nested = std::get<Nested>(body);
        os << "certain that [" << nested.inner->describe() << "] (reasons at "
           << ex::to_string(nested.inner_reasoning_time) << ")";
    }
    return os.str();
}

bool body_equal(const Body& a, const Body& b) {
    if (a.index() != b.index()) return false;
    if (const auto* oc = std::get_if<OutcomeCertain>(&a))
        return *oc == std::get<OutcomeCertain>(b);
    if (const auto* pc = std::get_if<ProbabilityClaim>(&a))
        return *pc == std::get<ProbabilityClaim>(b);
    const auto& na = std::get<Nested>(a);
    const auto& nb = std::get<Nested>(b);
    return na.inner_reasoning_time == nb.inner_reasoning_time &&
           na.inner->subject == nb.inner->subject &&
           na.inner->asserted_at == nb.inner->asserted_at &&
           body_equal(na.inner->body, nb.inner->body);
}

Statement make_nested(Agent subject, TimePoint asserted_at, Statement inner,
                      TimePoint inner_reasoning_time) {
    Statement s{subject, asserted_at,
                Nested{std::make_shared<const Statement>(std::move(inner)),
                       inner_reasoning_time}};
    if (s.depth() > 4)
        throw sv::InvalidStateError("statement nesting exceeds the four agents");
    return s;
}

Statement apply_assumption_C(const Statement& outer, CRule rule) {
    const auto* nested = std::get_if<Nested>(&outer.body);
    if (!nested) return outer; // already an unconditional claim
    if (rule == CRule::Improved &&
        nested->inner_reasoning_time != outer.asserted_at)
        throw EqualTimeViolation(
            "certainty transfer requires equal-time deduction: outer asserts at " +
            ex::to_string(outer.asserted_at) + " but the inner agent reasons at " +
            ex::to_string(nested->inner_reasoning_time));
    return Statement{outer.subject, outer.asserted_at, nested->inner->body};
}

Statement apply_improved_C(const Statement& outer) {
    return apply_assumption_C(outer, CRule::Improved);
}

void check_single_outcome(std::span<const Statement> statements) {
    // (subject, variable, time) -> value
    std::map<std::tuple<Agent, std::string, TimePoint>, std::string> seen;
    for (const auto& s : statements) {
        const auto* oc = std::get_if<OutcomeCertain>(&s.body);
        if (!oc) continue;
        const auto key = std::make_tuple(s.subject, oc->variable, oc->at);
        auto [it, inserted] = seen.emplace(key, oc->value);
        if (!inserted && it->second != oc->value)
            throw SingleOutcomeViolation(
                pv::to_string(s.subject) + " holds both " + oc->variable + " = " +
                it->second + " and " + oc->variable + " = " + oc->value + " at " +
                ex::to_string(oc->at));
    }
}

bool certain_by_Q(const sv::Ket& state, const sv::Projector& outcome) {
    return std::abs(sv::born_probability(state, outcome) - 1.0) <= sv::kTol;
}

// ---------------------------------------------------------------------------
// Pathways

std::string Pathway::to_string() const {
    return "WBAR:" + ex::to_string(wbar) + ",F:" + ex::to_string(f) +
           ",FBAR:" + ex::to_string(fbar);
}

std::array<Pathway, 9> enumerate_pathways() {
    std::array<Pathway, 9> out;
    std::size_t n = 0;
    const std::array<TimePoint, 3> ts = {TimePoint::t1, TimePoint::t2,
                                         TimePoint::t3};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                if ((a + b + c) % 3 == 0)
                    out[n++] = Pathway{ts[static_cast<std::size_t>(a)],
                                       ts[static_cast<std::size_t>(b)],
                                       ts[static_cast<std::size_t>(c)]};
    return out;
}

std::optional<Pathway> parse_pathway(const std::string& text) {
    // Expected form: WBAR:tX,F:tY,FBAR:tZ (case-insensitive keys).
    std::map<std::string, std::string> parts;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) return std::nullopt;
        std::string key = item.substr(0, colon);
        for (auto& c : key) c = static_cast<char>(std::toupper(c));
        parts[key] = item.substr(colon + 1);
    }
    if (parts.size() != 3 || !parts.count("WBAR") || !parts.count("F") ||
        !parts.count("FBAR"))
        return std::nullopt;
    Pathway p{};
    try {
        p.wbar = ex::timepoint_from_string(parts["WBAR"]);
        p.f = ex::timepoint_from_string(parts["F"]);
        p.fbar = ex::timepoint_from_string(parts["FBAR"]);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    const auto all = enumerate_pathways();
    for (const auto& q : all)
        if (q == p) return p;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Verdicts

std::string kind_name(const VerdictKind& kind) {
    if (std::holds_alternative<ConsistentPrediction>(kind))
        return "consistent_prediction";
    if (std::holds_alternative<ContradictionWithQM>(kind))
        return "contradiction_with_qm";
    return "broken_premise";
}

namespace {

/// Earliest time point at which each agent's cited conclusion can exist: the
/// coin observer records at t1, the spin observer at t2, and the announced
/// outcome exists only from t3.
bool record_exists(Agent agent, TimePoint at) {
    switch (agent) {
    case Agent::FBar: return at >= TimePoint::t1;
    case Agent::F: return at >= TimePoint::t2;
    case Agent::WBar: return at >= TimePoint::t3;
    case Agent::W: return at >= TimePoint::t3;
    }
    return false;
}

/// The backdated chain's claim: with the coin certainly tails, the second lab
/// ends in the record of the superposed preparation, and the chain asserts
/// the ok outcome cannot occur.
double backdated_claim(const ex::Protocol& protocol) {
    return sv::born_probability(protocol.lab_record_of_prep(kTails),
                                sv::Projector(protocol.w_vector(kOk)));
}

} // namespace

Verdict evaluate_pathway(const ex::Protocol& protocol, const Pathway& p) {
    // Hop 1: the deducing agent (at t3) cites the announcing agent at p.wbar.
    if (!record_exists(Agent::WBar, p.wbar))
        return Verdict{p,
                       BrokenPremise{"W->WBAR",
                                     "WBAR has no measurement record at " +
                                         ex::to_string(p.wbar) + " to herald on"},
                       ""};
    // Hop 2: the announcing agent cites the spin observer at p.f.
    if (!record_exists(Agent::F, p.f))
        return Verdict{p,
                       BrokenPremise{"WBAR->F",
                                     "F has no measurement record at " +
                                         ex::to_string(p.f)},
                       ""};
    // Hop 3: the spin observer cites the coin observer at p.fbar (always
    // available from t1 on).

    const Pathway equal_time{TimePoint::t3, TimePoint::t3, TimePoint::t3};
    const Pathway backdated{TimePoint::t3, TimePoint::t2, TimePoint::t1};

    if (p == equal_time) {
        const double prob = pv::heralded_ok_probability(protocol);
        return Verdict{p, ConsistentPrediction{prob},
                       "equal-time deduction; every hop carries the t3 "
                       "assignment, so the lifted claim equals the heralded "
                       "Born probability"};
    }
    if (p == backdated) {
        const double claimed = backdated_claim(protocol);
        const double quantum = pv::heralded_ok_probability(protocol);
        const auto neq = pv::non_equal_time_check(protocol);
        std::ostringstream detail;
        detail << "original-rule transfer across time points: the chain "
                  "backdates the first lab to its t1 record and concludes "
                  "P(w=ok) = "
               << claimed << "; the heralded quantum conditional is " << quantum
               << ". The backdating already clashes with its own premise: "
                  "P(z=minus) is "
               << neq.heralded_z_minus << " under the announcement but "
               << neq.premise_z_minus
               << " under the backdated record; the equal-time rule refuses "
                  "the t3->t2 hop (EqualTimeViolation)";
        return Verdict{p, ContradictionWithQM{claimed, quantum}, detail.str()};
    }
    // Records exist but the hops cross time points; the downstream
    // assignment cannot be lifted without the original rule, and the
    // back-dating check shows the transported state clashes with the
    // upstream assignment.
    std::string hop = p.f != TimePoint::t3 ? "WBAR->F" : "F->FBAR";
    return Verdict{p,
                   BrokenPremise{hop,
                                 "non-equal-time hop " + hop + " (" +
                                     ex::to_string(TimePoint::t3) +
                                     " deduction citing a conclusion from " +
                                     ex::to_string(p.f != TimePoint::t3 ? p.f
                                                                        : p.fbar) +
                                     ") conflicts with the upstream assignment"},
                   ""};
}

// ---------------------------------------------------------------------------
// Chains

ChainFactors conditional_chain_factors(const ex::Protocol& protocol) {
    const auto& tree = protocol.tree();
    ChainFactors out{0.0, 0.0, 0.0, 0.0, 0.0};

    // P(tails) from the state after the coin step.
    const sv::Ket row2 = tree.after_fbar().state;
    const sv::Projector tails_proj(
        sv::Ket::basis_vector({protocol.coin()}, {kTails}));
    out.p_tails = sv::born_probability(row2, tails_proj);
    if (out.p_tails <= sv::kTol) return out;

    // P(z=plus | tails) from the record state after the spin step.
    const sv::Ket row4 = tree.after_f().state;
    const sv::Projector tbar_proj(protocol.lbar_record(kTbar));
    const auto tails_branch = sv::collapse(row4, tbar_proj);
    const sv::Projector plus_proj(protocol.l_record(kPlus));
    out.p_zplus_given_tails = sv::born_probability(tails_branch.state, plus_proj);
    if (out.p_zplus_given_tails <= sv::kTol) return out;

    // P(okbar | z=plus) on the record branch.
    const auto plus_branch = sv::collapse(tails_branch.state, plus_proj);
    const sv::Projector okbar_proj(protocol.wbar_vector(kOkbar));
    out.p_okbar_given_zplus =
        sv::born_probability(plus_branch.state, okbar_proj);
    if (out.p_okbar_given_zplus <= sv::kTol) return out;

    // P(ok | okbar) on the heralded branch.
    const auto okbar_branch = sv::collapse(plus_branch.state, okbar_proj);
    const sv::Projector ok_proj(protocol.w_vector(kOk));
    out.p_ok_given_okbar = sv::born_probability(okbar_branch.state, ok_proj);

    out.product = out.p_tails * out.p_zplus_given_tails *
                  out.p_okbar_given_zplus * out.p_ok_given_okbar;
    return out;
}

double conditional_chain_probability(const ex::Protocol& protocol) {
    return conditional_chain_factors(protocol).product;
}

// ---------------------------------------------------------------------------
// Equal-time transcript and report

EqualTimeTranscript derive_equal_time_prediction(const ex::Protocol& protocol) {
    EqualTimeTranscript t{pv::w_equal_time_prediction(protocol), 0.0,
                          Statement{}, Statement{}, {}};
    const auto& pred = t.prediction;

    // Variant reading with an extra factor 1/2 on the second branch term;
    // fails the Born cross-check and is recorded, not used.
    t.literal_variant_value = pred.weights[0] * pred.effectives[0] +
                              pred.weights[1] * 0.5 * pred.effectives[1];

    std::ostringstream l1, l2, l3, l4;
    l1 << "branch okbar: message distribution with effective probability "
       << pred.effectives[0];
    l2 << "branch failsbar: message distribution with effective probability "
       << pred.effectives[1];
    l3 << "mixture weights (" << pred.weights[0] << ", " << pred.weights[1]
       << ") from the spin observer's outcome mixture";
    l4 << "weighted average = " << pred.probability
       << "; variant reading with an extra 1/2 on the second term = "
       << t.literal_variant_value << " (rejected by the Born cross-check)";
    t.lines = {l1.str(), l2.str(), l3.str(), l4.str()};

    // Four-level equal-time chain carrying the averaged claim upward.
    const TimePoint t3 = TimePoint::t3;
    Statement fbar{Agent::FBar, t3,
                   ProbabilityClaim{"w=ok", pred.effectives[0], t3}};
    Statement f_nested = make_nested(Agent::F, t3, fbar, t3);
    Statement f_claim{Agent::F, t3, ProbabilityClaim{"w=ok", pred.probability, t3}};
    Statement wbar_nested = make_nested(Agent::WBar, t3, f_claim, t3);
    Statement wbar_claim = apply_improved_C(wbar_nested);
    Statement w_nested = make_nested(Agent::W, t3, wbar_claim, t3);
    Statement w_claim = apply_improved_C(w_nested);

    // Display form: the full four-level nesting (the coin observer's branch
    // claim shown for the okbar case).
    t.statement_a_i = make_nested(
        Agent::W, t3, make_nested(Agent::WBar, t3, f_nested, t3), t3);
    t.statement_a_ii = w_claim;
    return t;
}

Report consistency_report(const ex::Protocol& protocol) {
    Report r{joint_distribution(protocol.tree()),
             conditional_chain_factors(protocol),
             {},
             pv::non_equal_time_check(protocol),
             derive_equal_time_prediction(protocol),
             0.0,
             0.0,
             false,
             "pathway classification for the seven chains beyond the "
             "equal-time and fully backdated ones follows this tool's "
             "premise-validity rules, not a published table"};

    const auto pathways = enumerate_pathways();
    for (std::size_t i = 0; i < pathways.size(); ++i)
        r.verdicts[i] = evaluate_pathway(protocol, pathways[i]);

    r.equal_time_prediction = r.equal_time.prediction.probability;
    r.quantum_conditional =
        r.joint.conditional_w_given_wbar(kOk, kOkbar);
    r.consistent =
        std::abs(r.equal_time_prediction - r.quantum_conditional) <= sv::kTol;
    return r;
}

} // namespace wigner::reasoning
