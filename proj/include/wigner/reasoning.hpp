// Statements, the certainty-transfer rules, and the nine deduction pathways.
// The equal-time transfer rule lifts a nested certainty only when the inner
// agent reasons at the same time point as the outer agent deduces; the
// original rule (no time restriction) is kept available for exhibiting the
// backdated chain end to end.

#ifndef WIGNER_REASONING_HPP
#define WIGNER_REASONING_HPP

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wigner/experiment.hpp"
#include "wigner/perspectives.hpp"
#include "wigner/timepoint.hpp"

namespace wigner::reasoning {

using experiment::TimePoint;
using perspectives::Agent;

struct EqualTimeViolation : statevec::Error {
    using statevec::Error::Error;
};
struct SingleOutcomeViolation : statevec::Error {
    using statevec::Error::Error;
};

// ---------------------------------------------------------------------------
// Statement grammar (closed)

struct OutcomeCertain {
    std::string variable;
    std::string value;
    TimePoint at;
    friend bool operator==(const OutcomeCertain&, const OutcomeCertain&) = default;
};

struct ProbabilityClaim {
    std::string event;
    double value;
    TimePoint at;
    friend bool operator==(const ProbabilityClaim&, const ProbabilityClaim&) = default;
};

struct Statement;

struct Nested {
    std::shared_ptr<const Statement> inner;
    TimePoint inner_reasoning_time;
};

using Body = std::variant<OutcomeCertain, ProbabilityClaim, Nested>;

struct Statement {
    Agent subject;
    TimePoint asserted_at;
    Body body;

    int depth() const;
    std::string describe() const;
};

bool body_equal(const Body& a, const Body& b);

/// Builds subject-certain-that-inner, enforcing the nesting bound of 4
/// (final agent -> first outside agent -> spin observer -> coin observer).
Statement make_nested(Agent subject, TimePoint asserted_at, Statement inner,
                      TimePoint inner_reasoning_time);

enum class CRule { Improved, Original };

/// The equal-time certainty transfer: requires the inner agent's reasoning
/// time to equal the outer subject's assertion time, then lifts the inner
/// claim to the outer subject. Throws EqualTimeViolation otherwise.
Statement apply_improved_C(const Statement& outer);

/// Certainty transfer under a selectable rule; CRule::Original performs the
/// lift without the equal-time restriction.
Statement apply_assumption_C(const Statement& outer, CRule rule);

/// Single-outcome constraint: no agent may hold two contradictory
/// certainties about one variable at one time point. Throws
/// SingleOutcomeViolation naming the clash.
void check_single_outcome(std::span<const Statement> statements);

/// Probability-one assertion gate: true when the state assigns Born weight 1
/// (within tolerance) to the projector's outcome.
bool certain_by_Q(const statevec::Ket& state, const statevec::Projector& outcome);

// ---------------------------------------------------------------------------
// Pathways

/// One choice of conclusion times for the three agents the final deduction
/// routes through; the deducing agent is fixed at t3.
struct Pathway {
    TimePoint wbar;
    TimePoint f;
    TimePoint fbar;

    std::string to_string() const; // "WBAR:tX,F:tY,FBAR:tZ"
    friend bool operator==(const Pathway&, const Pathway&) = default;
};

/// The nine cataloged time assignments, lexicographically ordered from
/// (t1,t1,t1) to (t3,t3,t3). The family contains the three uniform rows and,
/// among the mixed assignments, exactly one fully backdated chain
/// (WBAR:t3,F:t2,FBAR:t1).
std::array<Pathway, 9> enumerate_pathways();

std::optional<Pathway> parse_pathway(const std::string& text);

// ---------------------------------------------------------------------------
// Verdicts

struct ConsistentPrediction {
    double probability;
};
struct ContradictionWithQM {
    double claimed;
    double quantum;
};
struct BrokenPremise {
    std::string failing_hop;
    std::string description;
};

using VerdictKind =
    std::variant<ConsistentPrediction, ContradictionWithQM, BrokenPremise>;

struct Verdict {
    Pathway pathway;
    VerdictKind kind;
    std::string detail;
};

std::string kind_name(const VerdictKind& kind);

/// Classifies one pathway against the quantum calculation. Equal-time
/// deduction yields the consistent prediction; the fully backdated chain is
/// evaluated under the original rule and reported against the quantum
/// conditional; every other pathway fails a premise (a cited record does not
/// exist at the cited time, or a hop crosses time points).
Verdict evaluate_pathway(const experiment::Protocol& protocol, const Pathway& p);

// ---------------------------------------------------------------------------
// Chains and reports

struct ChainFactors {
    double p_tails;
    double p_zplus_given_tails;
    double p_okbar_given_zplus;
    double p_ok_given_okbar;
    double product;
};

/// The step-by-step conditional product, computed from branch-tree states
/// (never hard-coded).
ChainFactors conditional_chain_factors(const experiment::Protocol& protocol);
double conditional_chain_probability(const experiment::Protocol& protocol);

/// Derivation record for the equal-time prediction: the two per-branch
/// effective probabilities, their mixture average, the nested statement that
/// carries them, and the lifted final claim.
struct EqualTimeTranscript {
    perspectives::EqualTimePrediction prediction;
    /// Value of the variant reading that inserts an extra 1/2 on the second
    /// branch term; kept for comparison, rejected by the Born cross-check.
    double literal_variant_value;
    Statement statement_a_i;  // four-level nested chain, all at t3
    Statement statement_a_ii; // lifted final claim
    std::vector<std::string> lines;
};

EqualTimeTranscript derive_equal_time_prediction(const experiment::Protocol& protocol);

struct Report {
    experiment::OutcomeTable joint;
    ChainFactors chain;
    std::array<Verdict, 9> verdicts;
    perspectives::InconsistencyReport non_equal_time;
    EqualTimeTranscript equal_time;
    double equal_time_prediction;
    double quantum_conditional;
    bool consistent;
    std::string semantics_note;
};

/// Aggregates the exact table, the conditional chain, all nine verdicts, the
/// back-dating check and the equal-time transcript. Overall verdict is
/// "consistent" iff the equal-time prediction matches the quantum
/// conditional within tolerance.
Report consistency_report(const experiment::Protocol& protocol);

} // namespace wigner::reasoning

#endif // WIGNER_REASONING_HPP
