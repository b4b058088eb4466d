// Per-agent state assignments at protocol time points under explicit
// conditioning, including the sealed-lab record superpositions with
// non-orthogonal branches and the open-the-lab message model. The catalog of
// modeled (agent, time, conditioning, target) situations is closed; anything
// outside it raises NotModeledError rather than guessing.

#ifndef WIGNER_PERSPECTIVES_HPP
#define WIGNER_PERSPECTIVES_HPP

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wigner/experiment.hpp"
#include "wigner/statevec.hpp"
#include "wigner/timepoint.hpp"

namespace wigner::perspectives {

enum class Agent { FBar, F, WBar, W };
enum class Lab { LBar, L };

std::string to_string(Agent a);
Agent agent_from_string(const std::string& s);
std::string to_string(Lab lab);

struct NotModeledError : statevec::Error {
    using statevec::Error::Error;
};

/// Heralded or hypothesized outcomes an assignment is conditioned on.
struct Conditioning {
    std::optional<std::string> wbar; // announced okbar | failsbar
    std::optional<std::string> w;    // announced ok | fails
    std::optional<std::string> z;    // the agent's own spin record minus | plus
    /// Hypothetical first-lab branch inside another agent's mixture
    /// (the "if the lab reads okbar" case split).
    std::optional<std::string> lbar_hypothesis;

    bool empty() const {
        return !wbar && !w && !z && !lbar_hypothesis;
    }
    std::string describe() const;
    friend bool operator==(const Conditioning&, const Conditioning&) = default;
};

/// One branch of a record superposition: a signed real coefficient, the
/// record ket it multiplies, and the probability value the record claims for
/// the final ok outcome.
struct RecordBranch {
    double coefficient;
    statevec::Ket record;
    double claim;
    std::string label;
};

/// Superposition of internal lab records. Branch records need not be
/// orthogonal; the stored Gram matrix tracks their overlaps and the
/// coefficients absorb the (non-trivial) normalization factor.
class RecordSuperposition {
public:
    explicit RecordSuperposition(std::vector<RecordBranch> branches);

    const std::vector<RecordBranch>& branches() const { return branches_; }
    const std::vector<std::vector<statevec::Complex>>& gram() const {
        return gram_;
    }

    /// The ket the branches sum to. Must be unit-normalized within kTol.
    statevec::Ket as_ket() const;

private:
    std::vector<RecordBranch> branches_;
    std::vector<std::vector<statevec::Complex>> gram_;
};

std::vector<std::vector<statevec::Complex>> record_overlap(
    const RecordSuperposition& rs);

using Body =
    std::variant<statevec::Ket, statevec::DensityMatrix, RecordSuperposition>;

struct PerspectiveState {
    Agent agent;
    experiment::TimePoint time;
    Conditioning conditioning;
    Lab target;
    Body body;
};

/// Looks up one cataloged situation. Throws NotModeledError for situations
/// outside the catalog and for conditioning events of zero probability.
PerspectiveState assign_state(const experiment::Protocol& protocol, Agent agent,
                              experiment::TimePoint time,
                              const Conditioning& cond, Lab target);

/// All cataloged targets for (agent, time, conditioning); empty conditioning
/// or uncataloged situations throw as in assign_state.
std::vector<PerspectiveState> assign_states(const experiment::Protocol& protocol,
                                            Agent agent,
                                            experiment::TimePoint time,
                                            const Conditioning& cond);

/// One "open the lab" message branch: an unnormalized decomposition weight
/// (which may exceed 1) and the probability value the message claims.
struct MessageEntry {
    double quasi_weight;
    double message;
};

struct MessageDistribution {
    std::vector<MessageEntry> entries;
    /// sum of quasi_weight * message; equals the direct Born probability of
    /// the final ok outcome on the record-superposition state.
    double effective_probability;
    /// The Born cross-check value itself.
    double born_check;
};

/// Message distribution for a first-lab branch hypothesis ("okbar" or
/// "failsbar"). Throws NotModeledError when the decomposition's weighted
/// claims do not reproduce the Born probability (the construction is only
/// meaningful when they do).
MessageDistribution open_lab_message(const experiment::Protocol& protocol,
                                     const std::string& branch);

struct EqualTimePrediction {
    double probability;                 // branch-weighted message average
    double herald_probability;          // P(first announcement = okbar)
    double joint;                       // herald_probability * probability
    std::array<double, 2> weights;      // mixture weights per branch
    std::array<double, 2> effectives;   // per-branch effective probabilities
};

/// The final agent's equal-time prediction for the ok outcome given the
/// okbar announcement, assembled from the mixture weights and the two
/// message-model effective probabilities.
EqualTimePrediction w_equal_time_prediction(const experiment::Protocol& protocol);

/// P(w = ok | wbar = okbar) evaluated on the heralded collapsed state; the
/// config-generic route used by the reasoning engine.
double heralded_ok_probability(const experiment::Protocol& protocol);

struct InconsistencyReport {
    /// P(z = minus) in the okbar-heralded global branch.
    double heralded_z_minus;
    /// P(z = minus) if the first lab had definitely read tbar at t1.
    double premise_z_minus;
    bool contradiction;
};

/// The back-dating check: conditioning on the okbar announcement forces
/// P(z = minus) = 0, while the inferred "lab read tbar at t1" premise gives
/// 1/2 on its own terms. Both are computed; the report flags the clash.
InconsistencyReport non_equal_time_check(const experiment::Protocol& protocol);

} // namespace wigner::perspectives

#endif // WIGNER_PERSPECTIVES_HPP
