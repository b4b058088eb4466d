#include "wigner/perspectives.hpp"

#include <algorithm>
#include <cmath>

namespace wigner::perspectives {

namespace sv = wigner::statevec;
namespace ex = wigner::experiment;
using ex::names::kFails;
using ex::names::kFailsbar;
using ex::names::kHeads;
using ex::names::kMinus;
using ex::names::kOk;
using ex::names::kOkbar;
using ex::names::kPlus;
using ex::names::kTails;
using ex::TimePoint;
using sv::Complex;
using sv::Ket;

std::string to_string(Agent a) {
    switch (a) {
    case Agent::FBar: return "FBAR";
    case Agent::F: return "F";
    case Agent::WBar: return "WBAR";
    case Agent::W: return "W";
    }
    return "?";
}

Agent agent_from_string(const std::string& s) {
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::toupper(c)));
    if (u == "FBAR") return Agent::FBar;
    if (u == "F") return Agent::F;
    if (u == "WBAR") return Agent::WBar;
    if (u == "W") return Agent::W;
    throw ex::InvalidArgumentError("unknown agent '" + s + "'");
}

std::string to_string(Lab lab) { return lab == Lab::LBar ? "Lbar" : "L"; }

std::string Conditioning::describe() const {
    std::string s;
    auto append = [&](const char* key, const std::optional<std::string>& v) {
        if (!v) return;
        if (!s.empty()) s += ",";
        s += key;
        s += "=";
        s += *v;
    };
    append("wbar", wbar);
    append("w", w);
    append("z", z);
    append("hyp", lbar_hypothesis);
    return s.empty() ? "(none)" : s;
}

// ---------------------------------------------------------------------------
// RecordSuperposition

RecordSuperposition::RecordSuperposition(std::vector<RecordBranch> branches)
    : branches_(std::move(branches)) {
    if (branches_.empty())
        throw sv::InvalidStateError("record superposition needs branches");
    const auto& space = branches_.front().record.space();
    for (const auto& b : branches_)
        if (!sv::same_space(b.record.space(), space))
            throw sv::SpaceMismatchError("record branches over different spaces");
    gram_.assign(branches_.size(), std::vector<Complex>(branches_.size()));
    for (std::size_t i = 0; i < branches_.size(); ++i)
        for (std::size_t j = 0; j < branches_.size(); ++j)
            gram_[i][j] = sv::inner(branches_[i].record, branches_[j].record);
    // The summed ket must come out unit-normalized; this pins the
    // coefficients to the Gram-corrected normalization factor.
    Ket acc = branches_.front().record.scaled(branches_.front().coefficient);
    for (std::size_t i = 1; i < branches_.size(); ++i)
        acc = sv::add(acc, branches_[i].record.scaled(branches_[i].coefficient));
    const double n2 = acc.norm_squared();
    if (std::abs(n2 - 1.0) > 1e-9)
        throw sv::NormalizationError(
            "record superposition norm^2 = " + std::to_string(n2));
}

Ket RecordSuperposition::as_ket() const {
    Ket acc = branches_.front().record.scaled(branches_.front().coefficient);
    for (std::size_t i = 1; i < branches_.size(); ++i)
        acc = sv::add(acc, branches_[i].record.scaled(branches_[i].coefficient));
    // Coefficients absorb the normalization factor (validated at construction).
    return Ket(acc.space(), acc.amplitudes(), Ket::Norm::Unit);
}

std::vector<std::vector<Complex>> record_overlap(const RecordSuperposition& rs) {
    return rs.gram();
}

// ---------------------------------------------------------------------------
// Catalog helpers

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw NotModeledError(what);
}

int outcome2(const std::string& v, const char* first, const char* second,
             const char* what) {
    if (v == first) return 0;
    if (v == second) return 1;
    throw NotModeledError(std::string("unknown ") + what + " value '" + v + "'");
}

/// L-space factor of a (Lbar, L) product state: phi[l] = <x (x) l | psi>.
Ket l_factor(const ex::Protocol& protocol, const Ket& state, const Ket& x) {
    std::map<sv::IndexTuple, Complex> amps;
    for (const auto& [idx, amp] : state.amplitudes()) {
        auto it = x.amplitudes().find({idx[0]});
        if (it == x.amplitudes().end()) continue;
        amps[{idx[1]}] += std::conj(it->second) * amp;
    }
    Ket phi({protocol.lab()}, std::move(amps), Ket::Norm::Unnormalized);
    return sv::normalized(phi);
}

/// The single coin outcome compatible with the given spin record, or -1 when
/// the record leaves the coin uncertain.
int certain_coin_for_record(const ex::Protocol& protocol, int record_index) {
    const std::array<double, 2> coin = {protocol.config().a_heads,
                                        protocol.config().a_tails};
    const std::array<Ket, 2> record_images = {
        protocol.lab_record_of_prep(kHeads), protocol.lab_record_of_prep(kTails)};
    int certain = -1;
    for (int r = 0; r < 2; ++r) {
        const Ket probe = protocol.l_record(record_index == 0 ? kMinus : kPlus);
        const double overlap =
            std::norm(sv::inner(probe, record_images[static_cast<std::size_t>(r)]));
        const double posterior =
            coin[static_cast<std::size_t>(r)] * coin[static_cast<std::size_t>(r)] *
            overlap;
        if (posterior > sv::kTol) {
            if (certain != -1) return -1;
            certain = r;
        }
    }
    return certain;
}

RecordSuperposition branch_record_superposition(const ex::Protocol& protocol,
                                                const std::string& hypothesis) {
    const int x = outcome2(hypothesis, kOkbar, kFailsbar, "lab hypothesis");
    const auto& row = protocol.config().wbar_basis[static_cast<std::size_t>(x)];
    const Ket v_heads = protocol.lab_record_of_prep(kHeads);
    const Ket v_tails = protocol.lab_record_of_prep(kTails);

    const Ket unnormalized =
        sv::add(v_heads.scaled(row[0]), v_tails.scaled(row[1]));
    const double n = unnormalized.norm();
    require(n > 1e-9, "hypothesized branch assigns a null record state");

    const sv::Projector ok_proj(protocol.w_vector(kOk));
    auto claim_of = [&](const Ket& record) {
        return sv::born_probability(record, ok_proj);
    };
    std::vector<RecordBranch> branches;
    if (std::abs(row[0]) > sv::kTol)
        branches.push_back(RecordBranch{row[0] / n, v_heads, claim_of(v_heads),
                                        "record-of-down-prep"});
    if (std::abs(row[1]) > sv::kTol)
        branches.push_back(RecordBranch{row[1] / n, v_tails, claim_of(v_tails),
                                        "record-of-superposed-prep"});
    return RecordSuperposition(std::move(branches));
}

} // namespace

// ---------------------------------------------------------------------------
// assign_state

PerspectiveState assign_state(const ex::Protocol& protocol, Agent agent,
                              TimePoint time, const Conditioning& cond,
                              Lab target) {
    const auto& tree = protocol.tree();
    auto not_modeled = [&](const std::string& why) -> NotModeledError {
        return NotModeledError("no modeled assignment for agent " +
                               to_string(agent) + " at " + ex::to_string(time) +
                               " given " + cond.describe() + " (target " +
                               to_string(target) + "): " + why);
    };

    switch (agent) {
    case Agent::WBar: {
        if (time != TimePoint::t3 || !cond.wbar || cond.w || cond.z ||
            cond.lbar_hypothesis)
            throw not_modeled("the first outside agent is cataloged at t3 "
                              "conditioned on his own announced outcome only");
        const int x = outcome2(*cond.wbar, kOkbar, kFailsbar, "wbar");
        if (protocol.wbar_probs()[static_cast<std::size_t>(x)] <= sv::kTol)
            throw not_modeled("announced outcome has probability 0");
        if (target == Lab::LBar)
            return {agent, time, cond, target, protocol.wbar_vector(*cond.wbar)};
        const auto& branch = tree.wbar_branch(*cond.wbar);
        return {agent, time, cond, target,
                l_factor(protocol, branch.state, protocol.wbar_vector(*cond.wbar))};
    }
    case Agent::F: {
        if ((time != TimePoint::t2 && time != TimePoint::t3) || !cond.z ||
            cond.wbar || cond.w || cond.lbar_hypothesis)
            throw not_modeled("the spin observer is cataloged at t2/t3 "
                              "conditioned on her own record only");
        const int k = outcome2(*cond.z, kMinus, kPlus, "z");
        if (target == Lab::L)
            return {agent, time, cond, target,
                    protocol.l_record(k == 0 ? kMinus : kPlus)};
        const int r = certain_coin_for_record(protocol, k);
        if (r == -1)
            throw not_modeled(
                "the spin record does not pin down the coin outcome");
        const Ket lab_record = protocol.lbar_record(
            r == 0 ? ex::names::kHbar : ex::names::kTbar);
        if (time == TimePoint::t2)
            return {agent, time, cond, target, lab_record};
        // At t3 the outside measurement has happened but its result is
        // unknown here: mix over the measurement outcomes of the record.
        std::vector<std::pair<double, Ket>> parts;
        for (const char* outcome : {kOkbar, kFailsbar}) {
            const Ket v = protocol.wbar_vector(outcome);
            const double p = std::norm(sv::inner(v, lab_record));
            if (p > sv::kTol) parts.emplace_back(p, v);
        }
        return {agent, time, cond, target, sv::mix(parts)};
    }
    case Agent::FBar: {
        if (time != TimePoint::t3 || !cond.lbar_hypothesis || cond.wbar ||
            cond.w || cond.z)
            throw not_modeled("the coin observer is cataloged at t3 under a "
                              "first-lab branch hypothesis only");
        if (target == Lab::LBar)
            return {agent, time, cond, target,
                    protocol.wbar_vector(*cond.lbar_hypothesis)};
        return {agent, time, cond, target,
                branch_record_superposition(protocol, *cond.lbar_hypothesis)};
    }
    case Agent::W: {
        if (time != TimePoint::t3 || !cond.wbar || !cond.w || cond.z ||
            cond.lbar_hypothesis)
            throw not_modeled("the final agent is cataloged at t3 conditioned "
                              "on both announced outcomes");
        const int x = outcome2(*cond.wbar, kOkbar, kFailsbar, "wbar");
        const int y = outcome2(*cond.w, kOk, kFails, "w");
        if (protocol.wbar_probs()[static_cast<std::size_t>(x)] <= sv::kTol ||
            protocol.w_given_wbar_probs()[static_cast<std::size_t>(x)]
                                         [static_cast<std::size_t>(y)] <= sv::kTol)
            throw not_modeled("heralded outcome pair has probability 0");
        if (target == Lab::LBar)
            return {agent, time, cond, target, protocol.wbar_vector(*cond.wbar)};
        return {agent, time, cond, target, protocol.w_vector(*cond.w)};
    }
    }
    throw not_modeled("unreachable");
}

std::vector<PerspectiveState> assign_states(const ex::Protocol& protocol,
                                            Agent agent, TimePoint time,
                                            const Conditioning& cond) {
    return {assign_state(protocol, agent, time, cond, Lab::LBar),
            assign_state(protocol, agent, time, cond, Lab::L)};
}

// ---------------------------------------------------------------------------
// Message model

MessageDistribution open_lab_message(const ex::Protocol& protocol,
                                     const std::string& branch) {
    const RecordSuperposition rs = branch_record_superposition(protocol, branch);

    MessageDistribution dist;
    dist.effective_probability = 0.0;
    for (const auto& b : rs.branches()) {
        const double quasi = b.coefficient * b.coefficient;
        dist.entries.push_back(MessageEntry{quasi, b.claim});
        dist.effective_probability += quasi * b.claim;
    }
    dist.born_check =
        sv::born_probability(rs.as_ket(), sv::Projector(protocol.w_vector(kOk)));
    if (std::abs(dist.effective_probability - dist.born_check) > sv::kTol)
        throw NotModeledError(
            "message decomposition does not reproduce the Born probability "
            "(effective " + std::to_string(dist.effective_probability) +
            " vs " + std::to_string(dist.born_check) +
            "); the claimed-record reading is only meaningful when it does");
    return dist;
}

EqualTimePrediction w_equal_time_prediction(const ex::Protocol& protocol) {
    // Mixture weights over the announced outcome, as assigned by the spin
    // observer who knows her own record but not the announcement.
    Conditioning f_cond;
    f_cond.z = kPlus;
    const PerspectiveState f_view =
        assign_state(protocol, Agent::F, TimePoint::t3, f_cond, Lab::LBar);
    const auto& rho = std::get<sv::DensityMatrix>(f_view.body);
    const auto in_outcome_basis = rho.matrix_in_basis(
        {protocol.wbar_vector(kOkbar), protocol.wbar_vector(kFailsbar)});

    EqualTimePrediction out;
    out.weights = {in_outcome_basis[0][0].real(), in_outcome_basis[1][1].real()};
    out.effectives = {open_lab_message(protocol, kOkbar).effective_probability,
                      open_lab_message(protocol, kFailsbar).effective_probability};
    out.probability =
        out.weights[0] * out.effectives[0] + out.weights[1] * out.effectives[1];
    out.herald_probability = protocol.wbar_probs()[0];
    out.joint = out.herald_probability * out.probability;
    return out;
}

double heralded_ok_probability(const ex::Protocol& protocol) {
    Conditioning cond;
    cond.wbar = kOkbar;
    const PerspectiveState view =
        assign_state(protocol, Agent::WBar, TimePoint::t3, cond, Lab::L);
    return sv::born_probability(std::get<Ket>(view.body),
                                sv::Projector(protocol.w_vector(kOk)));
}

InconsistencyReport non_equal_time_check(const ex::Protocol& protocol) {
    InconsistencyReport report{};

    Conditioning cond;
    cond.wbar = kOkbar;
    const PerspectiveState heralded =
        assign_state(protocol, Agent::WBar, TimePoint::t3, cond, Lab::L);
    report.heralded_z_minus =
        sv::born_probability(std::get<Ket>(heralded.body),
                             sv::Projector(protocol.l_record(kMinus)));

    // Premise taken at face value: the first lab definitely read tbar at t1,
    // so the second lab simply holds the record of the superposed spin.
    report.premise_z_minus =
        sv::born_probability(protocol.lab_record_of_prep(kTails),
                             sv::Projector(protocol.l_record(kMinus)));

    report.contradiction =
        std::abs(report.heralded_z_minus - report.premise_z_minus) > 1e-9;
    return report;
}

} // namespace wigner::perspectives
