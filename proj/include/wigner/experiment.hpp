// The five-step protocol: coin initialization, the two in-lab measurements
// that create records (isometries from the outside), and the two outside
// measurements that actually branch the state. Produces the exact branch tree
// and joint outcome distribution, and runs seeded Monte Carlo rounds.

#ifndef WIGNER_EXPERIMENT_HPP
#define WIGNER_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wigner/config.hpp"
#include "wigner/rng.hpp"
#include "wigner/statevec.hpp"
#include "wigner/timepoint.hpp"

namespace wigner::experiment {

namespace names {
inline constexpr const char* kHeads = "heads";
inline constexpr const char* kTails = "tails";
inline constexpr const char* kDown = "down";
inline constexpr const char* kUp = "up";
inline constexpr const char* kHbar = "hbar";
inline constexpr const char* kTbar = "tbar";
inline constexpr const char* kMinus = "minus";
inline constexpr const char* kPlus = "plus";
inline constexpr const char* kOkbar = "okbar";
inline constexpr const char* kFailsbar = "failsbar";
inline constexpr const char* kOk = "ok";
inline constexpr const char* kFails = "fails";
} // namespace names

struct IncompleteTreeError : statevec::Error {
    using statevec::Error::Error;
};
struct InvalidArgumentError : statevec::Error {
    using statevec::Error::Error;
};

/// One node of the exact evolution. Chain steps (record creation, sealed
/// labs) have a single child with probability 1; the two outside
/// measurements branch with Born weights. A leaf's probability is the product
/// of branch probabilities along its path.
struct BranchNode {
    std::string step;    // "init", "fbar", "send", "f", "wbar", "w"
    std::string outcome; // "" for chain nodes
    double probability;  // conditional on the parent
    statevec::Ket state;
    std::vector<BranchNode> children;
};

class BranchTree {
public:
    explicit BranchTree(BranchNode root);

    const BranchNode& root() const { return root_; }

    /// Chain accessors for the five operation rows (states after each step).
    const BranchNode& after_fbar() const;  // coin measured, spin prepared
    const BranchNode& after_send() const;  // first lab sealed as records
    const BranchNode& after_f() const;     // spin measured, second lab sealed

    /// Heralded branch after the first outside measurement.
    const BranchNode& wbar_branch(const std::string& outcome) const;
    /// Leaf after both outside measurements.
    const BranchNode& leaf(const std::string& wbar, const std::string& w) const;

    std::vector<const BranchNode*> leaves() const;

    /// Number of measurement levels (4 when complete).
    int measurement_depth() const;

private:
    BranchNode root_;
};

/// Exact joint distribution over the two announced outcomes, ordered
/// (okbar,ok), (okbar,fails), (failsbar,ok), (failsbar,fails).
struct OutcomeTable {
    static constexpr std::array<std::pair<const char*, const char*>, 4> kCells = {{
        {names::kOkbar, names::kOk},
        {names::kOkbar, names::kFails},
        {names::kFailsbar, names::kOk},
        {names::kFailsbar, names::kFails},
    }};

    std::array<double, 4> p{};

    static std::size_t index(const std::string& wbar, const std::string& w);
    double joint(const std::string& wbar, const std::string& w) const;
    double marginal_wbar(const std::string& wbar) const;
    double marginal_w(const std::string& w) const;
    double conditional_w_given_wbar(const std::string& w,
                                    const std::string& wbar) const;
};

/// One simulated round. The in-lab records r and z are sampled from the
/// sealed labs' Born weights; the announced outcomes come from the coherent
/// global state, which is what the outside agents actually measure.
struct RoundRecord {
    std::string r;    // heads | tails
    std::string z;    // minus | plus
    std::string wbar; // okbar | failsbar
    std::string w;    // ok | fails
    std::uint64_t seed;
    std::uint64_t worker;
    std::uint64_t round;
};

struct FrequencyTable {
    std::uint64_t rounds = 0;
    std::uint64_t seed = 0;
    std::array<std::uint64_t, 4> joint_counts{}; // OutcomeTable cell order
    std::array<std::uint64_t, 2> r_counts{};     // heads, tails
    std::array<std::uint64_t, 2> z_counts{};     // minus, plus

    double frequency(std::size_t cell) const;
    /// sqrt(f(1-f)/N); degenerate (and flagged) for rounds < 2.
    double standard_error(std::size_t cell) const;
    bool degenerate() const { return rounds < 2; }

    double wbar_frequency(const std::string& wbar) const;
    double w_frequency(const std::string& w) const;

    friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

/// Executable protocol: validated config, canonical subsystems, measurement
/// bases, the exact branch tree and the per-step sampling tables. Immutable
/// after construction and safe to share across threads.
class Protocol {
public:
    explicit Protocol(config::ProtocolConfig cfg);

    const config::ProtocolConfig& config() const { return cfg_; }
    const BranchTree& tree() const { return *tree_; }

    const statevec::Subsystem& coin() const { return r_; }
    const statevec::Subsystem& spin() const { return s_; }
    const statevec::Subsystem& lab_bar() const { return lbar_; }
    const statevec::Subsystem& lab() const { return l_; }

    statevec::Ket init_state() const;
    /// Spin state prepared for a coin outcome.
    statevec::Ket spin_prep(const std::string& r) const;
    /// Lab record images of the spin preparations (after the f step).
    statevec::Ket lab_record_of_prep(const std::string& r) const;

    statevec::MeasurementBasis r_basis() const;
    statevec::MeasurementBasis f_measurement_basis() const;
    statevec::MeasurementBasis wbar_measurement_basis() const;
    statevec::MeasurementBasis w_measurement_basis() const;

    statevec::Ket wbar_vector(const std::string& outcome) const;
    statevec::Ket w_vector(const std::string& outcome) const;
    statevec::Ket lbar_record(const std::string& name) const;
    statevec::Ket l_record(const std::string& name) const;

    /// Conditional spin-record probabilities used by round sampling:
    /// p_r[k], p_z_given_r[k][j].
    const std::array<double, 2>& record_r_probs() const { return p_r_; }
    const std::array<std::array<double, 2>, 2>& record_z_probs() const {
        return p_z_given_r_;
    }
    const std::array<double, 2>& wbar_probs() const { return p_wbar_; }
    const std::array<std::array<double, 2>, 2>& w_given_wbar_probs() const {
        return p_w_given_wbar_;
    }

private:
    config::ProtocolConfig cfg_;
    statevec::Subsystem r_, s_, lbar_, l_;
    std::shared_ptr<const BranchTree> tree_;
    std::array<double, 2> p_r_{};
    std::array<std::array<double, 2>, 2> p_z_given_r_{};
    std::array<double, 2> p_wbar_{};
    std::array<std::array<double, 2>, 2> p_w_given_wbar_{};
};

Protocol build_protocol(const config::ProtocolConfig& cfg);

const BranchTree& evolve_exact(const Protocol& protocol);

/// Requires a tree with both announced outcomes resolved on every surviving
/// branch; throws IncompleteTreeError otherwise.
OutcomeTable joint_distribution(const BranchTree& tree);

RoundRecord run_round(const Protocol& protocol, RngStream& rng);

/// Runs `rounds` independent rounds. The per-round stream identity is
/// (seed, 0, round index), so the result is bitwise identical for any worker
/// count; workers only partition the round range.
FrequencyTable monte_carlo(const Protocol& protocol, std::uint64_t rounds,
                           std::uint64_t seed, unsigned workers = 1);

} // namespace wigner::experiment

#endif // WIGNER_EXPERIMENT_HPP
