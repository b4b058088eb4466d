#include "wigner/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace wigner::experiment {

namespace sv = wigner::statevec;
using sv::Complex;
using sv::IndexTuple;
using sv::Ket;

namespace {

// Record-creation isometry for the f step: expands the spin factor in the
// measurement basis and writes each outcome into the lab record space.
// amp'(.., k) = sum_s basis[k][s] * amp(.., s).
Ket measure_into_records(const Ket& state, const std::string& spin_name,
                         const config::BasisTable& basis,
                         const sv::Subsystem& record_space) {
    std::size_t pos = state.space().size();
    for (std::size_t i = 0; i < state.space().size(); ++i)
        if (state.space()[i].name == spin_name) pos = i;
    if (pos == state.space().size())
        throw sv::SpaceMismatchError("no spin subsystem '" + spin_name + "'");

    sv::Space space = state.space();
    space[pos] = record_space;
    std::map<IndexTuple, Complex> amps;
    for (const auto& [idx, amp] : state.amplitudes()) {
        for (int k = 0; k < 2; ++k) {
            const double w = basis[static_cast<std::size_t>(k)]
                                  [static_cast<std::size_t>(idx[pos])];
            if (w == 0.0) continue;
            IndexTuple nidx = idx;
            nidx[pos] = k;
            amps[nidx] += amp * w;
        }
    }
    return Ket(std::move(space), std::move(amps));
}

int pick2(double u, double p0, double p1) {
    if (p1 <= sv::kTol) return 0;
    if (p0 <= sv::kTol) return 1;
    return u < p0 ? 0 : 1;
}

} // namespace

// ---------------------------------------------------------------------------
// BranchTree

BranchTree::BranchTree(BranchNode root) : root_(std::move(root)) {
    // Children of every node must resolve to total probability 1.
    struct Check {
        static void walk(const BranchNode& n) {
            if (n.children.empty()) return;
            double total = 0.0;
            for (const auto& c : n.children) total += c.probability;
            if (std::abs(total - 1.0) > 1e-9)
                throw IncompleteTreeError("branch probabilities after step '" +
                                          n.step + "' sum to " +
                                          std::to_string(total));
            for (const auto& c : n.children) walk(c);
        }
    };
    Check::walk(root_);
}

namespace {
const BranchNode& only_child(const BranchNode& n, const char* step) {
    if (n.children.size() != 1 || n.children.front().step != step)
        throw IncompleteTreeError(std::string("expected chain step '") + step + "'");
    return n.children.front();
}
} // namespace

const BranchNode& BranchTree::after_fbar() const { return only_child(root_, "fbar"); }
const BranchNode& BranchTree::after_send() const {
    return only_child(after_fbar(), "send");
}
const BranchNode& BranchTree::after_f() const { return only_child(after_send(), "f"); }

const BranchNode& BranchTree::wbar_branch(const std::string& outcome) const {
    for (const auto& c : after_f().children)
        if (c.outcome == outcome) return c;
    throw IncompleteTreeError("no '" + outcome + "' branch (probability 0?)");
}

const BranchNode& BranchTree::leaf(const std::string& wbar,
                                   const std::string& w) const {
    for (const auto& c : wbar_branch(wbar).children)
        if (c.outcome == w) return c;
    throw IncompleteTreeError("no (" + wbar + ", " + w + ") leaf");
}

std::vector<const BranchNode*> BranchTree::leaves() const {
    std::vector<const BranchNode*> out;
    struct Walk {
        static void go(const BranchNode& n, std::vector<const BranchNode*>& out) {
            if (n.children.empty()) {
                out.push_back(&n);
                return;
            }
            for (const auto& c : n.children) go(c, out);
        }
    };
    Walk::go(root_, out);
    return out;
}

int BranchTree::measurement_depth() const {
    int best = 0;
    struct Walk {
        static void go(const BranchNode& n, int depth, int& best) {
            const bool is_measurement = n.step == "fbar" || n.step == "f" ||
                                        n.step == "wbar" || n.step == "w";
            if (is_measurement) ++depth;
            best = std::max(best, depth);
            for (const auto& c : n.children) go(c, depth, best);
        }
    };
    Walk::go(root_, 0, best);
    return best;
}

// ---------------------------------------------------------------------------
// OutcomeTable

std::size_t OutcomeTable::index(const std::string& wbar, const std::string& w) {
    for (std::size_t i = 0; i < kCells.size(); ++i)
        if (wbar == kCells[i].first && w == kCells[i].second) return i;
    throw InvalidArgumentError("unknown outcome cell (" + wbar + ", " + w + ")");
}

double OutcomeTable::joint(const std::string& wbar, const std::string& w) const {
    return p[index(wbar, w)];
}

double OutcomeTable::marginal_wbar(const std::string& wbar) const {
    return joint(wbar, names::kOk) + joint(wbar, names::kFails);
}

double OutcomeTable::marginal_w(const std::string& w) const {
    return joint(names::kOkbar, w) + joint(names::kFailsbar, w);
}

double OutcomeTable::conditional_w_given_wbar(const std::string& w,
                                              const std::string& wbar) const {
    const double m = marginal_wbar(wbar);
    if (m <= sv::kTol)
        throw InvalidArgumentError("conditioning on zero-probability outcome '" +
                                   wbar + "'");
    return joint(wbar, w) / m;
}

// ---------------------------------------------------------------------------
// FrequencyTable

double FrequencyTable::frequency(std::size_t cell) const {
    return rounds ? static_cast<double>(joint_counts[cell]) /
                        static_cast<double>(rounds)
                  : 0.0;
}

double FrequencyTable::standard_error(std::size_t cell) const {
    if (rounds < 2) return 0.0;
    const double f = frequency(cell);
    return std::sqrt(f * (1.0 - f) / static_cast<double>(rounds));
}

double FrequencyTable::wbar_frequency(const std::string& wbar) const {
    const auto a = OutcomeTable::index(wbar, names::kOk);
    const auto b = OutcomeTable::index(wbar, names::kFails);
    return rounds ? static_cast<double>(joint_counts[a] + joint_counts[b]) /
                        static_cast<double>(rounds)
                  : 0.0;
}

double FrequencyTable::w_frequency(const std::string& w) const {
    const auto a = OutcomeTable::index(names::kOkbar, w);
    const auto b = OutcomeTable::index(names::kFailsbar, w);
    return rounds ? static_cast<double>(joint_counts[a] + joint_counts[b]) /
                        static_cast<double>(rounds)
                  : 0.0;
}

// ---------------------------------------------------------------------------
// Protocol

Protocol::Protocol(config::ProtocolConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    r_ = {"R", {names::kHeads, names::kTails}};
    s_ = {"S", {names::kDown, names::kUp}};
    lbar_ = {"Lbar", {names::kHbar, names::kTbar}};
    l_ = {"L", {names::kMinus, names::kPlus}};

    // Row 1: coin initialization.
    Ket init = init_state();

    // Row 2: coin measured inside the first lab, spin prepared accordingly.
    Ket row2 = add(tensor(Ket::basis_vector({r_}, {names::kHeads})
                              .scaled(cfg_.a_heads),
                          spin_prep(names::kHeads)),
                   tensor(Ket::basis_vector({r_}, {names::kTails})
                              .scaled(cfg_.a_tails),
                          spin_prep(names::kTails)));
    row2 = sv::normalized(row2);

    // Row 3: the coin and its observer become the sealed lab records.
    Ket row3 = sv::relabel(row2, "R", lbar_,
                           {{names::kHeads, names::kHbar},
                            {names::kTails, names::kTbar}});

    // Row 4: spin measured inside the second lab; records replace the spin.
    Ket row4 = measure_into_records(row3, "S", cfg_.f_basis, l_);

    // Rows 5-6: the outside measurements genuinely branch.
    std::vector<BranchNode> wbar_children;
    const std::array<const char*, 2> wbar_names = {names::kOkbar, names::kFailsbar};
    const std::array<const char*, 2> w_names = {names::kOk, names::kFails};
    for (int x = 0; x < 2; ++x) {
        const sv::Projector proj(
            wbar_vector(wbar_names[static_cast<std::size_t>(x)]));
        const double px = sv::born_probability(row4, proj);
        p_wbar_[static_cast<std::size_t>(x)] = px;
        if (px <= sv::kTol) continue;
        auto cx = sv::collapse(row4, proj);
        BranchNode node{"wbar", wbar_names[static_cast<std::size_t>(x)], px,
                        cx.state, {}};
        for (int y = 0; y < 2; ++y) {
            const sv::Projector wproj(
                w_vector(w_names[static_cast<std::size_t>(y)]));
            const double py = sv::born_probability(cx.state, wproj);
            p_w_given_wbar_[static_cast<std::size_t>(x)]
                           [static_cast<std::size_t>(y)] = py;
            if (py <= sv::kTol) continue;
            auto cy = sv::collapse(cx.state, wproj);
            node.children.push_back(BranchNode{
                "w", w_names[static_cast<std::size_t>(y)], py, cy.state, {}});
        }
        wbar_children.push_back(std::move(node));
    }

    BranchNode f_node{"f", "", 1.0, row4, std::move(wbar_children)};
    BranchNode send_node{"send", "", 1.0, row3, {std::move(f_node)}};
    BranchNode fbar_node{"fbar", "", 1.0, row2, {std::move(send_node)}};
    BranchNode root{"init", "", 1.0, init, {std::move(fbar_node)}};
    tree_ = std::make_shared<const BranchTree>(BranchTree(std::move(root)));

    // In-lab record statistics for round sampling.
    p_r_ = {cfg_.a_heads * cfg_.a_heads, cfg_.a_tails * cfg_.a_tails};
    const std::array<std::array<double, 2>, 2> preps = {cfg_.spin_prep_heads,
                                                        cfg_.spin_prep_tails};
    for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 2; ++k) {
            double amp = 0.0;
            for (int s = 0; s < 2; ++s)
                amp += cfg_.f_basis[static_cast<std::size_t>(k)]
                                   [static_cast<std::size_t>(s)] *
                       preps[static_cast<std::size_t>(r)]
                            [static_cast<std::size_t>(s)];
            p_z_given_r_[static_cast<std::size_t>(r)]
                        [static_cast<std::size_t>(k)] = amp * amp;
        }
}

Ket Protocol::init_state() const {
    return Ket::from_labels({r_}, {{{names::kHeads}, cfg_.a_heads},
                                   {{names::kTails}, cfg_.a_tails}});
}

Ket Protocol::spin_prep(const std::string& r) const {
    const auto& amps =
        r == names::kHeads ? cfg_.spin_prep_heads : cfg_.spin_prep_tails;
    return Ket::from_labels({s_}, {{{names::kDown}, amps[0]},
                                   {{names::kUp}, amps[1]}});
}

Ket Protocol::lab_record_of_prep(const std::string& r) const {
    return measure_into_records(spin_prep(r), "S", cfg_.f_basis, l_);
}

sv::MeasurementBasis Protocol::r_basis() const {
    return sv::MeasurementBasis{
        {r_},
        {{names::kHeads, Ket::basis_vector({r_}, {names::kHeads})},
         {names::kTails, Ket::basis_vector({r_}, {names::kTails})}}};
}

sv::MeasurementBasis Protocol::f_measurement_basis() const {
    auto row = [&](int k) {
        return Ket::from_labels(
            {s_}, {{{names::kDown},
                    cfg_.f_basis[static_cast<std::size_t>(k)][0]},
                   {{names::kUp}, cfg_.f_basis[static_cast<std::size_t>(k)][1]}});
    };
    return sv::MeasurementBasis{{s_},
                                {{names::kDown, row(0)}, {names::kUp, row(1)}}};
}

sv::MeasurementBasis Protocol::wbar_measurement_basis() const {
    return sv::MeasurementBasis{{lbar_},
                                {{names::kOkbar, wbar_vector(names::kOkbar)},
                                 {names::kFailsbar, wbar_vector(names::kFailsbar)}}};
}

sv::MeasurementBasis Protocol::w_measurement_basis() const {
    return sv::MeasurementBasis{{l_},
                                {{names::kOk, w_vector(names::kOk)},
                                 {names::kFails, w_vector(names::kFails)}}};
}

Ket Protocol::wbar_vector(const std::string& outcome) const {
    const int row = outcome == names::kOkbar ? 0 : 1;
    if (outcome != names::kOkbar && outcome != names::kFailsbar)
        throw InvalidArgumentError("unknown wbar outcome '" + outcome + "'");
    return Ket::from_labels(
        {lbar_}, {{{names::kHbar}, cfg_.wbar_basis[static_cast<std::size_t>(row)][0]},
                  {{names::kTbar}, cfg_.wbar_basis[static_cast<std::size_t>(row)][1]}});
}

Ket Protocol::w_vector(const std::string& outcome) const {
    const int row = outcome == names::kOk ? 0 : 1;
    if (outcome != names::kOk && outcome != names::kFails)
        throw InvalidArgumentError("unknown w outcome '" + outcome + "'");
    return Ket::from_labels(
        {l_}, {{{names::kMinus}, cfg_.w_basis[static_cast<std::size_t>(row)][0]},
               {{names::kPlus}, cfg_.w_basis[static_cast<std::size_t>(row)][1]}});
}

Ket Protocol::lbar_record(const std::string& name) const {
    return Ket::basis_vector({lbar_}, {name});
}

Ket Protocol::l_record(const std::string& name) const {
    return Ket::basis_vector({l_}, {name});
}

Protocol build_protocol(const config::ProtocolConfig& cfg) { return Protocol(cfg); }

const BranchTree& evolve_exact(const Protocol& protocol) { return protocol.tree(); }

OutcomeTable joint_distribution(const BranchTree& tree) {
    if (tree.measurement_depth() != 4)
        throw IncompleteTreeError("tree does not resolve all four outcomes");
    OutcomeTable table;
    double total = 0.0;
    for (const auto& wbar_node : tree.after_f().children) {
        if (wbar_node.children.empty())
            throw IncompleteTreeError("branch '" + wbar_node.outcome +
                                      "' has no final measurement");
        for (const auto& w_node : wbar_node.children) {
            const double p = wbar_node.probability * w_node.probability;
            table.p[OutcomeTable::index(wbar_node.outcome, w_node.outcome)] = p;
            total += p;
        }
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw IncompleteTreeError("leaf probabilities sum to " +
                                  std::to_string(total));
    return table;
}

RoundRecord run_round(const Protocol& protocol, RngStream& rng) {
    // Step order fixes the draw order: r, z, wbar, w. The first two sample
    // the in-lab records; the last two sample the coherent global state the
    // outside agents measure.
    const auto& p_r = protocol.record_r_probs();
    const int r = pick2(rng.next_double(), p_r[0], p_r[1]);
    const auto& p_z = protocol.record_z_probs()[static_cast<std::size_t>(r)];
    const int z = pick2(rng.next_double(), p_z[0], p_z[1]);
    const auto& p_wbar = protocol.wbar_probs();
    const int wbar = pick2(rng.next_double(), p_wbar[0], p_wbar[1]);
    const auto& p_w =
        protocol.w_given_wbar_probs()[static_cast<std::size_t>(wbar)];
    const int w = pick2(rng.next_double(), p_w[0], p_w[1]);

    return RoundRecord{
        r == 0 ? names::kHeads : names::kTails,
        z == 0 ? names::kMinus : names::kPlus,
        wbar == 0 ? names::kOkbar : names::kFailsbar,
        w == 0 ? names::kOk : names::kFails,
        rng.seed(), rng.worker(), rng.round()};
}

FrequencyTable monte_carlo(const Protocol& protocol, std::uint64_t rounds,
                           std::uint64_t seed, unsigned workers) {
    if (rounds == 0) throw InvalidArgumentError("rounds must be >= 1");
    if (workers == 0) throw InvalidArgumentError("workers must be >= 1");
    workers = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, rounds));

    struct Local {
        std::array<std::uint64_t, 4> joint{};
        std::array<std::uint64_t, 2> r{};
        std::array<std::uint64_t, 2> z{};
    };
    std::vector<Local> locals(workers);

    auto work = [&](unsigned widx, std::uint64_t begin, std::uint64_t end) {
        Local& loc = locals[widx];
        for (std::uint64_t i = begin; i < end; ++i) {
            RngStream stream(seed, 0, i);
            const RoundRecord rec = run_round(protocol, stream);
            loc.joint[OutcomeTable::index(rec.wbar, rec.w)]++;
            loc.r[rec.r == names::kHeads ? 0 : 1]++;
            loc.z[rec.z == names::kMinus ? 0 : 1]++;
        }
    };

    if (workers == 1) {
        work(0, 0, rounds);
    } else {
        std::vector<std::thread> threads;
        const std::uint64_t chunk = (rounds + workers - 1) / workers;
        for (unsigned widx = 0; widx < workers; ++widx) {
            const std::uint64_t begin = widx * chunk;
            const std::uint64_t end = std::min(rounds, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back(work, widx, begin, end);
        }
        for (auto& t : threads) t.join();
    }

    FrequencyTable table;
    table.rounds = rounds;
    table.seed = seed;
    for (const auto& loc : locals) {
        for (std::size_t i = 0; i < 4; ++i) table.joint_counts[i] += loc.joint[i];
        for (std::size_t i = 0; i < 2; ++i) {
            table.r_counts[i] += loc.r[i];
            table.z_counts[i] += loc.z[i];
        }
    }
    return table;
}

} // namespace wigner::experiment
