#include "wigner/statevec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

namespace wigner::statevec {

namespace {

constexpr double kPruneEps = 1e-15;

void validate_space(const Space& space) {
    std::set<std::string> names;
    for (const auto& sub : space) {
        if (sub.basis.empty())
            throw InvalidStateError("subsystem '" + sub.name + "' has an empty basis");
        if (!names.insert(sub.name).second)
            throw SpaceMismatchError("duplicate subsystem '" + sub.name + "' in space");
        std::set<std::string> labels(sub.basis.begin(), sub.basis.end());
        if (labels.size() != sub.basis.size())
            throw InvalidStateError("duplicate outcome label in subsystem '" + sub.name + "'");
    }
}

// Index of a scope subsystem inside the enclosing space. The scope must be a
// sub-list of the space (same definitions, any positions).
std::vector<std::size_t> scope_positions(const Space& space, const Space& scope) {
    std::vector<std::size_t> pos;
    for (const auto& sub : scope) {
        auto it = std::find_if(space.begin(), space.end(), [&](const Subsystem& s) {
            return s == sub;
        });
        if (it == space.end())
            throw SpaceMismatchError("projector scope subsystem '" + sub.name +
                                     "' is not part of the state space");
        pos.push_back(static_cast<std::size_t>(it - space.begin()));
    }
    return pos;
}

} // namespace

int Subsystem::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis[i] == label) return static_cast<int>(i);
    throw InvalidStateError("unknown outcome label '" + std::string(label) +
                            "' for subsystem '" + name + "'");
}

std::size_t space_dim(const Space& space) {
    std::size_t d = 1;
    for (const auto& sub : space) d *= sub.dim();
    return d;
}

bool same_space(const Space& a, const Space& b) { return a == b; }

std::string space_name(const Space& space) {
    std::string s;
    for (const auto& sub : space) {
        if (!s.empty()) s += "*";
        s += sub.name;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Ket

Ket::Ket(Space space, std::map<IndexTuple, Complex> amplitudes, Norm norm)
    : space_(std::move(space)), amps_(std::move(amplitudes)),
      unit_(norm == Norm::Unit) {
    validate_space(space_);
    if (amps_.size() > space_dim(space_))
        throw InvalidStateError("more amplitudes than basis states");
    double max_abs = 0.0;
    for (const auto& [idx, amp] : amps_) {
        if (idx.size() != space_.size())
            throw SpaceMismatchError("amplitude key arity does not match space");
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= space_[i].dim())
                throw InvalidStateError("basis index out of range at " +
                                        space_[i].name);
        max_abs = std::max(max_abs, std::abs(amp));
    }
    // Prune numerically dead entries so collapsed states stay sparse.
    for (auto it = amps_.begin(); it != amps_.end();) {
        if (std::abs(it->second) <= kPruneEps * std::max(1.0, max_abs))
            it = amps_.erase(it);
        else
            ++it;
    }
    if (unit_) {
        const double n2 = norm_squared();
        if (std::abs(n2 - 1.0) > 1e-9)
            throw NormalizationError("ket norm^2 = " + std::to_string(n2) +
                                     ", expected 1");
    }
}

Ket Ket::basis_vector(Space space, const std::vector<std::string>& labels) {
    if (labels.size() != space.size())
        throw SpaceMismatchError("label count does not match space");
    IndexTuple idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
        idx.push_back(space[i].index_of(labels[i]));
    std::map<IndexTuple, Complex> amps;
    amps[idx] = Complex(1.0, 0.0);
    return Ket(std::move(space), std::move(amps));
}

Ket Ket::from_labels(
    Space space,
    const std::vector<std::pair<std::vector<std::string>, Complex>>& amps,
    Norm norm) {
    std::map<IndexTuple, Complex> m;
    for (const auto& [labels, amp] : amps) {
        if (labels.size() != space.size())
            throw SpaceMismatchError("label tuple arity does not match space");
        IndexTuple idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            idx.push_back(space[i].index_of(labels[i]));
        m[idx] += amp;
    }
    return Ket(std::move(space), std::move(m), norm);
}

double Ket::norm_squared() const {
    double n2 = 0.0;
    for (const auto& [idx, amp] : amps_) n2 += std::norm(amp);
    return n2;
}

double Ket::norm() const { return std::sqrt(norm_squared()); }

Complex Ket::amplitude(const std::vector<std::string>& labels) const {
    if (labels.size() != space_.size())
        throw SpaceMismatchError("label tuple arity does not match space");
    IndexTuple idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
        idx.push_back(space_[i].index_of(labels[i]));
    auto it = amps_.find(idx);
    return it == amps_.end() ? Complex(0.0, 0.0) : it->second;
}

std::vector<std::string> Ket::labels_for(const IndexTuple& idx) const {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < idx.size(); ++i)
        labels.push_back(space_[i].basis[static_cast<std::size_t>(idx[i])]);
    return labels;
}

Ket Ket::scaled(Complex factor) const {
    std::map<IndexTuple, Complex> amps;
    for (const auto& [idx, amp] : amps_) amps[idx] = amp * factor;
    return Ket(space_, std::move(amps), Norm::Unnormalized);
}

Ket add(const Ket& a, const Ket& b) {
    if (!same_space(a.space(), b.space()))
        throw SpaceMismatchError("cannot add kets over different spaces");
    std::map<IndexTuple, Complex> amps = a.amplitudes();
    for (const auto& [idx, amp] : b.amplitudes()) amps[idx] += amp;
    return Ket(a.space(), std::move(amps), Ket::Norm::Unnormalized);
}

Ket normalized(const Ket& k) {
    const double n = k.norm();
    if (n < 1e-12) throw InvalidStateError("cannot normalize a zero ket");
    std::map<IndexTuple, Complex> amps;
    for (const auto& [idx, amp] : k.amplitudes()) amps[idx] = amp / n;
    return Ket(k.space(), std::move(amps), Ket::Norm::Unit);
}

Ket tensor(const Ket& a, const Ket& b) {
    for (const auto& sa : a.space())
        for (const auto& sb : b.space())
            if (sa.name == sb.name)
                throw SpaceMismatchError("tensor factors share subsystem '" +
                                         sa.name + "'");
    Space space = a.space();
    space.insert(space.end(), b.space().begin(), b.space().end());
    std::map<IndexTuple, Complex> amps;
    for (const auto& [ia, va] : a.amplitudes()) {
        for (const auto& [ib, vb] : b.amplitudes()) {
            IndexTuple idx = ia;
            idx.insert(idx.end(), ib.begin(), ib.end());
            amps[idx] = va * vb;
        }
    }
    const auto norm = (a.unit_normalized() && b.unit_normalized())
                          ? Ket::Norm::Unit
                          : Ket::Norm::Unnormalized;
    return Ket(std::move(space), std::move(amps), norm);
}

Complex inner(const Ket& a, const Ket& b) {
    if (!same_space(a.space(), b.space()))
        throw SpaceMismatchError("inner product over mismatched spaces: " +
                                 space_name(a.space()) + " vs " +
                                 space_name(b.space()));
    // Iterate the sparser operand.
    const Ket& small = a.amplitudes().size() <= b.amplitudes().size() ? a : b;
    const Ket& large = (&small == &a) ? b : a;
    Complex acc(0.0, 0.0);
    for (const auto& [idx, amp] : small.amplitudes()) {
        auto it = large.amplitudes().find(idx);
        if (it == large.amplitudes().end()) continue;
        if (&small == &a)
            acc += std::conj(amp) * it->second;
        else
            acc += std::conj(it->second) * amp;
    }
    return acc;
}

double fidelity(const Ket& a, const Ket& b) { return std::norm(inner(a, b)); }

bool equal_up_to_phase(const Ket& a, const Ket& b, double tol) {
    if (!same_space(a.space(), b.space())) return false;
    const double na2 = a.norm_squared();
    const double nb2 = b.norm_squared();
    if (na2 < kTol || nb2 < kTol) return na2 < kTol && nb2 < kTol;
    return std::abs(std::norm(inner(a, b)) / (na2 * nb2) - 1.0) <= tol;
}

Ket relabel(const Ket& k, std::string_view from, const Subsystem& to,
            const std::vector<std::pair<std::string, std::string>>& label_map) {
    std::size_t pos = k.space().size();
    for (std::size_t i = 0; i < k.space().size(); ++i)
        if (k.space()[i].name == from) pos = i;
    if (pos == k.space().size())
        throw SpaceMismatchError("relabel: no subsystem named '" +
                                 std::string(from) + "'");
    const Subsystem& old = k.space()[pos];
    if (label_map.size() != old.dim())
        throw InvalidStateError("relabel: label map must cover the full basis");
    std::vector<int> index_map(old.dim(), -1);
    for (const auto& [old_label, new_label] : label_map)
        index_map[static_cast<std::size_t>(old.index_of(old_label))] =
            to.index_of(new_label);

    Space space = k.space();
    space[pos] = to;
    std::map<IndexTuple, Complex> amps;
    for (const auto& [idx, amp] : k.amplitudes()) {
        IndexTuple nidx = idx;
        nidx[pos] = index_map[static_cast<std::size_t>(idx[pos])];
        amps[nidx] = amp;
    }
    return Ket(std::move(space), std::move(amps),
               k.unit_normalized() ? Ket::Norm::Unit : Ket::Norm::Unnormalized);
}

// ---------------------------------------------------------------------------
// Projector

Projector::Projector(Ket target) : Projector(std::vector<Ket>{std::move(target)}) {}

Projector::Projector(std::vector<Ket> orthonormal_targets)
    : targets_(std::move(orthonormal_targets)) {
    if (targets_.empty())
        throw InvalidStateError("projector needs at least one target");
    scope_ = targets_.front().space();
    for (auto& t : targets_) {
        if (!same_space(t.space(), scope_))
            throw SpaceMismatchError("projector targets live on different spaces");
        t = normalized(t);
    }
    for (std::size_t i = 0; i < targets_.size(); ++i)
        for (std::size_t j = i + 1; j < targets_.size(); ++j)
            if (std::abs(inner(targets_[i], targets_[j])) > 1e-9)
                throw InvalidStateError("projector targets are not orthogonal");
    if (targets_.size() > space_dim(scope_))
        throw InvalidStateError("more projector targets than the scope dimension");
}

Projector Projector::identity(Space scope) {
    validate_space(scope);
    std::vector<Ket> targets;
    const std::size_t dim = space_dim(scope);
    std::vector<std::size_t> dims;
    for (const auto& sub : scope) dims.push_back(sub.dim());
    for (std::size_t flat = 0; flat < dim; ++flat) {
        IndexTuple idx(scope.size());
        std::size_t rem = flat;
        for (std::size_t i = scope.size(); i-- > 0;) {
            idx[i] = static_cast<int>(rem % dims[i]);
            rem /= dims[i];
        }
        std::map<IndexTuple, Complex> amps;
        amps[idx] = Complex(1.0, 0.0);
        targets.emplace_back(scope, std::move(amps));
    }
    return Projector(std::move(targets));
}

namespace {

// Shared core of born/collapse: for each target |t> of the projector and each
// assignment of the out-of-scope subsystems, the projected amplitude is
// <t (x) rest | psi>. Returns the projected (unnormalized) amplitudes keyed by
// full-space tuples, plus the total squared weight.
struct Projection {
    std::map<IndexTuple, Complex> amps;
    double weight = 0.0;
};

Projection project(const Ket& state, const Projector& proj) {
    const auto pos = scope_positions(state.space(), proj.scope());
    Projection out;
    for (const auto& target : proj.targets()) {
        // rest-assignment -> accumulated <t|psi>_partial
        std::map<IndexTuple, Complex> partial;
        for (const auto& [idx, amp] : state.amplitudes()) {
            IndexTuple scope_idx;
            scope_idx.reserve(pos.size());
            for (std::size_t p : pos) scope_idx.push_back(idx[p]);
            auto it = target.amplitudes().find(scope_idx);
            if (it == target.amplitudes().end()) continue;
            IndexTuple rest = idx;
            for (std::size_t p : pos) rest[p] = -1; // mask scope positions
            partial[rest] += std::conj(it->second) * amp;
        }
        for (const auto& [rest, coeff] : partial) {
            if (std::norm(coeff) == 0.0) continue;
            out.weight += std::norm(coeff);
            // Re-expand: coeff * |target> on scope, basis on the rest.
            for (const auto& [tidx, tamp] : target.amplitudes()) {
                IndexTuple full = rest;
                for (std::size_t k = 0; k < pos.size(); ++k)
                    full[pos[k]] = tidx[k];
                out.amps[full] += coeff * tamp;
            }
        }
    }
    return out;
}

} // namespace

double born_probability(const Ket& state, const Projector& proj) {
    if (!state.unit_normalized())
        throw NormalizationError(
            "born_probability requires a unit-normalized state; use the "
            "unnormalized overload explicitly");
    if (std::abs(state.norm_squared() - 1.0) > 1e-9)
        throw NormalizationError("state norm has drifted from 1");
    return project(state, proj).weight;
}

double born_probability_unnormalized(const Ket& state, const Projector& proj) {
    return project(state, proj).weight;
}

Collapse collapse(const Ket& state, const Projector& proj) {
    auto p = project(state, proj);
    if (p.weight <= kTol)
        throw ImpossibleBranchError(
            "collapse onto a zero-probability branch (p = " +
            std::to_string(p.weight) + ")");
    const double n = std::sqrt(p.weight);
    std::map<IndexTuple, Complex> amps;
    for (auto& [idx, amp] : p.amps) amps[idx] = amp / n;
    return Collapse{Ket(state.space(), std::move(amps)), p.weight};
}

// ---------------------------------------------------------------------------
// Measurement bases

void MeasurementBasis::validate() const {
    if (outcomes.empty()) throw IncompleteBasisError("basis has no outcomes");
    for (const auto& [label, ket] : outcomes) {
        if (!same_space(ket.space(), scope))
            throw SpaceMismatchError("basis vector '" + label +
                                     "' is not over the basis scope");
        if (std::abs(ket.norm_squared() - 1.0) > 1e-9)
            throw IncompleteBasisError("basis vector '" + label +
                                       "' is not normalized");
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        for (std::size_t j = i + 1; j < outcomes.size(); ++j)
            if (std::abs(inner(outcomes[i].second, outcomes[j].second)) > 1e-9)
                throw IncompleteBasisError("basis vectors '" + outcomes[i].first +
                                           "' and '" + outcomes[j].first +
                                           "' are not orthogonal");
    if (outcomes.size() != space_dim(scope))
        throw IncompleteBasisError(
            "basis does not resolve the identity on its scope (" +
            std::to_string(outcomes.size()) + " vectors, dim " +
            std::to_string(space_dim(scope)) + ")");
}

Sample sample_measurement(const Ket& state, const MeasurementBasis& basis,
                          RngStream& rng) {
    basis.validate();
    std::vector<double> probs;
    probs.reserve(basis.outcomes.size());
    double total = 0.0;
    for (const auto& [label, ket] : basis.outcomes) {
        const double p = born_probability(state, Projector(ket));
        probs.push_back(p);
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw IncompleteBasisError("outcome probabilities sum to " +
                                   std::to_string(total));
    const double u = rng.next_double() * total;
    double acc = 0.0;
    std::size_t pick = basis.outcomes.size() - 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    // Skip zero-probability cells the draw cannot legitimately select.
    while (probs[pick] <= kTol && pick > 0) --pick;
    const auto& [label, ket] = basis.outcomes[pick];
    auto c = collapse(state, Projector(ket));
    return Sample{BasisLabel{space_name(basis.scope), label}, std::move(c.state)};
}

// ---------------------------------------------------------------------------
// Density matrices

namespace {

std::size_t flat_index(const Space& space, const IndexTuple& idx) {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < space.size(); ++i)
        flat = flat * space[i].dim() + static_cast<std::size_t>(idx[i]);
    return flat;
}

} // namespace

DensityMatrix::DensityMatrix(Space space, std::vector<Complex> row_major)
    : space_(std::move(space)), dim_(space_dim(space_)), m_(std::move(row_major)) {
    validate_space(space_);
    if (m_.size() != dim_ * dim_)
        throw InvalidStateError("density matrix size does not match space dim");
    double trace = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        trace += m_[i * dim_ + i].real();
        if (std::abs(m_[i * dim_ + i].imag()) > kTol)
            throw InvalidStateError("density matrix has a complex diagonal");
        for (std::size_t j = 0; j < dim_; ++j) {
            const Complex d = m_[i * dim_ + j] - std::conj(m_[j * dim_ + i]);
            if (std::abs(d) > kTol)
                throw InvalidStateError("density matrix is not Hermitian");
        }
    }
    if (std::abs(trace - 1.0) > kTol)
        throw InvalidStateError("density matrix trace = " + std::to_string(trace));
    Eigen::MatrixXcd em(static_cast<Eigen::Index>(dim_),
                        static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j)
            em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m_[i * dim_ + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(em);
    if (solver.eigenvalues().minCoeff() < -kTol)
        throw InvalidStateError("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const Ket& k) {
    return mix({{1.0, k}});
}

Complex DensityMatrix::entry(std::size_t row, std::size_t col) const {
    return m_[row * dim_ + col];
}

double DensityMatrix::expectation(const Projector& proj) const {
    // tr(rho P) = sum_t <t| rho |t>, extending each target by identity on the
    // out-of-scope factors.
    if (!same_space(proj.scope(), space_))
        throw SpaceMismatchError(
            "density-matrix expectation requires a projector over the full space");
    double acc = 0.0;
    for (const auto& t : proj.targets()) {
        Complex val(0.0, 0.0);
        for (const auto& [i_idx, i_amp] : t.amplitudes())
            for (const auto& [j_idx, j_amp] : t.amplitudes())
                val += std::conj(i_amp) *
                       m_[flat_index(space_, i_idx) * dim_ +
                          flat_index(space_, j_idx)] *
                       j_amp;
        acc += val.real();
    }
    return acc;
}

std::vector<std::vector<Complex>> DensityMatrix::matrix_in_basis(
    const std::vector<Ket>& basis) const {
    std::vector<std::vector<Complex>> out(basis.size(),
                                          std::vector<Complex>(basis.size()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
        if (!same_space(basis[a].space(), space_))
            throw SpaceMismatchError("probe basis ket over a different space");
        for (std::size_t b = 0; b < basis.size(); ++b) {
            Complex val(0.0, 0.0);
            for (const auto& [i_idx, i_amp] : basis[a].amplitudes())
                for (const auto& [j_idx, j_amp] : basis[b].amplitudes())
                    val += std::conj(i_amp) *
                           m_[flat_index(space_, i_idx) * dim_ +
                              flat_index(space_, j_idx)] *
                           j_amp;
            out[a][b] = val;
        }
    }
    return out;
}

std::vector<std::vector<std::string>> DensityMatrix::basis_labels() const {
    std::vector<std::vector<std::string>> out;
    out.reserve(dim_);
    std::vector<std::size_t> dims;
    for (const auto& sub : space_) dims.push_back(sub.dim());
    for (std::size_t flat = 0; flat < dim_; ++flat) {
        std::vector<std::string> labels(space_.size());
        std::size_t rem = flat;
        for (std::size_t i = space_.size(); i-- > 0;) {
            labels[i] = space_[i].basis[rem % dims[i]];
            rem /= dims[i];
        }
        out.push_back(std::move(labels));
    }
    return out;
}

bool approx_equal(const DensityMatrix& a, const DensityMatrix& b, double tol) {
    if (!same_space(a.space_, b.space_)) return false;
    for (std::size_t i = 0; i < a.m_.size(); ++i)
        if (std::abs(a.m_[i] - b.m_[i]) > tol) return false;
    return true;
}

DensityMatrix mix(const std::vector<std::pair<double, Ket>>& branches) {
    if (branches.empty()) throw InvalidStateError("mix of zero branches");
    const Space& space = branches.front().second.space();
    double total = 0.0;
    for (const auto& [p, ket] : branches) {
        if (p < -kTol) throw InvalidStateError("negative mixture probability");
        if (!same_space(ket.space(), space))
            throw SpaceMismatchError("mixture branches over different spaces");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidStateError("mixture probabilities sum to " +
                                std::to_string(total));
    const std::size_t dim = space_dim(space);
    std::vector<Complex> m(dim * dim, Complex(0.0, 0.0));
    for (const auto& [p, ket] : branches) {
        for (const auto& [i_idx, i_amp] : ket.amplitudes())
            for (const auto& [j_idx, j_amp] : ket.amplitudes())
                m[flat_index(space, i_idx) * dim + flat_index(space, j_idx)] +=
                    p * i_amp * std::conj(j_amp);
    }
    return DensityMatrix(space, std::move(m));
}

} // namespace wigner::statevec
