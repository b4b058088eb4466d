// Exact linear algebra over labeled, low-dimensional composite Hilbert spaces:
// tensor products, inner products, projectors, Born probabilities, collapse,
// measurement sampling and mixed states. States are sparse maps from basis
// label tuples to complex amplitudes, which keeps every intermediate state of
// the protocol human-readable.

#ifndef WIGNER_STATEVEC_HPP
#define WIGNER_STATEVEC_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wigner/rng.hpp"

namespace wigner::statevec {

using Complex = std::complex<double>;

/// Global tolerance for exactness assertions (normalization, orthogonality,
/// idempotence, probability sums).
inline constexpr double kTol = 1e-12;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpaceMismatchError : Error {
    using Error::Error;
};
struct NormalizationError : Error {
    using Error::Error;
};
/// Collapse was requested onto a branch of (numerically) zero probability,
/// i.e. a logically excluded outcome.
struct ImpossibleBranchError : Error {
    using Error::Error;
};
struct IncompleteBasisError : Error {
    using Error::Error;
};
struct InvalidStateError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Spaces and labels

/// One subsystem of the composite space: a name plus its canonical ordered
/// outcome labels. Labels must be unique within the subsystem.
struct Subsystem {
    std::string name;
    std::vector<std::string> basis;

    std::size_t dim() const { return basis.size(); }
    int index_of(std::string_view label) const;

    friend bool operator==(const Subsystem& a, const Subsystem& b) {
        return a.name == b.name && a.basis == b.basis;
    }
};

/// A single outcome of a single subsystem, as reported by measurements.
struct BasisLabel {
    std::string subsystem;
    std::string name;

    friend bool operator==(const BasisLabel& a, const BasisLabel& b) {
        return a.subsystem == b.subsystem && a.name == b.name;
    }
};

using Space = std::vector<Subsystem>;

/// One basis index per subsystem, ordered as the space.
using IndexTuple = std::vector<int>;

std::size_t space_dim(const Space& space);
bool same_space(const Space& a, const Space& b);
std::string space_name(const Space& space);

// ---------------------------------------------------------------------------
// Ket

class Ket {
public:
    enum class Norm { Unit, Unnormalized };

    /// Builds a ket from sparse amplitudes. With Norm::Unit (the default
    /// everywhere except the perspectives module's quasi-weight arithmetic)
    /// the squared amplitudes must sum to 1 within kTol.
    Ket(Space space, std::map<IndexTuple, Complex> amplitudes,
        Norm norm = Norm::Unit);

    static Ket basis_vector(Space space, const std::vector<std::string>& labels);

    /// Label-keyed construction, e.g. {{"heads"}, sqrt(1/3)}.
    static Ket from_labels(
        Space space,
        const std::vector<std::pair<std::vector<std::string>, Complex>>& amps,
        Norm norm = Norm::Unit);

    const Space& space() const { return space_; }
    const std::map<IndexTuple, Complex>& amplitudes() const { return amps_; }

    /// True unless the ket was explicitly constructed via Norm::Unnormalized.
    bool unit_normalized() const { return unit_; }

    double norm_squared() const;
    double norm() const;

    Complex amplitude(const std::vector<std::string>& labels) const;
    std::vector<std::string> labels_for(const IndexTuple& idx) const;

    /// Scalar multiple; the result is flagged unnormalized.
    Ket scaled(Complex factor) const;

private:
    Space space_;
    std::map<IndexTuple, Complex> amps_;
    bool unit_ = true;
};

/// Sum of two kets over the same space; result is flagged unnormalized.
Ket add(const Ket& a, const Ket& b);

/// Rescales to unit norm. Throws InvalidStateError on (numerically) zero kets.
Ket normalized(const Ket& k);

Ket tensor(const Ket& a, const Ket& b);

/// <a|b>; conjugate-linear in a, linear in b.
Complex inner(const Ket& a, const Ket& b);

/// |<a|b>|^2 for unit kets: 1 iff the states are equal up to a global phase.
double fidelity(const Ket& a, const Ket& b);

/// State equality modulo global phase, per the module's comparison rule.
bool equal_up_to_phase(const Ket& a, const Ket& b, double tol = 1e-9);

/// Replaces subsystem `from` by `to`, carrying amplitudes across `label_map`
/// (old label -> new label). This is the record-keeping isometry that turns
/// measured microsystems into lab record spaces.
Ket relabel(const Ket& k, std::string_view from,
            const Subsystem& to,
            const std::vector<std::pair<std::string, std::string>>& label_map);

// ---------------------------------------------------------------------------
// Projector

/// Orthogonal projector onto the span of orthonormal target kets living on a
/// sub-factor (scope) of a larger space. Applying it twice equals applying it
/// once within kTol.
class Projector {
public:
    explicit Projector(Ket target);
    explicit Projector(std::vector<Ket> orthonormal_targets);

    static Projector identity(Space scope);

    const Space& scope() const { return scope_; }
    const std::vector<Ket>& targets() const { return targets_; }
    bool is_identity() const { return targets_.size() == space_dim(scope_); }

private:
    Space scope_;
    std::vector<Ket> targets_;
};

double born_probability(const Ket& state, const Projector& proj);

/// Raw <psi|P|psi> without the unit-norm precondition. This is the single
/// audited path used for quasi-weight arithmetic on unnormalized
/// decompositions.
double born_probability_unnormalized(const Ket& state, const Projector& proj);

struct Collapse {
    Ket state;
    double probability;
};

/// Normalized projection plus Born weight. Throws ImpossibleBranchError when
/// the branch probability is below kTol.
Collapse collapse(const Ket& state, const Projector& proj);

// ---------------------------------------------------------------------------
// Measurement bases and sampling

/// A complete orthonormal measurement: one labeled unit ket per outcome,
/// jointly resolving the identity on the scope.
struct MeasurementBasis {
    Space scope;
    std::vector<std::pair<std::string, Ket>> outcomes;

    /// Throws IncompleteBasisError unless the outcome kets are orthonormal
    /// and span the scope.
    void validate() const;
};

struct Sample {
    BasisLabel outcome;
    Ket state;
};

/// Draws one outcome with Born probabilities and collapses onto it.
/// Deterministic given the stream identity and draw position.
Sample sample_measurement(const Ket& state, const MeasurementBasis& basis,
                          RngStream& rng);

// ---------------------------------------------------------------------------
// Density matrices

/// Dense Hermitian matrix over the composite canonical basis of its space.
/// Construction validates Hermiticity, unit trace, and positive
/// semidefiniteness (eigenvalues >= -kTol).
class DensityMatrix {
public:
    DensityMatrix(Space space, std::vector<Complex> row_major);

    static DensityMatrix pure(const Ket& k);

    const Space& space() const { return space_; }
    std::size_t dim() const { return dim_; }
    Complex entry(std::size_t row, std::size_t col) const;

    /// tr(rho P).
    double expectation(const Projector& proj) const;

    /// <b_i| rho |b_j> for an arbitrary set of probe kets over the same space.
    std::vector<std::vector<Complex>> matrix_in_basis(
        const std::vector<Ket>& basis) const;

    /// Enumerated composite labels in storage order (mixed-radix, first
    /// subsystem most significant).
    std::vector<std::vector<std::string>> basis_labels() const;

    friend bool approx_equal(const DensityMatrix& a, const DensityMatrix& b,
                             double tol);

private:
    Space space_;
    std::size_t dim_;
    std::vector<Complex> m_; // row-major
};

/// Sum of p_i |psi_i><psi_i|. Probabilities must be nonnegative and sum to 1
/// within 1e-9.
DensityMatrix mix(const std::vector<std::pair<double, Ket>>& branches);

} // namespace wigner::statevec

#endif // WIGNER_STATEVEC_HPP
