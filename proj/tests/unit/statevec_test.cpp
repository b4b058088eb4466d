#include <doctest.h>

#include <cmath>

#include "wigner/statevec.hpp"

namespace sv = wigner::statevec;
using sv::Complex;
using sv::Ket;
using sv::Projector;
using sv::Subsystem;

namespace {

const Subsystem kR{"R", {"heads", "tails"}};
const Subsystem kS{"S", {"down", "up"}};
const Subsystem kLbar{"Lbar", {"hbar", "tbar"}};
const Subsystem kL{"L", {"minus", "plus"}};

const double kS12 = std::sqrt(0.5);

Ket init_r() {
    return Ket::from_labels({kR}, {{{"heads"}, std::sqrt(1.0 / 3.0)},
                                   {{"tails"}, std::sqrt(2.0 / 3.0)}});
}

Ket okbar() {
    return Ket::from_labels({kLbar}, {{{"hbar"}, kS12}, {{"tbar"}, -kS12}});
}

Ket failsbar() {
    return Ket::from_labels({kLbar}, {{{"hbar"}, kS12}, {{"tbar"}, kS12}});
}

Ket ok_l() {
    return Ket::from_labels({kL}, {{{"minus"}, kS12}, {{"plus"}, -kS12}});
}

Ket fails_l() {
    return Ket::from_labels({kL}, {{{"minus"}, kS12}, {{"plus"}, kS12}});
}

// The pre-announcement state over (Lbar, L):
// sqrt(1/3)(|hbar,minus> + |tbar,minus> + |tbar,plus>).
Ket row4() {
    const double a = std::sqrt(1.0 / 3.0);
    return Ket::from_labels({kLbar, kL}, {{{"hbar", "minus"}, a},
                                          {{"tbar", "minus"}, a},
                                          {{"tbar", "plus"}, a}});
}

// Deterministic pseudo-random unit ket over one subsystem.
Ket random_unit(const Subsystem& sub, wigner::RngStream& rng) {
    std::vector<std::pair<std::vector<std::string>, Complex>> amps;
    double n2 = 0.0;
    std::vector<Complex> raw;
    for (std::size_t i = 0; i < sub.dim(); ++i) {
        const Complex c(rng.next_double() - 0.5, rng.next_double() - 0.5);
        raw.push_back(c);
        n2 += std::norm(c);
    }
    const double n = std::sqrt(n2);
    for (std::size_t i = 0; i < sub.dim(); ++i)
        amps.push_back({{sub.basis[i]}, raw[i] / n});
    return Ket::from_labels({sub}, amps);
}

} // namespace

TEST_CASE("tensor of basis vectors is the composite basis vector") {
    const Ket hbar = Ket::basis_vector({kLbar}, {"hbar"});
    const Ket down = Ket::basis_vector({kS}, {"down"});
    const Ket t = tensor(hbar, down);
    CHECK(t.amplitude({"hbar", "down"}) == Complex(1.0, 0.0));
    CHECK(t.amplitudes().size() == 1);
}

TEST_CASE("tensor distributes scalar amplitudes over the product basis") {
    const Ket t = tensor(init_r(), Ket::basis_vector({kS}, {"down"}));
    CHECK(std::abs(t.amplitude({"heads", "down"}).real() - std::sqrt(1.0 / 3.0)) <
          sv::kTol);
    CHECK(std::abs(t.amplitude({"tails", "down"}).real() - std::sqrt(2.0 / 3.0)) <
          sv::kTol);
    CHECK(t.amplitude({"heads", "up"}) == Complex(0.0, 0.0));
}

TEST_CASE("tensor norm is the product of norms") {
    wigner::RngStream rng(11, 0, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const Ket a = random_unit(kLbar, rng);
        const Ket b = random_unit(kL, rng);
        CHECK(std::abs(tensor(a, b).norm() - a.norm() * b.norm()) < 1e-12);
    }
}

TEST_CASE("tensor rejects overlapping subsystems") {
    CHECK_THROWS_AS(tensor(init_r(), init_r()), sv::SpaceMismatchError);
}

TEST_CASE("inner products read off defining amplitudes") {
    CHECK(std::abs(inner(okbar(), Ket::basis_vector({kLbar}, {"hbar"})).real() -
                   kS12) < sv::kTol);
    CHECK(std::abs(inner(ok_l(), fails_l())) < sv::kTol);
    CHECK(std::abs(inner(row4(), row4()).real() - 1.0) < 1e-12);
}

TEST_CASE("inner rejects mismatched spaces") {
    CHECK_THROWS_AS(inner(init_r(), okbar()), sv::SpaceMismatchError);
}

TEST_CASE("born probability on the pre-announcement state") {
    const Ket psi = row4();

    SUBCASE("announced pair (okbar, ok) carries weight 1/12") {
        const Projector p(tensor(okbar(), ok_l()));
        CHECK(std::abs(born_probability(psi, p) - 1.0 / 12.0) < 1e-12);
    }
    SUBCASE("identity projector gives 1") {
        CHECK(std::abs(born_probability(psi, Projector::identity({kLbar, kL})) -
                       1.0) < 1e-12);
    }
    SUBCASE("projector onto the minus record gives 2/3") {
        const Projector p(Ket::basis_vector({kL}, {"minus"}));
        CHECK(std::abs(born_probability(psi, p) - 2.0 / 3.0) < 1e-12);
    }
    SUBCASE("unnormalized states are rejected without the explicit flag") {
        const Ket half = psi.scaled(0.5);
        const Projector p(Ket::basis_vector({kL}, {"minus"}));
        CHECK_THROWS_AS(born_probability(half, p), sv::NormalizationError);
        CHECK(std::abs(sv::born_probability_unnormalized(half, p) -
                       0.25 * 2.0 / 3.0) < 1e-12);
    }
}

TEST_CASE("collapse onto the announced branches") {
    const Ket psi = row4();

    SUBCASE("okbar branch is |okbar,plus> with probability 1/6") {
        const auto c = collapse(psi, Projector(okbar()));
        CHECK(std::abs(c.probability - 1.0 / 6.0) < 1e-12);
        const Ket expect = tensor(okbar(), Ket::basis_vector({kL}, {"plus"}));
        CHECK(fidelity(c.state, expect) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("failsbar branch carries sqrt(4/5), sqrt(1/5) records") {
        const auto c = collapse(psi, Projector(failsbar()));
        CHECK(std::abs(c.probability - 5.0 / 6.0) < 1e-12);
        const Ket expect =
            sv::normalized(sv::add(tensor(failsbar(), Ket::basis_vector({kL}, {"minus"}))
                                       .scaled(std::sqrt(4.0 / 5.0)),
                                   tensor(failsbar(), Ket::basis_vector({kL}, {"plus"}))
                                       .scaled(std::sqrt(1.0 / 5.0))));
        CHECK(fidelity(c.state, expect) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("collapse of an eigenstate returns the state with probability 1") {
        const Ket eigen = tensor(okbar(), Ket::basis_vector({kL}, {"plus"}));
        const auto c = collapse(eigen, Projector(okbar()));
        CHECK(c.probability == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sv::equal_up_to_phase(c.state, eigen, 1e-12));
    }
    SUBCASE("re-collapsing with the same projector returns probability 1") {
        const auto c = collapse(psi, Projector(okbar()));
        const auto c2 = collapse(c.state, Projector(okbar()));
        CHECK(c2.probability == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero-probability branches raise the impossible-branch error") {
        const Ket eigen = tensor(okbar(), Ket::basis_vector({kL}, {"plus"}));
        CHECK_THROWS_AS(collapse(eigen, Projector(failsbar())),
                        sv::ImpossibleBranchError);
    }
}

TEST_CASE("projector validation") {
    CHECK_THROWS_AS(Projector({okbar(), okbar()}), sv::InvalidStateError);
    // Orthonormal pair passes and acts idempotently.
    const Projector p({okbar(), failsbar()});
    const Ket psi = row4();
    const auto once = collapse(psi, p);
    const auto twice = collapse(once.state, p);
    CHECK(twice.probability == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sample_measurement") {
    const sv::MeasurementBasis r_basis{
        {kR},
        {{"heads", Ket::basis_vector({kR}, {"heads"})},
         {"tails", Ket::basis_vector({kR}, {"tails"})}}};

    SUBCASE("same seed, same outcome") {
        wigner::RngStream a(123, 0, 0), b(123, 0, 0);
        const auto sa = sample_measurement(init_r(), r_basis, a);
        const auto sb = sample_measurement(init_r(), r_basis, b);
        CHECK(sa.outcome.name == sb.outcome.name);
    }
    SUBCASE("frequencies follow the Born rule over 1e6 draws") {
        std::uint64_t heads = 0;
        const std::uint64_t n = 1000000;
        for (std::uint64_t i = 0; i < n; ++i) {
            wigner::RngStream rng(2024, 0, i);
            if (sample_measurement(init_r(), r_basis, rng).outcome.name == "heads")
                ++heads;
        }
        const double p = 1.0 / 3.0;
        const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
        CHECK(std::abs(static_cast<double>(heads) / static_cast<double>(n) - p) <
              4 * se);
    }
    SUBCASE("eigenstates sample their own label") {
        wigner::RngStream rng(9, 0, 0);
        const auto s =
            sample_measurement(Ket::basis_vector({kR}, {"tails"}), r_basis, rng);
        CHECK(s.outcome.name == "tails");
    }
    SUBCASE("incomplete bases are rejected") {
        sv::MeasurementBasis incomplete{
            {kR}, {{"heads", Ket::basis_vector({kR}, {"heads"})}}};
        wigner::RngStream rng(1, 0, 0);
        CHECK_THROWS_AS(sample_measurement(init_r(), incomplete, rng),
                        sv::IncompleteBasisError);
    }
}

TEST_CASE("mix") {
    SUBCASE("equal mixture of okbar/failsbar is diagonal 1/2,1/2") {
        const auto rho = sv::mix({{0.5, okbar()}, {0.5, failsbar()}});
        const auto m = rho.matrix_in_basis({okbar(), failsbar()});
        CHECK(std::abs(m[0][0].real() - 0.5) < 1e-12);
        CHECK(std::abs(m[1][1].real() - 0.5) < 1e-12);
        CHECK(std::abs(m[0][1]) < 1e-12);
    }
    SUBCASE("pure-state mixture has eigenvalues {1,0}") {
        const auto rho = sv::mix({{1.0, okbar()}});
        // Purity tr(rho^2) = 1 distinguishes {1,0} from anything mixed.
        double purity = 0.0;
        for (std::size_t i = 0; i < rho.dim(); ++i)
            for (std::size_t j = 0; j < rho.dim(); ++j)
                purity += std::norm(rho.entry(i, j));
        CHECK(purity == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("record mixture equals outcome mixture entrywise") {
        const auto a = sv::mix({{0.5, Ket::basis_vector({kLbar}, {"hbar"})},
                                {0.5, Ket::basis_vector({kLbar}, {"tbar"})}});
        const auto b = sv::mix({{0.5, okbar()}, {0.5, failsbar()}});
        CHECK(approx_equal(a, b, 1e-12));
    }
    SUBCASE("probability sums off by more than 1e-9 are rejected") {
        CHECK_THROWS_AS(sv::mix({{0.6, okbar()}, {0.5, failsbar()}}),
                        sv::InvalidStateError);
    }
    SUBCASE("expectation matches the branch-weighted Born average") {
        const auto rho = sv::mix({{1.0 / 6.0, okbar()}, {5.0 / 6.0, failsbar()}});
        const Projector p(Ket::basis_vector({kLbar}, {"hbar"}));
        const double direct = rho.expectation(p);
        const double averaged = 1.0 / 6.0 * born_probability(okbar(), p) +
                                5.0 / 6.0 * born_probability(failsbar(), p);
        CHECK(std::abs(direct - averaged) < 1e-12);
    }
}

TEST_CASE("relabel is an isometry") {
    wigner::RngStream rng(77, 0, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const Ket a = random_unit(kR, rng);
        const Ket b = random_unit(kR, rng);
        const Ket ra = relabel(a, "R", kLbar, {{"heads", "hbar"}, {"tails", "tbar"}});
        const Ket rb = relabel(b, "R", kLbar, {{"heads", "hbar"}, {"tails", "tbar"}});
        CHECK(std::abs(inner(a, b) - inner(ra, rb)) < 1e-12);
    }
}

TEST_CASE("completeness: outcome probabilities sum to 1") {
    const sv::MeasurementBasis wbar_basis{
        {kLbar}, {{"okbar", okbar()}, {"failsbar", failsbar()}}};
    wigner::RngStream rng(5, 0, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const Ket psi = random_unit(kLbar, rng);
        double total = 0.0;
        for (const auto& [label, ket] : wbar_basis.outcomes)
            total += born_probability(psi, Projector(ket));
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("states equal up to a global phase compare equal") {
    const Ket a = okbar();
    const Ket b = a.scaled(Complex(std::cos(1.0), std::sin(1.0)));
    const Ket b_unit = sv::normalized(b);
    CHECK(sv::equal_up_to_phase(a, b_unit, 1e-12));
    CHECK_FALSE(sv::equal_up_to_phase(a, failsbar(), 1e-9));
}
