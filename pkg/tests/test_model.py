import math

import numpy as np
import pytest

from cavityheat.model import (
    ArraySystem,
    AtomSpec,
    ReservoirSpec,
    TwoCavitySystem,
    ValidationError,
    bose_occupation,
    validate,
    validation_errors,
)


def two_cavity(**overrides):
    base = dict(
        omega_left=1.0,
        omega_right=1.0,
        coupling=0.02,
        left=ReservoirSpec(rate=0.064, mean_occupation=0.5),
        right=ReservoirSpec(rate=0.064, mean_occupation=0.0),
        atom=AtomSpec(dispersive_strength=0.05, sigma_z=1.0),
    )
    base.update(overrides)
    return TwoCavitySystem(**base)


def test_bose_occupation_zero_temperature():
    assert bose_occupation(1.0, 0.0) == 0.0


def test_bose_occupation_ln2_ratio():
    # exp(ln 2) - 1 = 1
    assert bose_occupation(math.log(2.0), 1.0) == pytest.approx(1.0, rel=1e-14)


def test_bose_occupation_unit_point():
    assert bose_occupation(1.0, 1.0) == pytest.approx(1.0 / (math.e - 1.0), rel=1e-14)


def test_bose_occupation_rejects_bad_inputs():
    with pytest.raises(ValueError):
        bose_occupation(0.0, 1.0)
    with pytest.raises(ValueError):
        bose_occupation(-1.0, 1.0)
    with pytest.raises(ValueError):
        bose_occupation(1.0, -0.5)


def test_bose_occupation_extreme_ratio_underflows_to_zero():
    assert bose_occupation(1.0, 1e-4) == 0.0


def test_bose_occupation_monotonic_in_temperature_and_frequency():
    temps = np.linspace(0.05, 5.0, 40)
    occ_t = [bose_occupation(1.0, t) for t in temps]
    assert all(b > a for a, b in zip(occ_t, occ_t[1:]))
    freqs = np.linspace(0.2, 5.0, 40)
    occ_w = [bose_occupation(w, 1.0) for w in freqs]
    assert all(b < a for a, b in zip(occ_w, occ_w[1:]))


def test_reservoir_from_temperature():
    res = ReservoirSpec.from_temperature(rate=0.1, frequency=1.0, temperature=1.0)
    assert res.mean_occupation == pytest.approx(1.0 / (math.e - 1.0), rel=1e-14)


def test_negative_rate_rejected():
    system = two_cavity(left=ReservoirSpec(rate=-0.1, mean_occupation=0.5))
    with pytest.raises(ValidationError) as err:
        validate(system)
    assert any("rate must be positive" in msg for msg in err.value.errors)


def test_negative_dispersive_strength_rejected():
    system = two_cavity(atom=AtomSpec(dispersive_strength=-0.2, sigma_z=1.0))
    with pytest.raises(ValidationError) as err:
        validate(system)
    assert any("dispersive strength must be non-negative" in msg for msg in err.value.errors)


def test_reference_parameter_set_accepted():
    # J/omega = 0.02, chi/omega = 0.05 with matched reservoirs
    assert validate(two_cavity()) is not None


def test_all_violations_reported_together():
    system = two_cavity(
        omega_left=-1.0,
        coupling=-0.5,
        left=ReservoirSpec(rate=-0.1, mean_occupation=-0.2),
        atom=AtomSpec(dispersive_strength=-0.1, sigma_z=2.0),
    )
    errors = validation_errors(system)
    assert len(errors) == 6


def test_sigma_z_out_of_range_rejected():
    errors = validation_errors(two_cavity(atom=AtomSpec(dispersive_strength=0.1, sigma_z=-1.5)))
    assert any("sigma_z" in msg for msg in errors)


def test_two_cavity_atom_must_sit_in_right_cavity():
    errors = validation_errors(two_cavity(atom=AtomSpec(dispersive_strength=0.1, sigma_z=1.0, host_index=1)))
    assert any("right cavity" in msg for msg in errors)


def test_array_host_site_bounds():
    def array_with_host(m):
        return ArraySystem(
            n_sites=4,
            omega=1.0,
            coupling=0.05,
            left=ReservoirSpec(0.15, 0.5),
            right=ReservoirSpec(0.15, 0.0),
            atom=AtomSpec(dispersive_strength=0.1, sigma_z=-1.0, host_index=m),
        )

    assert validation_errors(array_with_host(4)) == []
    assert any("host cavity index" in msg for msg in validation_errors(array_with_host(5)))
    assert any("host cavity index" in msg for msg in validation_errors(array_with_host(0)))


def test_array_needs_two_sites():
    system = ArraySystem(
        n_sites=1, omega=1.0, coupling=0.05, left=ReservoirSpec(0.1, 0.1), right=ReservoirSpec(0.1, 0.0)
    )
    assert any("at least 2" in msg for msg in validation_errors(system))


def test_derived_quantities():
    system = two_cavity(omega_right=0.8, left=ReservoirSpec(0.1, 0.5), right=ReservoirSpec(0.03, 0.0))
    assert system.gamma == pytest.approx(0.065)
    assert system.detuning == pytest.approx(0.2)
    assert system.gamma > 0


def test_records_are_immutable():
    system = two_cavity()
    with pytest.raises(AttributeError):
        system.coupling = 0.1
    with pytest.raises(AttributeError):
        system.left.rate = 0.2
