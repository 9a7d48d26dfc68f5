"""Parameter records, unit conventions, and validation shared by all solvers.

Units: hbar = k_B = 1. The left-cavity frequency (two-cavity system) or the
common cavity frequency (array) is the reference; every other quantity is
naturally entered as a ratio against it. Reservoirs are specified by their
mean photon number directly; temperature entry is a convenience routed
through :func:`bose_occupation`.

All records are frozen dataclasses: immutable after construction, safe to
share across threads and reuse across parameter grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = [
    "ValidationError",
    "SolverError",
    "bose_occupation",
    "ReservoirSpec",
    "AtomSpec",
    "TwoCavitySystem",
    "ArraySystem",
    "validation_errors",
    "validate",
]


class ValidationError(ValueError):
    """A system violated one or more invariants; carries the full list."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SolverError(RuntimeError):
    """A steady-state solve failed (singular generator or residual breach)."""


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean thermal photon number 1/(exp(omega/T) - 1); zero at T = 0."""
    if omega <= 0:
        raise ValueError(f"frequency must be positive, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be non-negative, got {temperature}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > 700.0:
        # occupation underflows double precision well before exp overflows
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class ReservoirSpec:
    """Thermal reservoir attached to one boundary cavity."""

    rate: float  # coupling rate Gamma, in units of the reference frequency
    mean_occupation: float  # nbar >= 0

    @classmethod
    def from_temperature(cls, rate: float, frequency: float, temperature: float) -> "ReservoirSpec":
        return cls(rate=rate, mean_occupation=bose_occupation(frequency, temperature))


@dataclass(frozen=True)
class AtomSpec:
    """Two-level atom dispersively coupled to its host cavity.

    The dispersive interaction shifts the host cavity frequency by
    +/- dispersive_strength depending on the atomic state and conserves the
    atomic population, so sigma_z acts as an external dial in [-1, 1]. The
    two switch settings of interest are exactly +1 (excited) and -1 (ground).
    """

    dispersive_strength: float  # chi >= 0
    sigma_z: float  # population inversion expectation value
    host_index: int = 2  # 1-based site index; the right cavity of a pair
    transition_frequency: float = 0.0  # additive constant per sector; no effect on currents


@dataclass(frozen=True)
class TwoCavitySystem:
    """Two linearly coupled cavities, each damped by its own reservoir."""

    omega_left: float
    omega_right: float
    coupling: float  # photon hopping J
    left: ReservoirSpec
    right: ReservoirSpec
    atom: AtomSpec | None = None  # hosted by the right cavity when present

    @property
    def gamma(self) -> float:
        """Mean damping rate (Gamma_L + Gamma_R) / 2."""
        return 0.5 * (self.left.rate + self.right.rate)

    @property
    def detuning(self) -> float:
        """Bare cavity detuning omega_left - omega_right."""
        return self.omega_left - self.omega_right

    @property
    def chi(self) -> float:
        return self.atom.dispersive_strength if self.atom is not None else 0.0

    @property
    def sigma_z(self) -> float:
        return self.atom.sigma_z if self.atom is not None else 0.0


@dataclass(frozen=True)
class ArraySystem:
    """Uniform chain of cavities; reservoirs drive sites 1 and N only."""

    n_sites: int
    omega: float
    coupling: float
    left: ReservoirSpec
    right: ReservoirSpec
    atom: AtomSpec | None = None

    @property
    def chi(self) -> float:
        return self.atom.dispersive_strength if self.atom is not None else 0.0

    @property
    def sigma_z(self) -> float:
        return self.atom.sigma_z if self.atom is not None else 0.0


def _reservoir_errors(res: ReservoirSpec, name: str) -> list[str]:
    errs = []
    if not res.rate > 0:
        errs.append(f"{name} reservoir: rate must be positive (got {res.rate})")
    if res.mean_occupation < 0:
        errs.append(f"{name} reservoir: mean occupation must be non-negative (got {res.mean_occupation})")
    return errs


def _atom_errors(atom: AtomSpec, n_sites: int) -> list[str]:
    errs = []
    if atom.dispersive_strength < 0:
        errs.append(f"atom: dispersive strength must be non-negative (got {atom.dispersive_strength})")
    if not -1.0 <= atom.sigma_z <= 1.0:
        errs.append(f"atom: sigma_z expectation must lie in [-1, 1] (got {atom.sigma_z})")
    if not 1 <= atom.host_index <= n_sites:
        errs.append(f"atom: host cavity index must lie in [1, {n_sites}] (got {atom.host_index})")
    return errs


def validation_errors(system: Union[TwoCavitySystem, ArraySystem]) -> list[str]:
    """Collect every invariant violation; empty list means the system is valid."""
    errs: list[str] = []
    if isinstance(system, TwoCavitySystem):
        if not system.omega_left > 0:
            errs.append(f"omega_left: frequency must be positive (got {system.omega_left})")
        if not system.omega_right > 0:
            errs.append(f"omega_right: frequency must be positive (got {system.omega_right})")
        if system.coupling < 0:
            errs.append(f"coupling: must be non-negative (got {system.coupling})")
        errs += _reservoir_errors(system.left, "left")
        errs += _reservoir_errors(system.right, "right")
        if system.atom is not None:
            errs += _atom_errors(system.atom, 2)
            if system.atom.host_index != 2:
                errs.append("atom: the two-cavity system hosts the atom in the right cavity (index 2)")
    elif isinstance(system, ArraySystem):
        if system.n_sites < 2:
            errs.append(f"n_sites: need at least 2 cavities (got {system.n_sites})")
        if not system.omega > 0:
            errs.append(f"omega: frequency must be positive (got {system.omega})")
        if system.coupling < 0:
            errs.append(f"coupling: must be non-negative (got {system.coupling})")
        errs += _reservoir_errors(system.left, "left")
        errs += _reservoir_errors(system.right, "right")
        if system.atom is not None:
            errs += _atom_errors(system.atom, system.n_sites)
    else:
        errs.append(f"unsupported system type {type(system).__name__}")
    return errs


def validate(system: Union[TwoCavitySystem, ArraySystem]):
    """Return the system unchanged, or raise ValidationError listing every violation."""
    errs = validation_errors(system)
    if errs:
        raise ValidationError(errs)
    return system
