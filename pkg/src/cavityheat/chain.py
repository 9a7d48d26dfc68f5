"""Steady state of an N-cavity chain via the block equation of motion.

The 2N x 2N matrix of expectation values G = <A+ A>, with operator row
A = (a_1, ..., a_N, a_1 sz, ..., a_N sz), evolves as

    dG/dt = i [M1, G] + {M2, G} + M3

with M1 collecting the chain Hamiltonian and the atom shift, M2 the boundary
damping, and M3 the thermal drive. The steady state solves the vectorised
linear system in the (2N)^2 entries of G; dense solves stay interactive for
N up to a few tens.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .model import ArraySystem, SolverError, validate

__all__ = [
    "BlockGenerators",
    "MomentMatrix",
    "SizeScanPoint",
    "build_generators",
    "steady_state_matrix",
    "steady_residual_matrix",
    "array_current",
    "right_boundary_current",
    "bond_flows",
    "occupation_profile",
    "ballistic_current",
    "size_scan",
]

RESIDUAL_TOL = 1e-10
HERMITICITY_TOL = 1e-10

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class BlockGenerators:
    """Coefficient matrices of the block equation of motion."""

    m1: np.ndarray  # Hermitian 2N x 2N: chain Hamiltonian + atom shift
    m2: np.ndarray  # diagonal, negative semidefinite: boundary damping
    m3: np.ndarray  # thermal drive
    h_c: np.ndarray  # N x N tridiagonal chain Hamiltonian
    x: np.ndarray  # N x N atom shift, single entry chi at the host site


@dataclass(frozen=True)
class MomentMatrix:
    """Steady expectation-value matrix <A+ A> of the chain.

    The top-left N x N block holds the field moments <a_j+ a_k> (site
    occupations on its diagonal); the off-diagonal blocks hold the
    sz-weighted moments <a_j+ a_k sz>.
    """

    values: np.ndarray  # 2N x 2N complex
    n_sites: int
    sigma_z: float = 0.0

    @property
    def field_block(self) -> np.ndarray:
        n = self.n_sites
        return self.values[:n, :n]

    @property
    def sz_block(self) -> np.ndarray:
        n = self.n_sites
        return self.values[:n, n:]

    @property
    def occupations(self) -> np.ndarray:
        return np.real(np.diag(self.field_block))


@dataclass(frozen=True)
class SizeScanPoint:
    n_sites: int
    current: float
    ratio: float  # against the atom-free ballistic current
    residual: float


def build_generators(system: ArraySystem) -> BlockGenerators:
    """Assemble M1, M2, M3 for a validated chain."""
    validate(system)
    n = system.n_sites
    h_c = system.omega * np.eye(n)
    off = np.full(n - 1, system.coupling)
    h_c += np.diag(off, 1) + np.diag(off, -1)
    x = np.zeros((n, n))
    if system.atom is not None:
        x[system.atom.host_index - 1, system.atom.host_index - 1] = system.chi

    damping = np.zeros(n)
    damping[0] = -0.5 * system.left.rate
    damping[-1] = -0.5 * system.right.rate
    drive = np.zeros(n)
    drive[0] = system.left.rate * system.left.mean_occupation
    drive[-1] = system.right.rate * system.right.mean_occupation

    eye2 = np.eye(2)
    m1 = np.kron(eye2, h_c) + np.kron(_SIGMA_X, x)
    m2 = np.kron(eye2, np.diag(damping))
    m3 = np.kron(eye2, np.diag(drive)) + np.kron(_SIGMA_X, np.diag(drive * system.sigma_z))
    return BlockGenerators(m1=m1, m2=m2, m3=m3, h_c=h_c, x=x)


def _motion(gen: BlockGenerators, g: np.ndarray) -> np.ndarray:
    return 1j * (gen.m1 @ g - g @ gen.m1) + gen.m2 @ g + g @ gen.m2 + gen.m3


def steady_state_matrix(system: ArraySystem) -> MomentMatrix:
    """Solve i [M1, G] + {M2, G} + M3 = 0 as a vectorised linear system."""
    gen = build_generators(system)
    d = 2 * system.n_sites
    eye = np.eye(d)
    # row-major vec(P G Q) = (P kron Q^T) vec(G); M1 is real symmetric and
    # M2 diagonal, so no transposes survive
    op = 1j * (np.kron(gen.m1, eye) - np.kron(eye, gen.m1)) + np.kron(gen.m2, eye) + np.kron(eye, gen.m2)
    try:
        vec = np.linalg.solve(op, -gen.m3.reshape(-1).astype(complex))
    except np.linalg.LinAlgError as exc:
        raise SolverError("no unique steady state: vectorised chain generator is singular") from exc
    g = vec.reshape(d, d)
    norm_drive = np.linalg.norm(gen.m3)
    if norm_drive > 0:
        residual = np.linalg.norm(_motion(gen, g)) / norm_drive
        if residual > RESIDUAL_TOL:
            raise SolverError(f"chain steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    hermiticity = np.linalg.norm(g - g.conj().T)
    if hermiticity > HERMITICITY_TOL * max(1.0, np.linalg.norm(g)):
        raise SolverError(f"steady matrix is not Hermitian (deviation {hermiticity:.3e})")
    return MomentMatrix(values=g, n_sites=system.n_sites, sigma_z=system.sigma_z)


def steady_residual_matrix(system: ArraySystem, g: MomentMatrix) -> float:
    """Relative Frobenius residual of a candidate steady matrix."""
    gen = build_generators(system)
    norm_drive = np.linalg.norm(gen.m3)
    res = np.linalg.norm(_motion(gen, g.values))
    return float(res / norm_drive) if norm_drive > 0 else float(res)


def array_current(system: ArraySystem, g: MomentMatrix) -> float:
    """Left-boundary current; the atom shift applies only when it sits on site 1."""
    validate(system)
    f = g.field_block
    shift = system.chi * system.sigma_z if (system.atom is not None and system.atom.host_index == 1) else 0.0
    occ_term = (system.left.mean_occupation - f[0, 0].real) * (system.omega + shift)
    coh_term = 0.5 * system.coupling * (f[0, 1] + np.conj(f[0, 1])).real
    return system.left.rate * (occ_term - coh_term)


def right_boundary_current(system: ArraySystem, g: MomentMatrix) -> float:
    """Mirror of the left-boundary expression at site N; balances array_current."""
    validate(system)
    n = system.n_sites
    f = g.field_block
    shift = system.chi * system.sigma_z if (system.atom is not None and system.atom.host_index == n) else 0.0
    occ_term = (system.right.mean_occupation - f[n - 1, n - 1].real) * (system.omega + shift)
    coh_term = 0.5 * system.coupling * (f[n - 1, n - 2] + np.conj(f[n - 1, n - 2])).real
    return system.right.rate * (occ_term - coh_term)


def bond_flows(system: ArraySystem, g: MomentMatrix) -> np.ndarray:
    """Photon flow across each bond, left to right; site-independent for a
    uniform atom-free chain in steady state."""
    f = g.field_block
    j = system.coupling
    return np.array([-2.0 * j * f[k, k + 1].imag for k in range(system.n_sites - 1)])


def occupation_profile(system: ArraySystem, g: MomentMatrix) -> np.ndarray:
    """Site occupations <n_j>, the chain's local-temperature profile."""
    validate(system)
    return g.occupations.copy()


def ballistic_current(system: ArraySystem) -> float:
    """Atom-free chain current; independent of the array size."""
    validate(system)
    gl, gr = system.left.rate, system.right.rate
    j, w = system.coupling, system.omega
    dn = system.left.mean_occupation - system.right.mean_occupation
    return 4.0 * w * j**2 * gl * gr * dn / ((4.0 * j**2 + gl * gr) * (gl + gr))


def size_scan(
    template: ArraySystem,
    n_values: Iterable[int] | Sequence[int],
    host: str = "last",
) -> list[SizeScanPoint]:
    """Solve the chain for each size and report the current against the
    atom-free baseline.

    ``host='last'`` re-pins the atom to the final cavity of each chain;
    ``host='fixed'`` keeps the template's host index.
    """
    if host not in ("last", "fixed"):
        raise ValueError(f"host rule must be 'last' or 'fixed', got {host!r}")
    baseline = ballistic_current(replace(template, atom=None))
    points = []
    for n in n_values:
        atom = template.atom
        if atom is not None and host == "last":
            atom = replace(atom, host_index=n)
        system = replace(template, n_sites=int(n), atom=atom)
        try:
            g = steady_state_matrix(system)
        except SolverError as exc:
            raise SolverError(f"chain solve failed at n_sites={n}: {exc}") from exc
        current = array_current(system, g)
        points.append(
            SizeScanPoint(
                n_sites=int(n),
                current=current,
                ratio=current / baseline if baseline != 0 else float("nan"),
                residual=steady_residual_matrix(system, g),
            )
        )
    return points
