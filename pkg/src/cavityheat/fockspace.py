"""Brute-force verification path on a truncated Fock space.

Builds the full Lindblad generator for the two-cavity system (with the atom
tensored in when present), finds the steady density matrix, and evaluates
currents and state diagnostics directly on it. The machinery here is kept
independent of the moment-equation solvers so the two paths cross-validate:
they must agree up to Fock truncation error only.

Because the atomic population is conserved, the unrestricted generator has
one steady state per atomic sector. The solver therefore fixes the sector up
front: a definite atomic state selects one sector, and an intermediate
sigma_z is handled as the matching convex mixture of the two sector steady
states. Hilbert-space layout is left mode (x) right mode (x) atom, with the
atom basis ordered (excited, ground).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .closedform import CurrentReport, _classification
from .model import SolverError, TwoCavitySystem, validate

__all__ = [
    "FockConfig",
    "FockOperators",
    "DensityMatrix",
    "gibbs_tail_mass",
    "thermal_state",
    "fock_operators",
    "build_liouvillian",
    "steady_rho",
    "converged_steady_rho",
    "oracle_currents",
    "thermal_fidelity",
    "g2_zero",
]

STEADY_RESIDUAL_TOL = 1e-10
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-8


@dataclass(frozen=True)
class FockConfig:
    """Truncation controls for the oracle.

    ``tail_bound`` caps the Gibbs weight beyond the truncation at the hotter
    reservoir occupation, so the cut cannot silently bias the steady state.
    ``max_vectorized_dim`` guards against accidentally vectorising a huge
    superoperator; raise it deliberately for large truncations.
    """

    n_max: int = 12
    tail_bound: float = 1e-8
    max_vectorized_dim: int = 200_000

    @property
    def levels(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class FockOperators:
    """Sparse operators on the truncated Hilbert space."""

    a_left: sp.csr_matrix
    a_right: sp.csr_matrix
    hamiltonian: sp.csr_matrix
    sigma_z: sp.csr_matrix | None  # None when the system has no atom
    dim: int
    includes_atom: bool


@dataclass(frozen=True)
class DensityMatrix:
    """Steady density matrix on the truncated space.

    ``includes_atom`` records whether the atom factor is part of the matrix;
    ``residual`` is the norm of the generator applied to the state, combined
    over atomic sectors.
    """

    matrix: np.ndarray
    n_max: int
    includes_atom: bool
    residual: float = 0.0

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def reduced_left(self) -> np.ndarray:
        """Single-mode state of the left cavity."""
        d1 = self.n_max + 1
        if self.includes_atom:
            t = self.matrix.reshape(d1, d1, 2, d1, d1, 2)
            return np.einsum("ijkljk->il", t)
        t = self.matrix.reshape(d1, d1, d1, d1)
        return np.einsum("ijlj->il", t)

    def reduced_right(self) -> np.ndarray:
        """Single-mode state of the right cavity."""
        d1 = self.n_max + 1
        if self.includes_atom:
            t = self.matrix.reshape(d1, d1, 2, d1, d1, 2)
            return np.einsum("ijkimk->jm", t)
        t = self.matrix.reshape(d1, d1, d1, d1)
        return np.einsum("ijim->jm", t)

    def sigma_z_expectation(self) -> float:
        if not self.includes_atom:
            raise ValueError("state carries no atom factor")
        d1 = self.n_max + 1
        t = self.matrix.reshape(d1, d1, 2, d1, d1, 2)
        atom = np.einsum("ijkijm->km", t)
        return float((atom[0, 0] - atom[1, 1]).real)


def gibbs_tail_mass(n_max: int, nbar: float) -> float:
    """Thermal weight beyond the truncation, q**(n_max + 1) with q = nbar/(1 + nbar)."""
    if nbar <= 0:
        return 0.0
    q = nbar / (1.0 + nbar)
    return q ** (n_max + 1)


def thermal_state(n_levels: int, nbar: float) -> np.ndarray:
    """Truncated single-mode Gibbs state, renormalised on the kept levels."""
    if nbar < 0:
        raise ValueError(f"mean occupation must be non-negative, got {nbar}")
    if nbar == 0:
        rho = np.zeros((n_levels, n_levels))
        rho[0, 0] = 1.0
        return rho
    q = nbar / (1.0 + nbar)
    weights = q ** np.arange(n_levels)
    weights /= weights.sum()
    return np.diag(weights)


def _check_config(system: TwoCavitySystem, cfg: FockConfig) -> None:
    if cfg.n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {cfg.n_max}")
    hot = max(system.left.mean_occupation, system.right.mean_occupation)
    tail = gibbs_tail_mass(cfg.n_max, hot)
    if tail > cfg.tail_bound:
        raise ValueError(
            f"Gibbs tail mass {tail:.3e} beyond n_max={cfg.n_max} at nbar={hot} "
            f"exceeds the bound {cfg.tail_bound:.1e}; raise n_max or the bound"
        )


def _guard_dim(dim: int, cfg: FockConfig) -> None:
    if dim * dim > cfg.max_vectorized_dim:
        raise ValueError(
            f"vectorised space dimension {dim * dim} exceeds the guard "
            f"{cfg.max_vectorized_dim}; raise max_vectorized_dim to override"
        )


def _destroy(n_levels: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_levels)), 1, format="csr")


def fock_operators(system: TwoCavitySystem, cfg: FockConfig) -> FockOperators:
    """Mode and atom operators plus the full Hamiltonian on the truncated space."""
    validate(system)
    d1 = cfg.levels
    a = _destroy(d1)
    eye1 = sp.identity(d1, format="csr")
    if system.atom is not None:
        eye_atom = sp.identity(2, format="csr")
        a_left = sp.kron(sp.kron(a, eye1), eye_atom, format="csr")
        a_right = sp.kron(sp.kron(eye1, a), eye_atom, format="csr")
        sz_atom = sp.diags([1.0, -1.0], format="csr")
        excited = sp.diags([1.0, 0.0], format="csr")
        eye_field = sp.identity(d1 * d1, format="csr")
        sigma_z = sp.kron(eye_field, sz_atom, format="csr")
        proj_excited = sp.kron(eye_field, excited, format="csr")
        dim = 2 * d1 * d1
    else:
        a_left = sp.kron(a, eye1, format="csr")
        a_right = sp.kron(eye1, a, format="csr")
        sigma_z = None
        proj_excited = None
        dim = d1 * d1

    n_left = (a_left.conj().T @ a_left).tocsr()
    n_right = (a_right.conj().T @ a_right).tocsr()
    h = (
        system.omega_left * n_left
        + system.omega_right * n_right
        + system.coupling * (a_left.conj().T @ a_right + a_left @ a_right.conj().T)
    )
    if system.atom is not None:
        atom = system.atom
        h = h + 0.5 * atom.transition_frequency * sigma_z
        h = h + atom.dispersive_strength * (proj_excited + n_right @ sigma_z)
    return FockOperators(
        a_left=a_left,
        a_right=a_right,
        hamiltonian=h.tocsr(),
        sigma_z=sigma_z,
        dim=dim,
        includes_atom=system.atom is not None,
    )


def _collapse_channels(system: TwoCavitySystem, ops: FockOperators):
    """(operator, rate) pairs of the two thermal reservoirs."""
    channels = []
    for a_op, res in ((ops.a_left, system.left), (ops.a_right, system.right)):
        channels.append((a_op, res.rate * (res.mean_occupation + 1.0)))
        channels.append((a_op.conj().T.tocsr(), res.rate * res.mean_occupation))
    return channels


def _liouvillian_from(h: sp.spmatrix, channels) -> sp.csr_matrix:
    """Generator acting on row-major vectorised density matrices."""
    dim = h.shape[0]
    eye = sp.identity(dim, format="csr")
    gen = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    for c_op, rate in channels:
        if rate == 0.0:
            continue
        c = np.sqrt(rate) * c_op
        cdc = (c.conj().T @ c).tocsr()
        gen = gen + sp.kron(c, c.conj()) - 0.5 * (sp.kron(cdc, eye) + sp.kron(eye, cdc.T))
    return gen.tocsr()


def build_liouvillian(system: TwoCavitySystem, cfg: FockConfig) -> sp.csr_matrix:
    """Full Lindblad generator on the vectorised truncated space."""
    validate(system)
    _check_config(system, cfg)
    ops = fock_operators(system, cfg)
    _guard_dim(ops.dim, cfg)
    return _liouvillian_from(ops.hamiltonian, _collapse_channels(system, ops))


def _field_ops(levels: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    a = _destroy(levels)
    eye1 = sp.identity(levels, format="csr")
    return sp.kron(a, eye1, format="csr"), sp.kron(eye1, a, format="csr")


def _sector_hamiltonian(system: TwoCavitySystem, cfg: FockConfig, sector: float | None) -> sp.csr_matrix:
    """Field Hamiltonian of one atomic sector.

    The dispersive pull shifts the right-cavity frequency by sector * chi;
    the shifted frequency may legitimately be negative when chi exceeds
    omega_right. Sector-constant terms drop out of the generator and of the
    dissipator traces, so they are omitted.
    """
    a_left, a_right = _field_ops(cfg.levels)
    shift = system.chi * sector if sector is not None else 0.0
    h = (
        system.omega_left * (a_left.conj().T @ a_left)
        + (system.omega_right + shift) * (a_right.conj().T @ a_right)
        + system.coupling * (a_left.conj().T @ a_right + a_left @ a_right.conj().T)
    )
    return h.tocsr()


def _null_state(gen: sp.csr_matrix, dim: int) -> np.ndarray:
    """Trace-one solution of gen(vec rho) = 0.

    The generator conserves the ket-minus-bra excitation difference of the
    two modes, and the steady state lives in the zero-difference block, so
    the solve is restricted there; the returned state is still verified
    against the unreduced generator by the caller.
    """
    d1 = int(round(np.sqrt(dim)))
    total = (np.arange(dim) // d1) + (np.arange(dim) % d1)
    ket, bra = np.meshgrid(total, total, indexing="ij")
    keep = np.nonzero((ket - bra).reshape(-1) == 0)[0]
    reduced = gen[keep][:, keep].tocsr()

    weight = float(np.abs(gen.diagonal()).mean()) or 1.0
    diag_positions = np.arange(dim) * dim + np.arange(dim)
    trace_cols = np.searchsorted(keep, diag_positions)
    n_red = keep.size
    trace_row = sp.csr_matrix(
        (np.full(dim, weight), (np.zeros(dim, dtype=int), trace_cols)), shape=(n_red, n_red)
    )
    rhs = np.zeros(n_red, dtype=complex)
    rhs[0] = weight
    try:
        solution = spla.spsolve((reduced + trace_row).tocsc(), rhs)
    except RuntimeError as exc:
        raise SolverError(f"no unique steady state: {exc}") from exc
    if not np.all(np.isfinite(solution)):
        raise SolverError("no unique steady state: singular generator block")

    full = np.zeros(dim * dim, dtype=complex)
    full[keep] = solution
    rho = full.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    if abs(trace) < 1e-300:
        raise SolverError("no unique steady state: traceless null vector")
    return rho / trace


def _sector_steady(system: TwoCavitySystem, cfg: FockConfig, sector: float | None):
    dim = cfg.levels**2
    _guard_dim(dim, cfg)
    a_left, a_right = _field_ops(cfg.levels)
    channels = []
    for a_op, res in ((a_left, system.left), (a_right, system.right)):
        channels.append((a_op, res.rate * (res.mean_occupation + 1.0)))
        channels.append((a_op.conj().T.tocsr(), res.rate * res.mean_occupation))
    gen = _liouvillian_from(_sector_hamiltonian(system, cfg, sector), channels)
    rho = _null_state(gen, dim)
    residual = float(np.linalg.norm(gen @ rho.reshape(-1)))
    if residual > STEADY_RESIDUAL_TOL:
        raise SolverError(f"steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL}")
    return rho, residual


def _validate_state(rho: np.ndarray) -> None:
    hermiticity = np.linalg.norm(rho - rho.conj().T)
    if hermiticity > HERMITICITY_TOL:
        raise SolverError(f"steady state is not Hermitian (deviation {hermiticity:.3e})")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > TRACE_TOL:
        raise SolverError(f"steady state trace deviates from one by {abs(trace - 1.0):.3e}")
    smallest = float(np.linalg.eigvalsh(rho)[0])
    if smallest < EIGENVALUE_FLOOR:
        raise SolverError(f"steady state has negative eigenvalue {smallest:.3e}")


def steady_rho(system: TwoCavitySystem, cfg: FockConfig | None = None) -> DensityMatrix:
    """Steady density matrix at the configured truncation.

    With an atom, a definite atomic state (sigma_z = +-1) selects its sector
    directly; an intermediate sigma_z solves both sectors and mixes them with
    the matching populations.
    """
    cfg = cfg or FockConfig()
    validate(system)
    _check_config(system, cfg)
    if system.atom is None:
        rho, residual = _sector_steady(system, cfg, None)
        out = DensityMatrix(matrix=rho, n_max=cfg.n_max, includes_atom=False, residual=residual)
        _validate_state(out.matrix)
        return out

    sz = system.sigma_z
    p_excited = 0.5 * (1.0 + sz)
    parts = []
    if p_excited > 0.0:
        parts.append((p_excited, np.diag([1.0, 0.0]), _sector_steady(system, cfg, +1.0)))
    if p_excited < 1.0:
        parts.append((1.0 - p_excited, np.diag([0.0, 1.0]), _sector_steady(system, cfg, -1.0)))
    d1 = cfg.levels
    full = np.zeros((2 * d1 * d1, 2 * d1 * d1), dtype=complex)
    residual_sq = 0.0
    for prob, projector, (rho_sector, res) in parts:
        full += prob * np.kron(rho_sector, projector)
        residual_sq += (prob * res) ** 2
    out = DensityMatrix(
        matrix=full, n_max=cfg.n_max, includes_atom=True, residual=float(np.sqrt(residual_sq))
    )
    _validate_state(out.matrix)
    return out


def converged_steady_rho(
    system: TwoCavitySystem,
    cfg: FockConfig | None = None,
    occupation_tol: float = 1e-8,
    step: int = 2,
) -> tuple[DensityMatrix, FockConfig]:
    """Escalate the truncation until the steady occupations stop moving.

    Returns the converged state and the configuration that produced it.
    Raises SolverError when the dimension guard is hit before convergence.
    """
    cfg = cfg or FockConfig()
    previous = None
    current_cfg = cfg
    while True:
        state = steady_rho(system, current_cfg)
        occ = np.array(
            [
                np.trace(state.reduced_left() @ np.diag(np.arange(current_cfg.levels))).real,
                np.trace(state.reduced_right() @ np.diag(np.arange(current_cfg.levels))).real,
            ]
        )
        if previous is not None and np.max(np.abs(occ - previous)) < occupation_tol:
            return state, current_cfg
        previous = occ
        next_cfg = replace(current_cfg, n_max=current_cfg.n_max + step)
        field_dim = next_cfg.levels ** 2
        if field_dim * field_dim > next_cfg.max_vectorized_dim:
            raise SolverError(
                f"truncation escalation hit the dimension guard at n_max={next_cfg.n_max} "
                "before occupations converged"
            )
        current_cfg = next_cfg


def _dissipator(rho: np.ndarray, c: np.ndarray) -> np.ndarray:
    cd = c.conj().T
    cdc = cd @ c
    return c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)


def oracle_currents(system: TwoCavitySystem, rho: DensityMatrix) -> CurrentReport:
    """Boundary currents evaluated as traces of the Hamiltonian against each
    reservoir's dissipator."""
    validate(system)
    if rho.includes_atom != (system.atom is not None):
        raise ValueError("density matrix and system disagree about the atom factor")
    cfg = FockConfig(n_max=rho.n_max, tail_bound=np.inf)
    ops = fock_operators(system, cfg)
    h = ops.hamiltonian.toarray()
    mat = rho.matrix

    currents = []
    for a_op, res in ((ops.a_left, system.left), (ops.a_right, system.right)):
        a_dense = a_op.toarray()
        flow = res.rate * (res.mean_occupation + 1.0) * _dissipator(mat, a_dense)
        flow += res.rate * res.mean_occupation * _dissipator(mat, a_dense.conj().T)
        currents.append(float(np.trace(h @ flow).real))
    i_left, i_right = currents

    n_left_op = (ops.a_left.conj().T @ ops.a_left).toarray()
    coherence_op = (ops.a_left.conj().T @ ops.a_right).toarray()
    occ_left = float(np.trace(mat @ n_left_op).real)
    i_occ = (system.left.mean_occupation - occ_left) * system.omega_left
    i_coh = system.coupling * float(np.trace(mat @ coherence_op).real)

    imbalance = abs(i_left + i_right)
    if imbalance > max(1e-8 * abs(i_left), 1e-8 * system.omega_left**2):
        warnings.warn(
            f"boundary currents do not balance (|I_L + I_R| = {imbalance:.3e}); "
            "the density matrix is not steady",
            stacklevel=2,
        )
    alpha, regime = _classification(system, i_left)
    return CurrentReport(
        i_left=i_left,
        i_right=i_right,
        i_occupation=i_occ,
        i_coherence=i_coh,
        alpha=alpha,
        regime=regime,
    )


def thermal_fidelity(rho_mode: np.ndarray, nbar: float) -> float:
    """Uhlmann fidelity of a single-mode state against the truncated Gibbs
    state at the given occupation."""
    rho_mode = np.asarray(rho_mode)
    n_levels = rho_mode.shape[0]
    reference = thermal_state(n_levels, nbar)
    sqrt_ref = np.sqrt(np.diag(reference).real)
    inner = sqrt_ref[:, None] * rho_mode * sqrt_ref[None, :]
    eigenvalues = np.linalg.eigvalsh(inner)
    return float(np.sum(np.sqrt(np.clip(eigenvalues, 0.0, None))))


def g2_zero(rho_mode: np.ndarray) -> float:
    """Equal-time second-order correlation of a single-mode state."""
    rho_mode = np.asarray(rho_mode)
    populations = np.diag(rho_mode).real
    levels = np.arange(populations.size)
    mean = float(np.sum(levels * populations))
    if mean <= 0.0:
        raise ValueError("second-order correlation is undefined at zero mean occupation")
    pairs = float(np.sum(levels * (levels - 1) * populations))
    return pairs / mean**2
