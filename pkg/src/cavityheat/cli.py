"""Command-line front end: config ingestion, named sweep experiments, and
CSV/JSON emission.

Every physical quantity is entered as a ratio to the reference frequency
(the left-cavity frequency, or the common frequency of an array). Output
rows carry a fixed column set; quantities a given experiment does not
produce are emitted as empty fields so downstream parsing stays stable.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import chain, closedform, fockspace, moments
from .model import (
    ArraySystem,
    AtomSpec,
    ReservoirSpec,
    SolverError,
    TwoCavitySystem,
    ValidationError,
    bose_occupation,
    validate,
)

__all__ = ["SweepSpec", "CrosscheckReport", "run_experiment", "crosscheck", "main"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_IO = 4
EXIT_CROSSCHECK = 5

EXPERIMENTS = (
    "gamma_sweep",
    "chi_sweep",
    "current_decomposition",
    "rectification_sweep",
    "size_scan",
    "profile",
    "regime_table",
    "oracle_crosscheck",
)

COLUMNS = (
    "experiment",
    "value",
    "sigma_z",
    "path",
    "i_left",
    "i_right",
    "i_occupation",
    "i_coherence",
    "i_ratio",
    "alpha",
    "rectification",
    "regime",
    "site",
    "occupation",
    "residual",
)

_KNOWN_KEYS = {
    "omega_left",
    "omega_right",
    "omega",
    "coupling",
    "atom",
    "chi",
    "sigma_z",
    "gamma_left",
    "gamma_right",
    "nbar_left",
    "nbar_right",
    "temp_left",
    "temp_right",
    "sweep_start",
    "sweep_stop",
    "sweep_step",
    "n_sites",
    "n_start",
    "n_stop",
    "alpha_values",
    "fock_n_max",
    "fock_tail_bound",
    "fock_max_dim",
    "tol_closedform_moments",
    "tol_moments_fock",
}


class CrosscheckError(RuntimeError):
    """Cross-path deviation exceeded its threshold."""


@dataclass(frozen=True)
class SweepSpec:
    """A named experiment with its parameters and output destination."""

    experiment: str
    params: dict
    output: Path
    fmt: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(
                [f"config: unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}"]
            )
        if self.fmt not in ("csv", "json"):
            raise ValidationError([f"config: unknown output format {self.fmt!r}"])


@dataclass(frozen=True)
class CrosscheckReport:
    """Currents from the three computational paths and their pairwise deviations.

    The closed-form and moment paths must agree to solver precision; pairs
    involving the Fock oracle carry the (looser) truncation tolerance.
    """

    closedform_current: float
    moments_current: float
    fock_current: float
    deviation_closedform_moments: float
    deviation_moments_fock: float
    deviation_closedform_fock: float
    tolerance_closedform_moments: float
    tolerance_moments_fock: float

    @property
    def max_deviation(self) -> float:
        return max(
            self.deviation_closedform_moments,
            self.deviation_moments_fock,
            self.deviation_closedform_fock,
        )

    @property
    def passed(self) -> bool:
        return (
            self.deviation_closedform_moments <= self.tolerance_closedform_moments
            and self.deviation_moments_fock <= self.tolerance_moments_fock
            and self.deviation_closedform_fock <= self.tolerance_moments_fock
        )


class _Params:
    """Typed access to the flat key/value config with collected errors."""

    def __init__(self, raw: dict[str, str]):
        self.raw = dict(raw)
        self.errors: list[str] = []
        unknown = sorted(set(raw) - _KNOWN_KEYS)
        for key in unknown:
            self.errors.append(f"config: unknown key {key!r}")

    def _convert(self, key, caster, default, required, kind):
        text = self.raw.get(key)
        if text is None:
            if required:
                self.errors.append(f"config: missing required key {key!r}")
            return default
        try:
            return caster(text)
        except ValueError:
            self.errors.append(f"config: key {key!r} expects {kind}, got {text!r}")
            return default

    def float_(self, key, default=None, required=False):
        return self._convert(key, float, default, required, "a number")

    def int_(self, key, default=None, required=False):
        return self._convert(key, int, default, required, "an integer")

    def bool_(self, key, default=None, required=False):
        def cast(text):
            lowered = text.strip().lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(text)

        return self._convert(key, cast, default, required, "true/false")

    def float_list(self, key, default):
        def cast(text):
            return [float(part) for part in text.split(",") if part.strip()]

        return self._convert(key, cast, default, False, "a comma-separated number list")

    def has(self, key) -> bool:
        return key in self.raw

    def finish(self):
        if self.errors:
            raise ValidationError(self.errors)


def parse_config_file(path: Path) -> dict[str, str]:
    """Flat key = value lines; '#' starts a comment."""
    raw: dict[str, str] = {}
    errors: list[str] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"config: line {lineno} is not 'key = value': {line.strip()!r}")
            continue
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    if errors:
        raise ValidationError(errors)
    return raw


def _reservoir(p: _Params, side: str, frequency: float) -> ReservoirSpec:
    rate = p.float_(f"gamma_{side}", required=True)
    has_nbar = p.has(f"nbar_{side}")
    has_temp = p.has(f"temp_{side}")
    if has_nbar and has_temp:
        p.errors.append(f"config: give either nbar_{side} or temp_{side}, not both")
    occupation = 0.0
    if has_temp:
        temp = p.float_(f"temp_{side}")
        if temp is not None and frequency is not None and frequency > 0 and temp >= 0:
            occupation = bose_occupation(frequency, temp)
    else:
        occupation = p.float_(f"nbar_{side}", default=0.0)
    return ReservoirSpec(rate=rate if rate is not None else 0.0, mean_occupation=occupation)


def _atom(p: _Params) -> AtomSpec | None:
    present = p.bool_("atom", default=p.has("chi") or p.has("sigma_z"))
    if not present:
        return None
    chi = p.float_("chi", required=True)
    sigma_z = p.float_("sigma_z", required=True)
    return AtomSpec(
        dispersive_strength=chi if chi is not None else 0.0,
        sigma_z=sigma_z if sigma_z is not None else 0.0,
    )


def _two_cavity(p: _Params) -> TwoCavitySystem:
    omega_left = p.float_("omega_left", default=1.0)
    omega_right = p.float_("omega_right", default=omega_left)
    system = TwoCavitySystem(
        omega_left=omega_left,
        omega_right=omega_right,
        coupling=p.float_("coupling", required=True) or 0.0,
        left=_reservoir(p, "left", omega_left),
        right=_reservoir(p, "right", omega_right),
        atom=_atom(p),
    )
    return system


def _array(p: _Params, n_sites: int | None = None) -> ArraySystem:
    omega = p.float_("omega", default=1.0)
    atom = _atom(p)
    if atom is not None:
        sites = n_sites if n_sites is not None else p.int_("n_sites", default=2)
        atom = replace(atom, host_index=sites)
    return ArraySystem(
        n_sites=n_sites if n_sites is not None else (p.int_("n_sites", required=True) or 2),
        omega=omega,
        coupling=p.float_("coupling", required=True) or 0.0,
        left=_reservoir(p, "left", omega),
        right=_reservoir(p, "right", omega),
        atom=atom,
    )


def _sweep_values(p: _Params) -> np.ndarray:
    start = p.float_("sweep_start", required=True)
    stop = p.float_("sweep_stop", required=True)
    step = p.float_("sweep_step", required=True)
    if None in (start, stop, step):
        return np.array([])
    if not (math.isfinite(start) and math.isfinite(stop)):
        p.errors.append("config: sweep bounds must be finite")
        return np.array([])
    if step <= 0:
        p.errors.append(f"config: sweep_step must be positive, got {step}")
        return np.array([])
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 2:
        p.errors.append("config: sweep must contain at least 2 points")
        return np.array([])
    return start + step * np.arange(count)


def _fock_config(p: _Params) -> fockspace.FockConfig:
    cfg = fockspace.FockConfig()
    return fockspace.FockConfig(
        n_max=p.int_("fock_n_max", default=cfg.n_max),
        tail_bound=p.float_("fock_tail_bound", default=cfg.tail_bound),
        max_vectorized_dim=p.int_("fock_max_dim", default=cfg.max_vectorized_dim),
    )


def _row(**fields) -> dict:
    row = {column: None for column in COLUMNS}
    row.update(fields)
    return row


def _report_fields(report: closedform.CurrentReport) -> dict:
    return {
        "i_left": report.i_left,
        "i_right": report.i_right,
        "i_occupation": report.i_occupation,
        "i_coherence": report.i_coherence,
        "alpha": report.alpha,
        "regime": report.regime,
    }


def _moments_point(system: TwoCavitySystem):
    vector = moments.steady_state(system)
    report = moments.currents_from_moments(system, vector)
    return report, moments.steady_residual(system, vector)


def _solver_context(name: str, value) -> str:
    return f"solver failure at {name}={value}"


def _gamma_sweep(spec: SweepSpec) -> list[dict]:
    p = _Params(spec.params)
    # both rates are swept, so the base values are placeholders
    p.raw.setdefault("gamma_left", "1.0")
    p.raw.setdefault("gamma_right", "1.0")
    values = _sweep_values(p)
    base = _two_cavity(p)
    p.finish()
    rows = []
    for value in values:
        system = replace(base, left=replace(base.left, rate=value), right=replace(base.right, rate=value))
        try:
            report, residual = _moments_point(system)
        except SolverError as exc:
            raise SolverError(f"{_solver_context('gamma', value)}: {exc}") from exc
        rows.append(
            _row(
                experiment=spec.experiment,
                value=value,
                sigma_z=system.sigma_z if system.atom else None,
                residual=residual,
                **_report_fields(report),
            )
        )
    return rows


def _chi_sweep(spec: SweepSpec, with_ratio: bool) -> list[dict]:
    p = _Params(spec.params)
    values = _sweep_values(p)
    base = _two_cavity(p)
    p.finish()
    if base.atom is None:
        raise ValidationError(["config: chi sweeps need an atom (set chi and sigma_z)"])
    baseline = None
    if with_ratio:
        ref_system = replace(base, atom=replace(base.atom, dispersive_strength=0.0))
        baseline, _ = _moments_point(ref_system)
    rows = []
    for value in values:
        system = replace(base, atom=replace(base.atom, dispersive_strength=value))
        try:
            report, residual = _moments_point(system)
        except SolverError as exc:
            raise SolverError(f"{_solver_context('chi', value)}: {exc}") from exc
        ratio = report.i_left / baseline.i_left if (baseline and baseline.i_left != 0) else None
        rows.append(
            _row(
                experiment=spec.experiment,
                value=value,
                sigma_z=system.sigma_z,
                i_ratio=ratio,
                residual=residual,
                **_report_fields(report),
            )
        )
    return rows


def _rectification_sweep(spec: SweepSpec) -> list[dict]:
    p = _Params(spec.params)
    values = _sweep_values(p)
    base = _two_cavity(p)
    p.finish()
    rows = []
    for value in values:
        system = replace(base, left=replace(base.left, rate=value))
        validate(system)
        forward, reverse = closedform.forward_reverse_currents(system)
        result = closedform.rectification(system)
        rows.append(
            _row(
                experiment=spec.experiment,
                value=value,
                sigma_z=system.sigma_z,
                i_left=forward,
                i_right=reverse,
                rectification=result.ratio,
                residual=0.0,
            )
        )
    return rows


def _size_scan(spec: SweepSpec) -> list[dict]:
    p = _Params(spec.params)
    n_start = p.int_("n_start", default=2)
    n_stop = p.int_("n_stop", required=True)
    if n_stop is not None and n_stop < n_start:
        p.errors.append(f"config: n_stop must be at least n_start (got {n_start}..{n_stop})")
    template = _array(p, n_sites=n_start)
    p.finish()
    points = chain.size_scan(template, range(n_start, n_stop + 1), host="last")
    return [
        _row(
            experiment=spec.experiment,
            value=point.n_sites,
            sigma_z=template.sigma_z if template.atom else None,
            i_left=point.current,
            i_ratio=point.ratio,
            residual=point.residual,
        )
        for point in points
    ]


def _profile(spec: SweepSpec) -> list[dict]:
    p = _Params(spec.params)
    system = _array(p)
    p.finish()
    try:
        g = chain.steady_state_matrix(system)
    except SolverError as exc:
        raise SolverError(f"{_solver_context('n_sites', system.n_sites)}: {exc}") from exc
    occupations = chain.occupation_profile(system, g)
    i_left = chain.array_current(system, g)
    i_right = chain.right_boundary_current(system, g)
    residual = chain.steady_residual_matrix(system, g)
    return [
        _row(
            experiment=spec.experiment,
            value=site,
            sigma_z=system.sigma_z if system.atom else None,
            i_left=i_left,
            i_right=i_right,
            site=site,
            occupation=occupations[site - 1],
            residual=residual,
        )
        for site in range(1, system.n_sites + 1)
    ]


def _regime_table(spec: SweepSpec) -> list[dict]:
    p = _Params(spec.params)
    alphas = p.float_list("alpha_values", default=[0.5, 1.0, 2.0])
    base = _two_cavity(p)
    p.finish()
    if base.atom is None:
        raise ValidationError(["config: the regime table needs an atom (set chi and sigma_z)"])
    if not base.chi > base.omega_right:
        raise ValidationError(["config: the regime table requires chi > omega_right"])
    rows = []
    for alpha in alphas:
        rate_right = alpha * base.left.rate * (base.chi - base.omega_right) / base.omega_left
        for sigma in (1.0, -1.0):
            system = replace(
                base,
                right=replace(base.right, rate=rate_right),
                atom=replace(base.atom, sigma_z=sigma),
            )
            validate(system)
            alpha_out, regime = closedform.classify_regime(system)
            try:
                report, residual = _moments_point(system)
            except SolverError as exc:
                raise SolverError(f"{_solver_context('alpha', alpha)}: {exc}") from exc
            rows.append(
                _row(
                    experiment=spec.experiment,
                    value=alpha,
                    sigma_z=sigma,
                    alpha=alpha_out,
                    regime=regime,
                    i_left=report.i_left,
                    i_right=report.i_right,
                    i_occupation=report.i_occupation,
                    i_coherence=report.i_coherence,
                    residual=residual,
                )
            )
    return rows


def _relative_deviation(a: float, b: float, floor: float = 0.0) -> float:
    """Relative gap between two currents.

    Both magnitudes below ``floor`` count as agreement: near a blocking
    point every path reports a current that is zero at the resolution the
    threshold defines, and a ratio of rounding noise would be meaningless.
    """
    scale = max(abs(a), abs(b))
    if scale <= floor or scale == 0.0:
        return 0.0
    return abs(a - b) / scale


def crosscheck(spec: SweepSpec) -> tuple[CrosscheckReport, list[dict]]:
    """Run the closed-form, moment, and Fock paths on one point."""
    p = _Params(spec.params)
    system = _two_cavity(p)
    cfg = _fock_config(p)
    tol_cm = p.float_("tol_closedform_moments", default=1e-10)
    tol_mf = p.float_("tol_moments_fock", default=1e-6)
    p.finish()
    validate(system)

    closed = closedform.current_general(system)
    moment_report, moment_residual = _moments_point(system)
    rho = fockspace.steady_rho(system, cfg)
    fock_report = fockspace.oracle_currents(system, rho)

    scale = system.omega_left**2
    report = CrosscheckReport(
        closedform_current=closed.i_left,
        moments_current=moment_report.i_left,
        fock_current=fock_report.i_left,
        deviation_closedform_moments=_relative_deviation(
            closed.i_left, moment_report.i_left, floor=tol_cm * scale
        ),
        deviation_moments_fock=_relative_deviation(
            moment_report.i_left, fock_report.i_left, floor=tol_mf * scale
        ),
        deviation_closedform_fock=_relative_deviation(
            closed.i_left, fock_report.i_left, floor=tol_mf * scale
        ),
        tolerance_closedform_moments=tol_cm,
        tolerance_moments_fock=tol_mf,
    )
    rows = [
        _row(
            experiment=spec.experiment,
            path="closedform",
            sigma_z=system.sigma_z if system.atom else None,
            residual=0.0,
            **_report_fields(closed),
        ),
        _row(
            experiment=spec.experiment,
            path="moments",
            sigma_z=system.sigma_z if system.atom else None,
            residual=moment_residual,
            **_report_fields(moment_report),
        ),
        _row(
            experiment=spec.experiment,
            path="fock",
            sigma_z=system.sigma_z if system.atom else None,
            residual=rho.residual,
            **_report_fields(fock_report),
        ),
    ]
    return report, rows


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def _write_rows(spec: SweepSpec, rows: list[dict]) -> None:
    if spec.fmt == "csv":
        lines = [",".join(COLUMNS)]
        for row in rows:
            lines.append(",".join(_format_value(row[column]) for column in COLUMNS))
        spec.output.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        return
    payload = {
        "experiment": spec.experiment,
        "columns": list(COLUMNS),
        "rows": [
            {
                column: (_format_value(row[column]) if isinstance(row[column], float) and not math.isfinite(row[column]) else row[column])
                for column in COLUMNS
            }
            for row in rows
        ],
    }
    spec.output.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8", newline="\n")


def run_experiment(spec: SweepSpec) -> list[dict]:
    """Compute the rows of one experiment and write the output file."""
    if spec.experiment == "gamma_sweep":
        rows = _gamma_sweep(spec)
    elif spec.experiment == "chi_sweep":
        rows = _chi_sweep(spec, with_ratio=True)
    elif spec.experiment == "current_decomposition":
        rows = _chi_sweep(spec, with_ratio=False)
    elif spec.experiment == "rectification_sweep":
        rows = _rectification_sweep(spec)
    elif spec.experiment == "size_scan":
        rows = _size_scan(spec)
    elif spec.experiment == "profile":
        rows = _profile(spec)
    elif spec.experiment == "regime_table":
        rows = _regime_table(spec)
    elif spec.experiment == "oracle_crosscheck":
        report, rows = crosscheck(spec)
        _write_rows(spec, rows)
        print(
            f"crosscheck: closedform={report.closedform_current:.12e} "
            f"moments={report.moments_current:.12e} fock={report.fock_current:.12e}",
            file=sys.stderr,
        )
        print(
            f"crosscheck: dev(closedform,moments)={report.deviation_closedform_moments:.3e} "
            f"(tol {report.tolerance_closedform_moments:.1e}), "
            f"dev(moments,fock)={report.deviation_moments_fock:.3e}, "
            f"dev(closedform,fock)={report.deviation_closedform_fock:.3e} "
            f"(tol {report.tolerance_moments_fock:.1e}); "
            f"max pairwise {report.max_deviation:.3e}",
            file=sys.stderr,
        )
        if not report.passed:
            raise CrosscheckError("cross-path deviation exceeded its threshold")
        return rows
    else:  # pragma: no cover - SweepSpec already rejects unknown names
        raise ValidationError([f"config: unknown experiment {spec.experiment!r}"])
    _write_rows(spec, rows)
    return rows


def _build_spec(args: argparse.Namespace) -> SweepSpec:
    params: dict[str, str] = {}
    if args.config is not None:
        params.update(parse_config_file(Path(args.config)))
    for item in args.set or []:
        if "=" not in item:
            raise ValidationError([f"config: --set expects key=value, got {item!r}"])
        key, _, value = item.partition("=")
        params[key.strip()] = value.strip()
    return SweepSpec(
        experiment=args.experiment,
        params=params,
        output=Path(args.out),
        fmt=args.format,
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cavityheat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a named sweep experiment")
    run.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    run.add_argument("--config", help="flat key = value parameter file")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    run.add_argument("--out", required=True, help="output file path")
    run.add_argument("--format", default="csv", choices=("csv", "json"))

    args = parser.parse_args(argv)
    try:
        spec = _build_spec(args)
        run_experiment(spec)
    except ValidationError as exc:
        for line in exc.errors:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CrosscheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
