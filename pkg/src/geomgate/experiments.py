"""Configuration-driven experiment runner: fidelity sweeps, engine cross-validation,
and phase-space path dumps.

Units: time is measured in 1/alpha0 (the drive amplitude is fixed at
alpha0 = 1), and dissipation is specified as the ratio kappa/alpha0.  Every
sweep acts on the initial product state |00><00| (x) |beta><beta| and scores
the final reduced qubit state against the maximally entangled target of the
phase = pi/8 gate.

Outputs are deterministic: fixed row ordering (beta, k, kappa), fixed float
formatting, the effective configuration written as '# key=value' header
lines, and no timestamps in data rows.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analytic, oracle
from . import schedules as sched
from .errors import InvalidParameterError
from .qubits import gate_fidelity, qubit_00, to_jy_basis

__all__ = [
    "SweepConfig", "SweepRow", "SweepResult", "CrossValidationReport",
    "run_sweep", "cross_validate", "emit_paths", "parse_config", "config_text",
    "DEFAULT_VALIDATE_CONFIG",
]

CROSS_VALIDATION_TOL = 1e-4

FIDELITY_COLUMNS = "kappa_ratio,k,beta_re,beta_im,F,engine"

_ENGINES = ("analytic", "oracle", "both")


def _default_kappas() -> tuple:
    return tuple(np.linspace(0.0, 0.1, 21))


@dataclass(frozen=True)
class SweepConfig:
    """Grid and engine selection for a fidelity sweep."""

    kappa_over_alpha0: tuple = field(default_factory=_default_kappas)
    orders: tuple = (0, 1, 2)
    betas: tuple = (2.0 + 0.0j, 5.0 + 0.0j)
    phase: float = math.pi / 8.0
    engine: str = "analytic"
    fock_margin: int = 6
    oracle_tolerance: float = 1e-7

    def __post_init__(self):
        object.__setattr__(self, "kappa_over_alpha0", tuple(float(k) for k in self.kappa_over_alpha0))
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        object.__setattr__(self, "betas", tuple(complex(b) for b in self.betas))
        if any(k < 0.0 for k in self.kappa_over_alpha0):
            raise InvalidParameterError("kappa/alpha0 values must be >= 0")
        if any(k < 0 for k in self.orders):
            raise InvalidParameterError("decoupling orders must be >= 0")
        if not (self.phase > 0.0):
            raise InvalidParameterError(f"phase must be > 0, got {self.phase}")
        if self.engine not in _ENGINES:
            raise InvalidParameterError(f"engine must be one of {_ENGINES}, got {self.engine!r}")
        if self.fock_margin < 0:
            raise InvalidParameterError("fock_margin must be >= 0")


DEFAULT_VALIDATE_CONFIG = SweepConfig(
    kappa_over_alpha0=(0.01, 0.05, 0.1),
    orders=(0, 1),
    betas=(0.0 + 0.0j, 2.0 + 0.0j),
    engine="both",
    oracle_tolerance=1e-8,
)


@dataclass(frozen=True)
class SweepRow:
    kappa_ratio: float
    k: int
    beta: complex
    f_analytic: float | None = None
    f_oracle: float | None = None
    delta: float | None = None
    max_element_diff: float | None = None
    wall_time: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple

    def to_csv(self) -> str:
        """Fidelity curves with the configuration in '# key=value' header lines."""
        lines = _config_header_lines(self.config)
        lines.append(FIDELITY_COLUMNS)
        for row in self.rows:
            if row.error is not None:
                continue
            for engine, f in (("analytic", row.f_analytic), ("oracle", row.f_oracle)):
                if f is None:
                    continue
                lines.append(
                    f"{row.kappa_ratio:.12g},{row.k},{row.beta.real:.12g},"
                    f"{row.beta.imag:.12g},{f:.12g},{engine}"
                )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CrossValidationReport:
    config: SweepConfig
    rows: tuple
    tolerance: float = CROSS_VALIDATION_TOL

    @property
    def ok(self) -> bool:
        return not self.breaches

    @property
    def breaches(self) -> tuple:
        bad = []
        for row in self.rows:
            if row.error is not None:
                bad.append(row)
            elif row.delta is None or row.delta > self.tolerance or (
                row.max_element_diff is not None and row.max_element_diff > self.tolerance
            ):
                bad.append(row)
        return tuple(bad)

    def summary(self) -> str:
        lines = [
            f"cross-validation over {len(self.rows)} grid points "
            f"(tolerance {self.tolerance:.1e})"
        ]
        worst_df = max((r.delta for r in self.rows if r.delta is not None), default=float("nan"))
        worst_el = max(
            (r.max_element_diff for r in self.rows if r.max_element_diff is not None),
            default=float("nan"),
        )
        lines.append(f"max |dF| = {worst_df:.3e}; max reduced-state element diff = {worst_el:.3e}")
        for row in self.breaches:
            if row.error is not None:
                lines.append(
                    f"  ERROR at kappa={row.kappa_ratio:g} k={row.k} beta={row.beta:g}: {row.error}"
                )
            else:
                lines.append(
                    f"  BREACH at kappa={row.kappa_ratio:g} k={row.k} beta={row.beta:g}: "
                    f"|dF|={row.delta:.3e} elem={row.max_element_diff:.3e}"
                )
        lines.append("status: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines)

    def to_csv(self) -> str:
        lines = _config_header_lines(self.config)
        lines.append("kappa_ratio,k,beta_re,beta_im,F_analytic,F_oracle,abs_dF,max_element_diff,error")
        for r in self.rows:
            fa = "" if r.f_analytic is None else f"{r.f_analytic:.12g}"
            fo = "" if r.f_oracle is None else f"{r.f_oracle:.12g}"
            df = "" if r.delta is None else f"{r.delta:.12g}"
            el = "" if r.max_element_diff is None else f"{r.max_element_diff:.12g}"
            err = "" if r.error is None else r.error.replace(",", ";")
            lines.append(
                f"{r.kappa_ratio:.12g},{r.k},{r.beta.real:.12g},{r.beta.imag:.12g},"
                f"{fa},{fo},{df},{el},{err}"
            )
        return "\n".join(lines) + "\n"


def _config_header_lines(cfg: SweepConfig) -> list:
    return ["# " + line for line in config_text(cfg).splitlines()]


def _format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def _grid(cfg: SweepConfig):
    """Deterministic point order: by (beta, k, kappa)."""
    betas = sorted(cfg.betas, key=lambda b: (b.real, b.imag))
    orders = sorted(cfg.orders)
    kappas = sorted(cfg.kappa_over_alpha0)
    return [(b, k, kap) for b in betas for k in orders for kap in kappas]


def _point_states(beta, k, kappa, cfg, schedule_cache, want_analytic, want_oracle):
    """Final reduced states for one grid point; returns (rho_analytic, rho_oracle)."""
    key = k
    if key not in schedule_cache:
        schedule_cache[key] = sched.symmetrized_sequence(
            sched.SequenceSpec(base="step", order=k, phase=cfg.phase, alpha0=1.0)
        )
    s = schedule_cache[key]
    rho_a = rho_o = None
    if want_analytic:
        inp = analytic.ReducedPropagationInput(
            rho0=to_jy_basis(qubit_00()), beta=beta, schedule=s, kappa=kappa
        )
        rho_a = analytic.evolve_reduced(inp, s.duration)
    if want_oracle:
        n = oracle.fock_dimension(beta, margin=cfg.fock_margin)
        joint0 = oracle.product_state(qubit_00(), oracle.coherent_state(beta, n))
        int_cfg = oracle.default_integrator_config(s, joint0, tolerance=cfg.oracle_tolerance)
        joint = oracle.evolve_master(joint0, s, kappa, int_cfg)
        rho_o = oracle.partial_trace_osc(joint)
    return rho_a, rho_o


def _run_point(args):
    beta, k, kappa, cfg, schedule_cache = args
    want_a = cfg.engine in ("analytic", "both")
    want_o = cfg.engine in ("oracle", "both")
    t0 = time.perf_counter()
    try:
        rho_a, rho_o = _point_states(beta, k, kappa, cfg, schedule_cache, want_a, want_o)
        fa = gate_fidelity(rho_a) if rho_a is not None else None
        fo = gate_fidelity(rho_o) if rho_o is not None else None
        delta = abs(fa - fo) if (fa is not None and fo is not None) else None
        elem = (
            float(np.abs(rho_a.rho - rho_o.rho).max())
            if (rho_a is not None and rho_o is not None)
            else None
        )
        return SweepRow(kappa, k, beta, fa, fo, delta, elem, time.perf_counter() - t0)
    except Exception as exc:  # per-point failures become row-level error codes
        return SweepRow(
            kappa, k, beta, wall_time=time.perf_counter() - t0,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(cfg: SweepConfig, max_workers: int = 2) -> SweepResult:
    """Fidelity over the (beta, k, kappa) grid; point failures do not stop the sweep.

    Grid points are independent; a bounded thread pool evaluates them and the
    assembly restores the deterministic (beta, k, kappa) order.
    """
    schedule_cache = {
        k: sched.symmetrized_sequence(
            sched.SequenceSpec(base="step", order=k, phase=cfg.phase, alpha0=1.0)
        )
        for k in cfg.orders
    }
    points = [(b, k, kap, cfg, schedule_cache) for (b, k, kap) in _grid(cfg)]
    if max_workers <= 1:
        rows = [_run_point(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_run_point, points))
    return SweepResult(config=cfg, rows=tuple(rows))


def cross_validate(cfg: SweepConfig, max_workers: int = 2) -> CrossValidationReport:
    """Run both engines over the grid and compare fidelities and reduced states.

    The report fails if any point exceeds the 1e-4 tolerance on |dF| or on the
    max reduced-state element difference, or if an engine errored (truncation
    overflow surfaces here rather than as silent disagreement).
    """
    if cfg.engine != "both":
        cfg = replace(cfg, engine="both")
    result = run_sweep(cfg, max_workers=max_workers)
    return CrossValidationReport(config=cfg, rows=result.rows)


def emit_paths(
    kind: str, alpha0: float, tau: float, kappa: float,
    out_dir, samples: int = 401,
) -> list:
    """Write phase-space path CSVs for the C and C-bar circuits; returns the paths.

    Header carries the parameters; columns are 't,re,im'.  At kappa = 0 the
    paths close (square for step, circle for circular); at kappa > 0 the
    closure gap equals |xi_plus(T)|.
    """
    builder = {"step": sched.step_circuit, "circular": sched.circular_circuit}.get(kind)
    if builder is None:
        raise InvalidParameterError(f"kind must be 'step' or 'circular', got {kind!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for orientation in ("C", "Cbar"):
        s = builder(alpha0, tau, orientation)
        pts = sched.phase_space_path(s, kappa, samples)
        lines = [
            f"# kind = {kind}",
            f"# alpha0 = {alpha0:.12g}",
            f"# tau = {tau:.12g}",
            f"# kappa = {kappa:.12g}",
            f"# orientation = {orientation}",
            f"# samples = {samples}",
            "t,re,im",
        ]
        for t, z in pts:
            lines.append(f"{t.real:.12g},{z.real:.12g},{z.imag:.12g}")
        path = out_dir / f"path_{kind}_{orientation}.csv"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


# -- plain-text key-value configuration --------------------------------------

_CONFIG_KEYS = (
    "kappa_over_alpha0", "orders", "betas", "phase", "engine",
    "fock_margin", "oracle_tolerance",
)


def config_text(cfg: SweepConfig) -> str:
    """Canonical plain-text form of a sweep configuration (all defaults explicit)."""
    lines = [
        "kappa_over_alpha0 = " + ", ".join(f"{k:.17g}" for k in cfg.kappa_over_alpha0),
        "orders = " + ", ".join(str(k) for k in cfg.orders),
        "betas = " + ", ".join(_format_complex(b) for b in cfg.betas),
        f"phase = {cfg.phase:.17g}",
        f"engine = {cfg.engine}",
        f"fock_margin = {cfg.fock_margin}",
        f"oracle_tolerance = {cfg.oracle_tolerance:.17g}",
    ]
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> SweepConfig:
    """Parse 'key = value' lines (comments with '#'); unknown keys are rejected."""
    kv = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise InvalidParameterError(f"unknown configuration key {key!r}")
        kv[key] = val
    kwargs = {}
    if "kappa_over_alpha0" in kv:
        kwargs["kappa_over_alpha0"] = tuple(float(x) for x in kv["kappa_over_alpha0"].split(","))
    if "orders" in kv:
        kwargs["orders"] = tuple(int(x) for x in kv["orders"].split(","))
    if "betas" in kv:
        kwargs["betas"] = tuple(complex(x.strip().replace(" ", "")) for x in kv["betas"].split(","))
    if "phase" in kv:
        kwargs["phase"] = float(kv["phase"])
    if "engine" in kv:
        kwargs["engine"] = kv["engine"]
    if "fock_margin" in kv:
        kwargs["fock_margin"] = int(kv["fock_margin"])
    if "oracle_tolerance" in kv:
        kwargs["oracle_tolerance"] = float(kv["oracle_tolerance"])
    return SweepConfig(**kwargs)
