"""Seeded Monte-Carlo sweeps over rho, eta or L, with CSV output.

Every (sweep value, trial) pair draws its channel from
``trial_rng(root_seed, trial, 0)``, so all methods and all sweep values see
the same underlying random numbers for a given trial. Random placements of
the arbitrary baseline come from ``trial_rng(root_seed, trial, 1)``.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channels import generate_channels, trial_rng
from .design import alternating_solve
from .oracle import DEFAULT_ENUM_CAP, baseline_design, exhaustive_oracle

__all__ = [
    "SWEEP_VARIABLES",
    "METHODS",
    "SweepSpec",
    "SweepRow",
    "SweepError",
    "apply_sweep_value",
    "run_trial",
    "run_sweep",
    "emit_csv",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("rho", "eta_db", "L")
METHODS = ("proposed", "arbitrary", "passive", "active", "no_ris", "oracle")
CSV_HEADER = ["variable", "value", "method", "mean_se", "min_se", "max_se", "mean_gamma_db", "trials"]


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "L"
    values: tuple = (20, 40, 60, 80)
    trials: int = 100
    root_seed: int = 0
    methods: tuple = ("proposed", "arbitrary", "passive", "active", "no_ris")
    tie_rho_links: bool = True
    arbitrary_placements: int = 10
    oracle_cap: int = DEFAULT_ENUM_CAP

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError(f"sweep values must be strictly increasing, got {list(self.values)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.root_seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}, got {list(self.methods)}")
        if self.arbitrary_placements < 1:
            raise ValueError("arbitrary_placements must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    method: str
    mean_se: float
    min_se: float
    max_se: float
    mean_gamma_db: float
    trials: int


def apply_sweep_value(bundle, value):
    """Return ``(system, fading)`` with the swept parameter set to ``value``.

    A rho sweep changes all three links when ``tie_rho_links`` is set and only
    the RIS-UE link otherwise.
    """
    system, fading, spec = bundle.system, bundle.fading, bundle.sweep
    if spec.variable == "rho":
        if spec.tie_rho_links:
            fading = replace(fading, rho_bu=float(value), rho_br=float(value), rho_ru=float(value))
        else:
            fading = replace(fading, rho_ru=float(value))
    elif spec.variable == "eta_db":
        system = system.replace(eta=10.0 ** (float(value) / 20.0))
    else:
        if float(value) != int(value):
            raise ValueError("L must be an integer")
        system = system.replace(L=int(value))
    return system, fading


def run_trial(bundle, value, trial: int) -> dict:
    """Run every requested method on one channel draw; returns ``{method: (se, gamma)}``."""
    system, fading = apply_sweep_value(bundle, value)
    spec = bundle.sweep
    channels = generate_channels(system, bundle.geometry, fading, trial_rng(spec.root_seed, trial, 0))
    out = {}
    proposed = None
    for method in spec.methods:
        if method in ("proposed", "oracle") and proposed is None:
            proposed = alternating_solve(system, channels)
        if method == "proposed":
            out[method] = (proposed.breakdown.se, proposed.breakdown.gamma)
        elif method == "oracle":
            cand = exhaustive_oracle(system, channels, proposed.design.p, cap=spec.oracle_cap)
            out[method] = (math.log2(1 + cand.gamma), cand.gamma)
        elif method == "arbitrary":
            rng = trial_rng(spec.root_seed, trial, 1)
            res = [baseline_design("arbitrary", system, channels, rng=rng)[1] for _ in range(spec.arbitrary_placements)]
            ses = np.array([b.se for b in res])
            gammas = np.array([b.gamma for b in res])
            out["arbitrary"] = (float(ses.mean()), float(gammas.mean()))
            lo, hi = int(np.argmin(ses)), int(np.argmax(ses))
            out["arbitrary_worst"] = (float(ses[lo]), float(gammas[lo]))
            out["arbitrary_best"] = (float(ses[hi]), float(gammas[hi]))
        else:
            kind = "fully_active" if method == "active" else method
            b = baseline_design(kind, system, channels)[1]
            out[method] = (b.se, b.gamma)
    return out


def _work(args):
    bundle, vi, value, trial = args
    try:
        return vi, trial, run_trial(bundle, value, trial), None
    except Exception as exc:  # reported with the offending seed below
        return vi, trial, None, f"{type(exc).__name__}: {exc}"


def run_sweep(bundle, workers: int = 1) -> list[SweepRow]:
    """Run the Monte-Carlo sweep described by ``bundle.sweep``.

    Results are aggregated in (value, trial) order, so the output does not
    depend on ``workers``.

    Raises
    ------
    SweepError
        On the first failing trial, naming its seed.
    """
    spec = bundle.sweep
    jobs = [(bundle, vi, v, t) for vi, v in enumerate(spec.values) for t in range(spec.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_work, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_work(j) for j in jobs]

    table: dict = {}
    for vi, trial, res, err in results:
        if err is not None:
            raise SweepError(
                f"trial {trial} at {spec.variable}={spec.values[vi]} failed "
                f"(root seed {spec.root_seed}, spawn key ({trial}, 0)): {err}"
            )
        table[(vi, trial)] = res

    rows = []
    for vi, value in enumerate(spec.values):
        per_trial = [table[(vi, t)] for t in range(spec.trials)]
        for method in per_trial[0]:
            ses = np.array([r[method][0] for r in per_trial])
            gdb = np.array([10 * np.log10(r[method][1]) for r in per_trial])
            rows.append(
                SweepRow(
                    variable=spec.variable,
                    value=value,
                    method=method,
                    mean_se=float(ses.mean()),
                    min_se=float(ses.min()),
                    max_se=float(ses.max()),
                    mean_gamma_db=float(gdb.mean()),
                    trials=spec.trials,
                )
            )
        log.info("%s=%s done", spec.variable, value)
    return rows


def _fmt(x) -> str:
    return format(float(x), ".10g")


def emit_csv(rows: Sequence[SweepRow], path) -> Path:
    """Write sweep rows as CSV (UTF-8, LF line endings, 10 significant digits)."""
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([
                    r.variable, _fmt(r.value), r.method, _fmt(r.mean_se), _fmt(r.min_se),
                    _fmt(r.max_se), _fmt(r.mean_gamma_db), r.trials,
                ])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path
