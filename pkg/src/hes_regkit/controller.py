"""Real-time rule-based dispatch.

The controller splits the scaled command C * r[k] across assets by priority:
cheap assets first (generator when injecting, load when absorbing), battery
last, throttled by SoC headroom so the envelope is never violated.

For an upward command (r > 0):
    p_gen       = min(C r, gen.p_max)
    p_discharge = max(0, min(C r - p_gen, delta_d * batt.p_max))
For a downward command (r <= 0):
    p_load      = min(-C r, load.p_max)
    p_charge    = min(0, max(C r + p_load, -delta_c * batt.p_max))

delta_c / delta_d in [0, 1] derate battery power to what the SoC envelope can
absorb or supply within one interval, including conversion losses:
    delta_c = min((soc_max - e) * cap / (eta_c * dt * p_max), 1)
    delta_d = min(eta_d * (e - soc_min) * cap / (dt * p_max), 1)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import (
    DispatchStep,
    FeasibilityVerdict,
    HesConfig,
    SocState,
    check_step_feasible,
    ensure_dispatchable,
    soc_step,
)
from .signals import RegSignal

__all__ = [
    "DispatchTrace",
    "BatchDispatch",
    "rt_step",
    "rt_dispatch",
    "rt_dispatch_batch",
    "validate_trace",
    "save_trace_csv",
    "load_trace_csv",
]


@dataclass(frozen=True, eq=False)
class DispatchTrace:
    """Per-step dispatch over one window, as parallel float64 arrays.

    ``soc`` has one extra entry: soc[0] is the initial state, soc[k+1] the
    state after step k.
    """

    target: np.ndarray
    p_gen: np.ndarray
    p_load: np.ndarray
    p_discharge: np.ndarray
    p_charge: np.ndarray
    p_hes: np.ndarray
    soc: np.ndarray

    def __post_init__(self) -> None:
        n = None
        for name in ("target", "p_gen", "p_load", "p_discharge", "p_charge", "p_hes"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise ValueError(f"trace column {name} has {arr.size} rows, expected {n}")
        soc = np.ascontiguousarray(self.soc, dtype=float)
        soc.setflags(write=False)
        object.__setattr__(self, "soc", soc)
        if soc.size != (n or 0) + 1:
            raise ValueError(f"soc needs {n + 1} entries, got {soc.size}")

    @property
    def n_steps(self) -> int:
        return int(self.target.size)

    def step(self, k: int) -> DispatchStep:
        return DispatchStep(
            p_gen=float(self.p_gen[k]),
            p_load=float(self.p_load[k]),
            p_discharge=float(self.p_discharge[k]),
            p_charge=float(self.p_charge[k]),
            p_hes=float(self.p_hes[k]),
        )

    def abs_error(self) -> float:
        """L1 tracking error, sum |target - p_hes|."""
        return float(np.sum(np.abs(self.target - self.p_hes)))


def rt_step(
    cfg: HesConfig, c: float, r_k: float, state: SocState
) -> tuple[DispatchStep, SocState]:
    """One interval of the priority rule. Returns the dispatch and next SoC."""
    batt = cfg.batt
    target = c * r_k
    if r_k > 0.0:
        delta_d = min(
            batt.eta_d * (state.e - batt.soc_min) * batt.energy_capacity
            / (cfg.dt * batt.p_max),
            1.0,
        )
        p_gen = min(target, cfg.gen.p_max)
        p_load = 0.0
        p_discharge = max(0.0, min(target - p_gen, delta_d * batt.p_max))
        p_charge = 0.0
    else:
        delta_c = min(
            (batt.soc_max - state.e) * batt.energy_capacity
            / (batt.eta_c * cfg.dt * batt.p_max),
            1.0,
        )
        p_gen = 0.0
        p_load = min(-target, cfg.load.p_max)
        p_discharge = 0.0
        p_charge = min(0.0, max(target + p_load, -delta_c * batt.p_max))
    step = DispatchStep.from_assets(p_gen, p_load, p_discharge, p_charge)
    return step, soc_step(batt, state, p_charge, p_discharge, cfg.dt)


def rt_dispatch(
    cfg: HesConfig, c: float, sig: RegSignal, *, soc_init: float | None = None
) -> DispatchTrace:
    """Run the rule over a whole window."""
    ensure_dispatchable(cfg)
    if c <= 0.0:
        raise ValueError(f"capacity must be > 0 MW, got {c}")
    if sig.dt != cfg.dt:
        raise ValueError(f"signal dt={sig.dt} does not match config dt={cfg.dt}")
    n = sig.n
    e0 = cfg.batt.soc_init if soc_init is None else float(soc_init)
    if not cfg.batt.soc_min <= e0 <= cfg.batt.soc_max:
        raise ValueError(
            f"soc_init={e0} outside envelope [{cfg.batt.soc_min}, {cfg.batt.soc_max}]"
        )
    p_gen = np.empty(n)
    p_load = np.empty(n)
    p_discharge = np.empty(n)
    p_charge = np.empty(n)
    p_hes = np.empty(n)
    soc = np.empty(n + 1)
    soc[0] = e0
    state = SocState(e=e0)
    for k in range(n):
        step, state = rt_step(cfg, c, float(sig.samples[k]), state)
        p_gen[k] = step.p_gen
        p_load[k] = step.p_load
        p_discharge[k] = step.p_discharge
        p_charge[k] = step.p_charge
        p_hes[k] = step.p_hes
        soc[k + 1] = state.e
    return DispatchTrace(
        target=c * sig.samples,
        p_gen=p_gen,
        p_load=p_load,
        p_discharge=p_discharge,
        p_charge=p_charge,
        p_hes=p_hes,
        soc=soc,
    )


@dataclass(frozen=True, eq=False)
class BatchDispatch:
    """Aggregates from dispatching many windows in lockstep.

    Holds per-window L1 error and SoC extremes, plus global extremes of each
    asset power and of the charge*discharge overlap, which is what safety
    fuzzing needs without storing (windows x steps) trace matrices.
    """

    err_sums: np.ndarray
    soc_final: np.ndarray
    soc_lowest: np.ndarray
    soc_highest: np.ndarray
    gen_max: float
    load_max: float
    discharge_max: float
    charge_min: float
    asset_sign_min: float  # most negative of any gen/load/discharge, and -charge
    overlap_max: float  # max over steps of p_discharge * (-p_charge)


def rt_dispatch_batch(
    cfg: HesConfig,
    c: float,
    samples: np.ndarray,
    dt: float,
    *,
    soc_init: float | None = None,
) -> BatchDispatch:
    """Vectorized rule over an (n_windows, n_steps) sample matrix.

    Same arithmetic as rt_step applied column-by-column, so each window's
    dispatch matches the scalar path to float precision.
    """
    ensure_dispatchable(cfg)
    if c <= 0.0:
        raise ValueError(f"capacity must be > 0 MW, got {c}")
    if dt != cfg.dt:
        raise ValueError(f"signal dt={dt} does not match config dt={cfg.dt}")
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError(f"need a 2-D sample matrix, got shape {samples.shape}")
    h, n = samples.shape
    batt = cfg.batt
    e0 = batt.soc_init if soc_init is None else float(soc_init)
    gmax, lmax, pb = cfg.gen.p_max, cfg.load.p_max, batt.p_max
    cap = batt.energy_capacity

    e = np.full(h, e0)
    err = np.zeros(h)
    soc_lo = np.full(h, e0)
    soc_hi = np.full(h, e0)
    gen_max = load_max = dis_max = overlap_max = -np.inf
    charge_min = np.inf
    sign_min = np.inf

    for k in range(n):
        r = samples[:, k]
        target = c * r
        pos = r > 0.0
        delta_d = np.minimum(batt.eta_d * (e - batt.soc_min) * cap / (cfg.dt * pb), 1.0)
        delta_c = np.minimum((batt.soc_max - e) * cap / (batt.eta_c * cfg.dt * pb), 1.0)
        p_gen = np.where(pos, np.minimum(target, gmax), 0.0)
        p_load = np.where(pos, 0.0, np.minimum(-target, lmax))
        p_discharge = np.where(
            pos, np.maximum(0.0, np.minimum(target - p_gen, delta_d * pb)), 0.0
        )
        p_charge = np.where(
            pos, 0.0, np.minimum(0.0, np.maximum(target + p_load, -delta_c * pb))
        )
        p_hes = p_gen - p_load + p_discharge + p_charge
        err += np.abs(target - p_hes)
        e = e - (batt.eta_c * p_charge + p_discharge / batt.eta_d) * cfg.dt / cap
        np.minimum(soc_lo, e, out=soc_lo)
        np.maximum(soc_hi, e, out=soc_hi)
        gen_max = max(gen_max, float(p_gen.max()))
        load_max = max(load_max, float(p_load.max()))
        dis_max = max(dis_max, float(p_discharge.max()))
        charge_min = min(charge_min, float(p_charge.min()))
        sign_min = min(
            sign_min,
            float(p_gen.min()),
            float(p_load.min()),
            float(p_discharge.min()),
            float((-p_charge).min()),
        )
        overlap_max = max(overlap_max, float((p_discharge * (-p_charge)).max()))

    return BatchDispatch(
        err_sums=err,
        soc_final=e,
        soc_lowest=soc_lo,
        soc_highest=soc_hi,
        gen_max=gen_max,
        load_max=load_max,
        discharge_max=dis_max,
        charge_min=charge_min,
        asset_sign_min=sign_min,
        overlap_max=overlap_max,
    )


def validate_trace(
    cfg: HesConfig,
    trace: DispatchTrace,
    *,
    power_tol: float | None = None,
    soc_tol: float | None = None,
) -> list[tuple[int, FeasibilityVerdict]]:
    """Run check_step_feasible over every step; returns offending (k, verdict)."""
    kwargs = {}
    if power_tol is not None:
        kwargs["power_tol"] = power_tol
    if soc_tol is not None:
        kwargs["soc_tol"] = soc_tol
    bad = []
    for k in range(trace.n_steps):
        verdict = check_step_feasible(
            cfg, trace.step(k), SocState(e=float(trace.soc[k + 1])), **kwargs
        )
        if not verdict.feasible:
            bad.append((k, verdict))
    return bad


_TRACE_HEADER = ["k", "r", "target", "p_gen", "p_load", "p_charge", "p_discharge", "p_hes", "soc"]


def save_trace_csv(path: str | Path, trace: DispatchTrace, r: np.ndarray, c: float) -> Path:
    """Write a dispatch trace; ``soc`` column is the post-step state.

    The initial SoC and the capacity ride along as comment metadata so the
    file round-trips through load_trace_csv.
    """
    r = np.asarray(r, dtype=float)
    if r.size != trace.n_steps:
        raise ValueError(f"r has {r.size} rows, trace has {trace.n_steps} steps")
    p = Path(path)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# c=%.17g\n" % c)
        fh.write("# soc_init=%.17g\n" % trace.soc[0])
        fh.write(",".join(_TRACE_HEADER) + "\n")
        for k in range(trace.n_steps):
            row = (
                str(k),
                "%.17g" % r[k],
                "%.17g" % trace.target[k],
                "%.17g" % trace.p_gen[k],
                "%.17g" % trace.p_load[k],
                "%.17g" % trace.p_charge[k],
                "%.17g" % trace.p_discharge[k],
                "%.17g" % trace.p_hes[k],
                "%.17g" % trace.soc[k + 1],
            )
            fh.write(",".join(row) + "\n")
    return p


def load_trace_csv(path: str | Path) -> tuple[DispatchTrace, np.ndarray, float]:
    """Inverse of save_trace_csv. Returns (trace, r, c)."""
    p = Path(path)
    meta: dict[str, float] = {}
    rows: list[list[str]] = []
    saw_header = False
    with open(p, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = float(val)
                continue
            if not saw_header:
                if [h.strip() for h in line.split(",")] != _TRACE_HEADER:
                    raise ValueError(f"{p}:{lineno}: unexpected trace header {line!r}")
                saw_header = True
                continue
            parts = line.split(",")
            if len(parts) != len(_TRACE_HEADER):
                raise ValueError(f"{p}:{lineno}: expected {len(_TRACE_HEADER)} columns")
            rows.append(parts)
    if not saw_header or not rows:
        raise ValueError(f"{p}: no trace data found")
    if "c" not in meta or "soc_init" not in meta:
        raise ValueError(f"{p}: missing c/soc_init metadata comments")
    cols = np.array([[float(v) for v in row[1:]] for row in rows])
    r = cols[:, 0]
    soc = np.concatenate([[meta["soc_init"]], cols[:, 7]])
    trace = DispatchTrace(
        target=cols[:, 1],
        p_gen=cols[:, 2],
        p_load=cols[:, 3],
        p_charge=cols[:, 4],
        p_discharge=cols[:, 5],
        p_hes=cols[:, 6],
        soc=soc,
    )
    return trace, r, meta["c"]
