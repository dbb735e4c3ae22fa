"""Asset models for a hybrid energy system (HES).

The system aggregates three assets behind one point of interconnection:
a controllable generator, a controllable (curtailable) load, and a battery.
Sign convention: injection into the grid is positive, so the combined output
is p_gen - p_load + p_discharge + p_charge with p_charge <= 0.

Battery state of charge (SoC) is dimensionless in [0, 1]: stored energy
divided by ``energy_capacity`` (MWh). One step advances it by
``-(eta_c * p_charge + p_discharge / eta_d) * dt / energy_capacity``,
so round-trip losses show up as SoC that charging cannot fully recover.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "POWER_TOL",
    "SOC_TOL",
    "GeneratorParams",
    "LoadParams",
    "BatteryParams",
    "HesConfig",
    "SocState",
    "DispatchStep",
    "FeasibilityVerdict",
    "soc_step",
    "hes_output",
    "check_step_feasible",
    "ensure_dispatchable",
]

# Absolute tolerances used by feasibility checks. Power-side slack absorbs
# float noise accumulated over ~1e3 steps; SoC is checked near exactly.
POWER_TOL = 1e-9  # MW
SOC_TOL = 1e-12  # dimensionless SoC


@dataclass(frozen=True)
class GeneratorParams:
    """Controllable generator limits in MW.

    ``p_min`` may be nonzero for bookkeeping, but dispatch routines require a
    fully flexible unit (p_min == 0) and refuse anything else.
    """

    p_max: float
    p_min: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_min <= self.p_max:
            raise ValueError(
                "generator limits must satisfy 0 <= p_min <= p_max, "
                f"got p_min={self.p_min}, p_max={self.p_max}"
            )


@dataclass(frozen=True)
class LoadParams:
    """Controllable load limit in MW (consumption magnitude, >= 0)."""

    p_max: float

    def __post_init__(self) -> None:
        if self.p_max < 0.0:
            raise ValueError(f"load p_max must be >= 0, got {self.p_max}")


@dataclass(frozen=True)
class BatteryParams:
    """Battery ratings, efficiencies and SoC envelope.

    ``p_max`` bounds both charge and discharge magnitude (MW).
    ``energy_capacity`` is the SoC normalization base (MWh).
    Efficiencies are one-way; both must lie in (0, 1].
    """

    p_max: float
    energy_capacity: float
    eta_c: float = 1.0
    eta_d: float = 1.0
    soc_min: float = 0.0
    soc_max: float = 1.0
    soc_init: float = 0.5

    def __post_init__(self) -> None:
        if self.p_max <= 0.0:
            raise ValueError(f"battery p_max must be > 0, got {self.p_max}")
        if self.energy_capacity <= 0.0:
            raise ValueError(
                f"battery energy_capacity must be > 0, got {self.energy_capacity}"
            )
        for name in ("eta_c", "eta_d"):
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"battery {name} must be in (0, 1], got {eta}")
        if not 0.0 <= self.soc_min < self.soc_max <= 1.0:
            raise ValueError(
                "battery SoC envelope must satisfy 0 <= soc_min < soc_max <= 1, "
                f"got [{self.soc_min}, {self.soc_max}]"
            )
        if not self.soc_min <= self.soc_init <= self.soc_max:
            raise ValueError(
                f"battery soc_init={self.soc_init} outside envelope "
                f"[{self.soc_min}, {self.soc_max}]"
            )


@dataclass(frozen=True)
class HesConfig:
    """One hybrid system: asset parameters plus the control interval (hours)."""

    gen: GeneratorParams
    load: LoadParams
    batt: BatteryParams
    dt: float

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0 hours, got {self.dt}")


@dataclass(frozen=True)
class SocState:
    """Battery state of charge, dimensionless."""

    e: float


@dataclass(frozen=True)
class DispatchStep:
    """Asset powers for one interval (MW). p_charge <= 0 <= p_discharge."""

    p_gen: float
    p_load: float
    p_discharge: float
    p_charge: float
    p_hes: float

    @classmethod
    def from_assets(
        cls, p_gen: float, p_load: float, p_discharge: float, p_charge: float
    ) -> "DispatchStep":
        """Build a step with the combined output filled in."""
        return cls(
            p_gen=p_gen,
            p_load=p_load,
            p_discharge=p_discharge,
            p_charge=p_charge,
            p_hes=p_gen - p_load + p_discharge + p_charge,
        )


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of a per-step feasibility check.

    ``violations`` holds human-readable labels, empty when the step is clean.
    """

    violations: tuple[str, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations


def soc_step(
    batt: BatteryParams, state: SocState, p_charge: float, p_discharge: float, dt: float
) -> SocState:
    """Advance SoC one interval of ``dt`` hours. No clamping or checks here;
    feasibility is the caller's problem (see check_step_feasible)."""
    de = -(batt.eta_c * p_charge + p_discharge / batt.eta_d) * dt / batt.energy_capacity
    return SocState(e=state.e + de)


def hes_output(step: DispatchStep) -> float:
    """Combined grid injection of one step, recomputed from the assets."""
    return step.p_gen - step.p_load + step.p_discharge + step.p_charge


def check_step_feasible(
    cfg: HesConfig,
    step: DispatchStep,
    e_next: SocState,
    *,
    power_tol: float = POWER_TOL,
    soc_tol: float = SOC_TOL,
) -> FeasibilityVerdict:
    """Check one dispatch step against asset limits.

    Verdicts collect every violated constraint rather than stopping at the
    first, so fuzz harnesses can report what actually broke:

    - generator within [p_min, p_max]
    - load within [0, p_max]
    - discharge within [0, batt.p_max], charge within [-batt.p_max, 0]
    - complementarity: p_discharge * (-p_charge) <= power_tol
    - resulting SoC within [soc_min, soc_max] (tolerance soc_tol)
    """
    violations: list[str] = []
    gen, load, batt = cfg.gen, cfg.load, cfg.batt

    if not gen.p_min - power_tol <= step.p_gen <= gen.p_max + power_tol:
        violations.append(
            f"generator-bounds: p_gen={step.p_gen!r} outside "
            f"[{gen.p_min}, {gen.p_max}]"
        )
    if not -power_tol <= step.p_load <= load.p_max + power_tol:
        violations.append(
            f"load-bounds: p_load={step.p_load!r} outside [0, {load.p_max}]"
        )
    if not -power_tol <= step.p_discharge <= batt.p_max + power_tol:
        violations.append(
            f"battery-discharge-bounds: p_discharge={step.p_discharge!r} "
            f"outside [0, {batt.p_max}]"
        )
    if not -batt.p_max - power_tol <= step.p_charge <= power_tol:
        violations.append(
            f"battery-charge-bounds: p_charge={step.p_charge!r} "
            f"outside [{-batt.p_max}, 0]"
        )
    if step.p_discharge * (-step.p_charge) > power_tol:
        violations.append(
            "complementarity: simultaneous charge and discharge "
            f"(p_discharge={step.p_discharge!r}, p_charge={step.p_charge!r})"
        )
    if not batt.soc_min - soc_tol <= e_next.e <= batt.soc_max + soc_tol:
        violations.append(
            f"soc-bounds: e={e_next.e!r} outside [{batt.soc_min}, {batt.soc_max}]"
        )
    return FeasibilityVerdict(violations=tuple(violations))


def ensure_dispatchable(cfg: HesConfig) -> None:
    """Dispatch routines assume a generator that can idle at zero output."""
    if cfg.gen.p_min != 0.0:
        raise ValueError(
            f"dispatch requires a generator with p_min = 0, got {cfg.gen.p_min}"
        )
