"""Multi-trial runs, predictor overlays, and coupled-vs-uncoupled timing.

An ensemble repeats one configuration with derived seeds (base seed plus
trial index) and averages the recorded diagnostics pointwise on the shared
record grid.  Overlay curves from the period predictors are attached once
the mean free energy crosses the spinodal level.  A failed trial is
reported and skipped rather than aborting the whole ensemble.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import SolverConfig
from .evans import EigTable, build_eig_table
from .predictors import (
    FitResult,
    Handshake,
    PredictorConfig,
    fit_pfit,
    handshake,
    predicted_energy_curve,
)
from .series import TimeSeries
from .solver import RunResult, run
from .waves import Params

__all__ = [
    "EnsembleReport",
    "run_ensemble",
    "CompareReport",
    "compare_coupled",
    "uncoupled_twin",
    "first_crossing",
    "detect_energy_drops",
]

_OVERLAY_VARIANTS = ("langer", "eig_full", "eig_half")


@dataclass
class EnsembleReport:
    base_seed: int
    requested: int
    trial_series: list[TimeSeries | None]
    failures: list[tuple[int, str]]
    times: np.ndarray
    mean_free_energy: np.ndarray
    mean_period: np.ndarray
    handshake: Handshake | None = None
    overlays: TimeSeries | None = None
    trial_paths: list[str | None] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    @property
    def completed(self) -> list[int]:
        return [i for i, s in enumerate(self.trial_series) if s is not None]

    def summary(self) -> dict:
        out = {
            "base_seed": self.base_seed,
            "trials_requested": self.requested,
            "trials_completed": len(self.completed),
            "partial": self.partial,
            "failures": [{"trial": i, "error": msg} for i, msg in self.failures],
            "final_mean_free_energy": float(self.mean_free_energy[-1]),
            "final_mean_period": float(self.mean_period[-1]),
        }
        if self.trial_paths:
            out["trial_series"] = list(self.trial_paths)
        if self.handshake is not None:
            out["handshake_t0"] = float(self.handshake.t0)
            out["handshake_p0"] = float(self.handshake.p0)
        return out


def _run_trial(job: tuple[int, SolverConfig]) -> tuple[int, TimeSeries]:
    index, cfg = job
    return index, run(cfg).series

def _trial_configs(config: SolverConfig, trials: int) -> list[SolverConfig]:
    return [replace(config, seed=config.seed + i) for i in range(trials)]


def _mean_columns(series: list[TimeSeries]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    times = series[0]["t"]
    for s in series[1:]:
        if not np.array_equal(s["t"], times):
            raise ValueError("trial record grids differ, cannot average pointwise")
    energy = np.mean([s["free_energy"] for s in series], axis=0)
    period = np.mean([s["period"] for s in series], axis=0)
    return times, energy, period


def _overlay_series(times: np.ndarray, hs: Handshake, params: Params,
                    table: EigTable) -> TimeSeries:
    """Predictor curves on the record grid, NaN before the handshake time."""
    cols: dict[str, np.ndarray] = {"t": times}
    live = times >= hs.t0
    for variant in _OVERLAY_VARIANTS:
        cfg = PredictorConfig(p0=hs.p0, t0=hs.t0, variant=variant,
                              eig_table=None if variant == "langer" else table)
        curve = predicted_energy_curve(times[live], cfg, params)
        for name in ("period", "energy"):
            full = np.full(times.shape, math.nan)
            full[live] = curve[name]
            cols[f"{variant}_{name}"] = full
    return TimeSeries(**cols)


def run_ensemble(config: SolverConfig, trials: int, workers: int = 1,
                 overlays: bool = True,
                 eig_table: EigTable | None = None) -> EnsembleReport:
    """Run ``trials`` seeds of one configuration and average diagnostics.

    Trial ``i`` uses seed ``config.seed + i``.  Aggregation happens in the
    calling process; ``workers > 1`` distributes the runs themselves.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    jobs = list(enumerate(_trial_configs(config, trials)))
    results: list[TimeSeries | None] = [None] * trials
    failures: list[tuple[int, str]] = []

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_trial, job): job[0] for job in jobs}
            for fut, index in futures.items():
                try:
                    _, series = fut.result()
                    results[index] = series
                except (RuntimeError, ArithmeticError) as exc:
                    failures.append((index, str(exc)))
    else:
        for job in jobs:
            try:
                _, series = _run_trial(job)
                results[job[0]] = series
            except (RuntimeError, ArithmeticError) as exc:
                failures.append((job[0], str(exc)))
    failures.sort()

    done = [s for s in results if s is not None]
    if not done:
        raise RuntimeError(
            f"all {trials} trials failed; first error: {failures[0][1]}")
    times, mean_e, mean_p = _mean_columns(done)

    report = EnsembleReport(
        base_seed=config.seed, requested=trials, trial_series=results,
        failures=failures, times=times, mean_free_energy=mean_e,
        mean_period=mean_p)
    if overlays:
        params = config.params
        try:
            hs = handshake(times, mean_e, params)
        except ValueError:
            hs = None
        if hs is not None:
            if eig_table is None:
                eig_table = build_eig_table(params)
            report.handshake = hs
            report.overlays = _overlay_series(times, hs, params, eig_table)
    return report


def first_crossing(times: np.ndarray, values: np.ndarray,
                   threshold: float) -> float | None:
    """First time the sampled curve reaches ``threshold``, or None.

    Linear interpolation between the bracketing records; None means the
    curve stays below the threshold for the whole record.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    hits = np.nonzero(values >= threshold)[0]
    if hits.size == 0:
        return None
    i = int(hits[0])
    if i == 0:
        return float(times[0])
    t0, t1 = times[i - 1], times[i]
    v0, v1 = values[i - 1], values[i]
    if v1 <= v0:
        return float(t1)
    return float(t0 + (threshold - v0) * (t1 - t0) / (v1 - v0))


def uncoupled_twin(config: SolverConfig, t_final: float | None = None,
                   dt: float | None = None,
                   record_every: int | None = None) -> SolverConfig:
    """Uncoupled variant of a coupled configuration with the same seed.

    The random field draw happens before any velocity draw, so the twin
    starts from the identical composition profile.
    """
    if not config.coupled:
        raise ValueError("config is already uncoupled")
    kw: dict = {"coupling": "uncoupled", "init_v": "none"}
    if t_final is not None:
        kw["t_final"] = t_final
    if dt is not None:
        kw["dt"] = dt
    if record_every is not None:
        kw["record_every"] = record_every
    return replace(config, **kw)


@dataclass
class CompareReport:
    thresholds: tuple[float, ...]
    coupled: RunResult
    uncoupled: RunResult
    coupled_crossings: tuple[float | None, ...]
    uncoupled_crossings: tuple[float | None, ...]
    coupled_fit: FitResult | None = None
    uncoupled_fit: FitResult | None = None
    extras: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        """Ratio table; a censored entry turns the ratio into a lower bound."""
        out = []
        for thr, tc, tu in zip(self.thresholds, self.coupled_crossings,
                               self.uncoupled_crossings):
            cc = tc is None
            cu = tu is None
            tc_eff = self.coupled.config.t_final if cc else tc
            tu_eff = self.uncoupled.config.t_final if cu else tu
            ratio = None if tc_eff == 0 else tu_eff / tc_eff
            out.append({
                "threshold": float(thr),
                "coupled_time": float(tc_eff),
                "coupled_censored": cc,
                "uncoupled_time": float(tu_eff),
                "uncoupled_censored": cu,
                "ratio": None if ratio is None else float(ratio),
                "ratio_is_lower_bound": cu and not cc,
            })
        return out

    def summary(self) -> dict:
        out = {"thresholds": list(self.thresholds), "rows": self.rows()}
        for label, fit in (("coupled_fit", self.coupled_fit),
                           ("uncoupled_fit", self.uncoupled_fit)):
            if fit is not None:
                out[label] = {"c1": float(fit.c1), "c2": float(fit.c2),
                              "objective": float(fit.objective)}
        out.update(self.extras)
        return out


def _fit_series(series: TimeSeries, params: Params, t_final: float) -> FitResult | None:
    try:
        hs = handshake(series["t"], series["free_energy"], params)
        t0 = hs.t0
    except ValueError:
        t0 = 0.0
    try:
        return fit_pfit(series, params, t_max=t_final, t0=t0)
    except ValueError:
        return None


def compare_coupled(coupled_cfg: SolverConfig,
                    uncoupled_cfg: SolverConfig | None = None,
                    thresholds: tuple[float, ...] = (1.12, 1.495),
                    workers: int = 1) -> CompareReport:
    """Time a coupled run against its uncoupled twin on period thresholds.

    Both runs must share the seed, the box, and the composition draw so
    the comparison starts from the same field.  A threshold that is never
    reached is censored at that run's final time.
    """
    if uncoupled_cfg is None:
        uncoupled_cfg = uncoupled_twin(coupled_cfg)
    if not coupled_cfg.coupled:
        raise ValueError("first configuration must be coupled")
    if uncoupled_cfg.coupled:
        raise ValueError("second configuration must be uncoupled")
    for name in ("seed", "n", "L", "alpha", "beta", "kappa", "init_phi"):
        a, b = getattr(coupled_cfg, name), getattr(uncoupled_cfg, name)
        if a != b:
            raise ValueError(f"configurations disagree on {name}: {a!r} vs {b!r}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=2) as pool:
            fut_c = pool.submit(run, coupled_cfg)
            fut_u = pool.submit(run, uncoupled_cfg)
            res_c, res_u = fut_c.result(), fut_u.result()
    else:
        res_c, res_u = run(coupled_cfg), run(uncoupled_cfg)

    def crossings(result: RunResult) -> tuple[float | None, ...]:
        s = result.series
        return tuple(first_crossing(s["t"], s["period"], thr) for thr in thresholds)

    params = coupled_cfg.params
    return CompareReport(
        thresholds=tuple(float(t) for t in thresholds),
        coupled=res_c, uncoupled=res_u,
        coupled_crossings=crossings(res_c),
        uncoupled_crossings=crossings(res_u),
        coupled_fit=_fit_series(res_c.series, params, coupled_cfg.t_final),
        uncoupled_fit=_fit_series(res_u.series, params, uncoupled_cfg.t_final),
    )


def detect_energy_drops(times: np.ndarray, energies: np.ndarray,
                        flat_tol: float = 5e-4, min_len: int = 5,
                        drop_min: float = 0.01) -> list[tuple[float, float]]:
    """Locate staircase drops in a free-energy record.

    A plateau is a run of at least ``min_len`` consecutive records whose
    successive differences stay below ``flat_tol``.  Each pair of adjacent
    plateaus whose levels differ by more than ``drop_min`` contributes one
    ``(time, size)`` entry, timed at the gap midpoint.  The early
    continuous decay produces no plateau and therefore no drop.
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if times.shape != energies.shape or times.ndim != 1:
        raise ValueError("times and energies must be matching 1-D arrays")
    if len(times) < min_len + 1:
        return []
    flat = np.abs(np.diff(energies)) < flat_tol

    plateaus: list[tuple[int, int]] = []
    start = None
    for i, ok in enumerate(flat):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if i - start + 1 >= min_len:
                plateaus.append((start, i))
            start = None
    if start is not None and len(energies) - start >= min_len:
        plateaus.append((start, len(energies) - 1))

    drops: list[tuple[float, float]] = []
    for (s0, e0), (s1, e1) in zip(plateaus, plateaus[1:]):
        level0 = float(np.mean(energies[s0:e0 + 1]))
        level1 = float(np.mean(energies[s1:e1 + 1]))
        size = level0 - level1
        if size > drop_min:
            t_mid = 0.5 * (times[e0] + times[s1])
            drops.append((float(t_mid), size))
    return drops
