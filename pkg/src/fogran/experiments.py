"""Single-point evaluation, parameter sweeps, the (d_c, v) region map and
self-validation runs."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .capacity import CapacityOracle
from .config import ConfigError, NetworkConfig
from .policy_cran import binary_spec_for, cran_closed_policy, cran_lp_policy, cran_two_user_sum_rate
from .policy_dran import dran_policy
from .policy_fran import fran_closed_policy, fran_lp_policy, fran_two_user_sum_rate
from .scenario import RatePolicy, Scenario
from .simulate import run

SWEEP_HEADER = ("param", "split", "analytic_rate", "empirical_rate", "empirical_outage", "stderr")
REGION_HEADER = ("dc", "v", "winner", "margin")

# config field swept by each parameter name
SWEEP_FIELDS = {"d_c": "d_c", "d_e": "d_e", "eps": "eps", "gamma_s": "gamma_s_db",
                "gamma_i": "gamma_i_db", "v": "velocity_kmh"}

PRESETS = {
    "fig5": ({"eps": 0.0, "d_e": 2}, "d_c", [0, 1, 2, 3, 4, 5, 6, 7, 8]),
    "fig6": ({"d_c": 3}, "d_e", [0, 1, 2, 3, 4, 5, 6]),
    "fig6-eps": ({"d_c": 3, "eps": 1e-3}, "d_e", [0, 1, 2, 3, 4, 5, 6]),
    "fig7": ({"d_c": 5, "d_e": 2}, "eps", [0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1]),
    "fig9": ({"eps": 1e-3, "d_c": 3}, "gamma_s", [0, 2.5, 5, 7.5, 10, 12.5, 15]),
    "fig10": ({"eps": 1e-2, "d_c": 3}, "gamma_i", [-10, -5, 0, 5, 10]),
}
REGION_PRESET = ({"d_e": 3, "n_s": 12, "n_i": 12, "eps": 0.01},
                 list(range(10)), [10.0 + 190.0 * i / 9 for i in range(10)])


def build_policy(scn: Scenario, split: str) -> RatePolicy:
    if split == "D-RAN":
        return dran_policy(scn)
    if split == "C-RAN":
        return cran_lp_policy(scn)
    if split == "F-RAN":
        return fran_lp_policy(scn)
    if split == "C-RAN-closed":
        return cran_closed_policy(scn, binary_spec_for(scn, scn.d_cloud))
    if split == "F-RAN-closed":
        return fran_closed_policy(scn, binary_spec_for(scn, scn.d_cloud))
    raise ConfigError(f"unknown split {split!r}")


def closed_form_value(scn: Scenario, split: str) -> float:
    spec = binary_spec_for(scn, scn.d_cloud)
    if split == "C-RAN-closed":
        return cran_two_user_sum_rate(spec, scn.eps)
    return fran_two_user_sum_rate(spec, scn.d_e, scn.eps)


@dataclass
class SweepRow:
    param: float
    split: str
    analytic_rate: float
    empirical_rate: float = math.nan
    empirical_outage: float = math.nan
    stderr: float = math.nan
    error: str = ""

    def cells(self) -> list[str]:
        def fmt(x: float) -> str:
            return "nan" if math.isnan(x) else f"{x:.10g}"
        analytic = f"error: {self.error}" if self.error else fmt(self.analytic_rate)
        return [f"{self.param:g}", self.split, analytic, fmt(self.empirical_rate),
                fmt(self.empirical_outage), fmt(self.stderr)]


@dataclass
class SweepResult:
    parameter: str
    rows: list[SweepRow] = field(default_factory=list)

    def series(self, split: str, empirical: bool = False) -> tuple[np.ndarray, np.ndarray]:
        sel = [r for r in self.rows if r.split == split and not r.error]
        x = np.array([r.param for r in sel])
        y = np.array([r.empirical_rate if empirical else r.analytic_rate for r in sel])
        return x, y

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in self.rows:
            w.writerow(r.cells())
        return buf.getvalue()


class OraclePool:
    """One capacity oracle per (K, antenna mode, samples, seed), shared across grid points."""

    def __init__(self, cache_path: str | None = None):
        self.cache_path = cache_path
        self._oracles: dict[tuple, CapacityOracle] = {}

    def get(self, cfg: NetworkConfig) -> CapacityOracle:
        key = (cfg.k, cfg.antenna_mode, cfg.mc_samples, cfg.seed)
        if key not in self._oracles:
            oracle = cfg.make_oracle()
            if self.cache_path:
                oracle.load(self.cache_path)
            self._oracles[key] = oracle
        return self._oracles[key]

    def save(self) -> int:
        if not self.cache_path:
            return 0
        # the file holds one oracle's entries; merge by saving the largest
        best = max(self._oracles.values(), key=lambda o: o.cache_size, default=None)
        return best.save(self.cache_path) if best is not None else 0


def evaluate(cfg: NetworkConfig, pool: OraclePool | None = None, param: float = math.nan,
             horizon: int | None = None) -> list[SweepRow]:
    """Analytic (and, if ``horizon`` > 0, simulated) sum rates of every requested split."""
    pool = pool or OraclePool(cfg.cache)
    horizon = cfg.horizon if horizon is None else horizon
    scn = cfg.scenario(pool.get(cfg))
    rows = []
    for split in cfg.splits:
        try:
            policy = build_policy(scn, split)
            row = SweepRow(param, split, policy.analytic_sum_rate)
            if horizon > 0:
                sim = run(scn, policy, horizon, cfg.seed)
                row.empirical_rate = sim.credited_rate
                row.empirical_outage = sim.outage_rate
                row.stderr = sim.credited_stderr
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            row = SweepRow(param, split, math.nan, error=str(exc).replace(",", ";"))
        rows.append(row)
    return rows


def run_sweep(cfg: NetworkConfig, parameter: str, values: Sequence[float],
              pool: OraclePool | None = None, horizon: int | None = None,
              progress: Callable[[str], None] | None = None) -> SweepResult:
    if parameter not in SWEEP_FIELDS:
        raise ConfigError(f"cannot sweep {parameter!r}; choose from {', '.join(SWEEP_FIELDS)}")
    if len(values) == 0:
        raise ConfigError("sweep grid is empty")
    pool = pool or OraclePool(cfg.cache)
    result = SweepResult(parameter)
    fld = SWEEP_FIELDS[parameter]
    for value in values:
        try:
            point = cfg.replace(**{fld: type(getattr(cfg, fld))(value)})
        except ConfigError as exc:
            result.rows.extend(SweepRow(float(value), s, math.nan, error=str(exc)) for s in cfg.splits)
            continue
        if progress:
            progress(f"{parameter}={value}")
        result.rows.extend(evaluate(point, pool, float(value), horizon))
    result.rows.sort(key=lambda r: (r.param, cfg.splits.index(r.split)))
    return result


@dataclass
class RegionCell:
    dc: int
    v: float
    winner: str
    margin: float  # C-RAN minus F-RAN sum rate


def region_map(cfg: NetworkConfig, dc_values: Iterable[int], v_values: Iterable[float],
               pool: OraclePool | None = None) -> list[RegionCell]:
    """Label each (d_c, v) cell with the better of C-RAN and F-RAN; ties go to C-RAN."""
    pool = pool or OraclePool(cfg.cache)
    cells = []
    for v in v_values:
        base = cfg.replace(velocity_kmh=float(v))
        scn = base.scenario(pool.get(base))
        f_rate = fran_lp_policy(scn).analytic_sum_rate  # independent of d_c
        for dc in dc_values:
            c_rate = cran_lp_policy(scn.with_(d_c=int(dc))).analytic_sum_rate
            margin = c_rate - f_rate
            cells.append(RegionCell(int(dc), float(v), "C-RAN" if margin >= 0 else "F-RAN", margin))
    cells.sort(key=lambda c: (c.dc, c.v))
    return cells


def region_csv(cells: Sequence[RegionCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REGION_HEADER)
    for c in cells:
        w.writerow([c.dc, f"{c.v:g}", c.winner, f"{c.margin:.10g}"])
    return buf.getvalue()


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def validate(cfg: NetworkConfig, pool: OraclePool | None = None, horizon: int | None = None) -> list[Check]:
    """Simulate every analytic policy of ``cfg`` and apply the 3-sigma checks."""
    pool = pool or OraclePool(cfg.cache)
    horizon = cfg.horizon if horizon is None else horizon
    if horizon < 1:
        raise ConfigError("validation needs a positive horizon")
    oracle = pool.get(cfg)
    scn = cfg.scenario(oracle)
    checks = []
    for split in cfg.splits:
        policy = build_policy(scn, split)
        sim = run(scn, policy, horizon, cfg.seed)
        gap = sim.credited_rate - sim.analytic_rate
        checks.append(Check(f"{split} rate", sim.within(3.0),
                            f"analytic {sim.analytic_rate:.6f} empirical {sim.credited_rate:.6f} "
                            f"gap {gap:+.2e} (3 sigma {3 * sim.credited_stderr:.2e})"))
        if cfg.eps == 0:
            checks.append(Check(f"{split} zero outage", sim.outage_events == 0,
                                f"{sim.outage_events} outage slots"))
        else:
            limit = cfg.eps + 3 * sim.outage_sigma(cfg.eps)
            checks.append(Check(f"{split} outage budget", sim.outage_rate <= limit,
                                f"{sim.outage_rate:.2e} vs limit {limit:.2e}"))
    binary = cfg.k == 2 and cfg.n_s == 1 and cfg.n_i == 2 and cfg.antenna_mode == "full"
    if binary:
        spec = binary_spec_for(scn, scn.d_cloud)
        tol = 1e-6 + spec.mc_stderr
        pairs = []
        # both routes pick from the same delayed CSI only once it is actually stale
        if cfg.eps == 0 and scn.d_cloud >= 1:
            pairs.append(("C-RAN closed vs LP", cran_two_user_sum_rate(spec, 0.0),
                          cran_lp_policy(scn).analytic_sum_rate))
        if cfg.d_e >= 1:
            pairs.append(("F-RAN closed vs LP", fran_two_user_sum_rate(spec, cfg.d_e, cfg.eps),
                          fran_lp_policy(scn).analytic_sum_rate))
        for name, a, b in pairs:
            checks.append(Check(name, abs(a - b) <= tol, f"{a:.6f} vs {b:.6f} (tol {tol:.1e})"))
        # remark anchor: with fresh CSI the closed form is the stationary average of capacities
        s0 = binary_spec_for(scn.with_(d_e=0, d_c=0), 0)
        eps0 = cfg.eps if 0 < cfg.eps < 1 else 0.5
        pl, ph = s0.pi_L, s0.pi_H
        expect = pl**2 * s0.C_LL + 2 * pl * ph * s0.C_LH + ph**2 * s0.C_HH
        got = cran_two_user_sum_rate(s0, eps0)
        checks.append(Check("C-RAN fresh-CSI anchor", abs(got - expect) <= 1e-9,
                            f"{got:.9f} vs {expect:.9f}"))
    return checks
