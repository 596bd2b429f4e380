"""Discrete audits of the parabolic-problem properties.

Tracks extrema and the integral monitors J1, J1+, J2, J2+ over a run,
and turns the series into pass/violated verdicts for the maximum
principle, the non-negative constraint, the comparison principle, and
the decay property.  Reductions run in fixed index order so reports are
run-to-run identical.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-12


@dataclass
class Verdict:
    violated: bool
    first_time: float = None
    worst_value: float = None
    worst_node: tuple = None

    @property
    def label(self):
        return "violated" if self.violated else "pass"

    def to_dict(self):
        d = {"verdict": self.label}
        if self.violated:
            d.update(first_time=self.first_time, worst_value=self.worst_value,
                     worst_node=list(self.worst_node) if self.worst_node is not None else None)
        return d


@dataclass
class PropertyReport:
    """Time series of solution monitors plus per-property verdicts."""

    times: list = field(default_factory=list)
    u_min: list = field(default_factory=list)
    u_max: list = field(default_factory=list)
    n_neg: list = field(default_factory=list)
    j1: list = field(default_factory=list)
    j1_pos: list = field(default_factory=list)
    j2: list = field(default_factory=list)
    j2_pos: list = field(default_factory=list)
    error: list = field(default_factory=list)
    min_node: list = field(default_factory=list)
    max_node: list = field(default_factory=list)
    n_nodes: int = 0
    cadence: int = 1
    verdicts: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def record(self, t, u, mask, dx, ndim, oracle=None):
        (lo, lo_node), (hi, hi_node) = _extrema_with_nodes(u, mask)
        self.times.append(t)
        self.u_min.append(lo)
        self.u_max.append(hi)
        self.min_node.append(lo_node)
        self.max_node.append(hi_node)
        self.n_neg.append(count_negatives(u, mask))
        v1, v1p, v2, v2p = integrals(u, dx, ndim, mask)
        self.j1.append(v1)
        self.j1_pos.append(v1p)
        self.j2.append(v2)
        self.j2_pos.append(v2p)
        self.n_nodes = int(np.count_nonzero(mask))
        if oracle is not None:
            self.error.append(oracle(u, t))

    def finalize(self, lower=None, upper=None, tol=DEFAULT_TOL,
                 decay=False, decay_tol=None):
        if lower is not None or upper is not None:
            self.verdicts["maximum_principle"] = check_maximum_principle(
                self, lower=lower, upper=upper, tol=tol)
        self.verdicts["non_negativity"] = check_non_negativity(self, tol=tol)
        if decay:
            self.verdicts["decay"] = check_decay(np.asarray(self.j2), tol=decay_tol)
        return self

    @property
    def any_violation(self):
        return any(v.violated for v in self.verdicts.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in self.meta.items():
            buf.write(f"# {key} = {val}\n")
        buf.write(f"# cadence = {self.cadence}\n")
        buf.write(f"# n_nodes = {self.n_nodes}\n")
        cols = ["t", "u_min", "u_max", "N_neg", "J1", "J1_pos", "J2", "J2_pos"]
        series = [self.times, self.u_min, self.u_max, self.n_neg,
                  self.j1, self.j1_pos, self.j2, self.j2_pos]
        if self.error:
            cols.append("error")
            series.append(self.error)
        buf.write(",".join(cols) + "\n")
        for row in zip(*series):
            buf.write(",".join(f"{v:d}" if isinstance(v, (int, np.integer))
                               else f"{v:.17g}" for v in row) + "\n")
        for name, verdict in self.verdicts.items():
            buf.write(f"# {name}: {verdict.label}")
            if verdict.violated:
                buf.write(f" (first_time={verdict.first_time:.17g}, "
                          f"worst={verdict.worst_value:.17g}, node={verdict.worst_node})")
            buf.write("\n")
        return buf.getvalue()

    def summary(self) -> dict:
        out = {
            "n_nodes": self.n_nodes,
            "cadence": self.cadence,
            "final_time": self.times[-1] if self.times else None,
            "u_min": min(self.u_min) if self.u_min else None,
            "u_max": max(self.u_max) if self.u_max else None,
            "u_min_final": self.u_min[-1] if self.u_min else None,
            "u_max_final": self.u_max[-1] if self.u_max else None,
            "n_neg_final": self.n_neg[-1] if self.n_neg else None,
            "error_final": self.error[-1] if self.error else None,
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
        }
        out.update(self.meta)
        return out


def _extrema_with_nodes(u, mask):
    vals = u[mask]
    if vals.size == 0:
        raise ValueError("extrema over an empty node set")
    where = np.argwhere(mask)
    i_min = int(np.argmin(vals))
    i_max = int(np.argmax(vals))
    return ((float(vals[i_min]), tuple(where[i_min])),
            (float(vals[i_max]), tuple(where[i_max])))


def track_extrema(u, mask=None):
    """Exact (min, max) of u over the masked (non-solid) nodes."""
    u = np.asarray(u)
    if mask is None:
        mask = np.ones(u.shape, dtype=bool)
    (lo, _), (hi, _) = _extrema_with_nodes(u, mask)
    return lo, hi


def count_negatives(u, mask=None, tol=DEFAULT_TOL) -> int:
    """Number of masked nodes with u < -tol."""
    u = np.asarray(u)
    if mask is None:
        return int(np.count_nonzero(u < -tol))
    return int(np.count_nonzero(u[mask] < -tol))


def integrals(u, dx, ndim, mask=None):
    """Riemann sums (J1, J1+, J2, J2+) with node value x cell volume."""
    u = np.asarray(u, dtype=float)
    if mask is not None:
        u = u[mask]
    cell = dx ** ndim
    clipped = np.maximum(u, 0.0)
    return (float(u.sum() * cell), float(clipped.sum() * cell),
            float((u * u).sum() * cell), float((clipped * clipped).sum() * cell))


def clip_negatives(u):
    """max(u, 0) pointwise; post-processing only, never inside a solver."""
    return np.maximum(np.asarray(u), 0.0)


def check_maximum_principle(report: PropertyReport, lower=None, upper=None,
                            tol=DEFAULT_TOL) -> Verdict:
    """Violated iff u_min < lower - tol or u_max > upper + tol at any sample."""
    for k, t in enumerate(report.times):
        if lower is not None and report.u_min[k] < lower - tol:
            return Verdict(True, first_time=t, worst_value=min(report.u_min),
                           worst_node=report.min_node[int(np.argmin(report.u_min))])
        if upper is not None and report.u_max[k] > upper + tol:
            return Verdict(True, first_time=t, worst_value=max(report.u_max),
                           worst_node=report.max_node[int(np.argmax(report.u_max))])
    return Verdict(False)


def check_non_negativity(report: PropertyReport, tol=DEFAULT_TOL) -> Verdict:
    for k, t in enumerate(report.times):
        if report.u_min[k] < -tol:
            worst = int(np.argmin(report.u_min))
            return Verdict(True, first_time=t, worst_value=report.u_min[worst],
                           worst_node=report.min_node[worst])
    return Verdict(False)


def check_comparison(u1_series, u2_series, tol=DEFAULT_TOL) -> Verdict:
    """Violated iff u1 > u2 + tol anywhere; u1 is the run with smaller data."""
    u1 = np.asarray(u1_series, dtype=float)
    u2 = np.asarray(u2_series, dtype=float)
    if u1.shape != u2.shape:
        raise ValueError("comparison series have mismatched shapes")
    excess = u1 - u2
    bad = excess > tol
    if not bad.any():
        return Verdict(False)
    first = np.argwhere(bad)[0]
    worst = np.unravel_index(int(np.argmax(excess)), excess.shape)
    return Verdict(True, first_time=float(first[0]),
                   worst_value=float(excess[worst]), worst_node=tuple(worst))


def check_decay(j2_series, tol=None) -> Verdict:
    """Violated iff J2 increases between consecutive samples by more than tol.

    Default tol is 1e-12 * J2(0).
    """
    j2 = np.asarray(j2_series, dtype=float)
    if tol is None:
        tol = 1e-12 * (j2[0] if j2.size else 1.0)
    diff = np.diff(j2)
    bad = diff > tol
    if not bad.any():
        return Verdict(False)
    k = int(np.argmax(bad))
    return Verdict(True, first_time=float(k), worst_value=float(diff.max()),
                   worst_node=(int(np.argmax(diff)),))


def error_norm(u, u_exact, mask=None) -> float:
    """Error = (1/N) * sqrt(sum_i (u_i - u_exact_i)^2) over masked nodes."""
    u = np.asarray(u, dtype=float)
    ue = np.asarray(u_exact, dtype=float)
    if mask is not None:
        u, ue = u[mask], ue[mask]
    n = u.size
    return float(np.sqrt(((u - ue) ** 2).sum()) / n)


def critical_dt_check(dx, dt, diffusivity):
    """Threshold dx^2/(6 D) and whether dt meets it (inclusive)."""
    if dx <= 0 or dt <= 0 or diffusivity <= 0:
        raise ValueError("dx, dt and D must be positive")
    threshold = dx * dx / (6.0 * diffusivity)
    return dt >= threshold, threshold
