"""Social-outcome metrics computed from episode logs.

Conventions frozen here: the matrix norm in the reciprocity score is the
Frobenius norm (a spectral variant is available but never mixed within one
experiment); degenerate zero-care episodes score S = 0 and D = 0; care
matrices are normalized per episode by total breakages and averaged
afterwards.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, fields

import numpy as np

from .engine import EpisodeLog
from .topology import Topology, build_topology, downstream_set, upstream_set

METRICS_SCHEMA_VERSION = "supplysim-metrics v1"


class NegativeEntry(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class TooFewRuns(ValueError):
    pass


@dataclass
class SocialMetrics:
    R: np.ndarray  # per-center processed units (= reward of its agent)
    B: np.ndarray  # per-center breakages
    C_raw: np.ndarray  # care counts, carer row -> receiver column
    C_norm: np.ndarray  # C_raw / total breakages (zero matrix if none)
    S: float
    D: float
    efficiency: float
    group_reward: float
    total_care_per_agent: np.ndarray  # row sums of C_raw

    def scalars(self) -> dict[str, float]:
        return {
            "group_reward": float(self.group_reward),
            "S": float(self.S),
            "D": float(self.D),
            "efficiency": float(self.efficiency),
            "total_care": float(self.C_raw.sum()),
        }


@dataclass
class MatrixDecomposition:
    C_sym: np.ndarray
    C_anti: np.ndarray


def decompose(C: np.ndarray) -> MatrixDecomposition:
    C = np.asarray(C, dtype=float)
    return MatrixDecomposition(C_sym=(C + C.T) / 2.0, C_anti=(C - C.T) / 2.0)


def reciprocity(C: np.ndarray, norm: str = "frobenius") -> float:
    """Symmetry score of a nonnegative care matrix in [0, 1].

    (|C_sym| - |C_anti|) / (|C_sym| + |C_anti|); 0 for the zero matrix.
    """
    C = np.asarray(C, dtype=float)
    if (C < 0).any():
        raise NegativeEntry("care matrix must be elementwise nonnegative")
    d = decompose(C)
    if norm == "frobenius":
        ns, na = np.linalg.norm(d.C_sym, "fro"), np.linalg.norm(d.C_anti, "fro")
    elif norm == "spectral":
        ns, na = np.linalg.norm(d.C_sym, 2), np.linalg.norm(d.C_anti, 2)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    total = ns + na
    if total == 0.0:
        return 0.0
    return float((ns - na) / total)


def care_direction(C: np.ndarray, t: Topology) -> float:
    """Flow-relative orientation of care: +1 fully upstream, -1 fully
    downstream, 0 for the zero matrix."""
    C = np.asarray(C, dtype=float)
    if (C < 0).any():
        raise NegativeEntry("care matrix must be elementwise nonnegative")
    n = t.num_centers
    if C.shape != (n, n):
        raise DimensionMismatch(f"care matrix shape {C.shape} does not match {n} centers")
    total = C.sum()
    if total == 0.0:
        return 0.0
    num = 0.0
    for i in t.centers:
        ups = upstream_set(t, i)
        downs = downstream_set(t, i)
        for j in t.centers:
            sign = (1.0 if j in ups else 0.0) - (1.0 if j in downs else 0.0)
            if sign:
                num += sign * C[i - 1, j - 1]
    return float(num / total)


def efficiency(log: EpisodeLog) -> float:
    """Fraction of spawned units that left through a sink (0 if none spawned)."""
    log.require_complete()
    tot = log.totals()
    if tot["spawned"] == 0:
        return 0.0
    return tot["sank"] / tot["spawned"]


def aggregate(log: EpisodeLog, norm: str = "frobenius") -> SocialMetrics:
    """Exact event sums over one complete episode log plus derived scalars."""
    log.require_complete()
    n = int(log.header["num_centers"])
    R = np.zeros(n, dtype=np.int64)
    B = np.zeros(n, dtype=np.int64)
    C = np.zeros((n, n), dtype=np.int64)
    for rec in log.steps:
        for c in rec.events.processed:
            R[c - 1] += 1
        for c in rec.events.broke:
            B[c - 1] += 1
        for carer, owner in rec.events.repaired:
            C[carer - 1, owner - 1] += 1
    topo = build_topology(n, [tuple(e) for e in log.header["edges"]])
    total_b = int(B.sum())
    C_norm = C.astype(float) / total_b if total_b else np.zeros((n, n))
    return SocialMetrics(
        R=R,
        B=B,
        C_raw=C,
        C_norm=C_norm,
        S=reciprocity(C, norm=norm),
        D=care_direction(C, topo),
        efficiency=efficiency(log),
        group_reward=float(R.sum()),
        total_care_per_agent=C.sum(axis=1),
    )


@dataclass
class AveragedMetrics:
    n_runs: int
    mean: dict[str, np.ndarray | float]
    ci95: dict[str, np.ndarray | float]  # half-width of the normal-approx CI


_Z95 = 1.959963984540054  # two-sided 95% normal quantile


def average_metrics(runs: list[SocialMetrics]) -> AveragedMetrics:
    """Per-field mean and 95% normal-approximation confidence half-widths."""
    if len(runs) < 2:
        raise TooFewRuns("need at least 2 runs to average")
    mean: dict = {}
    ci: dict = {}
    for f in fields(SocialMetrics):
        stack = np.stack([np.asarray(getattr(r, f.name), dtype=float) for r in runs])
        mu = stack.mean(axis=0)
        stderr = stack.std(axis=0, ddof=1) / np.sqrt(len(runs))
        half = _Z95 * stderr
        if mu.ndim == 0:
            mean[f.name], ci[f.name] = float(mu), float(half)
        else:
            mean[f.name], ci[f.name] = mu, half
    return AveragedMetrics(n_runs=len(runs), mean=mean, ci95=ci)


# ---------------------------------------------------------------------------
# CSV export (schema versioned in the header comment)


def care_matrix_csv(C: np.ndarray, normalized: bool) -> str:
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    out = io.StringIO()
    out.write(f"# {METRICS_SCHEMA_VERSION} care-matrix normalized={str(normalized).lower()}\n")
    out.write("carer\\receiver," + ",".join(str(j) for j in range(1, n + 1)) + "\n")
    for i in range(n):
        out.write(str(i + 1) + "," + ",".join(_fmt(C[i, j]) for j in range(n)) + "\n")
    return out.getvalue()


def scalar_table_csv(rows: list[dict]) -> str:
    """Per-run scalar table: run, seed, group_reward, S, D, efficiency."""
    out = io.StringIO()
    out.write(f"# {METRICS_SCHEMA_VERSION} scalars\n")
    out.write("run,seed,group_reward,S,D,efficiency,total_care\n")
    for r in rows:
        out.write(
            ",".join(
                [
                    str(r["run"]),
                    str(r["seed"]),
                    _fmt(r["group_reward"]),
                    _fmt(r["S"]),
                    _fmt(r["D"]),
                    _fmt(r["efficiency"]),
                    _fmt(r["total_care"]),
                ]
            )
            + "\n"
        )
    return out.getvalue()


def curves_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    out.write(f"# {METRICS_SCHEMA_VERSION} curves\n")
    out.write("step,group_reward,total_care,S,D\n")
    for r in rows:
        out.write(
            f"{r['step']},{_fmt(r['group_reward'])},{_fmt(r['total_care'])},"
            f"{_fmt(r['S'])},{_fmt(r['D'])}\n"
        )
    return out.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))
