"""Result aggregation and significance analysis.

Per-condition scores (paired across conditions by image) are summarized as
medians with best / second-best annotations, compared with pairwise two-tailed
paired t-tests, and grouped into maximal runs of conditions that show no
evidence of a significant difference.

The Student-t CDF is evaluated through the regularized incomplete beta
function; no multiple-comparison correction is applied by default (a
Bonferroni flag is available for callers who want one).
"""

import csv
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import ContractError

_BETACF_EPS = 1e-12
_BETACF_TINY = 1e-300
_BETACF_MAXIT = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz).

    Evaluates the even/odd-step continued fraction whose value times the
    prefactor x^a (1-x)^b / (a B(a, b)) gives I_x(a, b); convergence is to
    relative 1e-12, well inside the documented 1e-10 budget.
    """
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_TINY:
        d = _BETACF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAXIT + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1]."""
    if not (a > 0 and b > 0):
        raise ContractError("betainc_reg requires a, b > 0")
    if x < 0.0 or x > 1.0:
        raise ContractError("betainc_reg requires x in [0, 1]")
    if x == 0.0 or x == 1.0:
        return float(x)
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the fraction directly where it converges fast, the symmetric
    # complement otherwise.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """CDF of Student's t distribution with ``df`` degrees of freedom."""
    if not df > 0:
        raise ContractError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * betainc_reg(0.5 * df, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def paired_ttest(a: Sequence[float], b: Sequence[float]):
    """Two-tailed paired t-test.

    Returns (t, p) with t = mean(d) / (sd(d)/sqrt(N)) on the paired
    differences (sample standard deviation, N-1 denominator) and p from the
    Student-t distribution with N-1 degrees of freedom.

    Degenerate cases: all-zero differences give (0, 1); zero-variance
    differences with a nonzero mean give (+-inf, 0).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ContractError(f"paired vectors must share one length, got {a.shape} vs {b.shape}")
    n = a.size
    if n < 2:
        raise ContractError("paired t-test needs at least 2 pairs")
    d = a - b
    md = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if md == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, md), 0.0
    t = md / (sd / math.sqrt(n))
    df = n - 1
    p = betainc_reg(0.5 * df, 0.5, df / (df + t * t))
    return t, p


@dataclass
class ScoreMatrix:
    """Per-condition score vectors, paired across conditions by image order."""

    conditions: List[str]
    scores: np.ndarray  # (n_conditions, n_images)
    image_ids: Optional[List[str]] = None

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.ndim != 2 or self.scores.shape[0] != len(self.conditions):
            raise ContractError(
                f"scores must be (n_conditions, N); got {self.scores.shape} "
                f"for {len(self.conditions)} conditions"
            )
        if self.image_ids is not None and len(self.image_ids) != self.scores.shape[1]:
            raise ContractError("image_ids length does not match score vectors")

    @property
    def n(self) -> int:
        return self.scores.shape[1]

    def medians(self) -> np.ndarray:
        return np.median(self.scores, axis=1)


def pairwise_ttests(m: ScoreMatrix, bonferroni: bool = False):
    """All-pairs paired t-tests; returns (t_matrix, p_matrix).

    Diagonals are (0, 1).  With ``bonferroni`` the p values are multiplied by
    the number of distinct pairs (and capped at 1).
    """
    c = len(m.conditions)
    t_mat = np.zeros((c, c))
    p_mat = np.ones((c, c))
    n_pairs = c * (c - 1) // 2
    for i in range(c):
        for j in range(i + 1, c):
            t, p = paired_ttest(m.scores[i], m.scores[j])
            if bonferroni and n_pairs > 0:
                p = min(1.0, p * n_pairs)
            t_mat[i, j], t_mat[j, i] = t, -t
            p_mat[i, j] = p_mat[j, i] = p
    return t_mat, p_mat


@dataclass
class SignificanceGroups:
    """Conditions sorted by median (descending) and their non-significant runs.

    Each group is a maximal contiguous index range [start, end] (inclusive,
    over the sorted order) in which every pair of conditions has p >= alpha.
    """

    sorted_conditions: List[str]
    groups: List[tuple] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sorted_conditions": list(self.sorted_conditions),
            "groups": [[int(s), int(e)] for s, e in self.groups],
        }


def significance_groups(m: ScoreMatrix, alpha: float = 0.05,
                        bonferroni: bool = False) -> SignificanceGroups:
    """Group conditions with no evidence of pairwise differences at ``alpha``.

    Conditions are sorted by median score, best first; a sliding window then
    emits every maximal contiguous run whose internal pairs are all
    non-significant.  Singleton runs appear when a condition differs
    significantly from both neighbors, so every condition lands in >= 1 group.
    """
    if not 0 < alpha < 1:
        raise ContractError("alpha must lie in (0, 1)")
    med = m.medians()
    order = sorted(range(len(m.conditions)), key=lambda i: (-med[i], i))
    sorted_scores = m.scores[order]
    sorted_labels = [m.conditions[i] for i in order]
    _, p = pairwise_ttests(
        ScoreMatrix(sorted_labels, sorted_scores, m.image_ids), bonferroni=bonferroni
    )
    ok = p >= alpha

    c = len(sorted_labels)
    groups = []
    prev_end = -1
    for start in range(c):
        # [start, prev_end] is all-pairs compatible (subset of the previous
        # window), so extension can resume from there.
        end = max(start, prev_end)
        while end + 1 < c and all(ok[k, end + 1] for k in range(start, end + 1)):
            end += 1
        if end > prev_end:  # maximal: not contained in an earlier window
            groups.append((start, end))
            prev_end = end
    return SignificanceGroups(sorted_labels, groups)


def median_table(m: ScoreMatrix):
    """Per-condition medians with best / second-best annotations.

    Returns a list of dicts {condition, median, rank} where rank is 1 for the
    best median (ties share rank 1), 2 for the next distinct value, else None.
    Higher scores rank better.
    """
    med = m.medians()
    distinct = sorted(set(med.tolist()), reverse=True)
    rows = []
    for label, value in zip(m.conditions, med.tolist()):
        if value == distinct[0]:
            rank = 1
        elif len(distinct) > 1 and value == distinct[1]:
            rank = 2
        else:
            rank = None
        rows.append({"condition": label, "median": value, "rank": rank})
    return rows


# ---------------------------------------------------------------------------
# Report assembly and serialization
# ---------------------------------------------------------------------------

def build_metric_report(m: ScoreMatrix, alpha: float = 0.05,
                        bonferroni: bool = False) -> dict:
    """Full per-metric report: scores, medians/ranks, t/p matrices, groups."""
    t_mat, p_mat = pairwise_ttests(m, bonferroni=bonferroni)
    groups = significance_groups(m, alpha=alpha, bonferroni=bonferroni)
    return {
        "conditions": list(m.conditions),
        "image_ids": list(m.image_ids) if m.image_ids is not None else None,
        "n": m.n,
        "scores": {c: m.scores[i].tolist() for i, c in enumerate(m.conditions)},
        "median_table": median_table(m),
        "t_matrix": t_mat.tolist(),
        "p_matrix": p_mat.tolist(),
        "significance": groups.to_dict(),
    }


def build_report(matrices: dict, alpha: float = 0.05, bonferroni: bool = False) -> dict:
    """Assemble the evaluation report over {metric_name: ScoreMatrix}."""
    return {
        "alpha": alpha,
        "bonferroni": bonferroni,
        "metrics": {
            name: build_metric_report(m, alpha=alpha, bonferroni=bonferroni)
            for name, m in matrices.items()
        },
    }


def write_report_json(report: dict, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        json.dump(report, f, indent=1, sort_keys=True)
        f.write("\n")


def write_median_csv(report: dict, path) -> None:
    """Median table CSV: condition columns, one metric per row.

    Best medians are marked with a trailing ``*``, second-best with ``^``.
    """
    metric_names = sorted(report["metrics"])
    conditions = []
    for name in metric_names:
        for row in report["metrics"][name]["median_table"]:
            if row["condition"] not in conditions:
                conditions.append(row["condition"])
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric"] + conditions)
        for name in metric_names:
            table = {r["condition"]: r for r in report["metrics"][name]["median_table"]}
            cells = []
            for cond in conditions:
                row = table.get(cond)
                if row is None:
                    cells.append("")
                    continue
                mark = {1: " *", 2: " ^"}.get(row["rank"], "")
                cells.append(f"{row['median']:.6g}{mark}")
            writer.writerow([name] + cells)


def write_violin_csv(report: dict, metric: str, path) -> None:
    """Per-condition score columns (one row per image) for external plotting."""
    data = report["metrics"][metric]
    conditions = data["conditions"]
    ids = data["image_ids"] or [str(i) for i in range(data["n"])]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["image_id"] + conditions)
        for i, image_id in enumerate(ids):
            writer.writerow([image_id] + [repr(data["scores"][c][i]) for c in conditions])
