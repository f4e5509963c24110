"""Pipelines behind the command line: verify, sweep, embed and the descent cross-check."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCutWarning, Divergence
from .metrics import DEFAULT_C, DEFAULT_EXACT_CAP, assumption_report
from .oracles import LEMMA_IDS, check_all
from .pfa import (
    fit_pfa,
    target_error,
    theorem31_status,
    theorem32_structural_bound,
    theorem32_t_values,
)
from .spectral import decompose, generalized_loss, laplacian, minimize_loss

SWEEP_COLUMNS = (
    "t", "k", "sigma", "target_error", "bound_thm31", "bound_satisfied", "ratio_thm32",
    "alpha", "rho", "beta_max", "tau", "gamma_lower", "gamma_upper", "lambda_k1", "mass_ratio",
)
OUT_OF_RANGE = "out of theorem range"
NOT_APPLICABLE = "not applicable"


def jsonable(obj):
    """Recursively convert numpy scalars and non-finite floats to strict-JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(rows: list[dict], columns, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([csv_value(row.get(c)) for c in columns])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def run_verify(graph, domain, k: int, sigma: float = 2.0, c: float = DEFAULT_C,
               exact_gamma_cap: int = DEFAULT_EXACT_CAP, t_range=None, lemma_ids=LEMMA_IDS) -> dict:
    dec = decompose(graph)
    stats = assumption_report(graph, domain, k, c, exact_gamma_cap, decomposition=dec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateCutWarning)
        rep = minimize_loss(graph, k, sigma, decomposition=dec)
    reports = check_all(graph, domain, rep, lemma_ids, t_range, c=c, exact_gamma_cap=exact_gamma_cap)
    return jsonable({
        "k": k,
        "sigma": sigma,
        "degenerate_cut": rep.degenerate_cut,
        "warnings": [str(w.message) for w in caught],
        "stats": stats.to_dict(),
        "lemmas": [r.to_dict() for r in reports],
    })


def verify_exit_code(report: dict, require_assumptions: bool = False) -> int:
    """0 iff no applicable lemma is violated (and, optionally, every assumption verdict holds)."""
    if any(l["status"] == "violated" for l in report["lemmas"]):
        return 1
    if require_assumptions and not all(v["holds"] for v in report["stats"]["verdicts"].values()):
        return 1
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepConfig:
    t_values: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    k_values: list[int] = field(default_factory=lambda: [4])
    sigma: float = 2.0
    c: float = DEFAULT_C
    exact_gamma_cap: int = DEFAULT_EXACT_CAP
    thm32_multipliers: tuple[int, ...] = (1, 2, 4)
    include_thm32_rows: bool = True

    def __post_init__(self):
        if not self.t_values or not self.k_values:
            raise ValueError("sweep needs at least one t and one k")
        if any(t < 1 for t in self.t_values):
            raise ValueError("t values must be positive")
        self.t_values = sorted(set(int(t) for t in self.t_values))
        self.k_values = sorted(set(int(k) for k in self.k_values))


def run_sweep(graph, domain, config: SweepConfig) -> list[dict]:
    """One row per (k, t): measured target error, explicit-constant bound and the
    unit-constant ratio against the average-expansion bound."""
    dec = decompose(graph)
    rows = []
    for k in config.k_values:
        stats = assumption_report(graph, domain, k, config.c, config.exact_gamma_cap, decomposition=dec)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCutWarning)
            rep = minimize_loss(graph, k, config.sigma, decomposition=dec)
        clf = fit_pfa(rep, graph, domain)
        ts = list(config.t_values)
        if config.include_thm32_rows:
            ts = sorted(set(ts) | set(theorem32_t_values(stats, config.thm32_multipliers)))
        structural = theorem32_structural_bound(stats)
        for t in ts:
            err = target_error(clf, rep, graph, domain, t).target_error
            bound, status = theorem31_status(stats, t, config.sigma)
            if bound is not None:
                bound_col, ok = bound, err <= bound
            else:
                bound_col = OUT_OF_RANGE if status == "out_of_range" else NOT_APPLICABLE
                ok = NOT_APPLICABLE
            if err == 0:
                ratio = 0.0
            else:
                ratio = err / structural if structural > 0 else math.inf
            rows.append({
                "t": t, "k": k, "sigma": config.sigma, "target_error": err,
                "bound_thm31": bound_col, "bound_satisfied": ok, "ratio_thm32": ratio,
                "alpha": stats.alpha, "rho": stats.rho, "beta_max": stats.beta_max, "tau": stats.tau,
                "gamma_lower": stats.gamma_lower, "gamma_upper": stats.gamma_upper,
                "lambda_k1": stats.lambda_k1, "mass_ratio": stats.source_target_mass_ratio,
            })
    return rows


# ---------------------------------------------------------------------------
# embed
# ---------------------------------------------------------------------------


def embedding_rows(rep) -> tuple[list[str], list[dict]]:
    cols = ["vertex"] + [f"f{j + 1}" for j in range(rep.k)]
    rows = [{"vertex": x, **{f"f{j + 1}": float(rep.F[x, j]) for j in range(rep.k)}} for x in range(rep.F.shape[0])]
    return cols, rows


# ---------------------------------------------------------------------------
# gradient-descent cross-check
# ---------------------------------------------------------------------------

GD_MAX_N = 200


@dataclass
class GdReport:
    steps: int
    final_loss: float
    closed_form_loss: float
    loss_gap: float
    frobenius_gap: float
    initial_loss: float


def _weighted_loss(Lap, X, sigma, k):
    cov = X.T @ X
    return 2.0 * np.trace(X.T @ Lap @ X) + sigma * np.sum((cov - np.eye(k)) ** 2)


def gd_crosscheck(graph, k: int, sigma: float = 2.0, steps: int = 5000, lr: float = 0.05,
                  seed: int = 0, patience: int = 10) -> GdReport:
    """Full-batch gradient descent on the generalized loss from a seeded start.

    Descent runs on ``X = D^{1/2} F`` (a fixed invertible rescaling of the free
    n x k matrix F), where the loss is ``2 tr(X^T L X) + sigma ||X^T X - I||_F^2``.
    Raises Divergence after ``patience`` consecutive loss increases.
    """
    n = graph.n
    if n > GD_MAX_N:
        raise ValueError(f"gradient-descent check is limited to n <= {GD_MAX_N}")
    Lap = laplacian(graph)
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, k)) / math.sqrt(n)
    eye = np.eye(k)
    loss = _weighted_loss(Lap, X, sigma, k)
    initial = loss
    rising = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            grad = 4.0 * Lap @ X + 4.0 * sigma * X @ (X.T @ X - eye)
            X = X - lr * grad
            new = _weighted_loss(Lap, X, sigma, k)
            if not math.isfinite(new):
                raise Divergence("loss became non-finite")
            rising = rising + 1 if new > loss else 0
            if rising >= patience:
                raise Divergence(f"loss increased for {patience} consecutive steps")
            loss = new
    sw = np.sqrt(graph.marginals)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateCutWarning)
        best = minimize_loss(graph, k, sigma)
    final = generalized_loss(graph, X / sw[:, None], sigma)
    closed = generalized_loss(graph, best.F, sigma)
    gap = float(np.linalg.norm(X @ X.T - best.F_tilde @ best.F_tilde.T))
    return GdReport(steps, float(final), float(closed), float(final - closed), gap, float(initial))
