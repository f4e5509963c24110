"""Acceptance suite: one PASS/FAIL line per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the summary lines
(they are printed even without ``-s``).
"""

import math
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from spectral_transfer.errors import DegenerateCutWarning
from spectral_transfer.generators import alpha_family, generate_sbm, perturb, reference_params
from spectral_transfer.graph import graph_from_weights
from spectral_transfer.harness import SweepConfig, gd_crosscheck, run_sweep
from spectral_transfer.metrics import assumption_report
from spectral_transfer.oracles import LemmaChecker, random_walk_probability, walk_matrix
from spectral_transfer.pfa import fit_pfa, linear_probe_bound, linear_probe_error, target_error, theorem31_range
from spectral_transfer.spectral import generalized_loss, minimize_loss, normalized_adjacency, spectral_contrastive_loss

from _helpers import random_graph


@pytest.fixture
def report(capsys):
    def emit(cid, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] C{cid}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def family():
    return alpha_family(50)


def quiet_minimize(graph, k, sigma=2.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateCutWarning)
        return minimize_loss(graph, k, sigma)


def test_c01_spectral_exactness(report):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for n in np.linspace(10, 200, 20).astype(int):
        g = random_graph(rng, int(n), density=0.3)
        Ab = normalized_adjacency(g)
        for sigma in (1.0, 2.0):
            M = Ab / sigma + (1 - 1 / sigma) * np.eye(g.n)
            vals, vecs = np.linalg.eigh(M)
            for k in (2, 5, g.n):
                top = vecs[:, -k:]
                best = (top * np.clip(vals[-k:], 0, None)) @ top.T
                Ft = minimize_loss(g, k, sigma).F_tilde
                worst = max(worst, float(np.linalg.norm(Ft @ Ft.T - best)))
    elapsed = time.perf_counter() - start
    ok = report(1, worst <= 1e-7 and elapsed < 30, f"max Frobenius gap {worst:.2e} (<= 1e-7), {elapsed:.1f}s (< 30s)")
    assert ok


def test_c02_loss_equivalence(report):
    rng = np.random.default_rng(202)
    worst = 0.0
    for gi in range(20):
        g = random_graph(rng, int(rng.integers(10, 60)))
        k = int(rng.integers(1, 8))
        diffs = []
        for _ in range(10):
            F = rng.normal(size=(g.n, k))
            diffs.append(generalized_loss(g, F, 1.0) - spectral_contrastive_loss(g, F))
        worst = max(worst, float(np.var(diffs)))
    ok = report(2, worst <= 1e-10, f"max variance of loss difference {worst:.2e} (<= 1e-10)")
    assert ok


def test_c03_laplacian_square(report, family):
    alphas = []
    bad = 0
    worst = math.inf
    for inst in family:
        checker = LemmaChecker(inst.graph, inst.domain_spec)
        alphas.append(checker.alpha)
        r = checker.laplacian_square()
        bad += r.status != "holds"
        worst = min(worst, r.worst_margin)
    span_ok = min(alphas) <= 0.001 + 1e-12 and max(alphas) >= 0.3 - 1e-12
    ok = report(3, bad == 0 and span_ok and worst >= 0,
                f"{len(family)} instances, alpha in [{min(alphas):.4f}, {max(alphas):.4f}], "
                f"{bad} violations, worst margin {worst:.2e}")
    assert ok


def test_c04_linear_probe_bound(report, family, reference):
    checked, bad = 0, 0
    cases = [(reference.graph, reference.domain_spec)] + [(i.graph, i.domain_spec) for i in family]
    for g, d in cases:
        for k in (d.m, d.m + 1, d.m + 3):
            stats = assumption_report(g, d, k=k)
            if not all(v["holds"] for v in stats.verdicts.values() if v["holds"] is not None):
                continue
            rep = quiet_minimize(g, k)
            err = linear_probe_error(rep, g, d)
            checked += 1
            bad += err > linear_probe_bound(d.m, stats.alpha, stats.lambda_k1)
    ok = report(4, checked > 0 and bad == 0, f"{checked} (instance, k) pairs satisfying the assumptions, {bad} violations")
    assert ok


def test_c05_power_approximation(report, family, reference):
    checked, bad = 0, 0
    cases = [(reference.graph, reference.domain_spec)] + [(i.graph, i.domain_spec) for i in family]
    for g, d in cases:
        for k in (d.m, d.m + 2):
            r = LemmaChecker(g, d, quiet_minimize(g, k)).power_t_error(range(1, 21))
            if r.status == "not_applicable":
                continue
            checked += 1
            bad += r.status == "violated"
    ok = report(5, checked > 0 and bad == 0, f"{checked} (instance, k) pairs, t = 1..20 over all clusters, {bad} violations")
    assert ok


def uniform_marginal_graph(rng, n):
    W = rng.uniform(0.1, 1.0) * np.eye(n)
    for _ in range(int(rng.integers(1, 4))):
        P = np.eye(n)[rng.permutation(n)]
        W += rng.uniform(0.1, 1.0) * (P + P.T)
    return graph_from_weights(W, normalize=True)


def test_c06_random_walk_identity(report):
    rng = np.random.default_rng(606)
    walk_gap, conj_gap = 0.0, 0.0
    for _ in range(10):
        n = int(rng.integers(4, 16))
        g = uniform_marginal_graph(rng, n)
        assert np.allclose(g.marginals, 1 / n, atol=1e-14)
        target = rng.choice(n, size=int(rng.integers(1, n)), replace=False)
        one_A = np.zeros(n)
        one_A[target] = 1
        Ab = normalized_adjacency(g)
        At = np.eye(n)
        for t in range(11):
            for x in range(n):
                walk_gap = max(walk_gap, abs(At[x] @ one_A - random_walk_probability(g, x, target, t)))
            At = At @ Ab
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(5, 40)))
        w = g.marginals
        Ab, Wk = normalized_adjacency(g), walk_matrix(g)
        for t in range(11):
            lhs = np.linalg.matrix_power(Ab, t)
            rhs = (w[:, None] ** -0.5) * np.linalg.matrix_power(Wk, t) * (w[None, :] ** 0.5)
            conj_gap = max(conj_gap, float(np.linalg.norm(lhs - rhs)))
    ok = report(6, walk_gap <= 1e-10 and conj_gap <= 1e-10,
                f"walk identity gap {walk_gap:.2e}, conjugation gap {conj_gap:.2e} (both <= 1e-10)")
    assert ok


def test_c07_induction(report, family, reference):
    counts = {"induction_in": [0, 0], "induction_out": [0, 0], "induction_target": [0, 0]}
    used = 0
    cases = [(reference.graph, reference.domain_spec)] + [(i.graph, i.domain_spec) for i in family]
    for g, d in cases:
        if d.r == 0:
            continue
        stats = assumption_report(g, d, k=d.m)
        if not (stats.holds("assumption1") and stats.holds("assumption3") and stats.rho <= stats.alpha):
            continue
        used += 1
        checker = LemmaChecker(g, d)
        for lid in counts:
            r = checker.check(lid)
            if r.status == "not_applicable":
                continue
            counts[lid][0] += 1
            counts[lid][1] += r.status == "violated"
    bad = sum(v[1] for v in counts.values())
    applied = all(v[0] > 0 for v in counts.values())
    detail = ", ".join(f"{k} {v[0]} checked/{v[1]} violated" for k, v in counts.items())
    ok = report(7, applied and bad == 0, f"{used} qualifying instances; {detail}")
    assert ok


def test_c08_transfer_bound(report, reference):
    instances = [reference] + [perturb(reference, 0.05, seed) for seed in range(10)]
    checked, bad, in_range = 0, 0, 0
    for inst in instances:
        g, d = inst.graph, inst.domain_spec
        stats = assumption_report(g, d, k=d.m)
        top = theorem31_range(stats)
        if top is None or top < 1:
            continue
        in_range += 1
        rep = minimize_loss(g, d.m)
        clf = fit_pfa(rep, g, d)
        for t in range(1, top + 1):
            er = target_error(clf, rep, g, d, t, stats)
            checked += 1
            bad += not er.bound_satisfied
    g, d = reference.graph, reference.domain_spec
    rep = minimize_loss(g, d.m)
    clf = fit_pfa(rep, g, d)
    e1 = target_error(clf, rep, g, d, 1).target_error
    e2 = target_error(clf, rep, g, d, 2).target_error
    ok = report(8, in_range >= 10 and bad == 0 and e2 == 0 and e2 <= e1,
                f"{in_range} instances in range, {checked} (instance, t) checks, {bad} violations; "
                f"reference E_T(g_1) = {e1:.4f}, E_T(g_2) = {e2:.4f}")
    assert ok


def test_c09_conductance_lemmas(report, family):
    lemmas = ("restricted_cheeger", "multistep_rho", "multistep_beta")
    counts = {lid: [0, 0] for lid in lemmas}
    for inst in family:
        checker = LemmaChecker(inst.graph, inst.domain_spec)
        for lid in lemmas:
            r = checker.check(lid)
            if r.status == "not_applicable":
                continue
            counts[lid][0] += 1
            counts[lid][1] += r.status == "violated"
    ratios = []
    for inst in family:
        if inst.domain_spec.r < 2:
            continue
        rows = run_sweep(inst.graph, inst.domain_spec, SweepConfig(t_values=[1], k_values=[inst.domain_spec.m]))
        extra = [r for r in rows if r["t"] != 1]
        if len(extra) == 3:
            ratios.append([r["ratio_thm32"] for r in extra])
    bad = sum(v[1] for v in counts.values())
    applied = all(v[0] > 0 for v in counts.values())
    detail = ", ".join(f"{k} {v[0]} checked/{v[1]} violated" for k, v in counts.items())
    arr = np.array(ratios)
    if arr.size:
        # unit-constant ratio, reported only
        detail += (f"; error/structural-bound ratio at t multipliers 1, 2, 4 over {len(arr)} instances: "
                   f"max {np.round(arr.max(axis=0), 6).tolist()}, median {np.round(np.median(arr, axis=0), 6).tolist()}")
    ok = report(9, applied and bad == 0, detail)
    assert ok


def test_c10_gradient_descent(report):
    inst = generate_sbm(reference_params(cluster_size=10, q_same=0.09, q_cross=0.005, q_other=0.005))
    assert inst.graph.n == 40
    rep = gd_crosscheck(inst.graph, inst.domain_spec.m, steps=5000, lr=0.05)
    ok = report(10, rep.loss_gap <= 1e-3, f"n = 40, {rep.steps} steps, loss gap {rep.loss_gap:.2e} (<= 1e-3)")
    assert ok


def run_cli(*args):
    res = subprocess.run([sys.executable, "-m", "spectral_transfer", *args], capture_output=True, check=False)
    assert res.returncode == 0, res.stderr.decode()
    return res


def test_c11_determinism(report, tmp_path):
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        graph = d / "graph.json"
        run_cli("generate", "--out", str(graph), "--cluster-size", "12", "--topology", "ring_plus_chords",
                "--noise", "0.2", "--seed", "7")
        run_cli("embed", "--graph", str(graph), "--k", "4", "--out", str(d / "embed.csv"))
        run_cli("sweep", "--graph", str(graph), "--k", "4", "5", "--t", "1", "2", "3", "--out", str(d / "sweep.csv"))
        outputs.append([(d / f).read_bytes() for f in ("graph.json", "embed.csv", "sweep.csv")])
    same = [a == b for a, b in zip(*outputs)]
    ok = report(11, all(same), f"generate/embed/sweep byte-identical across two runs: {same}")
    assert ok
