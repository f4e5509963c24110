import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_transfer.errors import EmptySet, InvalidPartition, OverlappingSets
from spectral_transfer.generators import SbmParams, generate_sbm, reference_params
from spectral_transfer.graph import DomainSpec, build_graph, graph_from_weights
from spectral_transfer.metrics import (
    _cheeger_bracket,
    assumption_report,
    compute_alpha,
    compute_rho,
    compute_tau,
    conductance_gamma,
    exact_cluster_conductance,
    expansion,
    max_expansion,
    min_expansion,
    restricted_gap,
)

from _helpers import A, B, C, D, disjoint_union, graphs, random_graph


# -- expansions ----------------------------------------------------------------


def test_g4_expansions(g4):
    assert expansion(g4, {A, B}, {C, D}) == pytest.approx(0.1)
    assert max_expansion(g4, {A, B}, {C, D}) == pytest.approx(0.2)
    assert min_expansion(g4, {A, B}, {C, D}) == 0.0


def test_disconnected_expansions_zero():
    g = build_graph([(0, 1, 0.25), (2, 3, 0.25)])
    for f in (expansion, max_expansion, min_expansion):
        assert f(g, {0, 1}, {2, 3}) == 0.0


def test_expansion_errors(g4):
    with pytest.raises(OverlappingSets):
        expansion(g4, {A, B}, {B, C})
    with pytest.raises(EmptySet):
        expansion(g4, set(), {C})


@given(graphs(min_n=3), st.data())
@settings(max_examples=80, deadline=None)
def test_expansion_ordering(g, data):
    perm = data.draw(st.permutations(range(g.n)))
    cut = data.draw(st.integers(1, g.n - 1))
    A_, B_ = set(perm[:cut]), set(perm[cut:])
    lo, mid, hi = min_expansion(g, A_, B_), expansion(g, A_, B_), max_expansion(g, A_, B_)
    assert lo <= mid + 1e-15 and mid <= hi + 1e-15
    assert 0 <= lo and hi <= 1 + 1e-12


# -- alpha ------------------------------------------------------------------------


def test_g4_alpha(g4):
    assert compute_alpha(g4, [{A, B}, {C, D}]) == pytest.approx(0.2)


def test_alpha_disconnected_and_single_cluster(g4):
    g = build_graph([(0, 1, 0.25), (2, 3, 0.25)])
    assert compute_alpha(g, [{0, 1}, {2, 3}]) == 0.0
    assert compute_alpha(g4, [range(4)]) == 0.0


def test_alpha_needs_partition(g4):
    with pytest.raises(InvalidPartition):
        compute_alpha(g4, [{A, B}, {C}])


@given(st.floats(0.0, 0.05), st.floats(1e-4, 0.05))
@settings(max_examples=40, deadline=None)
def test_alpha_monotone_in_cross_weight(q, extra):
    base = generate_sbm(SbmParams(r=2, cluster_size=5, q_same=q, q_cross=q / 2, q_other=q / 3))
    W = np.array(base.graph.weights)
    W[0, 7] += extra
    W[7, 0] += extra
    bumped = graph_from_weights(W, normalize=True)
    assert compute_alpha(bumped, base.domain_spec) >= compute_alpha(base.graph, base.domain_spec) - 1e-15


# -- rho / tau ---------------------------------------------------------------------


def test_rho_zero_cross_class():
    inst = generate_sbm(SbmParams(r=2, cluster_size=25, q_same=0.01, q_cross=0.0, q_other=0.0))
    a3 = compute_rho(inst.graph, inst.domain_spec)
    alpha = compute_alpha(inst.graph, inst.domain_spec)
    assert a3.beta_max == 0.0
    assert a3.rho >= 8 * alpha**2
    assert a3.holds


def test_rho_r1_beta_zero():
    inst = generate_sbm(SbmParams(r=1, cluster_size=5, q_same=0.05))
    assert compute_rho(inst.graph, inst.domain_spec).beta_max == 0.0


def test_rho_reference_closed_form(reference):
    a3 = compute_rho(reference.graph, reference.domain_spec)
    s, p = 50, reference_params()
    d = (s - 1) * p.p_intra + s * (p.q_same + p.q_cross + p.q_other)
    assert a3.rho == pytest.approx(s * p.q_same / d, abs=1e-12)
    assert a3.beta_max == pytest.approx(s * p.q_cross / d, abs=1e-12)


def test_tau_alpha_term_binds():
    # q_cross = q_other = 0 gives alpha = rho, so tau = 1/alpha = 2
    inst = generate_sbm(SbmParams(r=2, cluster_size=2, q_same=0.5, q_cross=0.0, q_other=0.0))
    assert compute_alpha(inst.graph, inst.domain_spec) == pytest.approx(0.5)
    assert compute_tau(inst.graph, inst.domain_spec) == pytest.approx(2.0)


def test_tau_same_to_cross_ratio():
    inst = generate_sbm(reference_params(q_same=0.018, q_cross=0.0036))
    g, d = inst.graph, inst.domain_spec
    alpha = compute_alpha(g, d)
    assert expansion(g, d.target_classes[0], d.source_classes[0]) >= 5 * alpha**2
    assert compute_tau(g, d) == pytest.approx(5.0, abs=1e-9)


def test_tau_zero_when_no_same_class_weight():
    inst = generate_sbm(reference_params(q_same=0.0))
    assert compute_tau(inst.graph, inst.domain_spec) == 0.0


# -- conductance --------------------------------------------------------------------


def test_g4_cluster_conductance(g4):
    assert exact_cluster_conductance(g4, {A, B}) == pytest.approx(0.8)
    res = conductance_gamma(g4, [{A, B}, {C, D}])
    assert res.exact and res.lower == pytest.approx(0.8)


def test_two_disconnected_halves_zero():
    half = np.ones((3, 3))
    g = disjoint_union(half, half)
    assert exact_cluster_conductance(g, range(6)) == 0.0


def test_bracket_contains_exact_on_same_cluster():
    inst = generate_sbm(SbmParams(r=1, cluster_size=16, intra_topology="two_communities", epsilon=0.3, q_same=0.01))
    g, d = inst.graph, inst.domain_spec
    exact = conductance_gamma(g, d, exact_cap=22)
    bracket = conductance_gamma(g, d, exact_cap=10)
    assert exact.exact and not bracket.exact
    assert bracket.lower - 1e-12 <= exact.lower <= bracket.upper + 1e-12


def test_large_cluster_bracket_contains_downsized_twin(reference):
    big = conductance_gamma(reference.graph, reference.domain_spec)
    assert not big.exact
    # same block ratios at cluster size 20: alpha = 0.02 is preserved when q scales with 1/s
    s = 20
    f = 50 / s * (s - 1) / 49
    twin = generate_sbm(reference_params(cluster_size=s, q_same=0.018 * f, q_cross=0.001 * f, q_other=0.001 * f))
    assert compute_alpha(twin.graph, twin.domain_spec) == pytest.approx(0.02)
    small = conductance_gamma(twin.graph, twin.domain_spec)
    assert small.exact
    assert big.lower - 1e-12 <= small.lower <= big.upper


@given(st.integers(0, 2**31 - 1), st.integers(2, 9), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_exact_conductance_inside_bracket(seed, size, parts):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, size * parts, density=0.6)
    clusters = [range(i * size, (i + 1) * size) for i in range(parts)]
    for c in clusters:
        c = np.array(c)
        gamma = exact_cluster_conductance(g, c)
        lo, hi = _cheeger_bracket(g, c)
        assert lo - 1e-12 <= gamma <= hi + 1e-12


@given(st.integers(0, 2**31 - 1), st.integers(2, 10))
@settings(max_examples=60, deadline=None)
def test_restricted_gap_at_least_half_gamma_squared(seed, size):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 2 * size, density=0.7)
    c = np.arange(size)
    assert restricted_gap(g, c) >= exact_cluster_conductance(g, c) ** 2 / 2 - 1e-12


def test_restricted_gap_examples():
    g = build_graph([(0, 1, 0.2), (0, 2, 0.05), (1, 3, 0.05), (2, 3, 0.1)], normalize=True)
    assert restricted_gap(g, {0, 1}) == pytest.approx(2.0)
    half = np.ones((2, 2))
    h = disjoint_union(half, half)
    assert restricted_gap(h, range(4)) == pytest.approx(0.0, abs=1e-12)


def test_singleton_cluster_conductance_is_one(g4):
    assert exact_cluster_conductance(g4, {A}) == 1.0


# -- assumption_report ----------------------------------------------------------------


def test_reference_all_verdicts_true(reference):
    stats = assumption_report(reference.graph, reference.domain_spec, k=4)
    for name in ("assumption1", "assumption2", "assumption3", "assumption4"):
        assert stats.holds(name), name
    pred = reference.predicted_stats
    assert stats.alpha == pytest.approx(pred["alpha"], abs=1e-10)
    assert stats.rho == pytest.approx(pred["rho"], abs=1e-10)
    assert stats.gamma_lower <= stats.gamma_upper
    assert 0 <= stats.alpha <= 1 and 0 <= stats.rho <= 1


def test_disconnected_subcluster_fails_assumption2():
    inst = generate_sbm(SbmParams(r=1, cluster_size=8, intra_topology="two_communities", epsilon=0.0, q_same=0.02))
    stats = assumption_report(inst.graph, inst.domain_spec, k=2)
    assert stats.gamma_lower == 0.0
    assert not stats.holds("assumption2")


def test_k_equals_n_minus_one_reports_largest(g4, g4_domain):
    stats = assumption_report(g4, g4_domain, k=3)
    assert stats.lambda_k1 == pytest.approx(max(stats.lambda_spectrum))
    with pytest.raises(ValueError):
        assumption_report(g4, g4_domain, k=4)


def test_report_is_json_friendly(small_reference):
    import json

    from spectral_transfer.harness import jsonable

    stats = assumption_report(small_reference.graph, small_reference.domain_spec, k=4)
    text = json.dumps(jsonable(stats.to_dict()))
    assert '"assumption3"' in text
    assert stats.gamma_exact and not math.isnan(stats.gamma_lower)


def test_domain_without_sources(g4):
    stats = assumption_report(g4, DomainSpec(((A, B), (C, D)), 0, 4), k=2)
    assert stats.rho is None and stats.verdicts["assumption3"]["holds"] is None
