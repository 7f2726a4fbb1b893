import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import simpson

from entropic.domain import Domain, build_grid
from entropic.errors import PreconditionError
from entropic.measures import Discrete, GraphMeasure, GridDensity
from entropic.metrics import (conjugate_grid_density, conjugation_continuity_probe, discrete_wasserstein,
                              entropy_duality_gap, laguerre_coupling_cost, relative_entropy,
                              reverse_entropy, wasserstein_1d, wasserstein_2d_upper, wasserstein_empirical)
from entropic.transport import semidiscrete_weights

I, C, SQ = Domain.interval(), Domain.circle(), Domain.unit_square()


def _density(n, f):
    grid = build_grid(I, n)
    return GridDensity(grid, f(grid.nodes))


class _Map:
    def __init__(self, f):
        self.evaluate = f


def test_relative_entropy_examples():
    assert float(relative_entropy(_density(64, np.ones_like))) == pytest.approx(0.0, abs=1e-14)
    half = GraphMeasure(I, [0.0, 0.5, 1.0], [0.0, 1.0, 1.0])
    assert float(relative_entropy(half)) == pytest.approx(math.log(2), abs=1e-14)
    step = _density(4096, lambda x: 2.0 * (x < 0.5))
    assert float(relative_entropy(step)) == pytest.approx(math.log(2), abs=1e-3)
    assert not relative_entropy(Discrete(I, [0.3], [1.0])).finite


def test_reverse_entropy_examples():
    assert float(reverse_entropy(_density(64, np.ones_like))) == pytest.approx(0.0, abs=1e-14)
    assert not reverse_entropy(_density(256, lambda x: 2.0 * (x < 0.5))).finite
    assert not reverse_entropy(GraphMeasure(I, [0.0, 0.5, 1.0], [0.0, 1.0, 1.0])).finite
    f = lambda x: 2.0 + np.sin(2 * np.pi * x)  # noqa: E731
    x = np.linspace(0, 1, 1_000_001)
    oracle = -simpson(np.log(f(x) / 2.0), x=x)
    assert float(reverse_entropy(_density(4096, f))) == pytest.approx(oracle, abs=1e-6)


def test_duality_gap_examples():
    assert entropy_duality_gap(_density(256, np.ones_like)) == pytest.approx(0.0, abs=1e-12)
    g = [entropy_duality_gap(_density(n, lambda x: 2 + np.sin(2 * np.pi * x))) for n in (2048, 4096)]
    assert g[0] <= 2e-2 and g[1] <= 0.6 * g[0]


def test_duality_gap_piecewise_closed_form():
    mu = GraphMeasure(I, [0.0, 0.5, 1.0], [0.0, 0.75, 1.0])
    closed = -0.5 * math.log(1.5) - 0.5 * math.log(0.5)
    from entropic.transport import conjugate_measure_1d
    nu = conjugate_measure_1d(mu, keep_graph=True)
    assert float(reverse_entropy(mu)) == pytest.approx(closed, abs=1e-14)
    assert float(relative_entropy(nu)) == pytest.approx(closed, abs=1e-14)
    grid_gap = entropy_duality_gap(_density(4096, lambda x: np.where(x < 0.5, 1.5, 0.5)))
    assert grid_gap <= 1e-3


def test_duality_gap_needs_positive_density():
    with pytest.raises(PreconditionError):
        entropy_duality_gap(_density(64, lambda x: 2.0 * (x < 0.5)))


def test_conjugate_density_is_reciprocal():
    mu = _density(2048, lambda x: 1.0 + x * x)
    rho = conjugate_grid_density(mu)
    assert rho.weights @ rho.values == pytest.approx(1.0, abs=1e-12)


def test_wasserstein_1d_examples():
    m = GraphMeasure(I, [0.0, 1.0], [0.0, 1.0])
    assert wasserstein_1d(m, m) == 0.0
    assert wasserstein_1d(Discrete(I, [0.0], [1.0]), Discrete(I, [1.0], [1.0])) == pytest.approx(1.0)
    assert wasserstein_1d(m, Discrete(I, [0.5], [1.0])) == pytest.approx(1 / math.sqrt(12), abs=1e-14)
    # circle: a quarter-turn rotation of an atom costs the arc length
    assert wasserstein_1d(Discrete(C, [0.1], [1.0]), Discrete(C, [0.35], [1.0])) == pytest.approx(0.25, abs=1e-9)
    assert wasserstein_1d(Discrete(C, [0.05], [1.0]), Discrete(C, [0.95], [1.0])) == pytest.approx(0.1, abs=1e-9)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=5), st.lists(st.floats(0, 1), min_size=1, max_size=5),
       st.lists(st.floats(0, 1), min_size=1, max_size=5))
def test_wasserstein_1d_metric_properties(a, b, c):
    mu, nu, xi = (Discrete(I, v, np.full(len(v), 1 / len(v))) for v in (a, b, c))
    d_ab = wasserstein_1d(mu, nu)
    assert d_ab == pytest.approx(wasserstein_1d(nu, mu), abs=1e-12)
    assert d_ab <= wasserstein_1d(mu, xi) + wasserstein_1d(xi, nu) + 1e-12
    assert d_ab == pytest.approx(discrete_wasserstein(mu, nu), abs=1e-7)


def test_wasserstein_empirical_matches_lp(rng):
    a, b = rng.random((30, 2)), rng.random((30, 2))
    w = np.full(30, 1 / 30)
    assert wasserstein_empirical(a, b) == pytest.approx(
        discrete_wasserstein(Discrete(SQ, a, w), Discrete(SQ, b, w)), abs=1e-7)


def test_2d_upper_bound_examples():
    grid = build_grid(SQ, 201)
    z = np.array([0.2, 0.7])
    ident = _Map(lambda x: np.asarray(x, dtype=float))
    const = _Map(lambda x: np.tile(z, (len(x), 1)))
    closed = math.sqrt(sum(1 / 3 - zi + zi * zi for zi in z))
    assert wasserstein_2d_upper(ident, ident, grid) == 0.0
    assert wasserstein_2d_upper(ident, const, grid) == pytest.approx(closed, rel=1e-3)


def test_2d_upper_bound_dominates_1d_exact():
    # both maps are 1D embeddings: g(x) = (h(x_1), 0)
    grid = build_grid(SQ, 201)
    g1 = _Map(lambda x: np.column_stack([np.asarray(x)[:, 0] ** 2, np.zeros(len(x))]))
    g2 = _Map(lambda x: np.column_stack([np.sqrt(np.asarray(x)[:, 0]), np.zeros(len(x))]))
    bound = wasserstein_2d_upper(g1, g2, grid)
    exact = math.sqrt(1 / 5 + 1 / 2 - 2 * 2 / 7)  # int (x^2 - sqrt x)^2 dx
    assert bound == pytest.approx(exact, rel=1e-3)


def test_laguerre_coupling_cost_self_and_shift():
    z = np.array([[0.25, 0.5], [0.75, 0.5]])
    t = semidiscrete_weights(SQ, z, [0.5, 0.5])
    assert laguerre_coupling_cost(t, t) == 0.0
    u = semidiscrete_weights(SQ, z + [0.0, 0.1], [0.5, 0.5])
    assert laguerre_coupling_cost(t, u) == pytest.approx(0.01, abs=1e-12)


def test_brenier_maps_distance_zero():
    mu = Discrete(I, [0.2, 0.6], [0.5, 0.5])
    from entropic.metrics import map_distances_1d
    from entropic.transport.one_dim import as_graph
    g = as_graph(mu)
    assert map_distances_1d(g, g) == (0.0, 0.0)
    h = as_graph(Discrete(I, [0.3, 0.7], [0.5, 0.5]))
    l2, l1 = map_distances_1d(g, h)
    # the two CDFs differ by 1/2 on two intervals of length 0.1
    assert l2 == pytest.approx(0.05, abs=1e-14) and l1 == pytest.approx(0.1, abs=1e-14)


def test_continuity_probe():
    limit = Discrete(I, [0.25], [1.0])
    ns = [10, 30, 100, 300, 1000]
    d = conjugation_continuity_probe([Discrete(I, [0.25, 0.75], [1 - 1 / n, 1 / n]) for n in ns], limit)
    assert np.all(np.diff(d) < 0)
    assert np.all(conjugation_continuity_probe([limit] * 3, limit) == 0.0)
    moll = conjugation_continuity_probe(
        [GraphMeasure(I, [0.0, 0.25 - 1 / n, 0.25 + 1 / n, 1.0], [0.0, 0.0, 1.0, 1.0]) for n in ns], limit)
    # the conjugate of uniform-on-[a, b] is a's atom, a uniform bridge and (1 - b)'s atom
    assert moll == pytest.approx(1 / np.sqrt(6 * np.array(ns)), rel=1e-9)
