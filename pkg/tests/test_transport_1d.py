import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from entropic.domain import Domain, build_grid, reference_weights
from entropic.errors import PreconditionError, UnsupportedDomainError
from entropic.measures import Discrete, GraphMeasure, GridDensity, Partition, coarse_grain
from entropic.metrics import wasserstein_1d
from entropic.transport import (MonotoneGraph, as_graph, brenier_map_1d, cdf_1d, cell_average_density,
                                conjugate_measure_1d, density_reciprocity_check, pushforward_1d,
                                right_inverse_1d)

I, C = Domain.interval(), Domain.circle()


def _uniform(domain):
    return GraphMeasure(domain, [0.0, 1.0], [0.0, 1.0])


def test_cdf_examples():
    x = np.linspace(0, 1, 11)
    assert np.allclose(cdf_1d(_uniform(I))(x), x)
    f = cdf_1d(Discrete(I, [0.25], [1.0]))
    assert list(f([0.0, 0.2499, 0.25, 1.0])) == [0.0, 0.0, 1.0, 1.0]
    f = cdf_1d(Discrete(I, [0.25, 0.75], [0.5, 0.5]))
    assert list(f([0.2, 0.25, 0.5, 0.75, 1.0])) == [0.0, 0.5, 0.5, 1.0, 1.0]


def test_right_inverse_examples():
    y = np.linspace(0, 1, 11)
    assert np.allclose(right_inverse_1d(cdf_1d(_uniform(I)))(y), y)
    g = right_inverse_1d(cdf_1d(Discrete(I, [0.25, 0.75], [0.5, 0.5])))
    assert list(g([0.1, 0.5, 0.5001, 1.0])) == [0.25, 0.25, 0.75, 0.75]
    sq = right_inverse_1d(lambda x: x ** 2)
    assert np.allclose(sq(y), np.sqrt(y), atol=1e-14)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=6))
def test_double_right_inverse(atoms):
    w = np.full(len(atoms), 1 / len(atoms))
    f = cdf_1d(Discrete(I, atoms, w))
    ff = right_inverse_1d(right_inverse_1d(f))
    x = np.linspace(0, 1, 257)
    cont = np.ones_like(x, dtype=bool)
    for a in atoms:
        cont &= np.abs(x - a) > 1e-9
    assert np.allclose(ff(x)[cont], f(x)[cont])


def test_conjugate_of_uniform():
    out = conjugate_measure_1d(_uniform(I))
    assert np.allclose(out.xs, [0, 1]) and np.allclose(out.ys, [0, 1])
    g = build_grid(I, 65)
    dens = conjugate_measure_1d(GridDensity(g, np.ones(g.size)))
    assert np.allclose(dens.cdf(np.linspace(0, 1, 9)), np.linspace(0, 1, 9))


def test_interval_fixture():
    nu = conjugate_measure_1d(Discrete(I, [0.25, 0.75], [0.5, 0.5]))
    assert np.allclose(nu.atoms, [0.0, 0.5, 1.0], atol=1e-12)
    assert np.allclose(nu.weights, [0.25, 0.5, 0.25], atol=1e-12)


def _circle_oracle_theta(x, w):
    """Rotation minimizing the lifted transport cost, by direct quadrature."""
    c = np.cumsum(w)
    y = (np.arange(200_000) + 0.5) / 200_000

    def lifted_quantile(u):
        k = np.floor(u)
        idx = np.searchsorted(c, u - k, side="left")
        return x[np.minimum(idx, len(x) - 1)] + k

    return minimize_scalar(lambda t: np.mean((lifted_quantile(y + t) - y) ** 2), bounds=(-1, 1),
                           method="bounded", options={"xatol": 1e-10}).x


def test_circle_two_atoms():
    x, a = np.array([0.0, 0.5]), np.array([0.3, 0.7])
    nu = conjugate_measure_1d(Discrete(C, x, a))
    assert np.allclose(nu.weights, [0.5, 0.5])
    y = np.sort(nu.atoms)
    gaps = sorted([y[1] - y[0], 1 - (y[1] - y[0])])
    assert np.allclose(gaps, [0.3, 0.7], atol=1e-12)
    theta = _circle_oracle_theta(x, a)
    want = np.sort(np.mod(np.cumsum(a) - theta, 1.0))
    assert np.allclose(y, want, atol=1e-6)


def test_circle_atom_plus_uniform():
    lam = 0.4
    mu = GraphMeasure(C, [0.0, 0.0, 1.0], [0.0, lam, 1.0])
    nu = conjugate_measure_1d(mu)
    atoms, segs = nu.components()
    assert len(atoms) == 0
    assert np.allclose(segs, [[0.2, 0.8, 1.0]], atol=1e-12)
    assert nu.density(0.5) == pytest.approx(1 / (1 - lam))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=7), st.integers(0, 1000),
       st.sampled_from(["interval", "circle"]))
def test_involution_discrete(atoms, seed, kind):
    dom = I if kind == "interval" else C
    w = np.random.default_rng(seed).dirichlet(np.ones(len(atoms)))
    mu = Discrete(dom, atoms, w)
    back = conjugate_measure_1d(conjugate_measure_1d(mu))
    assert isinstance(back, Discrete)
    assert len(back) == len(mu)
    assert np.allclose(back.atoms, mu.atoms, atol=1e-12)
    assert np.allclose(back.weights, mu.weights, atol=1e-12)


@pytest.mark.parametrize("kind", ["interval", "circle"])
def test_involution_grid_density(kind):
    dom = I if kind == "interval" else C
    g = build_grid(dom, 512)
    mu = GridDensity(g, 2 + np.sin(2 * np.pi * g.nodes))
    back = conjugate_measure_1d(conjugate_measure_1d(mu, keep_graph=True), keep_graph=True)
    assert wasserstein_1d(as_graph(mu), back) <= 5 * g.eps


def test_non_uniform_reference():
    dom = Domain.interval(sigma=[3.0, 1.0])
    xs, fs = dom.cdf_breaks()
    m = GraphMeasure(dom, xs, fs)
    out = conjugate_measure_1d(m)
    assert np.allclose(out.cdf(np.linspace(0, 1, 21)), m.cdf(np.linspace(0, 1, 21)))
    mu = Discrete(dom, [0.2, 0.9], [0.5, 0.5])
    back = conjugate_measure_1d(conjugate_measure_1d(mu))
    assert np.allclose(back.atoms, mu.atoms) and np.allclose(back.weights, mu.weights)
    with pytest.raises(UnsupportedDomainError):
        conjugate_measure_1d(Discrete(Domain.circle(sigma=[1.0, 2.0]), [0.2], [1.0]))


def test_brenier_map_1d_interval():
    mu = Discrete(I, [0.25, 0.75], [0.5, 0.5])
    grid = build_grid(I, 101)
    g = brenier_map_1d(mu, grid)
    v = g.images()
    assert np.all(np.diff(v) >= 0)
    w = reference_weights(I, grid)
    assert w[v == 0.25].sum() == pytest.approx(0.5, abs=grid.eps)
    assert len(g.to_csv_rows()) == grid.size


def test_brenier_map_1d_circle_is_cyclically_monotone(rng):
    mu = Discrete(C, rng.random(5), rng.dirichlet(np.ones(5)))
    grid = build_grid(C, 400)
    lift = brenier_map_1d(mu, grid).values
    assert np.all(np.diff(lift) >= 0)
    assert lift[-1] - lift[0] <= 1.0
    # displacement never exceeds half the circle
    assert np.max(np.abs(lift - grid.nodes)) <= 0.5 + 1e-12


def test_pushforward_matches_direct_mass_transport(rng):
    n = 257
    v = np.sort(rng.random(n))
    mu = pushforward_1d(v, I)
    breaks = np.sort(rng.random(4))
    got = coarse_grain(mu, Partition.from_breaks(I, breaks))
    nodes = np.linspace(0, 1, n)
    edges = np.concatenate([[0.0], breaks, [1.0]])
    pre = np.interp(edges, v, nodes, left=0.0, right=1.0)
    assert np.allclose(got, np.diff(pre), atol=1e-8)


def test_pushforward_rejects_non_monotone():
    with pytest.raises(PreconditionError):
        pushforward_1d([0.5, 0.2], I)


def test_density_reciprocity_uniform():
    g = build_grid(I, 257)
    assert density_reciprocity_check(GridDensity(g, np.ones(g.size))) <= 1e-12


def test_density_reciprocity_smooth_convergence():
    res = []
    for n in (2048, 4096):
        g = build_grid(I, n)
        res.append(density_reciprocity_check(GridDensity(g, 2 + np.sin(2 * np.pi * g.nodes))))
    assert res[0] <= 5e-2
    assert res[1] <= 0.6 * res[0]


def test_density_reciprocity_piecewise():
    g = build_grid(I, 2049)
    eta = np.where(g.nodes < 0.5, 1.5, 0.5)
    eta[g.nodes == 0.5] = 1.0          # node on the jump: dual cell half and half
    mu = GridDensity(g, eta)
    nu = as_graph(conjugate_measure_1d(mu, keep_graph=True))
    rho = cell_average_density(nu, g)
    x = g.nodes
    away = np.abs(x - 0.75) > 2 * g.spacing
    want = np.where(x < 0.75, 1 / 1.5, 1 / 0.5)
    assert np.allclose(rho[away], want[away], atol=1e-9)


def test_density_reciprocity_preconditions():
    g = build_grid(I, 65)
    v = np.ones(g.size)
    v[10] = 0.0
    with pytest.raises(PreconditionError):
        density_reciprocity_check(GridDensity(g, v))


def test_monotone_graph_sides():
    f = MonotoneGraph(np.array([0, 0.5, 0.5, 1.0]), np.array([0, 0.2, 0.8, 1.0]), "right")
    g = MonotoneGraph(f.xs, f.ys, "left")
    assert f(0.5) == pytest.approx(0.8) and g(0.5) == pytest.approx(0.2)
