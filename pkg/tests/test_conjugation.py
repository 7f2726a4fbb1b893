import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropic.conjugation import (Potential, PotentialClass, c_transform, c_transform_argmin,
                                  discretization_floor, is_c_convex, legendre_fenchel,
                                  lipschitz_violation, normalize_class, shift_quadratic)
from entropic.domain import Domain, build_grid, diameter, pairwise_distance
from entropic.errors import ConfigurationError, UnsupportedDomainError

I, C, SQ = Domain.interval(), Domain.circle(), Domain.unit_square()
GRIDS = {"interval": build_grid(I, 201), "circle": build_grid(C, 200), "square": build_grid(SQ, 10)}
seeds = st.integers(0, 2**32 - 1)


def _random(grid, seed, scale=None):
    D = diameter(grid.domain)
    return Potential(grid, np.random.default_rng(seed).uniform(0, scale or D * D / 2, grid.size))


@pytest.mark.parametrize("name", list(GRIDS))
def test_zero_and_constant(name):
    g = GRIDS[name]
    assert np.all(c_transform(Potential(g, np.zeros(g.size))).values == 0.0)
    assert np.allclose(c_transform(Potential(g, np.full(g.size, 0.7))).values, -0.7, atol=1e-15)


def test_circle_antipodal_potential():
    g = build_grid(C, 400)
    d0 = pairwise_distance(C, g.nodes, 0.0)
    phi = Potential(g, 0.5 * (0.25 - d0 ** 2))
    got = c_transform(phi).values
    closed = -0.5 * pairwise_distance(C, g.nodes, 0.5) ** 2
    assert np.max(np.abs(got - closed)) <= discretization_floor(g)
    # oracle: brute double loop at doubled resolution, restricted to the working nodes
    fine = build_grid(C, 800)
    y = fine.nodes
    pf = 0.5 * (0.25 - pairwise_distance(C, y, 0.0) ** 2)
    oracle = np.array([-np.min(0.5 * pairwise_distance(C, x, y) ** 2 + pf) for x in g.nodes])
    assert np.max(np.abs(got - oracle)) <= discretization_floor(g)


def test_is_c_convex_examples():
    g = build_grid(I, 201)
    tol = 2 * discretization_floor(g)
    assert is_c_convex(Potential(g, np.zeros(g.size)), tol)
    assert is_c_convex(c_transform(_random(g, 1)), tol)
    assert not is_c_convex(Potential(g, -10 * g.nodes ** 2), tol)
    with pytest.raises(ConfigurationError):
        is_c_convex(Potential(g, np.zeros(g.size)), tol / 3)


def test_normalize_class():
    g = build_grid(I, 101)
    r = normalize_class(Potential(g, np.full(g.size, 5.0)))
    assert isinstance(r, PotentialClass)
    assert np.allclose(r.values, 0.0)
    r = normalize_class(Potential(g, g.nodes.copy()))
    assert np.max(np.abs(r.values - (g.nodes - 0.5))) <= 1e-10
    assert normalize_class(r) is r or np.array_equal(normalize_class(r).values, r.values)


@given(seeds)
def test_normalize_idempotent(seed):
    g = GRIDS["circle"]
    r = normalize_class(_random(g, seed))
    assert np.array_equal(normalize_class(r).values, r.values)


def test_legendre_quadratic_self_dual():
    g = build_grid(I, 201)
    psi, _ = legendre_fenchel(Potential(g, 0.5 * g.nodes ** 2))
    y = g.nodes[1:-1]
    assert np.max(np.abs(psi.values[1:-1] - 0.5 * y ** 2)) <= g.eps * diameter(I)


def test_legendre_max_of_two_affine():
    g = build_grid(I, 201)
    x = g.nodes
    phi1 = np.maximum(0.25 * x, 0.75 * x - 0.25)      # slopes cross at x = 0.5
    psi, arg = legendre_fenchel(Potential(g, phi1))
    cand = np.array([0.0, 0.5, 1.0])
    fc = np.maximum(0.25 * cand, 0.75 * cand - 0.25)
    closed = np.max(x[:, None] * cand[None, :] - fc[None, :], axis=1)
    assert np.allclose(psi.values, closed, atol=1e-14)
    mid = (x > 0.25 + 1e-9) & (x < 0.75 - 1e-9)
    assert np.all(x[arg[mid]] == 0.5)
    assert np.all(x[arg[x < 0.25 - 1e-9]] == 0.0)
    assert np.all(x[arg[x > 0.75 + 1e-9]] == 1.0)


def test_legendre_square_corners():
    g = build_grid(SQ, 20)
    psi, _ = legendre_fenchel(Potential(g, np.zeros(g.size)))
    corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    want = np.max(g.nodes @ corners.T, axis=1)
    assert np.all(psi.values <= want + 1e-15)
    assert np.all(want - psi.values <= g.eps * np.linalg.norm(g.nodes, axis=1) + 1e-15)


def test_circle_unsupported():
    g = GRIDS["circle"]
    with pytest.raises(UnsupportedDomainError):
        legendre_fenchel(Potential(g, np.zeros(g.size)))
    with pytest.raises(UnsupportedDomainError):
        shift_quadratic(Potential(g, np.zeros(g.size)), 1)
    with pytest.raises(UnsupportedDomainError):
        c_transform(Potential(GRIDS["square"], np.zeros(GRIDS["square"].size)), method="fast")


def test_shift_quadratic_examples():
    g = build_grid(I, 11)
    z = Potential(g, np.zeros(g.size))
    assert np.allclose(shift_quadratic(z, 1).values, g.nodes ** 2 / 2)
    assert np.allclose(shift_quadratic(Potential(g, -g.nodes ** 2 / 2), 1).values, 0.0)


@given(seeds)
def test_shift_quadratic_round_trip_exact(seed):
    for name in ("interval", "square"):
        p = _random(GRIDS[name], seed)
        assert np.array_equal(shift_quadratic(shift_quadratic(p, 1), -1).values, p.values)


@given(seeds, st.floats(-3, 3))
def test_constant_shift(seed, lam):
    for g in GRIDS.values():
        p = _random(g, seed)
        a = c_transform(p + lam).values
        b = c_transform(p).values - lam
        assert np.max(np.abs(a - b)) <= 1e-12


@given(seeds)
def test_order_reversal(seed):
    r = np.random.default_rng(seed)
    for g in GRIDS.values():
        p = _random(g, seed)
        q = Potential(g, p.values + r.uniform(0, 0.2, g.size))
        assert np.all(c_transform(p).values >= c_transform(q).values)


@given(seeds)
def test_output_lipschitz(seed):
    for g in GRIDS.values():
        assert lipschitz_violation(c_transform(_random(g, seed, scale=5.0))) <= 1e-12


@given(seeds)
def test_involution_on_transforms(seed):
    for g in GRIDS.values():
        phi = c_transform(_random(g, seed))
        cc = c_transform(c_transform(phi))
        assert np.max(np.abs(cc.values - phi.values)) <= 2 * discretization_floor(g)


@given(seeds)
def test_euclidean_consistency(seed):
    g = GRIDS["interval"]
    phi = _random(g, seed)
    # phi^c(x) = max_y [x y - (phi(y) + y^2/2)] - x^2/2
    psi1, _ = legendre_fenchel(shift_quadratic(phi, 1))
    via_lf = shift_quadratic(psi1, -1).values
    assert np.max(np.abs(c_transform(phi).values - via_lf)) <= 2 * discretization_floor(g)


@pytest.mark.parametrize("n", [2, 3, 17, 500, 2048])
@pytest.mark.parametrize("make", [Domain.interval, Domain.circle])
def test_fast_matches_brute(n, make):
    g = build_grid(make(), n)
    for seed in range(3):
        p = Potential(g, np.random.default_rng(seed).normal(size=g.size))
        assert np.max(np.abs(c_transform(p).values - c_transform(p, method="fast").values)) <= 1e-12


def test_argmin_ties_lowest_index():
    g = build_grid(I, 3)
    # from x = 0.5 both 0 and 1 cost the same
    p = Potential(g, np.array([0.0, 10.0, 0.0]))
    assert c_transform_argmin(p)[1] == 0


def test_potential_json_round_trip():
    p = _random(GRIDS["square"], 3)
    q = Potential.from_json(p.to_json())
    assert np.array_equal(p.values, q.values) and q.grid.resolution == p.grid.resolution
