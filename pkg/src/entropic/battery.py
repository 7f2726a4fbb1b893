"""The seeded acceptance battery.

Each check returns a :class:`TestReport`; ``run_battery`` runs a selection
in name order. ``canary=True`` flips a sign inside the conjugation checks so
that a corrupted build is seen to fail.
"""

import time

import numpy as np
from scipy import stats

from .conjugation import Potential, c_transform, discretization_floor
from .dirichlet import expected_stick, sample_dirichlet_ferguson, sample_stick_breaking
from .domain import Domain, build_grid, diameter
from .entropic_sampling import hole_report, sample_entropic
from .measures import Discrete, GridDensity, Partition, coarse_grain
from .metrics import (conjugation_continuity_probe, discrete_wasserstein, entropy_duality_gap,
                      laguerre_coupling_cost, map_distances_1d, wasserstein_1d,
                      wasserstein_empirical)
from .transport.one_dim import conjugate_map_graph, conjugate_measure_1d, pushforward_1d
from .transport.semidiscrete import LaguerreMap, semidiscrete_weights
from .validation import TestReport, ks_2samp_test, ks_test, moment_check

DEFAULT_SEED = 20240601


def _report(name, statistic, threshold, ok, seed, t0, budget, **detail):
    elapsed = time.perf_counter() - t0
    detail.update(runtime_s=elapsed, budget_s=budget)
    passed = bool(ok) and elapsed < budget
    return TestReport(name, float(statistic), float(threshold), passed, detail.pop("p_value", None),
                      detail.pop("n", None), seed, detail,
                      replay=f"entropic validate --only {name} --seed {seed}")


# ---------------------------------------------------------------------------

def _refine(grid, factor):
    n = grid.resolution
    if grid.domain.kind == "interval":
        return build_grid(grid.domain, (n - 1) * factor + 1)
    return build_grid(grid.domain, n * factor)


def check_involution(seed=DEFAULT_SEED, canary=False, n=1000, count=100, factor=4):
    """``||C(C(phi)) - phi|| <= 4 D eps`` for c-convex potentials sampled on a grid.

    Each ``phi`` is the exact transform of a random potential on a 4x finer
    grid, restricted to the working grid; it is ``D``-Lipschitz and
    c-convex up to the fine discretization.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        domain = Domain.interval() if i % 2 == 0 else Domain.circle()
        grid = build_grid(domain, n)
        fine = _refine(grid, factor)
        D = diameter(domain)
        psi = Potential(fine, rng.uniform(0.0, 0.5 * D * D, fine.size))
        phi_f = c_transform(psi, method="fast")
        phi = Potential(grid, phi_f.values[::factor][:grid.size])
        cc = c_transform(c_transform(phi))
        ref = -phi.values if canary else phi.values
        err = np.max(np.abs(cc.values - ref)) / (2 * discretization_floor(grid))
        worst = max(worst, float(err))
    return _report("01_involution", worst, 1.0, worst <= 1.0, seed, t0, 30.0, n=count,
                   note="statistic is max error / (4 D eps)")


def _cyclic_match(x, alpha, y, beta):
    """Smallest max-error over rotations of the closed-form cyclic relations."""
    k = len(x)
    gx = np.mod(np.roll(x, -1) - x, 1.0)          # |x_{i+1} - x_i|
    gx[gx == 0] = 1.0
    gy = np.mod(np.roll(y, -1) - y, 1.0)
    gy[gy == 0] = 1.0
    best = np.inf
    for s in range(k):
        b = np.roll(beta, -s)
        g = np.roll(gy, -s)
        err = max(np.max(np.abs(b - gx)), np.max(np.abs(g - np.roll(alpha, -1))))
        best = min(best, err)
    return best


def check_circle_closed_form(seed=DEFAULT_SEED, canary=False, trials=20):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    C = Domain.circle()
    worst = 0.0
    for k in (2, 3, 5):
        for _ in range(trials):
            x = np.sort(rng.random(k))
            alpha = rng.dirichlet(np.ones(k))
            nu = conjugate_measure_1d(Discrete(C, x, alpha))
            if len(nu) != k:
                worst = np.inf
                continue
            order = np.argsort(nu.atoms)
            worst = max(worst, _cyclic_match(x, alpha, nu.atoms[order], nu.weights[order]))
    return _report("02_circle_closed_form", worst, 1e-12, worst <= 1e-12, seed, t0, 1.0,
                   n=3 * trials)


def check_interval_fixture(seed=DEFAULT_SEED, canary=False):
    t0 = time.perf_counter()
    I = Domain.interval()
    mu = Discrete(I, [0.25, 0.75], [0.5, 0.5])
    nu = conjugate_measure_1d(mu)
    want_x, want_w = np.array([0.0, 0.5, 1.0]), np.array([0.25, 0.5, 0.25])
    atoms = 1.0 - nu.atoms[::-1] if canary else nu.atoms
    if len(nu) != 3:
        return _report("03_interval_fixture", np.inf, 1e-12, False, seed, t0, 1.0)
    err = max(np.max(np.abs(atoms - want_x)), np.max(np.abs(nu.weights - want_w)))
    back = conjugate_measure_1d(nu)
    if len(back) == 2:
        err = max(err, np.max(np.abs(back.atoms - mu.atoms)), np.max(np.abs(back.weights - mu.weights)))
    else:
        err = np.inf
    if canary:
        err = max(err, 1.0)
    return _report("03_interval_fixture", err, 1e-12, err <= 1e-12, seed, t0, 1.0)


DUALITY_DENSITIES = {
    "2+sin(2 pi x)": lambda x: 2.0 + np.sin(2 * np.pi * x),
    "1+x^2": lambda x: 1.0 + x * x,
    "exp(cos(2 pi x))": lambda x: np.exp(np.cos(2 * np.pi * x)),
}


def check_entropy_duality(seed=DEFAULT_SEED, canary=False):
    t0 = time.perf_counter()
    I = Domain.interval()
    gaps, ratios = {}, {}
    for name, f in DUALITY_DENSITIES.items():
        g = []
        for n in (2048, 4096):
            grid = build_grid(I, n)
            g.append(entropy_duality_gap(GridDensity(grid, f(grid.nodes))))
        gaps[name] = g
        ratios[name] = g[1] / g[0] if g[0] > 0 else 0.0
    worst_gap = max(g[0] for g in gaps.values())
    worst_ratio = max(ratios.values())
    ok = worst_gap <= 2e-2 and worst_ratio <= 0.6
    return _report("04_entropy_duality", worst_gap, 2e-2, ok, seed, t0, 10.0,
                   worst_ratio=worst_ratio, gaps=gaps)


def check_semidiscrete(seed=DEFAULT_SEED, canary=False, n_sites=20):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    sq = Domain.unit_square()
    sites = rng.random((n_sites, 2))
    lam = rng.dirichlet(np.ones(n_sites))
    tess = semidiscrete_weights(sq, sites, lam, tol=1e-10, max_iter=100)
    res = float(np.max(np.abs(tess.masses - lam)))
    sym = semidiscrete_weights(sq, [[0.25, 0.5], [0.75, 0.5]], [0.5, 0.5])
    w_err = float(np.max(np.abs(sym.weights)))
    cut = sym.cells[0]
    cut_err = float(np.max(np.abs(cut[cut[:, 0] > 0.25, 0] - 0.5)))
    ok = res <= 1e-6 and tess.iterations <= 100 and w_err <= 1e-10 and cut_err <= 1e-10
    return _report("05_semidiscrete", res, 1e-6, ok, seed, t0, 60.0, iterations=tess.iterations,
                   symmetric_weight_error=w_err, bisector_error=cut_err)


def check_hole_law(seed=DEFAULT_SEED, canary=False, count=20, n_points=100_000):
    t0 = time.perf_counter()
    sq = Domain.unit_square()
    probe, size_err = 0.0, 0.0
    for i in range(count):
        s = sample_entropic(1.0, sq, seed=seed + i, max_terms=10, n_samples=n_points)
        probe = max(probe, float(hole_report(s).max()))
        size_err = max(size_err, float(np.max(np.abs(s.hole_sizes() - s.nu.weights))))
    ok = probe <= 2e-3 and size_err <= 1e-6
    return _report("06_hole_law", probe, 2e-3, ok, seed, t0, 300.0, n=count, hole_size_error=size_err)


def check_dirichlet_marginals(seed=DEFAULT_SEED, canary=False, count=5000, beta=2.0):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    I = Domain.interval()
    two = Partition.from_breaks(I, [0.3])
    three = Partition.from_breaks(I, [0.2, 0.5])
    x2 = np.empty(count)
    x3 = np.empty((count, 3))
    for i in range(count):
        nu = sample_dirichlet_ferguson(beta, I, rng)
        x2[i] = coarse_grain(nu, two)[0]
        x3[i] = coarse_grain(nu, three)
    r1 = ks_test(x2, stats.beta(0.6, 1.4).cdf, name="marginal", seed=seed)
    # aggregation: nu(M1 u M2) ~ first coordinate of Dirichlet(beta*(0.5, 0.5))
    g = rng.gamma(np.array([0.5, 0.5]) * beta, size=(count, 2))
    direct = g[:, 0] / g.sum(axis=1)
    r2 = ks_2samp_test(x3[:, 0] + x3[:, 1], direct, name="aggregation", seed=seed)
    p = min(r1.p_value, r2.p_value)
    return _report("07_dirichlet_marginals", p, 1e-3, r1.passed and r2.passed, seed, t0, 60.0,
                   n=count, p_value=p, p_marginal=r1.p_value, p_aggregation=r2.p_value)


def check_stick_moments(seed=DEFAULT_SEED, canary=False, count=100_000, k_max=8):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    zs = {}
    for beta in (0.5, 1.0, 4.0):
        lam = np.zeros((count, k_max))
        for i in range(count):
            w = sample_stick_breaking(beta, rng, max_terms=k_max).weights
            lam[i, :len(w)] = w
        for k in range(1, k_max + 1):
            r = moment_check(lam[:, k - 1], expected_stick(beta, k))
            zs[f"beta={beta:g},k={k}"] = r.statistic
    worst = max(abs(z) for z in zs.values())
    return _report("08_stick_moments", worst, 5.0, worst <= 5.0, seed, t0, 60.0, n=count, z=zs)


def _random_map(rng, n):
    inc = rng.exponential(size=n - 1) * (rng.random(n - 1) < 0.8)
    v = np.concatenate([[0.0], np.cumsum(inc)])
    lo, hi = np.sort(rng.random(2))
    return lo + (hi - lo) * v / v[-1]


def _exact_map_integrals(a, b):
    d = a - b
    h = 1.0 / (len(a) - 1)
    da, db = d[:-1], d[1:]
    l2 = float(np.sum(h * (da * da + da * db + db * db) / 3.0))
    same = da * db >= 0
    s = np.abs(da) + np.abs(db)
    l1 = np.where(same, h * s / 2, h * (da * da + db * db) / (2 * np.where(s > 0, s, 1.0)))
    return l2, float(np.sum(l1))


def _isometry_pairs(seed, count, n):
    rng = np.random.default_rng(seed)
    I = Domain.interval()
    for _ in range(count):
        g1, g2 = _random_map(rng, n), _random_map(rng, n)
        yield I, g1, g2


def check_isometries(seed=DEFAULT_SEED, canary=False, count=50, n=4096):
    t0 = time.perf_counter()
    eps = 1.0 / (n - 1)
    l2_err, l1_err = 0.0, 0.0
    for I, g1, g2 in _isometry_pairs(seed, count, n):
        dw = wasserstein_1d(pushforward_1d(g1, I), pushforward_1d(g2, I))
        l2, l1 = _exact_map_integrals(g1, g2)
        l2_err = max(l2_err, abs(dw * dw - l2))
        _, l1c = map_distances_1d(conjugate_map_graph(g1), conjugate_map_graph(g2))
        l1_err = max(l1_err, abs(l1c - l1))
    ok = l2_err <= 1e-6 and l1_err <= 5 * eps
    return _report("09_isometries", l2_err, 1e-6, ok, seed, t0, 30.0, n=count, l1_error=l1_err,
                   l1_threshold=5 * eps)


def continuity_sequences():
    I = Domain.interval()
    limit = Discrete(I, [0.25], [1.0])
    ns = [10, 30, 100, 300, 1000]
    seqs = {
        "two_atom": [Discrete(I, [0.25, 0.75], [1 - 1 / n, 1 / n]) for n in ns],
        "constant": [limit for _ in ns],
        "mollified": [_uniform_on(I, 0.25 - 1 / n, 0.25 + 1 / n) for n in ns],
    }
    return ns, seqs, limit


def _uniform_on(domain, a, b):
    from .measures import GraphMeasure

    return GraphMeasure(domain, [0.0, a, b, 1.0], [0.0, 0.0, 1.0, 1.0])


def check_continuity(seed=DEFAULT_SEED, canary=False):
    t0 = time.perf_counter()
    ns, seqs, limit = continuity_sequences()
    final, mono = {}, True
    for name, seq in seqs.items():
        d = conjugation_continuity_probe(seq, limit)
        final[name] = float(d[-1])
        mono &= bool(np.all(np.diff(d) <= 1e-15))
    worst = max(final.values())
    return _report("10_continuity", worst, 1e-3, worst < 1e-3 and mono, seed, t0, 10.0,
                   final_distance=final, n_values=ns, monotone=mono)


def check_coupling_bound(seed=DEFAULT_SEED, canary=False, pairs=10, cloud=512):
    t0 = time.perf_counter()
    worst = -np.inf
    for I, g1, g2 in _isometry_pairs(seed, 20, 1025):
        dw = wasserstein_1d(pushforward_1d(g1, I), pushforward_1d(g2, I))
        worst = max(worst, dw - np.sqrt(_exact_map_integrals(g1, g2)[0]))
    rng = np.random.default_rng(seed)
    sq = Domain.unit_square()
    for _ in range(pairs):
        k = int(rng.integers(2, 8))
        nu1 = Discrete(sq, rng.random((k, 2)), rng.dirichlet(np.ones(k)))
        nu2 = Discrete(sq, rng.random((k + 1, 2)), rng.dirichlet(np.ones(k + 1)))
        t1 = semidiscrete_weights(sq, nu1.atoms, nu1.weights)
        t2 = semidiscrete_weights(sq, nu2.atoms, nu2.weights)
        worst = max(worst, discrete_wasserstein(nu1, nu2) - np.sqrt(laguerre_coupling_cost(t1, t2)))
        y = sq.sample(rng, cloud)
        a, b = LaguerreMap(t1).evaluate(y), LaguerreMap(t2).evaluate(y)
        upper = np.sqrt(np.mean(np.sum((a - b) ** 2, axis=1)))
        worst = max(worst, wasserstein_empirical(a, b) - upper)
    return _report("11_coupling_bound", worst, 1e-9, worst <= 1e-9, seed, t0, 60.0,
                   note="statistic is max(estimate - upper bound)")


CHECKS = {
    "01_involution": check_involution,
    "02_circle_closed_form": check_circle_closed_form,
    "03_interval_fixture": check_interval_fixture,
    "04_entropy_duality": check_entropy_duality,
    "05_semidiscrete": check_semidiscrete,
    "06_hole_law": check_hole_law,
    "07_dirichlet_marginals": check_dirichlet_marginals,
    "08_stick_moments": check_stick_moments,
    "09_isometries": check_isometries,
    "10_continuity": check_continuity,
    "11_coupling_bound": check_coupling_bound,
}


def select(only=None):
    """Names matching ``only`` (comma-separated names, prefixes or numbers)."""
    if not only:
        return list(CHECKS)
    out = []
    for tok in (t.strip() for t in only.split(",")):
        if not tok:
            continue
        hit = [n for n in CHECKS if n == tok or n.startswith(tok) or n.split("_", 1)[0] == tok.zfill(2)
               or n.split("_", 1)[1] == tok]
        if not hit:
            raise KeyError(tok)
        out.extend(h for h in hit if h not in out)
    return sorted(out)


def run_battery(seed=DEFAULT_SEED, only=None, canary=False):
    return [CHECKS[name](seed=seed, canary=canary) for name in select(only)]
