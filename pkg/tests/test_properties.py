import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdb import bounds as bd
from qdb import channels as ch
from qdb import divergences as dv
from qdb import ensembles as en
from qdb import fisher as fi
from qdb import linalg as la

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 4)
alphas_dp = st.sampled_from([0.3, 0.7, 1.5, 2.0])
common = settings(max_examples=30, deadline=None)


@common
@given(seeds, dims, dims)
def test_partial_trace_preserves_trace_and_positivity(seed, a, b):
    rng = np.random.default_rng(seed)
    rho = en.random_density(a * b, rng)
    for keep in (0, 1):
        red = la.partial_trace(rho, (a, b), keep)
        assert np.trace(red).real == pytest.approx(1.0)
        assert la.lambda_min(la.hermitian_part(red)) >= -1e-12


@common
@given(seeds, dims, st.floats(0.05, 0.95))
def test_geometric_mean_swap_symmetry(seed, d, alpha):
    rng = np.random.default_rng(seed)
    x, y = en.random_density(d, rng, floor=0.01), en.random_density(d, rng, floor=0.01)
    np.testing.assert_allclose(la.geometric_mean(x, y, alpha), la.geometric_mean(y, x, 1 - alpha), atol=1e-8)


@common
@given(seeds, dims)
def test_geometric_mean_is_joint_power_mean_for_scalars(seed, d):
    rng = np.random.default_rng(seed)
    x = en.random_density(d, rng, floor=0.01)
    a, b = rng.uniform(0.1, 2.0, size=2)
    np.testing.assert_allclose(la.geometric_mean(a * x, b * x, 0.3), a**0.7 * b**0.3 * x, atol=1e-10)


@common
@given(seeds, dims, dims)
def test_random_channel_choi_is_valid(seed, a, b):
    rng = np.random.default_rng(seed)
    c = en.random_channel(a, b, rng)
    np.testing.assert_allclose(la.partial_trace(c.op, c.dims, 0), np.eye(a), atol=1e-10)
    out = ch.apply_channel(c, en.random_density(a, rng))
    assert np.trace(out).real == pytest.approx(1.0)


@common
@given(seeds, dims)
def test_sld_never_exceeds_rld(seed, d):
    rng = np.random.default_rng(seed)
    rho = en.random_density(d, rng, floor=0.02)
    drho = en.random_traceless(d, rng)
    assert fi.sld_state(rho, drho).value <= fi.rld_state(rho, drho).value * (1 + 1e-10)


@common
@given(seeds, dims, dims)
def test_fisher_data_processing(seed, d_in, d_out):
    rng = np.random.default_rng(seed)
    rho = en.random_density(d_in, rng, floor=0.02)
    drho = en.random_traceless(d_in, rng)
    c = en.random_channel(d_in, d_out, rng)
    out, dout = ch.apply_channel(c, rho), ch.apply_channel(c, drho)
    for fn in (fi.sld_state, fi.rld_state):
        assert fn(out, dout).value <= fn(rho, drho).value + 1e-7


@common
@given(seeds, dims, alphas_dp)
def test_geometric_renyi_data_processing(seed, d, alpha):
    rng = np.random.default_rng(seed)
    rho, sigma = en.random_density(d, rng, floor=0.01), en.random_density(d, rng, floor=0.01)
    c = en.random_channel(d, 2, rng)
    before = dv.geometric_renyi(rho, sigma, alpha).value
    after = dv.geometric_renyi(ch.apply_channel(c, rho), ch.apply_channel(c, sigma), alpha).value
    assert after <= before + 1e-7


@common
@given(seeds, dims)
def test_renyi_ordering(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = en.random_density(d, rng, floor=0.01), en.random_density(d, rng, floor=0.01)
    for a in (0.3, 1.5, 2.0):
        s, p, g = dv.sandwiched_renyi(rho, sigma, a), dv.petz_renyi(rho, sigma, a), dv.geometric_renyi(rho, sigma, a).value
        assert s <= p + 1e-9 and p <= g + 1e-9
    assert dv.geometric_fidelity(rho, sigma) <= dv.fidelity(rho, sigma) + 1e-9


@common
@given(seeds)
def test_gadc_rld_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    fam, theta, p = en.random_gadc_family(rng)
    closed = bd.gadc_closed_form(p["param"], p["gamma"], p["N"])
    assert fi.rld_channel(fam, theta).value == pytest.approx(closed, rel=1e-8)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_chernoff_sandwich_on_gadc_pairs(seed):
    rng = np.random.default_rng(seed)
    (a, _), (b, _) = en.random_gadc(rng), en.random_gadc(rng)
    lower = bd.chernoff_lower(a, b, grid=8)
    upper = bd.geometric_chernoff_upper(a, b)
    assert 0 <= lower <= upper + 1e-6
    assert upper <= bd.geometric_fidelity_divergence(a, b) + 1e-9


@common
@given(st.floats(1e-3, 1e3), st.integers(1, 1000), st.sampled_from(["standard", "heisenberg"]))
def test_cramer_rao_product(fisher, n, scaling):
    v = bd.cramer_rao(fisher, n, scaling)
    k = 1 if scaling == "standard" else 2
    assert v * n**k * fisher == pytest.approx(1.0)


@common
@given(st.integers(1, 50), st.integers(1, 20))
def test_parse_grid_counts(k, m):
    step = 1.0 / (k + m + 1)
    grid = bd.parse_grid(f"{step}:{k * step}:{step}")
    assert len(grid) == k
    assert all(math.isclose(g, (i + 1) * step, rel_tol=1e-9) for i, g in enumerate(grid))


@common
@given(seeds, st.floats(0.01, 5.0))
def test_hoeffding_nonnegative_and_monotone(seed, r):
    rng = np.random.default_rng(seed)
    (a, _), (b, _) = en.random_gadc(rng), en.random_gadc(rng)
    h1 = bd.hoeffding_upper(a, b, r).value
    h2 = bd.hoeffding_upper(a, b, 2 * r).value
    assert h1 >= 0 and h2 <= h1 + 1e-9
