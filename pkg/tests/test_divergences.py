import math

import numpy as np
import pytest

import oracles as O
from qdb import channels as ch
from qdb import divergences as dv
from qdb.errors import BadAlphaError, DimMismatchError

RHO = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
SIGMA = np.array([[0.4, 0.05], [0.05, 0.6]])
R3 = np.array([[0.5, 0.1, 0.05j], [0.1, 0.3, 0.02], [-0.05j, 0.02, 0.2]])
S3 = np.array([[0.3, 0, 0.1], [0, 0.4, 0], [0.1, 0, 0.3]])

# (alpha, geometric, petz, sandwiched) from the scipy-based oracles
FROZEN = [
    (0.3, 0.09545030471419917, 0.09341148647955705, 0.09134919607391151),
    (0.5, 0.1555337535049445, 0.15215057167758633, 0.1509720010925732),
    (1.5, 0.379022592884021, 0.3750980691957106, 0.37375668639609455),
    (2.0, 0.44333538216357393, 0.44333538216357404, 0.43839595808686654),
]


def rand_state(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    r = g @ g.conj().T
    return r / np.trace(r).real


class TestFrozen:
    @pytest.mark.parametrize("alpha,geo,petz,sand", FROZEN)
    def test_renyi_family(self, alpha, geo, petz, sand):
        assert dv.geometric_renyi(RHO, SIGMA, alpha).value == pytest.approx(geo, rel=1e-10)
        assert dv.petz_renyi(RHO, SIGMA, alpha) == pytest.approx(petz, rel=1e-10)
        assert dv.sandwiched_renyi(RHO, SIGMA, alpha) == pytest.approx(sand, rel=1e-10)

    def test_other_divergences(self):
        assert dv.bs_relative_entropy(RHO, SIGMA) == pytest.approx(0.28465393909961745, rel=1e-10)
        assert dv.relative_entropy(RHO, SIGMA) == pytest.approx(0.2794225190907008, rel=1e-10)
        assert dv.dmax(RHO, SIGMA) == pytest.approx(0.6268121964134772, rel=1e-10)
        assert dv.fidelity(RHO, SIGMA) == pytest.approx(0.8598717737923584, rel=1e-10)

    def test_three_dimensional(self):
        assert dv.geometric_renyi(R3, S3, 2.0).value == pytest.approx(0.3302026236076181, rel=1e-10)
        assert dv.bs_relative_entropy(R3, S3) == pytest.approx(0.17099907513084364, rel=1e-10)

    def test_random_against_oracles(self, rng):
        for d in (2, 3, 4):
            r, s = rand_state(rng, d), rand_state(rng, d)
            for a in (0.4, 1.6):
                assert dv.geometric_renyi(r, s, a).value == pytest.approx(O.geometric_renyi(r, s, a), rel=1e-8)
                assert dv.petz_renyi(r, s, a) == pytest.approx(O.petz_renyi(r, s, a), rel=1e-8)
                assert dv.sandwiched_renyi(r, s, a) == pytest.approx(O.sandwiched_renyi(r, s, a), rel=1e-8)
            assert dv.bs_relative_entropy(r, s) == pytest.approx(O.bs_entropy(r, s), rel=1e-8)
            assert dv.dmax(r, s) == pytest.approx(O.dmax(r, s), rel=1e-8)


class TestAlpha:
    @pytest.mark.parametrize("alpha", [0.0, -0.5, 1.0, math.inf, math.nan])
    def test_rejected(self, alpha):
        with pytest.raises(BadAlphaError):
            dv.geometric_renyi(RHO, SIGMA, alpha)

    def test_near_one_warns(self):
        with pytest.warns(RuntimeWarning):
            dv.geometric_renyi(RHO, SIGMA, 1 + 1e-8)

    def test_channel_interval(self):
        c = ch.gadc_choi(0.5, 0.2)
        with pytest.raises(BadAlphaError, match=r"\(0,1\)u\(1,2\]: 2.5"):
            dv.geometric_renyi_channel(c, c, 2.5)

    def test_shapes(self):
        with pytest.raises(DimMismatchError):
            dv.geometric_renyi(RHO, S3, 0.5)


class TestSupport:
    def test_not_contained_above_one_is_infinite(self):
        r = dv.geometric_renyi(RHO, np.diag([1.0, 0.0]), 1.5)
        assert r.value == math.inf and r.support_case == dv.INFINITE
        assert dv.petz_renyi(RHO, np.diag([1.0, 0.0]), 1.5) == math.inf
        assert dv.bs_relative_entropy(RHO, np.diag([1.0, 0.0])) == math.inf
        assert dv.dmax(RHO, np.diag([1.0, 0.0])) == math.inf

    def test_not_contained_below_one_matches_eps_limit(self):
        sigma = np.diag([1.0, 0.0])
        r = dv.geometric_renyi(RHO, sigma, 0.5)
        assert r.support_case == dv.TILDE and np.isfinite(r.value)
        q = dv.geometric_quasi(RHO, sigma, 0.5)
        assert dv.geometric_renyi_eps_limit(RHO, sigma, 0.5) == pytest.approx(q, abs=1e-6)
        assert dv.geometric_quasi(RHO, sigma, 0.5, eps=1e-10) == pytest.approx(q, abs=1e-4)

    def test_orthogonal_supports(self):
        r = dv.geometric_renyi(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), 0.5)
        assert r.value == math.inf and r.support_case == dv.INFINITE
        assert dv.geometric_fidelity(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == 0.0

    def test_contained_low_rank(self, rng):
        sigma = rand_state(rng, 3)
        rho = rand_state(rng, 3, rank=1)
        r = dv.geometric_renyi(rho, sigma, 2.0)
        assert r.support_case == dv.CONTAINED
        # for pure rho, Q_2 = <psi|sigma^-1|psi>
        assert math.exp(r.value) == pytest.approx(np.trace(rho @ np.linalg.inv(sigma)).real, rel=1e-9)

    def test_explicit_regularization(self):
        r = dv.geometric_renyi(RHO, SIGMA, 0.5, eps=1e-3)
        assert r.regularization == 1e-3
        assert r.value == pytest.approx(dv.geometric_renyi(RHO, SIGMA + 1e-3 * np.eye(2), 0.5).value, rel=1e-12)


class TestRelations:
    def test_ordering_and_monotonicity(self, rng):
        for _ in range(10):
            r, s = rand_state(rng, 3), rand_state(rng, 3)
            prev = -1.0
            for a in (0.2, 0.5, 0.8, 1.3, 1.7, 2.0):
                geo = dv.geometric_renyi(r, s, a).value
                assert dv.sandwiched_renyi(r, s, a) <= dv.petz_renyi(r, s, a) + 1e-10
                assert dv.petz_renyi(r, s, a) <= geo + 1e-10
                assert geo >= prev - 1e-10
                prev = geo
            assert dv.relative_entropy(r, s) <= dv.bs_relative_entropy(r, s) + 1e-10
            assert dv.geometric_fidelity(r, s) <= dv.fidelity(r, s) + 1e-10

    def test_bs_is_alpha_to_one_limit(self):
        bs = dv.bs_relative_entropy(RHO, SIGMA)
        for a in (1 - 1e-4, 1 + 1e-4):
            assert dv.geometric_renyi(RHO, SIGMA, a).value == pytest.approx(bs, abs=1e-4)

    def test_large_alpha_approaches_dmax(self):
        vals = [dv.geometric_renyi(RHO, SIGMA, a).value for a in (5, 20, 100)]
        d = dv.dmax(RHO, SIGMA)
        assert vals[0] < vals[1] < vals[2] <= d + 1e-12
        assert d - vals[2] < 0.02

    def test_very_large_alpha_does_not_overflow(self):
        # dominant ratio 5 at p = 1/4: the gap to D_max is -ln(1/4) / (alpha - 1)
        p, q = np.diag([0.25, 0.75]), np.diag([0.05, 0.95])
        for a in (500, 5000):
            gap = dv.dmax(p, q) - dv.geometric_renyi(p, q, a).value
            assert gap == pytest.approx(math.log(4) / (a - 1), rel=1e-6)

    def test_classical_reduction(self):
        p, q = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.1, 0.3])
        assert O.classical_renyi(p, q, 0.5) == pytest.approx(0.19541623596167712, rel=1e-12)
        for a in (0.5, 1.5):
            ref = O.classical_renyi(p, q, a)
            for fn in (lambda *x: dv.geometric_renyi(*x).value, dv.petz_renyi, dv.sandwiched_renyi):
                assert fn(np.diag(p), np.diag(q), a) == pytest.approx(ref, abs=1e-12)
        kl = O.classical_kl(p, q)
        assert kl == pytest.approx(0.3652740407498063, rel=1e-12)
        assert dv.bs_relative_entropy(np.diag(p), np.diag(q)) == pytest.approx(kl, abs=1e-12)
        assert dv.relative_entropy(np.diag(p), np.diag(q)) == pytest.approx(kl, abs=1e-12)


class TestChannels:
    def test_identity_vs_depolarizing(self):
        v = dv.geometric_renyi_channel(ch.identity_channel(2), ch.depolarizing_channel(2), 2.0)
        assert v.value == pytest.approx(math.log(4), rel=1e-10)

    def test_identical_channels(self):
        c = ch.gadc_choi(0.3, 0.2)
        assert dv.geometric_renyi_channel(c, c, 2.0).value == pytest.approx(0.0, abs=1e-12)
        assert dv.bs_channel(c, c) == pytest.approx(0.0, abs=1e-12)
        assert dv.geometric_fidelity_channel(c, c) == pytest.approx(1.0, abs=1e-12)

    def test_replacers_reduce_to_states(self, rng):
        r, s = rand_state(rng, 2), rand_state(rng, 2)
        cr, cs = ch.replacer_channel(r, 3), ch.replacer_channel(s, 3)
        for a in (0.5, 1.5):
            assert dv.geometric_renyi_channel(cr, cs, a).value == pytest.approx(dv.geometric_renyi(r, s, a).value, rel=1e-9)
        assert dv.bs_channel(cr, cs) == pytest.approx(dv.bs_relative_entropy(r, s), rel=1e-9)

    def test_channel_bs_is_alpha_limit(self):
        a, b = ch.gadc_choi(0.8, 0.2), ch.gadc_choi(0.7, 0.3)
        bs = dv.bs_channel(a, b)
        for alpha in (1 - 1e-4, 1 + 1e-4):
            assert dv.geometric_renyi_channel(a, b, alpha).value == pytest.approx(bs, abs=1e-3)

    def test_channel_dominates_choi_state(self):
        a, b = ch.gadc_choi(0.8, 0.2), ch.gadc_choi(0.6, 0.4)
        for alpha in (0.5, 1.5, 2.0):
            state = dv.geometric_renyi(a.op / 2, b.op / 2, alpha).value
            assert dv.geometric_renyi_channel(a, b, alpha).value >= state - 1e-10

    def test_quasi_path_matches_pointwise(self):
        a, b = ch.gadc_choi(0.8, 0.2), ch.gadc_choi(0.6, 0.4)
        q = dv.channel_quasi_path(a, b)
        assert q.contained
        for alpha in (0.0, 0.3, 0.5, 1.0, 1.5):
            assert q(alpha) == pytest.approx(dv.channel_geometric_quasi(a, b, alpha), rel=1e-9)

    def test_not_contained_channels(self):
        ident = ch.identity_channel(2)
        amp = ch.gadc_choi(0.5, 0.0)
        assert dv.geometric_renyi_channel(ident, amp, 1.5).value == math.inf
        assert dv.bs_channel(ident, amp) == math.inf
        # pure Choi operator outside the support: the mean vanishes in the eps limit
        assert dv.geometric_renyi_channel(ident, amp, 0.5).value == math.inf
        a, b = ch.gadc_choi(0.5, 0.2), ch.gadc_choi(1.0, 0.0)
        v = dv.geometric_renyi_channel(a, b, 0.5)
        assert v.support_case == dv.TILDE
        # diagonal-reference inputs approach the optimum from below
        scan = 0.0
        for t in np.linspace(1e-4, 1 - 1e-4, 400):
            z = np.kron(np.diag([np.sqrt(1 - t), np.sqrt(t)]), np.eye(2))
            scan = max(scan, dv.geometric_renyi(z @ a.op @ z, z @ b.op @ z, 0.5).value)
        assert scan <= v.value + 1e-9
        assert v.value - scan < 1e-3

    def test_dimension_mismatch(self):
        with pytest.raises(DimMismatchError):
            dv.geometric_renyi_channel(ch.identity_channel(2), ch.identity_channel(3), 0.5)
