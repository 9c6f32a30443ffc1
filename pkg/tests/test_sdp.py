import numpy as np
import pytest

import oracles as O
from qdb import channels as ch
from qdb import divergences as dv
from qdb import fisher as fi
from qdb.errors import InfeasibleError, MaxIterationsError
from qdb.sdp import programs
from qdb.sdp.lmi import LmiBuilder, embed
from qdb.sdp.seesaw import fisher_for_sigma, reference_operator, sld_channel_seesaw
from qdb.sdp.solver import SdpProblem, solve

# fixed instances; values from the Sylvester/inverse oracles in tests/oracles.py
RHO = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
DRHO = np.array([[0.2, -0.1j], [0.1j, -0.2]])
RHO3 = np.array([[0.5, 0.1, 0.05j], [0.1, 0.3, 0.02], [-0.05j, 0.02, 0.2]])
DRHO3 = np.array([[0.1, 0.05j, 0], [-0.05j, -0.05, 0.03], [0, 0.03, -0.05]])
SLD_RHO, RLD_RHO = 0.21000000000000013, 0.3125000000000001
SLD_RHO3, RLD_RHO3 = 0.06138248171335426, 0.0671441774491682
# cvxpy (Clarabel) value of the root fidelity program for GADC(0.8, 0.2) vs GADC(0.7, 0.2)
ROOT_FID_GADC = 0.9960222579730229


def diag_problem():
    a = np.array([[[1.0, 0], [0, 0]], [[0, 0], [0, 1.0]]])
    return SdpProblem([np.diag([1.0, 2.0])], [a], [1.0, 1.0])


class TestSolver:
    def test_diagonal_lp(self):
        sol = solve(diag_problem())
        assert sol.status == "optimal"
        assert sol.dual_value == pytest.approx(3.0, abs=1e-7)
        assert sol.primal_value == pytest.approx(3.0, abs=1e-7)
        assert sol.gap <= 1e-8

    def test_unbounded_lmi_is_infeasible_dual(self):
        p = SdpProblem([np.zeros((1, 1))], [np.array([[[-1.0]]])], [1.0])
        with pytest.raises(InfeasibleError) as info:
            solve(p)
        assert info.value.solution.status == "infeasible"

    def test_iteration_budget(self):
        with pytest.raises(MaxIterationsError) as info:
            solve(diag_problem(), max_iter=2)
        assert info.value.solution.status == "max-iter"
        assert solve(diag_problem(), max_iter=2, raise_on_failure=False).status == "max-iter"

    def test_two_by_two_block(self):
        # max y s.t. [[1, y], [y, 1]] >= 0 -> y = 1
        a = np.array([[[0.0, -1.0], [-1.0, 0.0]]])
        sol = solve(SdpProblem([np.eye(2)], [a], [1.0]))
        assert sol.dual_value == pytest.approx(1.0, abs=1e-7)

    def test_embedding_preserves_spectrum(self, rng):
        h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = h + h.conj().T
        w = np.linalg.eigvalsh(h)
        we = np.linalg.eigvalsh(embed(h))
        np.testing.assert_allclose(np.sort(np.repeat(w, 2)), we, atol=1e-12)


class TestLmiBuilder:
    def test_max_eigenvalue_program(self, rng):
        h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = h + h.conj().T
        b = LmiBuilder()
        b.scalar("t")
        b.psd(lambda x: x["t"] * np.eye(3) - h)
        b.maximize(lambda x: -x["t"])
        val, xs, sol = b.solve(tol=1e-10)
        assert -val == pytest.approx(np.linalg.eigvalsh(h)[-1], abs=1e-8)
        assert xs["t"] == pytest.approx(-val, abs=1e-8)

    def test_schur_min_trace(self, rng):
        x = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        y = g @ g.conj().T + 0.1 * np.eye(3)
        val, _ = programs.schur_min_trace(x, y, tol=1e-12)
        ref = np.trace(x.conj().T @ np.linalg.inv(y) @ x).real
        assert val == pytest.approx(ref, rel=1e-9)


class TestStatePrograms:
    @pytest.mark.parametrize("rho,drho,sld,rld", [(RHO, DRHO, SLD_RHO, RLD_RHO), (RHO3, DRHO3, SLD_RHO3, RLD_RHO3)])
    def test_frozen_values(self, rho, drho, sld, rld):
        assert programs.sld_state_sdp(rho, drho).value == pytest.approx(sld, rel=1e-7)
        assert programs.rld_state_sdp(rho, drho).value == pytest.approx(rld, rel=1e-7)

    def test_gap_reported(self):
        r = programs.rld_state_sdp(RHO, DRHO)
        assert r.details["gap"] <= 1e-8

    def test_rank_deficient_compressed(self):
        rho = np.diag([0.6, 0.4, 0.0])
        drho = np.diag([0.1, -0.1, 0.0])
        assert programs.sld_state_sdp(rho, drho).value == pytest.approx(0.01 / 0.6 + 0.01 / 0.4, rel=1e-7)

    def test_infinite_detected_before_solving(self):
        rho = np.diag([1.0, 0.0])
        drho = np.array([[-0.1, 0], [0, 0.1]])
        assert programs.rld_state_sdp(rho, drho).value == np.inf


class TestChannelPrograms:
    @pytest.mark.parametrize("param,g,n", [("loss", 0.5, 0.2), ("loss", 0.5, 0.6), ("noise", 0.5, 0.2), ("phase", 0.5, 0.2)])
    def test_rld_channel_sdp_matches_spectral(self, param, g, n):
        fam = ch.gadc_family(param, gamma=None if param == "loss" else g, N=None if param == "noise" else n)
        theta = {"loss": g, "noise": n, "phase": 0.1}[param]
        spectral = fi.rld_channel(fam, theta).value
        assert programs.rld_channel_sdp(fam, theta).value == pytest.approx(spectral, rel=1e-6)

    def test_rld_channel_cvxpy(self):
        pytest.importorskip("cvxpy")
        fam = ch.gadc_family("noise", gamma=0.5)
        ref = O.rld_channel_cvx(fam.choi_op(0.3), fam.deriv(0.3), (2, 2))
        assert programs.rld_channel_sdp(fam, 0.3).value == pytest.approx(ref, rel=1e-6)

    def test_root_fidelity_frozen(self):
        val = programs.root_fidelity_channel_sdp(ch.gadc_choi(0.8, 0.2), ch.gadc_choi(0.7, 0.2))
        assert val == pytest.approx(ROOT_FID_GADC, abs=1e-6)

    def test_root_fidelity_simple_channels(self):
        i2 = ch.identity_channel(2)
        assert programs.root_fidelity_channel_sdp(i2, i2) == pytest.approx(1.0, abs=1e-7)
        assert programs.root_fidelity_channel_sdp(i2, ch.depolarizing_channel(2)) == pytest.approx(0.5, abs=1e-7)

    def test_geometric_fidelity_sdp_matches_closed(self):
        a, b = ch.gadc_choi(0.8, 0.2), ch.gadc_choi(0.7, 0.2)
        closed = dv.geometric_fidelity_channel(a, b)
        assert programs.geo_fidelity_channel_sdp(a, b) == pytest.approx(closed, abs=1e-6)
        assert closed <= programs.root_fidelity_channel_sdp(a, b) + 1e-7


class TestSeesaw:
    def test_value_identity(self, rng):
        # 2 v^dag K_sigma^-1 v equals the output-state SLD for input Z with Z^dag Z = sigma
        fam = ch.gadc_family("noise", gamma=0.6)
        g, dg = fam.choi_op(0.3), fam.deriv(0.3)
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        z /= np.linalg.norm(z)
        sigma = z.conj().T @ z
        zz = np.kron(z, np.eye(2))
        rho, drho = zz @ g @ zz.conj().T, zz @ dg @ zz.conj().T
        val, phi = fisher_for_sigma(g, dg, (2, 2), sigma)
        assert val == pytest.approx(fi.sld_state(rho, drho).value, rel=1e-9)
        kr = reference_operator(g, phi, (2, 2))
        assert np.trace(np.linalg.inv(sigma) @ kr).real == pytest.approx(val / 2, rel=1e-9)

    def test_bounds_and_monotone_trace(self):
        fam = ch.gadc_family("noise", gamma=0.5)
        res = sld_channel_seesaw(fam, 0.3)
        assert res.converged
        assert np.all(np.diff(res.trace) >= 0)
        assert res.lower_bound >= fi.choi_state_fisher(fam, 0.3).value - 1e-12
        lim = fi.sld_channel_limit(fam, 0.3, central=True).richardson
        assert res.lower_bound <= lim + 1e-3
        assert res.lower_bound == pytest.approx(lim, rel=1e-3)
        assert res.lower_bound <= fi.rld_channel(fam, 0.3).value

    def test_unitary_family(self):
        res = sld_channel_seesaw(ch.unitary_family(np.diag([1.0, -1.0])), 0.2)
        assert res.lower_bound == pytest.approx(4.0, rel=1e-6)

    def test_strict_budget(self):
        fam = ch.gadc_family("noise", gamma=0.5)
        with pytest.raises(MaxIterationsError):
            sld_channel_seesaw(fam, 0.3, iters=1, strict=True)
        assert not sld_channel_seesaw(fam, 0.3, iters=1).converged
