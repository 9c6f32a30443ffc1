"""Semi-definite programs for Fisher information and channel fidelities.

Singular operators are compressed to their support before a program is
built, so every program handed to the solver is strictly feasible. The
finiteness conditions are checked beforehand with
:func:`qdb.fisher.finiteness_report`; an infinite value never comes from
solver divergence.
"""

import numpy as np

from .. import linalg as la
from ..fisher import FisherResult, finiteness_report, INF, _check_family_point
from .lmi import LmiBuilder

DEFAULT_TOL = 1e-8


def _compress(op, rank_tol=None):
    s = la.support_split(op, rank_tol)
    return s.basis, la.hermitian_part(la.dagger(s.basis) @ op @ s.basis)


def sld_state_sdp(rho, drho, tol=DEFAULT_TOL, rank_tol=None):
    """SLD Fisher information as ``2 inf{mu : [[mu, v^dag], [v, K]] >= 0}``.

    Here ``K = rho (x) I + I (x) rho^T`` and ``v = (drho (x) I)|Gamma>``; both
    are restricted to the support of ``K``.
    """
    rho, drho = _check_family_point(rho, drho)
    rep = finiteness_report(rho, drho, "SLD", rank_tol)
    if not rep.finite:
        return FisherResult(INF, rep, "sdp")
    d = rho.shape[0]
    kmat = np.kron(rho, np.eye(d)) + np.kron(np.eye(d), rho.T)
    u, kc = _compress(kmat)
    v = la.dagger(u) @ la.vec_gamma(drho)
    if np.linalg.norm(v) == 0:
        return FisherResult(0.0, rep, "sdp", {"gap": 0.0})
    b = LmiBuilder()
    b.scalar("mu")
    b.psd(lambda x: np.block([[np.array([[x["mu"]]]), v.conj()[None, :]], [v[:, None], kc]]))
    b.maximize(lambda x: -x["mu"])
    val, _, sol = b.solve(tol=tol)
    return FisherResult(max(-2.0 * val, 0.0), rep, "sdp", {"gap": sol.gap, "solution": sol})


def rld_state_sdp(rho, drho, tol=DEFAULT_TOL, rank_tol=None):
    """RLD Fisher information as ``inf{Tr M : M >= 0, [[M, drho], [drho, rho]] >= 0}``."""
    rho, drho = _check_family_point(rho, drho)
    rep = finiteness_report(rho, drho, "RLD", rank_tol)
    if not rep.finite:
        return FisherResult(INF, rep, "sdp")
    u, rc = _compress(rho, rank_tol)
    dc = la.hermitian_part(la.dagger(u) @ drho @ u)
    if la.fro(dc) == 0:
        return FisherResult(0.0, rep, "sdp", {"gap": 0.0})
    r = rc.shape[0]
    b = LmiBuilder()
    b.hermitian("M", r)
    b.psd(lambda x: x["M"])
    b.psd(lambda x: np.block([[x["M"], dc], [dc, rc]]))
    b.maximize(lambda x: -np.trace(x["M"]).real)
    val, _, sol = b.solve(tol=tol)
    return FisherResult(max(-val, 0.0), rep, "sdp", {"gap": sol.gap, "solution": sol})


def rld_channel_sdp_choi(g, dg, dims, tol=DEFAULT_TOL, rank_tol=None):
    """``inf{lambda : lambda I_R >= Tr_B M, [[M, dG], [dG, G]] >= 0}``."""
    g = la.as_hermitian(g)
    dg = la.as_hermitian(dg, tol=1e-10)
    rep = finiteness_report(g, dg, "RLD", rank_tol)
    if not rep.finite:
        return FisherResult(INF, rep, "sdp")
    u, gc = _compress(g, rank_tol)
    dc = la.hermitian_part(la.dagger(u) @ dg @ u)
    if la.fro(dc) == 0:
        return FisherResult(0.0, rep, "sdp", {"gap": 0.0})
    r = gc.shape[0]
    dR = dims[0]
    b = LmiBuilder()
    b.scalar("lam")
    b.hermitian("M", r)
    b.psd(lambda x: x["lam"] * np.eye(dR) - la.partial_trace(u @ x["M"] @ la.dagger(u), dims, 0))
    b.psd(lambda x: np.block([[x["M"], dc], [dc, gc]]))
    b.maximize(lambda x: -x["lam"])
    val, _, sol = b.solve(tol=tol)
    return FisherResult(max(-val, 0.0), rep, "sdp", {"gap": sol.gap, "solution": sol})


def rld_channel_sdp(fam, theta, tol=DEFAULT_TOL, rank_tol=None):
    return rld_channel_sdp_choi(fam.choi_op(theta), fam.deriv(theta), fam.dims, tol, rank_tol)


def root_fidelity_channel_sdp(cN, cM, tol=DEFAULT_TOL, return_solution=False, accept_gap=None):
    """Root channel fidelity ``sup{lambda : lambda I <= Re Tr_B Q, [[G_N, Q^dag], [Q, G_M]] >= 0}``.

    ``Q`` is a general complex matrix; it is parameterized on the supports of
    the two Choi operators.
    """
    dims = cN.dims
    uN, gN = _compress(cN.op)
    uM, gM = _compress(cM.op)
    rN, rM = gN.shape[0], gM.shape[0]
    dR = dims[0]
    b = LmiBuilder()
    b.scalar("lam")
    b.complex_matrix("Q", rM, rN)

    def reduced(x):
        q = uM @ x["Q"] @ la.dagger(uN)
        t = la.partial_trace(q, dims, 0)
        return 0.5 * (t + la.dagger(t)) - x["lam"] * np.eye(dR)

    b.psd(reduced)
    b.psd(lambda x: np.block([[gN, la.dagger(x["Q"])], [x["Q"], gM]]))
    b.maximize(lambda x: x["lam"])
    val, _, sol = b.solve(tol=tol, accept_gap=accept_gap)
    val = min(max(val, 0.0), 1.0)
    return (val, sol) if return_solution else val


def geo_fidelity_channel_sdp(cN, cM, tol=DEFAULT_TOL, eps=1e-9, return_solution=False):
    """Root geometric channel fidelity ``sup{mu : [[G_N, X], [X, G_M]] >= 0, mu I <= Tr_B X, X >= 0}``.

    A singular ``Gamma_M`` is smoothed to ``Gamma_M + eps I``.
    """
    dims = cN.dims
    gM = la.as_hermitian(cM.op)
    if la.support_split(gM).rank < gM.shape[0]:
        gM = gM + eps * np.eye(gM.shape[0])
    uN, gN = _compress(cN.op)
    r = gN.shape[0]
    dR = dims[0]
    b = LmiBuilder()
    b.scalar("mu")
    b.hermitian("X", r)
    b.psd(lambda x: x["X"])
    b.psd(lambda x: la.partial_trace(uN @ x["X"] @ la.dagger(uN), dims, 0) - x["mu"] * np.eye(dR))

    def block(x):
        xf = uN @ x["X"]
        return np.block([[gN, la.dagger(xf)], [xf, gM]])

    b.psd(block)
    b.maximize(lambda x: x["mu"])
    val, _, sol = b.solve(tol=tol)
    val = min(max(val, 0.0), 1.0)
    return (val, sol) if return_solution else val


def schur_min_trace(x, y, tol=DEFAULT_TOL):
    """``min Tr M`` subject to ``[[M, X^dag], [X, Y]] >= 0`` (equals ``Tr[X^dag Y^-1 X]``)."""
    x = np.asarray(x, dtype=complex)
    y = la.as_hermitian(y)
    n = x.shape[1]
    b = LmiBuilder()
    b.hermitian("M", n)
    b.psd(lambda v: np.block([[v["M"], la.dagger(x)], [x, y]]))
    b.maximize(lambda v: -np.trace(v["M"]).real)
    val, _, sol = b.solve(tol=tol)
    return -val, sol

