"""Alternating maximization for the SLD Fisher information of a channel family.

For an input ``(Z (x) I)|Gamma>`` with ``Z^dag Z = sigma`` (a state on the
reference system) the output SLD Fisher information equals
``2 v^dag K_sigma^{-1} v`` where, on ``R B R' B'``,

    K_sigma = Gamma (x) sigma^{-T} (x) I + sigma^{-1} (x) I (x) Gamma^T,
    v       = (dGamma (x) I)|Gamma>.

Writing ``v^dag K^{-1} v = max_phi 2 Re<phi|v> - <phi|K|phi>`` gives two
blocks with closed-form maximizers: ``phi = K_sigma^{-1} v`` for fixed
``sigma``, and ``sigma proportional to sqrt(K_R)`` for fixed ``phi``, where
``Tr[K_sigma phi phi^dag] = Tr[sigma^{-1} K_R]``. Each sweep cannot decrease
the value, so the iterates form a nondecreasing sequence of lower bounds.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import linalg as la
from ..errors import MaxIterationsError
from ..fisher import INF, finiteness_report


@dataclass
class SeesawResult:
    lower_bound: float
    trace: list = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    iterations: int
    converged: bool


def _k_sigma(g, sigma, dB):
    sinv = np.linalg.inv(sigma)
    iB = np.eye(dB)
    return np.kron(g, np.kron(sinv.T, iB)) + np.kron(np.kron(sinv, iB), g.T)


def _solve_psd(k, v):
    w, u = np.linalg.eigh(la.hermitian_part(k))
    tol = k.shape[0] * 1e-13 * max(w[-1], 0.0)
    keep = w > tol
    return u[:, keep] @ ((la.dagger(u[:, keep]) @ v) / w[keep])


def fisher_for_sigma(g, dg, dims, sigma):
    """``2 v^dag K_sigma^{-1} v`` together with the maximizing ``phi``."""
    v = la.vec_gamma(dg)
    phi = _solve_psd(_k_sigma(g, sigma, dims[1]), v)
    return 2.0 * float(np.real(np.vdot(v, phi))), phi


def reference_operator(g, phi, dims):
    """``K_R`` with ``Tr[K_sigma phi phi^dag] = Tr[sigma^{-1} K_R]``."""
    dR, dB = dims
    full = (dR, dB, dR, dB)
    wmat = np.outer(phi, phi.conj())
    iR, iB = np.eye(dR), np.eye(dB)
    a = la.partial_trace(np.kron(g, np.kron(iR, iB)) @ wmat, full, 2)
    b = la.partial_trace(np.kron(np.kron(iR, iB), g.T) @ wmat, full, 0)
    return la.hermitian_part(a.T + b)


def sld_channel_seesaw(fam, theta, iters=500, rel_tol=1e-6, eta=1e-8, sigma0=None, strict=False):
    """Lower bound on the SLD Fisher information of a channel family.

    Args:
        fam: ChannelFamily.
        theta: parameter value.
        iters: maximum number of sweeps.
        rel_tol: stop when a sweep improves the value by less than this fraction.
        eta: mixing weight with the maximally mixed state that keeps
            ``sigma`` invertible.
        sigma0: starting reference state, maximally mixed by default (which
            reproduces the Choi-state value).
        strict: raise :class:`MaxIterationsError` if ``iters`` runs out.

    Returns:
        SeesawResult; ``trace`` lists the best value after every sweep.
    """
    g = fam.choi_op(theta)
    dg = fam.deriv(theta)
    dims = fam.dims
    dR = dims[0]
    rep = finiteness_report(g, dg, "SLD")
    if not rep.finite:
        return SeesawResult(INF, [], np.eye(dR) / dR, 0, True)
    sigma = np.eye(dR) / dR if sigma0 is None else la.hermitian_part(np.asarray(sigma0, dtype=complex))
    best, phi = fisher_for_sigma(g, dg, dims, sigma)
    best_sigma = sigma
    trace = [best]
    converged = False
    it = 0
    for it in range(1, iters + 1):
        kr = reference_operator(g, phi, dims)
        root = la.msqrt(kr)
        tr = np.trace(root).real
        if tr <= 0:
            converged = True
            break
        sigma = (1 - eta) * root / tr + eta * np.eye(dR) / dR
        val, phi = fisher_for_sigma(g, dg, dims, sigma)
        improved = val - best
        if val > best:
            best, best_sigma = val, sigma
        trace.append(best)
        if improved <= rel_tol * max(abs(best), 1e-300):
            converged = True
            break
    res = SeesawResult(best, trace, best_sigma, it, converged)
    if strict and not converged:
        raise MaxIterationsError(f"seesaw did not settle within {iters} sweeps", res)
    return res
