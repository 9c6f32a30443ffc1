"""SLD and RLD Fisher information of state and channel families.

Values are floats with ``math.inf`` as the explicit infinite value. Every
result carries the finiteness test that decided between the finite formula
and ``+inf``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .channels import apply_choi_operator, check_density, smooth
from .errors import ConsistencyError, InputError, NonTracelessError, NotNormalizedError

INF = math.inf
AGREEMENT_TOL = 1e-8


@dataclass(frozen=True)
class FinitenessReport:
    condition: str
    residual: float
    tol: float

    @property
    def finite(self):
        return self.residual <= self.tol


@dataclass(frozen=True)
class FisherResult:
    value: float
    finiteness: FinitenessReport
    method: str
    details: dict = field(default_factory=dict, compare=False)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    delta: float
    richardson: float
    richardson_diff: float
    route: str


def _default_fin_tol(deriv):
    return 1e-8 * max(1.0, la.fro(deriv))


def finiteness_report(op, deriv, kind, rank_tol=None, tol=None):
    """Kernel leakage of a derivative.

    Args:
        op: density operator or Choi operator.
        deriv: its parameter derivative.
        kind: ``"SLD"`` (residual ``||P deriv P||_F``) or ``"RLD"``
            (residual ``||P deriv||_F``), with ``P`` the kernel projector of ``op``.
        rank_tol: eigenvalue cutoff for the kernel.
        tol: residual tolerance, ``1e-8 * max(1, ||deriv||_F)`` by default.
    """
    op = la.as_hermitian(op)
    deriv = la.as_hermitian(deriv, tol=1e-10)
    split = la.support_split(op, rank_tol)
    k = split.proj_kernel
    if kind == "SLD":
        res = la.fro(k @ deriv @ k)
    elif kind == "RLD":
        res = la.fro(k @ deriv)
    else:
        raise InputError(f"kind must be 'SLD' or 'RLD', got {kind!r}")
    tol = _default_fin_tol(deriv) if tol is None else tol
    return FinitenessReport(kind, res, tol)


def _check_family_point(rho, drho):
    rho = check_density(rho)
    drho = la.as_hermitian(drho, tol=1e-10, name="derivative")
    if drho.shape != rho.shape:
        raise InputError("state and derivative shapes differ")
    tr = abs(np.trace(drho))
    if tr > 1e-9 * (1 + la.fro(drho)):
        raise NonTracelessError(f"derivative has trace {tr:.2e}")
    return rho, drho


def _sld_spectral(w, v, drho, rank_tol):
    m = la.dagger(v) @ drho @ v
    s = w[:, None] + w[None, :]
    mask = s > rank_tol
    return 2.0 * float(np.sum(np.abs(m[mask]) ** 2 / s[mask])), m


def sld_state(rho, drho, rank_tol=None, fin_tol=None):
    """SLD Fisher information from the eigendecomposition of ``rho``.

    The finite branch is ``2 sum |<j|drho|k>|^2 / (l_j + l_k)`` over pairs with
    ``l_j + l_k`` above the cutoff. A second evaluation that splits the sum into
    support-support and support-kernel parts must agree within 1e-8.

    Raises:
        NotDensityError, NonTracelessError: invalid inputs.
        ConsistencyError: the two evaluations disagree.
    """
    rho, drho = _check_family_point(rho, drho)
    w, v = la.eig_hermitian(rho)
    split = la._split_from_eig(w, v, rank_tol, True)
    k = split.proj_kernel
    rep = FinitenessReport("SLD", la.fro(k @ drho @ k), _default_fin_tol(drho) if fin_tol is None else fin_tol)
    if not rep.finite:
        return FisherResult(INF, rep, "spectral")
    tol = split.rank_tol
    val, m = _sld_spectral(w, v, drho, tol)

    sup = w > tol
    ws = w[sup]
    mss = m[np.ix_(sup, sup)]
    msk = m[np.ix_(sup, ~sup)]
    alt = 2.0 * float(np.sum(np.abs(mss) ** 2 / (ws[:, None] + ws[None, :])))
    alt += 4.0 * float(np.sum(np.sum(np.abs(msk) ** 2, axis=1) / ws))
    if abs(alt - val) > AGREEMENT_TOL * (1 + abs(val)):
        raise ConsistencyError(f"SLD evaluations disagree: {val} vs {alt}")
    return FisherResult(val, rep, "spectral", {"kernel_split": alt})


def sld_state_basis_independent(rho, drho, rank_tol=None, fin_tol=None):
    """``2 <Gamma|(drho (x) I)(rho (x) I + I (x) rho^T)^{-1}(drho (x) I)|Gamma>``."""
    rho, drho = _check_family_point(rho, drho)
    rep = finiteness_report(rho, drho, "SLD", rank_tol, fin_tol)
    if not rep.finite:
        return FisherResult(INF, rep, "basis-independent")
    d = rho.shape[0]
    kmat = np.kron(rho, np.eye(d)) + np.kron(np.eye(d), rho.T)
    vec = la.vec_gamma(drho)
    val = 2.0 * float(np.real(vec.conj() @ la.pinv_psd(kmat) @ vec))
    return FisherResult(val, rep, "basis-independent")


def rld_state(rho, drho, rank_tol=None, fin_tol=None):
    """RLD Fisher information ``Tr[(drho)^2 rho^{-1}]``, or ``inf`` when supp(drho) leaves supp(rho)."""
    rho, drho = _check_family_point(rho, drho)
    rep = finiteness_report(rho, drho, "RLD", rank_tol, fin_tol)
    if not rep.finite:
        return FisherResult(INF, rep, "spectral")
    val = float(np.real(np.trace(drho @ la.pinv_psd(rho, rank_tol) @ drho)))
    return FisherResult(max(val, 0.0), rep, "spectral")


def sld_pure(phi, dphi, tol=1e-9):
    """``4 (<dphi|dphi> - |<dphi|phi>|^2)`` for a normalized pure-state family."""
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    dphi = np.asarray(dphi, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(phi) - 1) > tol:
        raise NotNormalizedError(f"state vector has norm {np.linalg.norm(phi)}")
    ov = np.vdot(dphi, phi)
    if abs(ov.real) > 1e-8 * (1 + np.linalg.norm(dphi)):
        raise NotNormalizedError("Re<dphi|phi> must vanish for a normalized family")
    return max(4.0 * float(np.vdot(dphi, dphi).real - abs(ov) ** 2), 0.0)


def rld_channel_choi(g, dg, dims, rank_tol=None, fin_tol=None):
    """``|| Tr_B[dG G^{-1} dG] ||_inf`` for a Choi operator and its derivative."""
    g = la.as_hermitian(g)
    dg = la.as_hermitian(dg, tol=1e-10)
    rep = finiteness_report(g, dg, "RLD", rank_tol, fin_tol)
    if not rep.finite:
        return FisherResult(INF, rep, "spectral")
    t = la.partial_trace(dg @ la.pinv_psd(g, rank_tol) @ dg, dims, 0)
    return FisherResult(max(la.lambda_max(t), 0.0), rep, "spectral")


def rld_channel(fam, theta, rank_tol=None, fin_tol=None):
    """RLD Fisher information of a channel family at ``theta``."""
    return rld_channel_choi(fam.choi_op(theta), fam.deriv(theta), fam.dims, rank_tol, fin_tol)


def channel_finiteness(fam, theta, kind, rank_tol=None, fin_tol=None):
    return finiteness_report(fam.choi_op(theta), fam.deriv(theta), kind, rank_tol, fin_tol)


def sld_cq_channel(f, theta, rank_tol=None):
    """SLD Fisher information of a classical-quantum channel family: the best letter."""
    vals = [sld_state(w, dw, rank_tol) for w, dw in f.evaluate(theta)]
    best = max(range(len(vals)), key=lambda i: vals[i].value)
    r = vals[best]
    return FisherResult(r.value, r.finiteness, "cq-letters", {"letter": f.letters[best], "values": [x.value for x in vals]})


def classical_fisher(p, dp):
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    zero = p <= 0
    if np.any(np.abs(dp[zero]) > 0):
        return INF
    return float(np.sum(dp[~zero] ** 2 / p[~zero]))


def cq_state_fisher(p, cond, theta, kind="SLD"):
    """Fisher information of ``sum_x p_theta(x) |x><x| (x) rho_theta^x`` by decomposition.

    Args:
        p: ``theta -> (probabilities, derivatives)``.
        cond: list of ``theta -> (rho_x, drho_x)``.
        kind: ``"SLD"`` or ``"RLD"``.

    Returns:
        ``I(p) + sum_x p(x) I(rho^x)``.
    """
    probs, dprobs = (np.asarray(a, dtype=float) for a in p(theta))
    fn = sld_state if kind == "SLD" else rld_state
    total = classical_fisher(probs, dprobs)
    for px, c in zip(probs, cond):
        if px <= 0:
            continue
        v = fn(*c(theta)).value
        total += px * v
    return total


def cq_state(p, cond, theta):
    """Assemble the block-diagonal state and its derivative."""
    probs, dprobs = (np.asarray(a, dtype=float) for a in p(theta))
    blocks = [c(theta) for c in cond]
    d = blocks[0][0].shape[0]
    n = len(blocks)
    rho = np.zeros((n * d, n * d), dtype=complex)
    drho = np.zeros_like(rho)
    for x, (w, dw) in enumerate(blocks):
        sl = slice(x * d, (x + 1) * d)
        rho[sl, sl] = probs[x] * w
        drho[sl, sl] = dprobs[x] * w + probs[x] * dw
    return rho, drho


def choi_state_fisher(fam, theta):
    """SLD Fisher information of the normalized Choi state, a lower bound on the channel value."""
    d = fam.dims[0]
    return sld_state(fam.choi_op(theta) / d, fam.deriv(theta) / d)


# ------------------------------------------------------------------ limits


def root_fidelity_states(rho, sigma):
    """``|| sqrt(rho) sqrt(sigma) ||_1``."""
    a = la.msqrt(rho)
    b = la.msqrt(sigma)
    return float(np.sum(np.linalg.svd(a @ b, compute_uv=False)))


def _limit_points(theta, delta, central):
    return (theta - delta / 2, theta + delta / 2) if central else (theta, theta + delta)


def _richardson(est, delta, central):
    e1 = est(delta)
    e2 = est(delta / 2)
    order = 2 if central else 1
    rich = (2**order * e2 - e1) / (2**order - 1)
    return e1, rich, abs(e1 - e2)


def state_fisher_limits(family, theta, delta=1e-3, eps=1e-6, route="fidelity", alpha=2.0, central=False):
    """Fisher information from a divergence between nearby states.

    Args:
        family: ``theta -> (rho, drho)`` (only ``rho`` is used).
        theta: parameter value.
        delta: shift.
        eps: smoothing ``(1 - eps) rho + eps I/d`` applied before shifting.
        route: ``"fidelity"`` estimates SLD via ``8 (1 - sqrt F) / delta^2``;
            ``"geometric"`` estimates RLD via ``2 (Q_alpha - 1) / (alpha (alpha - 1) delta^2)``;
            ``"bs"`` estimates RLD via ``2 D_BS / delta^2``.
        alpha: Renyi order for the geometric route.
        central: evaluate at ``theta -+ delta/2`` instead of ``theta, theta + delta``.

    Returns:
        LimitEstimate with the estimate at ``delta``, the Richardson
        combination with ``delta/2`` and the difference between the two raw estimates.
    """
    from . import divergences as dv

    def state(t):
        return smooth(family(t)[0], eps)

    def est(dl):
        a, b = _limit_points(theta, dl, central)
        ra, rb = state(a), state(b)
        if route == "fidelity":
            return 8.0 / dl**2 * (1.0 - root_fidelity_states(ra, rb))
        if route == "geometric":
            q = dv.geometric_quasi(rb, ra, alpha)
            return 2.0 / (alpha * (alpha - 1) * dl**2) * (q - 1.0)
        if route == "bs":
            return 2.0 / dl**2 * dv.bs_relative_entropy(rb, ra)
        raise InputError(f"unknown route {route!r}")

    e1, rich, diff = _richardson(est, delta, central)
    return LimitEstimate(e1, delta, rich, diff, route)


def sld_channel_limit(fam, theta, delta=1e-3, central=False, tol=1e-11, accept_gap=1e-9):
    """SLD Fisher information of a channel family from the channel root fidelity.

    ``8 (1 - sqrt F(N_theta, N_{theta + delta})) / delta^2`` with the root
    fidelity from its semi-definite program. The program is solved to a
    relative gap of ``tol``; ``1 - sqrt F`` is of order ``delta^2``, so
    ordinary solver accuracy is not enough. Runs that stop early are
    accepted when their gap is below ``accept_gap``.
    """
    from .sdp import programs

    def est(dl):
        a, b = _limit_points(theta, dl, central)
        f = programs.root_fidelity_channel_sdp(fam.choi(a), fam.choi(b), tol=tol, accept_gap=accept_gap)
        return 8.0 / dl**2 * (1.0 - f)

    e1, rich, diff = _richardson(est, delta, central)
    return LimitEstimate(e1, delta, rich, diff, "channel-fidelity")


def output_family(channel_op, dims, rho, drho, dchannel_op=None):
    """State family after a channel, with the product rule for a parameterized channel."""
    out = apply_choi_operator(channel_op, dims, rho)
    dout = apply_choi_operator(channel_op, dims, drho)
    if dchannel_op is not None:
        dout = dout + apply_choi_operator(dchannel_op, dims, rho)
    return la.hermitian_part(out), la.hermitian_part(dout)
