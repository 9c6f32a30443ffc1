"""Renyi-type divergences of states and channels (natural logarithm throughout).

The geometric Renyi quasi-entropy is ``Q_alpha(rho||sigma) = Tr[G_alpha(sigma, rho)]``
with ``G`` the weighted geometric mean of :func:`qdb.linalg.geometric_mean`.
For ``alpha`` in (0, 1) and ``rho`` not supported inside ``sigma`` the value is
the ``sigma + eps I`` limit, computed from the Schur complement of ``rho``
onto the support of ``sigma``. For ``alpha > 1`` the same situation gives
``+inf``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .config import RANK_FACTOR
from .errors import BadAlphaError, DimMismatchError

INF = math.inf
EPS_SCHEDULE = (1e-4, 1e-6, 1e-8)
ILL_CONDITIONED = 1e10

CONTAINED = "contained"
TILDE = "tilde-reduced"
INFINITE = "infinite"


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    alpha: float
    support_case: str
    regularization: float = 0.0
    note: str = ""

    def __float__(self):
        return float(self.value)


def _pair(rho, sigma):
    rho = la.as_hermitian(rho, tol=1e-10, name="rho")
    sigma = la.as_hermitian(sigma, tol=1e-10, name="sigma")
    if rho.shape != sigma.shape:
        raise DimMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    return rho, sigma


def _contained(rho, sigma_split):
    """Support test for PSD rho against a split of sigma."""
    tol = rho.shape[0] * RANK_FACTOR * max(la.lambda_max(rho), 0.0)
    return la.support_residual(sigma_split, rho) <= max(tol, 1e-300)


def _check_alpha(alpha, upper=None):
    if not np.isfinite(alpha) or alpha <= 0 or alpha == 1:
        raise BadAlphaError(f"alpha must be positive and different from 1, got {alpha}")
    if upper is not None and alpha > upper:
        raise BadAlphaError(f"alpha outside data-processing interval (0,1)u(1,{upper:g}]: {alpha}")
    if abs(alpha - 1) < 1e-6:
        warnings.warn(f"alpha={alpha} is very close to 1; the Renyi quotient is ill-conditioned", RuntimeWarning)


def _log_over(q, alpha):
    if q <= 0:
        return INF if alpha < 1 else -INF
    return math.log(q) / (alpha - 1)


# ------------------------------------------------------------ geometric


def geometric_quasi(rho, sigma, alpha, eps=0.0):
    """``Q_alpha(rho||sigma)``; ``inf`` for ``alpha > 1`` without support containment.

    ``alpha = 0`` and ``alpha = 1`` are allowed here and give the endpoint
    values of the formula (``x^0`` is the support projector).
    """
    rho, sigma = _pair(rho, sigma)
    if eps == 0 and alpha > 1:
        if not _contained(rho, la.support_split(sigma)):
            return INF
    return float(np.real(np.trace(la.geometric_mean(sigma, rho, alpha, eps=eps))))


def geometric_renyi(rho, sigma, alpha, eps=0.0):
    """Geometric Renyi relative entropy ``ln(Q_alpha) / (alpha - 1)``.

    Args:
        rho: density operator.
        sigma: PSD operator.
        alpha: order in (0, 1) or (1, inf).
        eps: optional explicit regularization ``sigma + eps I``.

    Raises:
        BadAlphaError: ``alpha <= 0`` or ``alpha == 1`` (use :func:`bs_relative_entropy`).
    """
    _check_alpha(alpha)
    rho, sigma = _pair(rho, sigma)
    if eps > 0:
        q = geometric_quasi(rho, sigma, alpha, eps)
        return DivergenceValue(_log_over(q, alpha), alpha, CONTAINED, eps)
    split = la.support_split(sigma)
    contained = _contained(rho, split)
    if not contained and alpha > 1:
        return DivergenceValue(INF, alpha, INFINITE)
    log_q = la.geometric_mean_path(sigma, rho, allow_violation=True).log_trace(alpha)
    case = CONTAINED if contained else TILDE
    if log_q == -INF:
        val = INF if alpha < 1 else -INF
    else:
        val = log_q / (alpha - 1)
    if val == INF:
        case = INFINITE
    return DivergenceValue(val, alpha, case)


def geometric_renyi_eps_limit(rho, sigma, alpha, schedule=EPS_SCHEDULE):
    """``eps -> 0`` value of the regularized quasi-entropy by geometric extrapolation.

    The regularized values approach the limit like a power of ``eps``, so the
    three-point Aitken rule is used rather than a fixed-order Richardson step.
    """
    qs = [geometric_quasi(rho, sigma, alpha, e) for e in schedule]
    return _aitken(qs)


def _aitken(vals):
    a, b, c = vals[-3:]
    den = (c - b) - (b - a)
    if abs(den) < 1e-300 or not np.isfinite(den):
        return c
    q = c - (c - b) ** 2 / den
    # fall back when the sequence is not geometric enough to trust
    if not (min(a, b, c) - abs(c - a) <= q <= max(a, b, c) + abs(c - a)):
        return c
    return q


def geometric_fidelity(rho, sigma):
    """``(Q_{1/2}(rho||sigma))^2`` with the ``eps -> 0`` convention."""
    rho, sigma = _pair(rho, sigma)
    q = float(np.real(np.trace(la.geometric_mean(sigma, rho, 0.5))))
    return max(q, 0.0) ** 2


def fidelity(rho, sigma):
    """``|| sqrt(rho) sqrt(sigma) ||_1^2``."""
    return root_fidelity(rho, sigma) ** 2


def root_fidelity(rho, sigma):
    rho, sigma = _pair(rho, sigma)
    a, b = la.msqrt(rho), la.msqrt(sigma)
    return float(np.sum(np.linalg.svd(a @ b, compute_uv=False)))


# ------------------------------------------------------------------ others


def bs_relative_entropy(rho, sigma):
    """Belavkin-Staszewski relative entropy ``Tr[rho ln(rho^1/2 sigma^-1 rho^1/2)]``."""
    rho, sigma = _pair(rho, sigma)
    split = la.support_split(sigma)
    if not _contained(rho, split):
        return INF
    r = la.msqrt(rho)
    inner = la.hermitian_part(r @ la.pinv_psd(sigma) @ r)
    return float(np.real(np.trace(rho @ la.mlog(inner))))


def relative_entropy(rho, sigma):
    """Umegaki relative entropy ``Tr[rho (ln rho - ln sigma)]``."""
    rho, sigma = _pair(rho, sigma)
    if not _contained(rho, la.support_split(sigma)):
        return INF
    return float(np.real(np.trace(rho @ (la.mlog(rho) - la.mlog(sigma)))))


def petz_quasi(rho, sigma, alpha):
    """``Tr[rho^alpha sigma^(1 - alpha)]`` with support conventions; ``alpha`` in [0, 1] or > 1."""
    rho, sigma = _pair(rho, sigma)
    a = la.support_split(rho)
    b = la.support_split(sigma)
    if alpha > 1 and not _contained(rho, b):
        return INF
    ov = np.abs(la.dagger(a.basis) @ b.basis) ** 2
    return float(np.sum((a.values**alpha)[:, None] * (b.values ** (1 - alpha))[None, :] * ov))


def petz_renyi(rho, sigma, alpha):
    """Petz-Renyi relative entropy."""
    _check_alpha(alpha)
    q = petz_quasi(rho, sigma, alpha)
    return INF if q == INF else _log_over(q, alpha)


def sandwiched_renyi(rho, sigma, alpha):
    """Sandwiched Renyi relative entropy ``ln Tr[(sigma^g rho sigma^g)^alpha] / (alpha - 1)``, ``g = (1-alpha)/(2 alpha)``."""
    _check_alpha(alpha)
    rho, sigma = _pair(rho, sigma)
    split = la.support_split(sigma)
    if alpha > 1 and not _contained(rho, split):
        return INF
    s = la.mpow(sigma, (1 - alpha) / (2 * alpha))
    inner = la.hermitian_part(s @ rho @ s)
    q = float(np.real(np.trace(la.mpow(inner, alpha))))
    return _log_over(q, alpha)


def dmax(rho, sigma):
    """Max-relative entropy ``ln lambda_max(sigma^-1/2 rho sigma^-1/2)``."""
    rho, sigma = _pair(rho, sigma)
    split = la.support_split(sigma)
    if not _contained(rho, split):
        return INF
    s = la.mpow(sigma, -0.5)
    return math.log(la.lambda_max(la.hermitian_part(s @ rho @ s)))


# ---------------------------------------------------------------- channels


def _choi_pair(cN, cM):
    if cN.dims != cM.dims:
        raise DimMismatchError(f"channel dimensions {cN.dims} and {cM.dims} differ")
    return cN.op, cM.op, cN.dims


def channel_geometric_quasi_operator(cN, cM, alpha, eps=0.0):
    """``Tr_B G_alpha(Gamma_M, Gamma_N)`` (``None`` for alpha > 1 without containment)."""
    gN, gM, dims = _choi_pair(cN, cM)
    if eps == 0 and alpha > 1 and not _contained(gN, la.support_split(gM)):
        return None
    g = la.geometric_mean(gM, gN, alpha, eps=eps)
    return la.hermitian_part(la.partial_trace(g, dims, 0))


def channel_geometric_quasi(cN, cM, alpha, eps=0.0):
    """Channel quasi-entropy: ``lambda_min`` of the reduced mean for alpha <= 1, ``lambda_max`` above."""
    t = channel_geometric_quasi_operator(cN, cM, alpha, eps)
    if t is None:
        return INF
    w = np.linalg.eigvalsh(t)
    return float(w[0] if alpha <= 1 else w[-1])


def channel_quasi_path(cN, cM):
    """Cached ``alpha -> channel quasi-entropy`` sharing one eigendecomposition.

    Values for alpha > 1 are ``inf`` when ``Gamma_N`` is not supported
    inside ``Gamma_M``.
    """
    gN, gM, dims = _choi_pair(cN, cM)
    path = la.geometric_mean_path(gM, gN, allow_violation=True)

    def q(alpha):
        if alpha > 1 and not path.contained:
            return INF
        w = np.linalg.eigvalsh(la.hermitian_part(la.partial_trace(path(alpha), dims, 0)))
        return float(w[0] if alpha <= 1 else w[-1])

    q.contained = path.contained
    return q


def _condition_on_support(op):
    s = la.support_split(op)
    return s.values[-1] / s.values[0] if s.rank else 1.0


def geometric_renyi_channel(cN, cM, alpha):
    """Geometric Renyi divergence of channels for alpha in (0, 1) or (1, 2].

    For alpha in (0, 1) and a Choi operator ``Gamma_M`` whose condition number
    on its support exceeds 1e10, the regularized values at
    ``eps = 1e-4, 1e-6, 1e-8`` are extrapolated instead.

    Raises:
        BadAlphaError: alpha outside (0, 1) or (1, 2].
    """
    _check_alpha(alpha, upper=2.0)
    gN, gM, dims = _choi_pair(cN, cM)
    contained = _contained(gN, la.support_split(gM))
    if alpha > 1 and not contained:
        return DivergenceValue(INF, alpha, INFINITE)
    reg = 0.0
    if alpha < 1 and _condition_on_support(gM) > ILL_CONDITIONED:
        q = _aitken([channel_geometric_quasi(cN, cM, alpha, e) for e in EPS_SCHEDULE])
        reg = EPS_SCHEDULE[-1]
    else:
        q = channel_geometric_quasi(cN, cM, alpha)
    case = CONTAINED if contained else TILDE
    # channel divergences are nonnegative; clip roundoff
    val = max(_log_over(q, alpha), 0.0)
    if val == INF:
        case = INFINITE
    return DivergenceValue(val, alpha, case, reg)


def bs_channel_operator(cN, cM):
    gN, gM, dims = _choi_pair(cN, cM)
    r = la.msqrt(gN)
    inner = la.hermitian_part(r @ la.pinv_psd(gM) @ r)
    return la.hermitian_part(la.partial_trace(r @ la.mlog(inner) @ r, dims, 0))


def bs_channel(cN, cM):
    """Belavkin-Staszewski divergence of channels.

    The value is the largest eigenvalue of
    ``Tr_B[G^1/2 ln(G^1/2 Gamma_M^-1 G^1/2) G^1/2]`` with ``G = Gamma_N``, the
    optimum of the underlying linear functional over reference states.
    """
    gN, gM, _ = _choi_pair(cN, cM)
    if not _contained(gN, la.support_split(gM)):
        return INF
    return max(la.lambda_max(bs_channel_operator(cN, cM)), 0.0)


def geometric_fidelity_channel(cN, cM):
    """Root geometric channel fidelity ``lambda_min(Tr_B G_1/2(Gamma_M, Gamma_N))``."""
    return max(channel_geometric_quasi(cN, cM, 0.5), 0.0)


__all__ = [
    "DivergenceValue",
    "geometric_quasi",
    "geometric_renyi",
    "geometric_renyi_eps_limit",
    "geometric_fidelity",
    "fidelity",
    "root_fidelity",
    "bs_relative_entropy",
    "relative_entropy",
    "petz_quasi",
    "petz_renyi",
    "sandwiched_renyi",
    "dmax",
    "channel_geometric_quasi",
    "channel_quasi_path",
    "geometric_renyi_channel",
    "bs_channel",
    "geometric_fidelity_channel",
]
