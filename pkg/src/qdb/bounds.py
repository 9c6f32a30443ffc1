"""Estimation and discrimination bounds built on the Fisher and divergence modules."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import divergences as dv
from . import linalg as la
from .channels import _gadc_range, gadc_family
from .config import RANK_FACTOR
from .errors import DimMismatchError, InputError, ParamOutOfRangeError
from .fisher import INF, rld_channel

ALPHA_TOL = 1e-6
CHERNOFF_GRID = 12
OBJECTIVE_TOL = 1e-5


@dataclass(frozen=True)
class EstimationBound:
    n: int
    fisher: float
    var_lower: float
    scaling: str


@dataclass(frozen=True)
class DiscriminationSetting:
    p: float = 0.5
    n: int = 1
    r: float = 1.0

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ParamOutOfRangeError(f"prior p must lie in (0, 1), got {self.p}")
        if int(self.n) != self.n or self.n < 1:
            raise ParamOutOfRangeError(f"n must be a positive integer, got {self.n}")
        if not self.r > 0:
            raise ParamOutOfRangeError(f"rate r must be positive, got {self.r}")


@dataclass(frozen=True)
class Verdict:
    blocked: bool
    rld_fisher: float
    residual: float

    @property
    def label(self):
        return "blocked" if self.blocked else "not-blocked"


@dataclass(frozen=True)
class ExponentBound:
    value: float
    alpha: float
    note: str = ""

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------- estimation


def cramer_rao(fisher, n=1, scaling="standard"):
    """Variance lower bound ``1/(n I)`` (standard) or ``1/(n^2 I)`` (heisenberg).

    An infinite Fisher information gives the vacuous bound 0.
    """
    return estimation_bound(fisher, n, scaling).var_lower


def estimation_bound(fisher, n=1, scaling="standard"):
    if int(n) != n or n < 1:
        raise ParamOutOfRangeError(f"n must be a positive integer, got {n}")
    if scaling not in ("standard", "heisenberg"):
        raise InputError(f"unknown scaling {scaling!r}")
    fisher = float(fisher)
    if fisher < 0:
        raise InputError("Fisher information cannot be negative")
    k = 1 if scaling == "standard" else 2
    if fisher == INF:
        var = 0.0
    elif fisher == 0:
        var = INF
    else:
        var = 1.0 / (n**k * fisher)
    return EstimationBound(int(n), fisher, var, scaling)


def heisenberg_verdict(fam, theta):
    """Whether the RLD Fisher information rules out ``n^2`` scaling at ``theta``.

    A finite channel RLD Fisher information caps every sequential strategy at
    ``n * I_RLD``, so Heisenberg scaling is blocked.
    """
    res = rld_channel(fam, theta)
    return Verdict(math.isfinite(res.value), res.value, res.finiteness.residual)


def gadc_closed_form(param, gamma, N, phi=None):
    """RLD Fisher information of the generalized amplitude damping channel.

    ``param`` selects the estimated parameter: ``loss`` (gamma), ``noise`` (N)
    or ``phase``. The phase value does not depend on ``phi``.
    """
    _gadc_range(gamma, N)
    if param == "loss":
        if N <= 0.5:
            num = 1.0 / (N - gamma * N) + 1.0 / (1.0 - N) - 4.0
        else:
            num = 1.0 / ((1.0 - gamma) * (1.0 - N)) + 1.0 / N - 4.0
        return num / (4.0 * gamma**2)
    if param == "noise":
        return 1.0 / (N * (1.0 - N))
    if param == "phase":
        u = 1.0 if 2 * N - 1 > 0 else 0.0
        return 4 * (1 - gamma) * (1 - gamma * (N + (1 - 2 * N) * u)) / ((1 - N) * N * gamma**2)
    raise InputError(f"unknown GADC parameter {param!r}")


# ------------------------------------------------------------ discrimination


def _support_powers(vals, alphas):
    """``vals**alpha`` on the support, zero on the kernel; shape ``(..., k, d)``."""
    top = np.max(vals, axis=-1, keepdims=True)
    mask = vals > vals.shape[-1] * RANK_FACTOR * np.maximum(top, 0.0)
    safe = np.where(mask, vals, 1.0)
    a = np.asarray(alphas, dtype=float)
    pw = safe[..., None, :] ** a[:, None]
    return np.where(mask[..., None, :], pw, 0.0)


class _PetzPair:
    """Spectral data of batched state pairs for fast ``Tr[rho^a sigma^(1-a)]``."""

    def __init__(self, rho, sigma):
        self.a, va = np.linalg.eigh(rho)
        self.b, vb = np.linalg.eigh(sigma)
        self.overlap = np.abs(la.dagger(va) @ vb) ** 2

    def q(self, alphas):
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        pa = _support_powers(self.a, alphas)
        pb = _support_powers(self.b, 1.0 - alphas)
        return np.einsum("nkj,njl,nkl->nk", pa, self.overlap, pb)


def _petz_q(rho, sigma, alphas):
    """``Tr[rho^a sigma^(1-a)]`` for batched states and a vector of ``a``; shape ``(n, k)``."""
    return _PetzPair(rho, sigma).q(alphas)


def _neg_log(q):
    with np.errstate(divide="ignore"):
        return -np.log(np.maximum(q, 0.0))


def _best_alpha(qfun, grid=21, xatol=1e-10):
    """Maximize ``-ln q(alpha)`` over ``[0, 1]``; ``ln q`` is convex in alpha."""
    alphas = np.linspace(0.0, 1.0, grid)
    vals = np.array([qfun(a) for a in alphas])
    k = int(np.argmin(vals))
    lo, hi = alphas[max(k - 1, 0)], alphas[min(k + 1, grid - 1)]
    best_a, best_q = alphas[k], vals[k]
    if hi > lo and best_q > 0:
        r = minimize_scalar(qfun, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
        if r.fun < best_q:
            best_a, best_q = float(r.x), float(r.fun)
    return float(-math.log(best_q)) if best_q > 0 else INF, float(best_a)


def chernoff_information(rho, sigma, kind="petz"):
    """Chernoff information ``-min_alpha ln Q_alpha`` of two states.

    ``kind="petz"`` uses ``Tr[rho^a sigma^(1-a)]``; ``kind="geometric"`` uses
    the geometric quasi-entropy. Both reduce to the classical value for
    commuting states.
    """
    rho = la.as_hermitian(rho)
    sigma = la.as_hermitian(sigma)
    if rho.shape != sigma.shape:
        raise DimMismatchError("states must have equal dimension")
    if kind == "petz":
        return max(-_min_log_sum_exp(*_exp_terms(rho, sigma))[0], 0.0)
    if kind == "geometric":
        path = la.geometric_mean_path(sigma, rho, allow_violation=True)

        def q(a):
            return float(np.trace(path(a)).real)

    else:
        raise InputError(f"unknown Chernoff kind {kind!r}")
    return _best_alpha(q)[0]


def _same_dims(cN, cM):
    if cN.dims != cM.dims:
        raise DimMismatchError(f"channel dimensions {cN.dims} and {cM.dims} differ")
    return cN.dims


def _schmidt_inputs(s, t, p):
    """Coefficient matrices ``diag(sqrt s, sqrt(1-s)) U^T`` with ``U = Rz(p) Ry(t)``."""
    s, t, p = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (s, t, p))
    c, sn = np.cos(t / 2), np.sin(t / 2)
    e = np.exp(-0.5j * p)
    u = np.zeros(s.shape + (2, 2), dtype=complex)
    u[..., 0, 0], u[..., 0, 1] = e * c, -e * sn
    u[..., 1, 0], u[..., 1, 1] = np.conj(e) * sn, np.conj(e) * c
    lam = np.stack([np.sqrt(np.clip(s, 0, 1)), np.sqrt(np.clip(1 - s, 0, 1))], axis=-1)
    return lam[..., :, None] * np.swapaxes(u, -1, -2)


def _outputs(coeffs, g, dB):
    z = np.einsum("nij,kl->nikjl", coeffs, np.eye(dB)).reshape(coeffs.shape[0], g.shape[0], g.shape[0])
    out = z @ g @ la.dagger(z)
    return la.hermitian_part(out)


def _pure_input_value(coeffs, gN, gM, dB, alphas):
    """``max_alpha -ln Q_alpha`` on an alpha grid for each input coefficient matrix."""
    q = _petz_q(_outputs(coeffs, gN, dB), _outputs(coeffs, gM, dB), alphas)
    return np.max(_neg_log(q), axis=1)


def _exp_terms(rho, sigma):
    """``Q_alpha = sum w exp(alpha c)`` over pairs of support eigenvalues."""
    pair = _PetzPair(rho[None], sigma[None])
    a, b, o = pair.a[0], pair.b[0], pair.overlap[0]
    ma = a > a.size * RANK_FACTOR * max(a[-1], 0.0)
    mb = b > b.size * RANK_FACTOR * max(b[-1], 0.0)
    la_, lb_ = np.log(a[ma]), np.log(b[mb])
    w = (o[np.ix_(ma, mb)] * np.exp(lb_)[None, :]).ravel()
    c = (la_[:, None] - lb_[None, :]).ravel()
    keep = w > 0
    return w[keep], c[keep]


def _min_log_sum_exp(w, c, tol=1e-13):
    """Minimize the convex ``ln sum w exp(alpha c)`` over ``alpha in [0, 1]``."""
    if w.size == 0:
        return -INF, 0.0

    def derivs(al):
        e = w * np.exp(al * c)
        q = e.sum()
        d1 = (e @ c) / q
        return q, d1, (e @ (c * c)) / q - d1 * d1

    q0, g0, _ = derivs(0.0)
    if g0 >= 0:
        return math.log(q0), 0.0
    q1, g1, _ = derivs(1.0)
    if g1 <= 0:
        return math.log(q1), 1.0
    lo, hi, al = 0.0, 1.0, 0.5
    for _ in range(100):
        q, g, h = derivs(al)
        if g > 0:
            hi = al
        else:
            lo = al
        step = al - g / h if h > 0 else 0.5 * (lo + hi)
        nxt = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(nxt - al) < tol:
            al = nxt
            break
        al = nxt
    return math.log(derivs(al)[0]), al


def _refined_value(coeffs, gN, gM, dB):
    rho = _outputs(coeffs[None], gN, dB)[0]
    sigma = _outputs(coeffs[None], gM, dB)[0]
    return -_min_log_sum_exp(*_exp_terms(rho, sigma))[0]


def chernoff_lower(cN, cM, grid=CHERNOFF_GRID, refine=3, seed=0):
    """Chernoff information of channels restricted to a search over pure inputs.

    For qubit inputs the search runs over ``(s, t, p)``: Schmidt weight ``s``
    and a local unitary ``Rz(p) Ry(t)`` on the channel input. A ``grid^3``
    scan is followed by Nelder-Mead from the best ``refine`` points. Larger
    inputs use random multistart. Each candidate is a valid input, so the
    result is a lower bound.
    """
    dims = _same_dims(cN, cM)
    gN = np.asarray(cN.op)
    gM = np.asarray(cM.op)
    dR, dB = dims
    alphas = np.linspace(0.0, 1.0, 21)
    if dR != 2:
        return _chernoff_lower_general(gN, gM, dims, refine, seed, alphas)
    s = np.linspace(0.0, 1.0, grid)
    t = np.linspace(0.0, np.pi, grid)
    p = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    S, T, P = (v.ravel() for v in np.meshgrid(s, t, p, indexing="ij"))
    vals = _pure_input_value(_schmidt_inputs(S, T, P), gN, gM, dB, alphas)
    if not np.all(np.isfinite(vals)):
        return INF
    best = float(np.max(vals))
    order = np.argsort(-vals)[:refine]

    def obj(x):
        c = _schmidt_inputs(min(max(x[0], 0.0), 1.0), x[1], x[2])[0]
        v = _refined_value(c, gN, gM, dB)
        return -v if math.isfinite(v) else -1e300

    for k in order:
        r = minimize(obj, [S[k], T[k], P[k]], method="Nelder-Mead", options={"fatol": OBJECTIVE_TOL * 1e-2, "xatol": 1e-6})
        best = max(best, -float(r.fun), _refined_value(_schmidt_inputs(S[k], T[k], P[k])[0], gN, gM, dB))
    return max(best, 0.0)


def _chernoff_lower_general(gN, gM, dims, starts, seed, alphas):
    d, dB = dims
    rng = np.random.default_rng(seed)

    def coeffs(x):
        z = (x[: d * d] + 1j * x[d * d :]).reshape(d, d)
        nz = np.linalg.norm(z)
        return z / nz if nz > 0 else np.eye(d) / np.sqrt(d)

    cands = [np.concatenate([np.eye(d).ravel() / np.sqrt(d), np.zeros(d * d)])]
    cands += [rng.normal(size=2 * d * d) for _ in range(max(8 * starts, 16))]
    batch = np.stack([coeffs(x) for x in cands])
    vals = _pure_input_value(batch, gN, gM, dB, alphas)
    if not np.all(np.isfinite(vals)):
        return INF
    best = float(np.max(vals))
    for k in np.argsort(-vals)[:starts]:
        r = minimize(
            lambda x: -_refined_value(coeffs(x), gN, gM, dB),
            cands[k],
            method="Nelder-Mead",
            options={"fatol": OBJECTIVE_TOL * 1e-2, "maxiter": 4000},
        )
        best = max(best, -float(r.fun))
    return max(best, 0.0)


def _maximize_alpha(f, lo=0.0, hi=1.0, grid=41, endpoints=True):
    """Grid scan plus bounded golden-section refinement of a function of alpha."""
    alphas = np.linspace(lo, hi, grid)
    if not endpoints:
        alphas = alphas[1:-1]
    vals = np.array([f(a) for a in alphas])
    k = int(np.argmax(vals))
    best_a, best_v = float(alphas[k]), float(vals[k])
    a0, a1 = alphas[max(k - 1, 0)], alphas[min(k + 1, len(alphas) - 1)]
    if a1 > a0 and math.isfinite(best_v):
        r = minimize_scalar(lambda a: -f(a), bounds=(a0, a1), method="bounded", options={"xatol": ALPHA_TOL})
        if -r.fun > best_v:
            best_a, best_v = float(r.x), float(-r.fun)
    return best_v, best_a


def geometric_chernoff_upper(cN, cM):
    """Geometric Chernoff information ``sup_alpha -ln lambda_min Tr_B G_alpha(Gamma_M, Gamma_N)``.

    The supremum over ``alpha in [0, 1]`` includes both endpoints, which are
    the continuous extensions of the open-interval expression.
    """
    _same_dims(cN, cM)
    q = dv.channel_quasi_path(cN, cM)
    val, _ = _maximize_alpha(lambda a: float(_neg_log(q(a))))
    return max(val, 0.0)


def geometric_fidelity_divergence(cN, cM):
    """``D_1/2`` geometric Renyi divergence of channels, ``-2 ln`` of the root geometric fidelity."""
    _same_dims(cN, cM)
    f = dv.geometric_fidelity_channel(cN, cM)
    return INF if f <= 0 else max(-2.0 * math.log(f), 0.0)


def chernoff_nonasymptotic_upper(cN, cM, n, p=0.5):
    """Upper bound ``D_1/2(N||M) - ln(p (1 - p)) / n`` on the n-use Chernoff exponent."""
    setting = DiscriminationSetting(p=p, n=n)
    return geometric_fidelity_divergence(cN, cM) - math.log(setting.p * (1 - setting.p)) / setting.n


def hoeffding_upper(cN, cM, r):
    """Upper bound ``sup_{0<alpha<1} ((alpha - 1)/alpha)(r - D_alpha(N||M))`` on the Hoeffding exponent.

    Returns an :class:`ExponentBound`. The value is ``inf`` when ``r`` lies
    below ``D_0 = lim_{alpha -> 0} D_alpha``, where the expression is
    unbounded, and is clamped to 0 (with a note) when it is negative.
    """
    DiscriminationSetting(r=r)
    _same_dims(cN, cM)
    q = dv.channel_quasi_path(cN, cM)
    d0 = float(_neg_log(q(0.0)))
    if r < d0:
        return ExponentBound(INF, 0.0, f"r = {r:g} below D_0 = {d0:.6g}; the bound is unbounded")

    def h(a):
        return ((a - 1.0) * r + float(_neg_log(q(a)))) / a

    grid = np.round(np.arange(0.01, 1.0, 0.01), 12)
    vals = np.array([h(a) for a in grid])
    k = int(np.argmax(vals))
    best_v, best_a = float(vals[k]), float(grid[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if k == 0:
        lo = 1e-4
    if k == len(grid) - 1:
        hi = 1 - 1e-4
    res = minimize_scalar(lambda a: -h(a), bounds=(lo, hi), method="bounded", options={"xatol": ALPHA_TOL})
    if -res.fun > best_v:
        best_v, best_a = float(-res.fun), float(res.x)
    if best_v < 0:
        return ExponentBound(0.0, best_a, f"expression negative ({best_v:.3g}); clamped to 0")
    return ExponentBound(best_v, best_a)


# ---------------------------------------------------------------- figures

ESTIMATION_COLUMNS = ("x", "rld_bound_log", "sld_bound_log")
DISCRIMINATION_COLUMNS = ("x1", "x2", "upper", "lower", "gap")
FIGURES = ("estimate-loss", "estimate-noise", "estimate-phase", "ch-disc-loss", "ch-disc-noise")
PHASE_POINT = 0.1


@dataclass
class FigureData:
    name: str
    columns: tuple
    rows: list
    checks: dict = field(default_factory=dict)

    def to_csv(self):
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"


def _fmt(v):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return repr(float(v))


def parse_grid(text):
    """``"a:b:step"`` (inclusive of ``b`` up to rounding) or a comma-separated list."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"invalid grid {text!r}") from exc


def _check_open_unit(values, name):
    for v in values:
        if not 0 < v < 1:
            raise ParamOutOfRangeError(f"{name} grid value {v} outside (0, 1)")


def _estimation_point(param, theta, gamma, N, phi, sld_method):
    from .fisher import sld_channel_limit
    from .sdp.seesaw import sld_channel_seesaw

    fam = gadc_family(param, gamma=gamma, N=N, phi=phi)
    rld = rld_channel(fam, theta).value
    closed = gadc_closed_form(param, gamma if param != "loss" else theta, N if param != "noise" else theta)
    if sld_method == "seesaw":
        sld = sld_channel_seesaw(fam, theta).lower_bound
    elif sld_method == "limit":
        sld = sld_channel_limit(fam, theta, central=True).richardson
    else:
        raise InputError(f"unknown SLD method {sld_method!r}")
    return rld, closed, sld


def _log_bound(fisher):
    """``ln(1/I)``, the log of the single-use variance bound."""
    if fisher == INF:
        return -INF
    return INF if fisher <= 0 else -math.log(fisher)


def figure_data(name, grid, gamma=None, N=None, gamma1=None, gamma2=None, N1=None, N2=None, sld_method="seesaw"):
    """Data behind the estimation and channel-discrimination figures.

    Estimation figures (``estimate-loss``, ``estimate-noise``,
    ``estimate-phase``) have columns ``x, rld_bound_log, sld_bound_log``:
    ``ln(1/I)`` for the RLD and SLD Fisher informations of the GADC family,
    i.e. the log of the single-use variance bounds. The SLD value is the
    seesaw lower bound (or the limit estimate), so its column is an
    achievable bound. Loss and phase
    sweep ``gamma`` at fixed ``N``; noise sweeps ``N`` at fixed ``gamma``;
    phase is evaluated at ``phi = 0.1``.

    Discrimination figures (``ch-disc-loss`` with fixed ``gamma1, gamma2``
    sweeping ``N1 x N2``; ``ch-disc-noise`` with fixed ``N1, N2`` sweeping
    ``gamma1 x gamma2``) have columns ``x1, x2, upper, lower, gap`` where
    ``upper`` is the ``D_1/2`` geometric bound and ``lower`` the pure-input
    Chernoff search.

    ``checks`` collects per-figure diagnostics: the largest relative
    difference between the closed form and the spectral RLD value, the
    largest violation of ``I_SLD <= I_RLD``, the coincidence residual at
    ``N = 1/2`` for loss sweeps, and the smallest gap for discrimination.
    """
    grid = [float(g) for g in grid]
    _check_open_unit(grid, "sweep")
    if name in ("estimate-loss", "estimate-noise", "estimate-phase"):
        param = name.split("-")[1]
        fixed = N if param in ("loss", "phase") else gamma
        if fixed is None:
            raise InputError(f"{name} needs {'N' if param != 'noise' else 'gamma'}")
        _check_open_unit([fixed], "fixed parameter")
        rows, closed_err, order_viol = [], 0.0, 0.0
        coincidence = 0.0
        for x in grid:
            if param == "loss":
                rld, closed, sld = _estimation_point("loss", x, None, fixed, 0.0, sld_method)
            elif param == "noise":
                rld, closed, sld = _estimation_point("noise", x, fixed, None, 0.0, sld_method)
            else:
                rld, closed, sld = _estimation_point("phase", PHASE_POINT, x, fixed, None, sld_method)
            closed_err = max(closed_err, abs(rld - closed) / abs(closed))
            order_viol = max(order_viol, sld - rld)
            if param == "loss" and fixed == 0.5:
                coincidence = max(coincidence, abs(rld - sld) / rld)
            rows.append((x, _log_bound(rld), _log_bound(sld)))
        checks = {"closed_form_rel_err": closed_err, "ordering_violation": max(order_viol, 0.0)}
        if param == "loss" and fixed == 0.5:
            checks["coincidence_rel_diff"] = coincidence
            checks["coincidence_ok"] = coincidence <= 1e-3
        return FigureData(name, ESTIMATION_COLUMNS, rows, checks)
    if name in ("ch-disc-loss", "ch-disc-noise"):
        from .channels import gadc_choi

        if name == "ch-disc-loss":
            if gamma1 is None or gamma2 is None:
                raise InputError("ch-disc-loss needs gamma1 and gamma2")
            _check_open_unit([gamma1, gamma2], "gamma")

            def pair(a, b):
                return gadc_choi(gamma1, a), gadc_choi(gamma2, b)

        else:
            if N1 is None or N2 is None:
                raise InputError("ch-disc-noise needs N1 and N2")
            _check_open_unit([N1, N2], "N")

            def pair(a, b):
                return gadc_choi(a, N1), gadc_choi(b, N2)

        rows = []
        for a in grid:
            for b in grid:
                cN, cM = pair(a, b)
                upper = geometric_fidelity_divergence(cN, cM)
                lower = chernoff_lower(cN, cM)
                rows.append((a, b, upper, lower, upper - lower))
        min_gap = min(r[4] for r in rows) if rows else 0.0
        return FigureData(name, DISCRIMINATION_COLUMNS, rows, {"min_gap": min_gap, "gap_ok": min_gap >= -1e-6})
    raise InputError(f"unknown figure {name!r}; expected one of {', '.join(FIGURES)}")


__all__ = [
    "EstimationBound",
    "DiscriminationSetting",
    "Verdict",
    "ExponentBound",
    "FigureData",
    "cramer_rao",
    "estimation_bound",
    "heisenberg_verdict",
    "gadc_closed_form",
    "chernoff_information",
    "chernoff_lower",
    "geometric_chernoff_upper",
    "geometric_fidelity_divergence",
    "chernoff_nonasymptotic_upper",
    "hoeffding_upper",
    "parse_grid",
    "figure_data",
]
