"""Quantum channels as Choi operators and one-parameter channel families.

The Choi operator of a channel from A to B is
``Gamma = sum_ij |i><j|_R (x) N(|i><j|_A)`` stored on ``R (x) B`` with the
reference system first, so that ``Tr_B Gamma = I_R`` certifies trace
preservation.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg as la
from .config import TRACE_TOL
from .errors import (
    DimMismatchError,
    InputError,
    NotDensityError,
    NotTracePreservingError,
    ParamOutOfRangeError,
    SchemaError,
)

FD_STEP = 1e-5


class Choi:
    """Validated Choi operator on ``R (x) B``.

    Args:
        op: the ``dR*dB`` square matrix.
        dims: ``(dR, dB)``.
        tol: tolerance of the ``Tr_B op = I_R`` certificate.
    """

    __slots__ = ("op", "dims")

    def __init__(self, op, dims, tol=1e-9):
        op = la.as_hermitian(op, tol=1e-10, name="Choi operator")
        dims = (int(dims[0]), int(dims[1]))
        if op.shape[0] != dims[0] * dims[1]:
            raise DimMismatchError(f"Choi operator of size {op.shape[0]} does not match dims {dims}")
        la.support_split(op)  # raises NotPSDError
        red = la.partial_trace(op, dims, 0)
        dev = np.max(np.abs(red - np.eye(dims[0])))
        if dev > tol:
            raise NotTracePreservingError(f"Tr_B of the Choi operator deviates from identity by {dev:.2e}")
        op.setflags(write=False)
        self.op = op
        self.dims = dims

    @property
    def d_in(self):
        return self.dims[0]

    @property
    def d_out(self):
        return self.dims[1]

    def __repr__(self):
        return f"Choi(dims={self.dims})"


def choi_operator(kraus):
    """Unvalidated ``sum_K (I (x) K)|Gamma><Gamma|(I (x) K)^dagger``."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    dout, din = kraus[0].shape
    g = np.zeros((din * dout, din * dout), dtype=complex)
    for k in kraus:
        if k.shape != (dout, din):
            raise DimMismatchError("Kraus operators must share one shape")
        v = k.T.reshape(-1)
        g += np.outer(v, v.conj())
    return g, (din, dout)


def choi_from_kraus(kraus, tol=1e-9):
    """Choi operator of the channel ``rho -> sum_K K rho K^dagger``.

    Raises:
        NotTracePreservingError: if ``sum_K K^dagger K`` differs from the identity.
    """
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise InputError("at least one Kraus operator is required")
    din = kraus[0].shape[1]
    s = sum(k.conj().T @ k for k in kraus)
    dev = np.max(np.abs(s - np.eye(din)))
    if dev > tol:
        raise NotTracePreservingError(f"sum K^dagger K deviates from identity by {dev:.2e}")
    g, dims = choi_operator(kraus)
    return Choi(g, dims, tol=max(tol, 1e-9))


def kraus_from_choi(c, rank_tol=None):
    s = la.support_split(c.op, rank_tol)
    din, dout = c.dims
    out = []
    for lam, vec in zip(s.values, s.basis.T):
        out.append(np.sqrt(lam) * vec.reshape(din, dout).T)
    return out


def apply_choi_operator(g, dims, rho, d_ref=None):
    """Post-selected teleportation ``<Gamma|_AS rho_RA (x) G_SB |Gamma>_AS``.

    Works for any operator ``g`` on ``A (x) B`` (a Choi operator or its
    derivative). ``rho`` acts on ``R (x) A``; ``d_ref`` defaults to
    ``dim(rho) / dA``.
    """
    din, dout = dims
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % din:
        raise DimMismatchError(f"input of shape {rho.shape} is incompatible with input dimension {din}")
    dr = rho.shape[0] // din if d_ref is None else d_ref
    if dr * din != rho.shape[0]:
        raise DimMismatchError("reference dimension does not match the input")
    r = rho.reshape(dr, din, dr, din)
    gg = np.asarray(g).reshape(din, dout, din, dout)
    out = np.einsum("rksl,kblc->rbsc", r, gg)
    return out.reshape(dr * dout, dr * dout)


def apply_channel(c, rho, d_ref=None):
    """Apply a channel given by its Choi operator to ``rho`` on ``R (x) A``."""
    return apply_choi_operator(c.op, c.dims, rho, d_ref)


def compose(c_second, c_first):
    """Choi operator of ``second o first``."""
    if c_first.dims[1] != c_second.dims[0]:
        raise DimMismatchError("output of the first channel must match the input of the second")
    g = apply_choi_operator(c_second.op, c_second.dims, c_first.op)
    return Choi(g, (c_first.dims[0], c_second.dims[1]))


def tensor_choi_operators(g1, dims1, g2, dims2):
    """Choi operator of ``N1 (x) N2`` ordered ``R1 R2 B1 B2``."""
    g = np.kron(g1, g2)
    dims = (dims1[0], dims1[1], dims2[0], dims2[1])
    return la.permute_systems(g, dims, (0, 2, 1, 3)), (dims1[0] * dims2[0], dims1[1] * dims2[1])


def tensor(c1, c2):
    g, dims = tensor_choi_operators(c1.op, c1.dims, c2.op, c2.dims)
    return Choi(g, dims)


def identity_channel(d):
    return choi_from_kraus([np.eye(d)])


def depolarizing_channel(d, p=1.0):
    """``rho -> (1-p) rho + p Tr[rho] I/d``; ``p = 1`` is the completely depolarizing channel."""
    g = (1 - p) * np.outer(la.gamma_vector(d), la.gamma_vector(d)) + p * np.eye(d * d) / d
    return Choi(g, (d, d))


def replacer_channel(sigma, d_in):
    """``rho -> Tr[rho] sigma``."""
    sigma = la.as_hermitian(sigma)
    return Choi(np.kron(np.eye(d_in), sigma), (d_in, sigma.shape[0]))


def smooth(rho, eps):
    """``(1 - eps) rho + eps I/d``."""
    if not 0 <= eps < 1:
        raise InputError(f"eps must lie in [0, 1), got {eps}")
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (1 - eps) * rho + eps * np.eye(d) / d


def check_density(rho, name="state", tol=TRACE_TOL):
    """Validate a density operator and return its Hermitian part."""
    try:
        rho = la.as_hermitian(rho, tol=1e-10, name=name)
        la.support_split(rho)
    except InputError as exc:
        raise NotDensityError(f"{name}: {exc}") from exc
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise NotDensityError(f"{name} has trace {tr}, expected 1")
    return rho


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class ChannelFamily:
    """A one-parameter family ``theta -> Gamma(theta)`` with optional analytic derivative.

    Without ``deriv_fn`` the derivative is a central difference with step
    ``h`` clamped to the open parameter interval.
    """

    choi_fn: Callable[[float], np.ndarray]
    dims: tuple
    interval: tuple = (-np.inf, np.inf)
    deriv_fn: Optional[Callable[[float], np.ndarray]] = None
    h: float = FD_STEP
    name: str = "family"

    @property
    def mode(self):
        return "analytic" if self.deriv_fn is not None else f"finite-difference({self.h:g})"

    def _check(self, theta):
        lo, hi = self.interval
        if not (lo < theta < hi):
            raise ParamOutOfRangeError(f"{self.name}: parameter {theta} outside ({lo}, {hi})")

    def choi(self, theta):
        self._check(theta)
        return Choi(self.choi_fn(theta), self.dims)

    def choi_op(self, theta):
        self._check(theta)
        return la.hermitian_part(np.asarray(self.choi_fn(theta), dtype=complex))

    def deriv(self, theta):
        self._check(theta)
        if self.deriv_fn is not None:
            return la.hermitian_part(np.asarray(self.deriv_fn(theta), dtype=complex))
        return self.finite_difference(theta)

    def finite_difference(self, theta, h=None):
        self._check(theta)
        h = self.h if h is None else h
        lo, hi = self.interval
        a, b = theta - h, theta + h
        if a <= lo:
            a = theta
        if b >= hi:
            b = theta
        if a == b:
            raise ParamOutOfRangeError("interval too narrow for a finite difference")
        g = (np.asarray(self.choi_fn(b)) - np.asarray(self.choi_fn(a))) / (b - a)
        return la.hermitian_part(g)


def constant_family(c, name="constant"):
    op = np.array(c.op)
    return ChannelFamily(lambda t: op, c.dims, deriv_fn=lambda t: np.zeros_like(op), name=name)


GADC_PARAMS = ("loss", "noise", "phase")


def gadc_kraus(gamma, N, phi=0.0):
    """Kraus operators of the generalized amplitude damping channel.

    A phase rotation ``exp(-i phi Z)`` is applied before the damping when
    ``phi`` is nonzero.
    """
    _gadc_range(gamma, N, closed=True)
    a = np.sqrt(1 - gamma)
    k1 = np.sqrt(1 - N) * np.array([[1, 0], [0, a]])
    k2 = np.sqrt(gamma * (1 - N)) * np.array([[0, 1], [0, 0]])
    k3 = np.sqrt(N) * np.array([[a, 0], [0, 1]])
    k4 = np.sqrt(gamma * N) * np.array([[0, 0], [1, 0]])
    ks = [k1, k2, k3, k4]
    if phi:
        u = np.diag([np.exp(-1j * phi), np.exp(1j * phi)])
        ks = [k @ u for k in ks]
    return [np.asarray(k, dtype=complex) for k in ks]


def gadc_choi_matrix(gamma, N, phi=0.0):
    """Closed-form Choi matrix of the (phase-rotated) GADC."""
    a = np.sqrt(1 - gamma)
    g = np.zeros((4, 4), dtype=complex)
    g[0, 0] = 1 - gamma * N
    g[1, 1] = gamma * N
    g[2, 2] = gamma * (1 - N)
    g[3, 3] = 1 - gamma * (1 - N)
    g[0, 3] = np.exp(-2j * phi) * a
    g[3, 0] = np.exp(2j * phi) * a
    return g


def gadc_choi(gamma, N, phi=0.0):
    _gadc_range(gamma, N, closed=True)
    return Choi(gadc_choi_matrix(gamma, N, phi), (2, 2))


def _gadc_range(gamma, N, closed=False):
    ok = (lambda v: 0 <= v <= 1) if closed else (lambda v: 0 < v < 1)
    if not ok(gamma) or not ok(N):
        raise ParamOutOfRangeError(f"GADC parameters must lie in {'[0, 1]' if closed else '(0, 1)'}: gamma={gamma}, N={N}")


def gadc_family(param, gamma=None, N=None, phi=0.0):
    """GADC family in one of its parameters with analytic derivative.

    Args:
        param: ``"loss"`` (theta = gamma), ``"noise"`` (theta = N) or ``"phase"`` (theta = phi).
        gamma, N, phi: the fixed values of the remaining parameters.
    """
    if param == "loss":
        _gadc_range(0.5, N)

        def choi_fn(t):
            return gadc_choi_matrix(t, N, phi)

        def deriv_fn(t):
            g = np.zeros((4, 4), dtype=complex)
            c = -1.0 / (2.0 * np.sqrt(1 - t))
            g[0, 0], g[1, 1], g[2, 2], g[3, 3] = -N, N, 1 - N, -(1 - N)
            g[0, 3] = np.exp(-2j * phi) * c
            g[3, 0] = np.exp(2j * phi) * c
            return g

        interval = (0.0, 1.0)
    elif param == "noise":
        _gadc_range(gamma, 0.5)

        def choi_fn(t):
            return gadc_choi_matrix(gamma, t, phi)

        def deriv_fn(t):
            return -gamma * np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)

        interval = (0.0, 1.0)
    elif param == "phase":
        _gadc_range(gamma, N)

        def choi_fn(t):
            return gadc_choi_matrix(gamma, N, t)

        def deriv_fn(t):
            g = np.zeros((4, 4), dtype=complex)
            a = np.sqrt(1 - gamma)
            g[0, 3] = -2j * np.exp(-2j * t) * a
            g[3, 0] = 2j * np.exp(2j * t) * a
            return g

        interval = (-np.inf, np.inf)
    else:
        raise InputError(f"unknown GADC parameter {param!r}; expected one of {GADC_PARAMS}")
    return ChannelFamily(choi_fn, (2, 2), interval, deriv_fn, name=f"gadc-{param}")


def unitary_family(generator, name="unitary"):
    """``theta -> exp(-i theta H) rho exp(i theta H)`` for Hermitian ``H``."""
    h = la.as_hermitian(generator)
    d = h.shape[0]
    w, v = np.linalg.eigh(h)

    def u(t):
        return (v * np.exp(-1j * t * w)) @ v.conj().T

    def choi_fn(t):
        vec = u(t).T.reshape(-1)
        return np.outer(vec, vec.conj())

    def deriv_fn(t):
        vec = u(t).T.reshape(-1)
        dvec = (-1j * h @ u(t)).T.reshape(-1)
        return np.outer(dvec, vec.conj()) + np.outer(vec, dvec.conj())

    return ChannelFamily(choi_fn, (d, d), deriv_fn=deriv_fn, name=name)


def serial_family(first, second):
    """Family ``theta -> second_theta o first_theta`` with product-rule derivative."""
    if first.dims[1] != second.dims[0]:
        raise DimMismatchError("families cannot be composed")
    dims = (first.dims[0], second.dims[1])
    lo = max(first.interval[0], second.interval[0])
    hi = min(first.interval[1], second.interval[1])

    def choi_fn(t):
        return apply_choi_operator(second.choi_fn(t), second.dims, first.choi_fn(t))

    def deriv_fn(t):
        a = apply_choi_operator(second.deriv(t), second.dims, first.choi_op(t))
        b = apply_choi_operator(second.choi_op(t), second.dims, first.deriv(t))
        return a + b

    return ChannelFamily(choi_fn, dims, (lo, hi), deriv_fn, name=f"{second.name}o{first.name}")


@dataclass(frozen=True)
class CqFamily:
    """Letters ``x`` with state families ``theta -> (omega_x, d omega_x)``."""

    states: Sequence[Callable[[float], tuple]]
    interval: tuple = (-np.inf, np.inf)
    letters: Sequence = field(default=None)

    def __post_init__(self):
        if self.letters is None:
            object.__setattr__(self, "letters", list(range(len(self.states))))
        if len(self.letters) != len(self.states):
            raise InputError("letters and states must have equal length")

    def evaluate(self, theta):
        out = []
        for f in self.states:
            w, dw = f(theta)
            out.append((np.asarray(w, dtype=complex), np.asarray(dw, dtype=complex)))
        return out


def cq_channel(f):
    """Channel family ``Gamma(theta) = sum_x |x><x| (x) omega_x(theta)``."""
    sample = f.evaluate(_interior_point(f.interval))
    dx, db = len(sample), sample[0][0].shape[0]

    def assemble(pairs, idx):
        g = np.zeros((dx * db, dx * db), dtype=complex)
        for x, p in enumerate(pairs):
            g[x * db : (x + 1) * db, x * db : (x + 1) * db] = p[idx]
        return g

    return ChannelFamily(
        lambda t: assemble(f.evaluate(t), 0),
        (dx, db),
        f.interval,
        lambda t: assemble(f.evaluate(t), 1),
        name="cq",
    )


def _interior_point(interval):
    lo, hi = interval
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    if np.isfinite(lo):
        return lo + 1.0
    if np.isfinite(hi):
        return hi - 1.0
    return 0.0


def bernoulli_state(theta):
    """``(diag(theta, 1 - theta), diag(1, -1))``."""
    return np.diag([theta, 1 - theta]).astype(complex), np.diag([1.0, -1.0]).astype(complex)


# ------------------------------------------------------------ descriptors

_COMMON = {"kind"}
_SCHEMA = {
    "kraus": ({"dim_in", "dim_out", "kraus"}, set()),
    "gadc": ({"param", "gamma", "N"}, {"phi"}),
    "choi": ({"dims", "matrix"}, set()),
}


def _complex_matrix(raw, shape, where):
    if not isinstance(raw, list) or len(raw) != shape[0]:
        raise SchemaError(f"{where}: expected {shape[0]} rows")
    out = np.zeros(shape, dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != shape[1]:
            raise SchemaError(f"{where}[{i}]: expected {shape[1]} entries")
        for j, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in z)
            ):
                raise SchemaError(f"{where}[{i}][{j}]: complex entries are [re, im] pairs")
            out[i, j] = complex(z[0], z[1])
    return out


def _positive_int(desc, key):
    v = desc[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise SchemaError(f"field '{key}' must be a positive integer")
    return v


def _real(desc, key):
    v = desc[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise SchemaError(f"field '{key}' must be a number")
    return float(v)


def parse_descriptor(desc):
    """Validate a channel descriptor (a dict decoded from JSON).

    Returns:
        ``(family_or_None, choi, info)``. GADC descriptors yield a family in
        their ``param``; Kraus and Choi descriptors yield a constant family.
    """
    if not isinstance(desc, dict):
        raise SchemaError("channel descriptor must be a JSON object")
    kind = desc.get("kind")
    if kind not in _SCHEMA:
        raise SchemaError(f"field 'kind' must be one of {sorted(_SCHEMA)}, got {kind!r}")
    required, optional = _SCHEMA[kind]
    for key in sorted(required - set(desc)):
        raise SchemaError(f"missing field '{key}' for kind '{kind}'")
    for key in sorted(set(desc) - required - optional - _COMMON):
        raise SchemaError(f"unknown field '{key}' for kind '{kind}'")
    try:
        if kind == "kraus":
            din, dout = _positive_int(desc, "dim_in"), _positive_int(desc, "dim_out")
            if not isinstance(desc["kraus"], list) or not desc["kraus"]:
                raise SchemaError("field 'kraus' must be a nonempty list of matrices")
            ks = [_complex_matrix(k, (dout, din), f"kraus[{i}]") for i, k in enumerate(desc["kraus"])]
            c = choi_from_kraus(ks)
            return constant_family(c, "kraus"), c, {"kind": kind}
        if kind == "choi":
            dims = desc["dims"]
            if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) and d > 0 for d in dims)):
                raise SchemaError("field 'dims' must be [dR, dB] with positive integers")
            n = dims[0] * dims[1]
            m = _complex_matrix(desc["matrix"], (n, n), "matrix")
            c = Choi(m, tuple(dims))
            return constant_family(c, "choi"), c, {"kind": kind}
        param = desc["param"]
        if param not in GADC_PARAMS:
            raise SchemaError(f"field 'param' must be one of {list(GADC_PARAMS)}")
        gamma, N = _real(desc, "gamma"), _real(desc, "N")
        phi = _real(desc, "phi") if "phi" in desc else 0.0
        fam = gadc_family(param, gamma=gamma, N=N, phi=phi)
        theta = {"loss": gamma, "noise": N, "phase": phi}[param]
        return fam, gadc_choi(gamma, N, phi), {"kind": kind, "param": param, "theta": theta}
    except SchemaError:
        raise
    except InputError as exc:
        raise SchemaError(f"channel descriptor rejected: {exc}") from exc
