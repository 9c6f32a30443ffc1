"""Dense Hermitian linear algebra.

Operators are plain complex ``numpy`` arrays. Functions of positive
semi-definite operators act on the support only: eigenvalues at or below the
rank tolerance are treated as exact zeros and mapped to zero whatever ``f(0)``
would be. This is the convention behind generalized inverses, ``ln`` on the
support and every finiteness test elsewhere in the package.
"""

from collections import namedtuple
from functools import reduce

import numpy as np
from scipy.special import logsumexp

from .config import HERMITIAN_TOL, RANK_FACTOR
from .errors import (
    DimMismatchError,
    NoConvergenceError,
    NonHermitianError,
    NotPSDError,
    NumericalError,
    SupportViolationError,
    InputError,
)

EigDecomp = namedtuple("EigDecomp", ["values", "vectors"])
SupportSplit = namedtuple(
    "SupportSplit", ["proj_support", "proj_kernel", "rank", "basis", "kernel_basis", "values", "rank_tol"]
)


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def kron(*ops):
    return reduce(np.kron, ops)


def hermitian_part(a):
    a = np.asarray(a)
    return 0.5 * (a + dagger(a))


def as_square(a, name="operator"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatchError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def as_hermitian(a, tol=HERMITIAN_TOL, name="operator"):
    """Validate Hermiticity and return the exactly Hermitian part.

    The check is ``max |a - a^dagger| <= tol * (1 + max |a|)``.
    """
    a = as_square(a, name)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    scale = np.max(np.abs(a)) if a.size else 0.0
    if dev > tol * (1.0 + scale):
        raise NonHermitianError(f"{name} is not Hermitian (deviation {dev:.3e})")
    return hermitian_part(a)


def eig_hermitian(h, tol=HERMITIAN_TOL):
    """Eigendecomposition with ascending eigenvalues.

    Args:
        h: Hermitian matrix.
        tol: Hermiticity tolerance, see :func:`as_hermitian`.

    Returns:
        ``EigDecomp(values, vectors)`` with ``h = V diag(values) V^dagger``.
    """
    h = as_hermitian(h, tol)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(f"eigendecomposition failed: {exc}") from exc
    # eigh already sorts; a stable argsort keeps ties in LAPACK order
    order = np.argsort(w, kind="stable")
    return EigDecomp(w[order], v[:, order])


def rank_tolerance(values, factor=RANK_FACTOR):
    """Default kernel cutoff ``dim * factor * lambda_max``."""
    values = np.asarray(values)
    if values.size == 0:
        return 0.0
    return values.size * factor * max(float(np.max(values)), 0.0)


def _split_from_eig(w, v, rank_tol, check_psd):
    if rank_tol is None:
        rank_tol = rank_tolerance(w)
    if check_psd and w.size and w[0] < -10.0 * rank_tol:
        raise NotPSDError(f"operator is not positive semi-definite (min eigenvalue {w[0]:.3e})")
    mask = w > rank_tol
    basis = v[:, mask]
    kbasis = v[:, ~mask]
    proj = basis @ dagger(basis)
    kproj = kbasis @ dagger(kbasis)
    return SupportSplit(proj, kproj, int(mask.sum()), basis, kbasis, w[mask], rank_tol)


def support_split(h, rank_tol=None, check_psd=True):
    """Support and kernel projectors of a PSD operator.

    Eigenvalues strictly above ``rank_tol`` span the support. The default
    cutoff is ``dim * 1e-12 * lambda_max``.

    Raises:
        NotPSDError: if the smallest eigenvalue is below ``-10 * rank_tol``.
    """
    w, v = eig_hermitian(h)
    return _split_from_eig(w, v, rank_tol, check_psd)


def apply_on_support(h, f, rank_tol=None):
    """Return ``sum_{lambda_j > tol} f(lambda_j) |psi_j><psi_j|`` for PSD ``h``."""
    s = support_split(h, rank_tol)
    if s.rank == 0:
        return np.zeros_like(as_square(h))
    fv = np.asarray(f(s.values), dtype=complex)
    return (s.basis * fv) @ dagger(s.basis)


def mpow(h, p, rank_tol=None):
    """Power on the support (negative ``p`` gives the generalized inverse power)."""
    return apply_on_support(h, lambda x: x**p, rank_tol)


def msqrt(h, rank_tol=None):
    return apply_on_support(h, np.sqrt, rank_tol)


def pinv_psd(h, rank_tol=None):
    return apply_on_support(h, lambda x: 1.0 / x, rank_tol)


def mlog(h, rank_tol=None):
    return apply_on_support(h, np.log, rank_tol)


def hermitian_function(h, f):
    """``f`` applied to every eigenvalue of a Hermitian matrix (no support convention)."""
    w, v = eig_hermitian(h)
    return (v * f(w)) @ dagger(v)


def op_norm(a):
    return float(np.linalg.norm(a, 2)) if np.size(a) else 0.0


def fro(a):
    return float(np.linalg.norm(a))


def lambda_max(h):
    return float(eig_hermitian(h).values[-1])


def lambda_min(h):
    return float(eig_hermitian(h).values[0])


def _normalize_keep(keep, n):
    if isinstance(keep, str):
        tags = {"R": 0, "A": 0, "B": 1}
        if n != 2 or keep not in tags:
            raise InputError(f"subsystem tag {keep!r} needs a bipartite dims pair")
        keep = tags[keep]
    if np.isscalar(keep):
        keep = [int(keep)]
    keep = sorted(int(k) for k in keep)
    if any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise InputError(f"invalid subsystem selection {keep}")
    return keep


def partial_trace(m, dims, keep):
    """Trace out every subsystem not listed in ``keep``.

    Args:
        m: operator on the tensor product of spaces with dimensions ``dims``.
        dims: subsystem dimensions in tensor order.
        keep: index, list of indices, or ``"R"``/``"B"`` for a bipartite pair.

    Example:
        >>> partial_trace(np.kron(a, b), (2, 3), "R")   # Tr[b] * a
    """
    m = np.asarray(m)
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimMismatchError(f"operator of shape {m.shape} does not match dims {dims}")
    n = len(dims)
    keep = _normalize_keep(keep, n)
    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for k in range(n):
        if k not in keep:
            col[k] = row[k]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = int(np.prod([dims[k] for k in keep]))
    return res.reshape(d, d)


def permute_systems(m, dims, perm):
    """Reorder tensor factors of an operator; ``perm[i]`` is the old index placed at position i."""
    m = np.asarray(m)
    dims = tuple(dims)
    n = len(dims)
    t = m.reshape(dims + dims)
    t = t.transpose(list(perm) + [n + p for p in perm])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def permute_vector(v, dims, perm):
    dims = tuple(dims)
    return np.asarray(v).reshape(dims).transpose(perm).reshape(-1)


def gamma_vector(d):
    """Unnormalized maximally entangled vector ``sum_i |i>|i>``."""
    return np.eye(d, dtype=complex).reshape(-1)


def vec_gamma(m, d=None):
    """``(M (x) I)|Gamma>``, which is the row-major flattening of ``M``."""
    m = as_square(m)
    if d is not None and m.shape[0] != d:
        raise DimMismatchError(f"expected a {d}x{d} matrix, got {m.shape}")
    return m.reshape(-1).copy()


def support_residual(sigma_split, rho):
    """``|| Pi_perp rho Pi_perp ||_F``: zero iff supp(rho) lies in the support of sigma (rho PSD)."""
    k = sigma_split.proj_kernel
    return fro(k @ rho @ k)


def schur_reduce(y, x_split, rank_tol=None):
    """Generalized Schur complement of ``y`` onto the support of ``x``.

    With ``P`` the support of ``x`` and ``Q`` its kernel, returns
    ``Y_PP - Y_PQ Y_QQ^+ Y_QP`` embedded back in the full space. Eigenvalues
    below the rank cutoff of ``y`` are set to zero so that an exactly singular
    reduction stays exactly singular.
    """
    y = as_hermitian(y)
    u0, u1 = x_split.basis, x_split.kernel_basis
    if u1.shape[1] == 0:
        return y
    y00 = dagger(u0) @ y @ u0
    y01 = dagger(u0) @ y @ u1
    y11 = dagger(u1) @ y @ u1
    scale = max(lambda_max(y), 0.0)
    tol = y.shape[0] * RANK_FACTOR * scale if rank_tol is None else rank_tol
    s11 = support_split(y11, rank_tol=tol)
    leak = fro(dagger(y01) - s11.proj_support @ dagger(y01))
    if leak > 1e-6 * max(scale, 1e-300) and leak > 1e-12:
        raise NumericalError(f"off-diagonal block leaves the support of the kernel block (residual {leak:.2e})")
    inv11 = (s11.basis / s11.values) @ dagger(s11.basis) if s11.rank else np.zeros_like(y11)
    red = hermitian_part(y00 - y01 @ inv11 @ dagger(y01))
    w, v = np.linalg.eigh(red)
    w = np.where(w > tol, w, 0.0)
    red = (v * w) @ dagger(v)
    return u0 @ red @ dagger(u0)


def geometric_mean_path(x, y, eps=0.0, rank_tol=None, allow_violation=False):
    """Return ``alpha -> G_alpha(X, Y)`` sharing one eigendecomposition.

    Conventions as in :func:`geometric_mean`. When supp(Y) is not inside
    supp(X) (and ``eps = 0``) the path uses the Schur-reduced ``Y`` and is
    valid for ``alpha <= 1`` only; ``path.contained`` records which case
    applies.

    Raises:
        SupportViolationError: on a support violation unless ``allow_violation``.
    """
    x = as_hermitian(x)
    y = as_hermitian(y)
    if x.shape != y.shape:
        raise DimMismatchError(f"shapes {x.shape} and {y.shape} differ")
    d = x.shape[0]
    contained = True
    if eps > 0:
        xs = support_split(x + eps * np.eye(d), rank_tol=0.0)
    else:
        xs = support_split(x, rank_tol)
        ytol = d * RANK_FACTOR * max(lambda_max(y), 0.0)
        if support_residual(xs, y) > max(ytol, 1e-300):
            contained = False
            if not allow_violation:
                raise SupportViolationError("support of Y is not contained in the support of X")
            y = schur_reduce(y, xs)
    u = xs.basis
    r_half = np.sqrt(xs.values)
    yc = dagger(u) @ y @ u
    inner = hermitian_part((yc / r_half[:, None]) / r_half[None, :]) if xs.rank else yc
    w, v = np.linalg.eigh(inner) if xs.rank else (np.zeros(0), np.zeros((0, 0)))
    tol = w.size * RANK_FACTOR * max(w[-1], 0.0) if w.size else 0.0
    pos = w > tol
    left = u @ (v * r_half[:, None])  # X^{1/2} V in the full space

    def path(alpha):
        if not np.isfinite(alpha) or alpha < 0:
            raise InputError(f"alpha must be a nonnegative real, got {alpha}")
        if alpha > 1 and not contained:
            raise SupportViolationError("alpha > 1 needs supp(Y) inside supp(X)")
        if xs.rank == 0:
            return np.zeros((d, d), dtype=complex)
        wp = np.where(pos, np.abs(w) ** alpha, 0.0)
        return hermitian_part((left * wp) @ dagger(left))

    weights = np.sum(np.abs(left) ** 2, axis=0)

    def log_trace(alpha):
        """``ln Tr G_alpha`` without forming ``w**alpha`` (no overflow at large alpha)."""
        if alpha > 1 and not contained:
            raise SupportViolationError("alpha > 1 needs supp(Y) inside supp(X)")
        keep = pos & (weights > 0)
        if not np.any(keep):
            return -np.inf
        return float(logsumexp(alpha * np.log(w[keep]) + np.log(weights[keep])))

    path.contained = contained
    path.log_trace = log_trace
    return path


def geometric_mean(x, y, alpha, eps=0.0, rank_tol=None):
    """Weighted operator geometric mean ``X^{1/2} (X^{-1/2} Y X^{-1/2})^alpha X^{1/2}``.

    With ``eps > 0`` the first argument is replaced by ``X + eps I``. With
    ``eps = 0`` inverses act on the support of ``X``; for ``alpha < 1`` and
    ``Y`` not supported inside ``X`` the value is the ``eps -> 0`` limit,
    obtained from the Schur complement of ``Y`` onto the support of ``X``.
    ``alpha = 0`` uses ``x^0 = 1`` on the support only.

    Raises:
        SupportViolationError: ``alpha > 1``, ``eps = 0`` and supp(Y) not in supp(X).
    """
    if not np.isfinite(alpha) or alpha < 0:
        raise InputError(f"alpha must be a nonnegative real, got {alpha}")
    return geometric_mean_path(x, y, eps, rank_tol, allow_violation=alpha <= 1)(alpha)
