"""Small modelling layer: complex affine LMIs to real :class:`SdpProblem`.

Variables are real scalars, complex Hermitian matrices or general complex
matrices, all flattened into one real vector ``y``. Constraints and the
objective are ordinary Python functions of the variable values; they must be
affine, and their coefficients are recovered by evaluating them on the unit
vectors of ``y``.
"""

import numpy as np

from ..errors import MaxIterationsError
from .solver import SdpProblem, solve


def embed(h):
    """Real symmetric embedding ``[[Re, -Im], [Im, Re]]`` of a Hermitian matrix.

    It preserves positive semi-definiteness and doubles every eigenvalue's
    multiplicity, so traces double.
    """
    h = np.asarray(h)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


class LmiBuilder:
    def __init__(self):
        self._vars = []  # (name, kind, shape, offset, size)
        self._n = 0
        self._constraints = []
        self._objective = None

    # -- variables
    def _add(self, name, kind, shape, size):
        self._vars.append((name, kind, shape, self._n, size))
        self._n += size
        return name

    def scalar(self, name):
        return self._add(name, "real", (), 1)

    def hermitian(self, name, n):
        return self._add(name, "herm", (n, n), n * n)

    def complex_matrix(self, name, rows, cols):
        return self._add(name, "cplx", (rows, cols), 2 * rows * cols)

    @property
    def num_vars(self):
        return self._n

    def unpack(self, y):
        out = {}
        for name, kind, shape, off, size in self._vars:
            seg = y[off : off + size]
            if kind == "real":
                out[name] = float(seg[0])
            elif kind == "herm":
                n = shape[0]
                h = np.zeros(shape, dtype=complex)
                iu = np.triu_indices(n, 1)
                h[np.diag_indices(n)] = seg[:n]
                k = len(iu[0])
                h[iu] = seg[n : n + k] + 1j * seg[n + k : n + 2 * k]
                h[(iu[1], iu[0])] = seg[n : n + k] - 1j * seg[n + k : n + 2 * k]
                out[name] = h
            else:
                r, c = shape
                out[name] = (seg[: r * c] + 1j * seg[r * c :]).reshape(r, c)
        return out

    # -- constraints
    def psd(self, fn, label=None):
        """Require ``fn(vars)`` (Hermitian-valued, affine) to be PSD."""
        self._constraints.append((fn, label))

    def maximize(self, fn):
        """Real affine objective."""
        self._objective = fn

    def build(self):
        n = self._n
        zero = self.unpack(np.zeros(n))
        f0 = float(np.real(self._objective(zero)))
        bvec = np.zeros(n)
        C, A = [], []
        units = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            units.append(self.unpack(e))
        for i in range(n):
            bvec[i] = float(np.real(self._objective(units[i]))) - f0
        for fn, _ in self._constraints:
            base = np.asarray(fn(zero), dtype=complex)
            coeffs = [np.asarray(fn(u), dtype=complex) - base for u in units]
            is_complex = np.max(np.abs(base.imag)) > 0 or any(np.max(np.abs(c.imag)) > 0 for c in coeffs)
            if is_complex:
                Ck = embed(base)
                Ak = np.stack([-embed(c) for c in coeffs]) if n else np.zeros((0,) + Ck.shape)
            else:
                Ck = base.real
                Ak = np.stack([-c.real for c in coeffs]) if n else np.zeros((0,) + Ck.shape)
            C.append(0.5 * (Ck + Ck.T))
            A.append(0.5 * (Ak + np.swapaxes(Ak, 1, 2)))
        return SdpProblem(C, A, bvec), f0

    def solve(self, tol=1e-8, accept_gap=None, **kw):
        """Solve and return ``(value, variables, SdpSolution)``.

        With ``accept_gap`` set, a run that misses ``tol`` but whose best
        iterate has relative gap at most ``accept_gap`` is accepted.
        """
        prob, f0 = self.build()
        try:
            sol = solve(prob, tol=tol, **kw)
        except MaxIterationsError as exc:
            if accept_gap is None or exc.solution.gap > accept_gap or exc.solution.dual_residual > accept_gap:
                raise
            sol = exc.solution
        return sol.dual_value + f0, self.unpack(sol.y), sol
