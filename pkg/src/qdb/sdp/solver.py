"""Dense primal-dual interior-point method for block semi-definite programs.

Problems are stored in linear-matrix-inequality form::

    maximize    b^T y
    subject to  S = C - sum_i y_i A_i  is positive semi-definite (blockwise)

whose conic dual is ``minimize <C, X>`` subject to ``<A_i, X> = b_i`` and
``X`` positive semi-definite. Blocks are real symmetric; complex Hermitian
blocks are embedded as ``[[Re, -Im], [Im, Re]]`` before they get here (see
:mod:`qdb.sdp.lmi`). The iteration is an infeasible path-following method
with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..errors import InfeasibleError, MaxIterationsError, DimMismatchError

MAX_ITER = 200
STALL_WINDOW = 20
STALL_LEVEL = 1e-6


@dataclass(frozen=True)
class SdpProblem:
    """``C``: list of symmetric blocks; ``A``: list (per block) of arrays ``(m, n_k, n_k)``; ``b``: length m."""

    C: list
    A: list
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "b", b)
        if len(self.C) != len(self.A):
            raise DimMismatchError("C and A must have the same number of blocks")
        for c, a in zip(self.C, self.A):
            if a.ndim != 3 or a.shape[0] != b.size or a.shape[1:] != c.shape:
                raise DimMismatchError("constraint coefficient shapes are inconsistent")

    @property
    def m(self):
        return self.b.size

    @property
    def block_sizes(self):
        return [c.shape[0] for c in self.C]

    def op(self, xs):
        """``A(X)_i = sum_k <A_i^k, X^k>``."""
        out = np.zeros(self.m)
        for a, x in zip(self.A, xs):
            out += a.reshape(self.m, -1) @ x.reshape(-1)
        return out

    def adj(self, y):
        """``sum_i y_i A_i`` blockwise."""
        return [np.tensordot(y, a, axes=(0, 0)) for a in self.A]


@dataclass
class SdpSolution:
    primal_value: float
    dual_value: float
    gap: float
    X: list
    y: np.ndarray
    S: list
    status: str
    iterations: int
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    history: list = field(default_factory=list, repr=False)


def _sym(a):
    return 0.5 * (a + a.T)


def _inner(us, vs):
    return float(sum(np.vdot(u, v).real for u, v in zip(us, vs)))


def _fnorm(xs):
    return float(np.sqrt(sum(np.sum(x * x) for x in xs)))


def _max_step(chols, dirs):
    """Largest t with ``L L^T + t D`` PSD for every block."""
    t = np.inf
    for l, d in zip(chols, dirs):
        li = sla.solve_triangular(l, np.eye(l.shape[0]), lower=True)
        w = np.linalg.eigvalsh(_sym(li @ d @ li.T))
        if w[0] < 0:
            t = min(t, -1.0 / w[0])
    return t


def _chol(x):
    try:
        return np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return None


def solve(problem, tol=1e-8, max_iter=MAX_ITER, raise_on_failure=True, feas_tol=None):
    """Solve an :class:`SdpProblem`.

    Args:
        problem: the program in LMI form.
        tol: target for the relative duality gap ``|p - d| / (1 + |p|)``.
        feas_tol: target for the relative primal and dual residuals,
            ``max(tol, 1e-10)`` by default. Roundoff in the final iterations
            makes residuals far below 1e-10 unreachable even when the gap is.
        max_iter: iteration budget.
        raise_on_failure: raise :class:`MaxIterationsError` when the budget
            runs out or progress stops; otherwise return the best iterate
            with ``status = "max-iter"``.

    Returns:
        SdpSolution with ``dual_value = b^T y`` (the LMI objective) and
        ``primal_value = <C, X>``.

    Raises:
        InfeasibleError: the primal residual stalls above 1e-6 for 20 iterations.
        MaxIterationsError: no point meeting ``tol`` was reached; the best
            iterate is attached as ``.solution``.
    """
    p = problem
    feas_tol = max(tol, 1e-10) if feas_tol is None else feas_tol
    m = p.m
    C = [_sym(np.asarray(c, dtype=float)) for c in p.C]
    b = p.b
    sizes = p.block_sizes
    ntot = sum(sizes)
    Af = [a.reshape(m, -1) for a in p.A]

    normb = 1.0 + np.linalg.norm(b)
    normC = 1.0 + _fnorm(C)
    # starting point in the style of SDPT3
    X, S = [], []
    for k, n in enumerate(sizes):
        anorm = np.linalg.norm(Af[k], axis=1)
        xi = max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + anorm)) if m else 1.0)
        eta = max(10.0, np.sqrt(n), np.max(anorm) if m else 0.0, np.linalg.norm(C[k]))
        X.append(xi * np.eye(n))
        S.append(eta * np.eye(n))
    y = np.zeros(m)

    best = None
    best_score = np.inf
    stall = []
    status = "max-iter"
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        AtY = p.adj(y)
        Rp = b - p.op(X)
        Rd = [C[k] - AtY[k] - S[k] for k in range(len(C))]
        pobj = _inner(C, X)
        dobj = float(b @ y)
        mu = _inner(X, S) / ntot
        gap = abs(pobj - dobj) / (1 + abs(pobj))
        pres = np.linalg.norm(Rp) / normb
        dres = _fnorm(Rd) / normC
        history.append((pobj, dobj, gap, pres, dres))
        score = max(gap / tol, pres / feas_tol, dres / feas_tol)
        if score < best_score:
            best_score = score
            best = (
                [x.copy() for x in X],
                y.copy(),
                [s.copy() for s in S],
                pobj,
                dobj,
                gap,
                pres,
                dres,
            )
        if gap <= tol and pres <= feas_tol and dres <= feas_tol:
            status = "optimal"
            break
        stall.append(pres)
        if len(stall) > STALL_WINDOW:
            stall.pop(0)
            if min(stall) > STALL_LEVEL and stall[-1] > 0.5 * stall[0]:
                sol = _make_solution(best, "infeasible", it, history)
                raise InfeasibleError(
                    f"primal residual stalled at {pres:.2e} for {STALL_WINDOW} iterations", sol
                )

        # Nesterov-Todd scaling
        Ls, Rs, G, Ginv, V = [], [], [], [], []
        ok = True
        for k in range(len(C)):
            lx, ls = _chol(X[k]), _chol(S[k])
            if lx is None or ls is None:
                ok = False
                break
            u, sv, vt = np.linalg.svd(ls.T @ lx)
            g = lx @ vt.T / np.sqrt(sv)
            Ls.append(lx)
            Rs.append(ls)
            G.append(g)
            Ginv.append(np.linalg.inv(g))
            V.append(sv)
        if not ok:
            break
        W = [g @ g.T for g in G]

        # Schur complement M_ij = <A_i, W A_j W>
        M = np.zeros((m, m))
        WAW = []
        for k in range(len(C)):
            waw = W[k] @ p.A[k] @ W[k]
            WAW.append(waw)
            M += Af[k] @ waw.reshape(m, -1).T
        M = _sym(M)
        try:
            cf = sla.cho_factor(M)
            msolve = lambda r: sla.cho_solve(cf, r)  # noqa: E731
        except (np.linalg.LinAlgError, ValueError):
            Mr = M + 1e-14 * np.trace(M) / max(m, 1) * np.eye(m)
            msolve = lambda r: np.linalg.lstsq(Mr, r, rcond=None)[0]  # noqa: E731

        WRdW = [W[k] @ Rd[k] @ W[k] for k in range(len(C))]
        ARdW = p.op(WRdW)

        def direction(rhs_scaled):
            # rhs_scaled: per block, the right-hand side R in L_V(dX' + dS') = R
            Rc = []
            for k in range(len(C)):
                v = V[k]
                T = 2.0 * rhs_scaled[k] / (v[:, None] + v[None, :])
                Rc.append(G[k] @ T @ G[k].T)
            dy = msolve(Rp - p.op(Rc) + ARdW)
            Atdy = p.adj(dy)
            dS = [_sym(Rd[k] - Atdy[k]) for k in range(len(C))]
            dX = [_sym(Rc[k] - W[k] @ dS[k] @ W[k]) for k in range(len(C))]
            return dX, dy, dS

        # predictor
        rhs = [-np.diag(v**2) for v in V]
        dX, dy, dS = direction(rhs)
        ap = min(1.0, _max_step(Ls, dX))
        ad = min(1.0, _max_step(Rs, dS))
        mu_aff = _inner([X[k] + ap * dX[k] for k in range(len(C))], [S[k] + ad * dS[k] for k in range(len(C))]) / ntot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        rhs = []
        for k in range(len(C)):
            dxs = Ginv[k] @ dX[k] @ Ginv[k].T
            dss = G[k].T @ dS[k] @ G[k]
            cross = 0.5 * (dxs @ dss + dss @ dxs)
            rhs.append(sigma * mu * np.eye(sizes[k]) - np.diag(V[k] ** 2) - cross)
        dX, dy, dS = direction(rhs)
        tau = 0.98 if it > 1 else 0.9
        ap = min(1.0, tau * _max_step(Ls, dX))
        ad = min(1.0, tau * _max_step(Rs, dS))
        if ap < 1e-12 and ad < 1e-12:
            break
        X = [_sym(X[k] + ap * dX[k]) for k in range(len(C))]
        S = [_sym(S[k] + ad * dS[k]) for k in range(len(C))]
        y = y + ad * dy

    if status != "optimal":
        sol = _make_solution(best, "max-iter", it, history)
        if raise_on_failure:
            raise MaxIterationsError(
                f"no solution within tolerance {tol:g} after {it} iterations (best gap {sol.gap:.2e})", sol
            )
        return sol
    return _make_solution(
        ([x.copy() for x in X], y.copy(), [s.copy() for s in S], pobj, dobj, gap, pres, dres),
        "optimal",
        it,
        history,
    )


def _make_solution(state, status, it, history):
    X, y, S, pobj, dobj, gap, pres, dres = state
    return SdpSolution(pobj, dobj, gap, X, y, S, status, it, pres, dres, history)
