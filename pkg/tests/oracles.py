"""Reference implementations that avoid the package code paths.

They use scipy matrix functions, Sylvester solves, explicit loops and (when
installed) cvxpy, and only handle the full-rank or otherwise easy cases.
"""

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar


def herm(a):
    return 0.5 * (a + a.conj().T)


def fpow(a, p):
    return herm(sla.fractional_matrix_power(herm(a), p))


def ptrace_loop(m, dA, dB, keep):
    """Partial trace by explicit index loops."""
    out = np.zeros((dA, dA) if keep == 0 else (dB, dB), dtype=complex)
    for i in range(dA):
        for j in range(dA):
            for k in range(dB):
                for l in range(dB):
                    v = m[i * dB + k, j * dB + l]
                    if keep == 0 and k == l:
                        out[i, j] += v
                    if keep == 1 and i == j:
                        out[k, l] += v
    return out


def choi_loop(kraus):
    """``sum_ij |i><j| (x) N(|i><j|)`` built entry by entry."""
    d_in = kraus[0].shape[1]
    d_out = kraus[0].shape[0]
    g = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in))
            e[i, j] = 1
            block = sum(k @ e @ k.conj().T for k in kraus)
            g[i * d_out : (i + 1) * d_out, j * d_out : (j + 1) * d_out] = block
    return g


def sld_lyapunov(rho, drho):
    """``Tr[rho L^2]`` with ``rho L + L rho = 2 drho`` (full-rank ``rho``)."""
    L = sla.solve_sylvester(rho, rho, 2 * drho)
    return float(np.real(np.trace(rho @ L @ L)))


def rld_inverse(rho, drho):
    return float(np.real(np.trace(drho @ np.linalg.inv(rho) @ drho)))


def geometric_mean(x, y, alpha):
    xh = fpow(x, 0.5)
    xm = np.linalg.inv(xh)
    return herm(xh @ fpow(xm @ y @ xm, alpha) @ xh)


def geometric_renyi(rho, sigma, alpha):
    q = np.real(np.trace(geometric_mean(sigma, rho, alpha)))
    return float(np.log(q) / (alpha - 1))


def petz_renyi(rho, sigma, alpha):
    q = np.real(np.trace(fpow(rho, alpha) @ fpow(sigma, 1 - alpha)))
    return float(np.log(q) / (alpha - 1))


def sandwiched_renyi(rho, sigma, alpha):
    s = fpow(sigma, (1 - alpha) / (2 * alpha))
    q = np.real(np.trace(fpow(s @ rho @ s, alpha)))
    return float(np.log(q) / (alpha - 1))


def bs_entropy(rho, sigma):
    r = fpow(rho, 0.5)
    return float(np.real(np.trace(rho @ sla.logm(r @ np.linalg.inv(sigma) @ r))))


def umegaki(rho, sigma):
    return float(np.real(np.trace(rho @ (sla.logm(rho) - sla.logm(sigma)))))


def dmax(rho, sigma):
    s = fpow(sigma, -0.5)
    return float(np.log(np.max(np.linalg.eigvalsh(herm(s @ rho @ s)))))


def fidelity(rho, sigma):
    r = fpow(rho, 0.5)
    return float(np.real(np.trace(fpow(r @ sigma @ r, 0.5))) ** 2)


def classical_renyi(p, q, alpha):
    return float(np.log(np.sum(p**alpha * q ** (1 - alpha))) / (alpha - 1))


def classical_kl(p, q):
    return float(np.sum(p * np.log(p / q)))


def classical_chernoff(p, q):
    res = minimize_scalar(
        lambda a: np.log(np.sum(p**a * q ** (1 - a))), bounds=(0, 1), method="bounded", options={"xatol": 1e-12}
    )
    return float(-res.fun)


def classical_hoeffding(p, q, r):
    """``sup_{0<a<1} ((a-1) r - ln sum p^a q^(1-a)) / a`` by dense scan plus polish."""
    def h(a):
        return ((a - 1) * r - np.log(np.sum(p**a * q ** (1 - a)))) / a

    grid = np.linspace(1e-4, 1 - 1e-4, 20001)
    k = int(np.argmax([h(a) for a in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda a: -h(a), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return max(float(-res.fun), float(h(grid[k])))


def gadc_kraus_textbook(gamma, N):
    """Generalized amplitude damping Kraus operators in the usual textbook form."""
    a, b = np.sqrt(1 - N), np.sqrt(N)
    g = np.sqrt(gamma)
    h = np.sqrt(1 - gamma)
    return [
        a * np.array([[1, 0], [0, h]], dtype=complex),
        a * np.array([[0, g], [0, 0]], dtype=complex),
        b * np.array([[h, 0], [0, 1]], dtype=complex),
        b * np.array([[0, 0], [g, 0]], dtype=complex),
    ]


def rld_channel_fd(choi_fn, theta, dims, h=1e-6):
    """``|| Tr_B[dG G^-1 dG] ||_inf`` with a central-difference derivative."""
    g = choi_fn(theta)
    dg = (choi_fn(theta + h) - choi_fn(theta - h)) / (2 * h)
    t = ptrace_loop(dg @ np.linalg.inv(g) @ dg, dims[0], dims[1], 0)
    return float(np.max(np.linalg.eigvalsh(herm(t))))


# ------------------------------------------------------------------ cvxpy


def _cp():
    import cvxpy as cp

    return cp


def _ptrace_b(expr, dA, dB):
    cp = _cp()
    return cp.partial_trace(expr, [dA, dB], axis=1)


def rld_channel_cvx(g, dg, dims):
    cp = _cp()
    n = g.shape[0]
    m = cp.Variable((n, n), hermitian=True)
    lam = cp.Variable()
    cons = [
        cp.bmat([[m, dg], [dg, g]]) >> 0,
        lam * np.eye(dims[0]) - _ptrace_b(m, *dims) >> 0,
    ]
    prob = cp.Problem(cp.Minimize(lam), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def root_fidelity_channel_cvx(g1, g2, dims):
    cp = _cp()
    n = g1.shape[0]
    q = cp.Variable((n, n), complex=True)
    lam = cp.Variable()
    t = _ptrace_b(q, *dims)
    cons = [
        cp.bmat([[g1, q.H], [q, g2]]) >> 0,
        (t + t.H) / 2 - lam * np.eye(dims[0]) >> 0,
    ]
    prob = cp.Problem(cp.Maximize(lam), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def sld_state_cvx(rho, drho):
    """SLD Fisher information as ``max 2 Tr[drho L] - Tr[rho L^2]`` over Hermitian ``L``."""
    cp = _cp()
    d = rho.shape[0]
    L = cp.Variable((d, d), hermitian=True)
    r = fpow(rho, 0.5)
    obj = 2 * cp.real(cp.trace(drho @ L)) - cp.sum_squares(L @ r)
    prob = cp.Problem(cp.Maximize(obj))
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)
