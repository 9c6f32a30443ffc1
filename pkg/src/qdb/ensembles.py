"""Random states, channels and parameterized families for property checks."""

import numpy as np
from scipy.stats import unitary_group

from . import linalg as la
from .channels import GADC_PARAMS, choi_from_kraus, gadc_choi, gadc_family


def rng_from(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(d, rng):
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1), dtype=complex)


def random_hermitian(d, rng, scale=1.0):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * la.hermitian_part(g)


def random_traceless(d, rng):
    h = random_hermitian(d, rng)
    return h - np.trace(h).real / d * np.eye(d)


def random_density(d, rng, rank=None, floor=0.0):
    """Ginibre state of the given rank, mixed with ``floor * I/d``."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ la.dagger(g)
    rho /= np.trace(rho).real
    if floor:
        rho = (1 - floor) * rho + floor * np.eye(d) / d
    return la.hermitian_part(rho)


def random_state_family(d, rng, floor=0.05):
    """Full-rank family ``theta -> U_theta ((1-theta) A + theta B) U_theta^dag`` on ``[0, 1]``.

    Returns ``theta -> (rho, drho)`` with the analytic derivative.
    """
    a = random_density(d, rng, floor=floor)
    b = random_density(d, rng, floor=floor)
    h = random_hermitian(d, rng, 0.5)
    w, v = np.linalg.eigh(h)

    def fam(theta):
        u = (v * np.exp(-1j * theta * w)) @ la.dagger(v)
        inner = (1 - theta) * a + theta * b
        rho = u @ inner @ la.dagger(u)
        drho = -1j * (h @ rho - rho @ h) + u @ (b - a) @ la.dagger(u)
        return la.hermitian_part(rho), la.hermitian_part(drho)

    return fam


def random_kraus(d_in, d_out, rng, n_kraus=None):
    """Kraus operators cut from a Haar random isometry."""
    n_kraus = n_kraus or d_in * d_out
    u = random_unitary(d_out * n_kraus, rng)[:, :d_in]
    return [u[k * d_out : (k + 1) * d_out] for k in range(n_kraus)]


def random_channel(d_in, d_out, rng, n_kraus=None):
    return choi_from_kraus(random_kraus(d_in, d_out, rng, n_kraus))


def random_gadc(rng, lo=0.05, hi=0.95):
    gamma, N = rng.uniform(lo, hi, size=2)
    return gadc_choi(gamma, N), (float(gamma), float(N))


def random_gadc_family(rng, param=None, lo=0.05, hi=0.95):
    """Random GADC family, an interior parameter value and the full parameter set.

    Returns:
        ``(family, theta, params)`` with ``params`` holding ``param``,
        ``gamma``, ``N`` and ``phi`` at the point ``theta``.
    """
    param = param or GADC_PARAMS[rng.integers(len(GADC_PARAMS))]
    gamma, N, phi = (float(v) for v in (rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(-1, 1)))
    params = {"param": param, "gamma": gamma, "N": N, "phi": phi}
    if param == "loss":
        return gadc_family("loss", N=N, phi=phi), gamma, params
    if param == "noise":
        return gadc_family("noise", gamma=gamma, phi=phi), N, params
    return gadc_family("phase", gamma=gamma, N=N), phi, params


__all__ = [
    "rng_from",
    "random_unitary",
    "random_hermitian",
    "random_traceless",
    "random_density",
    "random_state_family",
    "random_kraus",
    "random_channel",
    "random_gadc",
    "random_gadc_family",
]
