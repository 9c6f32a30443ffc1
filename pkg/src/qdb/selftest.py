"""Randomized invariant suites with a deterministic report.

Every suite draws from its own generator spawned from the run seed, so a
suite's residual does not depend on which other suites ran. A residual is the
largest violation (or relative discrepancy) seen across trials; a suite
passes when it does not exceed its tolerance.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as bd
from . import divergences as dv
from . import ensembles as ens
from . import fisher as fi
from . import linalg as la
from .channels import apply_channel
from .config import Tolerances
from .sdp import programs
from .sdp.seesaw import sld_channel_seesaw

RENYI_ALPHAS = (0.3, 1.5, 2.0)
DPI_ALPHAS = (0.3, 0.7, 1.5, 2.0)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    residual: float
    tol: float
    trials: int

    @property
    def passed(self):
        return self.residual <= self.tol

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<30s} max_residual={self.residual:.3e} tol={self.tol:.1e} trials={self.trials}"


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def _rank_tol(op, tol):
    return la.rank_tolerance(np.linalg.eigvalsh(op), tol.rank)


def _sdp_state(kind):
    def run(rng, n, tol):
        worst = 0.0
        for _ in range(n):
            d = int(rng.integers(2, 5))
            rho, drho = ens.random_state_family(d, rng)(rng.uniform(0.1, 0.9))
            rt = _rank_tol(rho, tol)
            if kind == "sld":
                ref, got = fi.sld_state(rho, drho, rt).value, programs.sld_state_sdp(rho, drho, tol.sdp, rt).value
            else:
                ref, got = fi.rld_state(rho, drho, rt).value, programs.rld_state_sdp(rho, drho, tol.sdp, rt).value
            worst = max(worst, _rel(got, ref))
        return worst

    return run


def _rld_dominates(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 5))
        rho, drho = ens.random_state_family(d, rng, floor=0.0)(rng.uniform(0, 1))
        rt = _rank_tol(rho, tol)
        s, r = fi.sld_state(rho, drho, rt).value, fi.rld_state(rho, drho, rt).value
        worst = max(worst, (s - r) / max(1.0, r))
    return max(worst, 0.0)


def _renyi_ordering(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 5))
        rho, sigma = ens.random_density(d, rng), ens.random_density(d, rng)
        for a in RENYI_ALPHAS:
            s = dv.sandwiched_renyi(rho, sigma, a)
            p = dv.petz_renyi(rho, sigma, a)
            g = dv.geometric_renyi(rho, sigma, a).value
            worst = max(worst, s - p, p - g)
    return max(worst, 0.0)


def _fidelity_ordering(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 5))
        rho = ens.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        sigma = ens.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        worst = max(worst, dv.geometric_fidelity(rho, sigma) - dv.fidelity(rho, sigma))
    return max(worst, 0.0)


def _dpi_fisher(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 4))
        rho, drho = ens.random_state_family(d, rng)(rng.uniform(0, 1))
        c = ens.random_channel(d, int(rng.integers(2, 4)), rng)
        out, dout = apply_channel(c, rho), apply_channel(c, drho)
        for fn in (fi.sld_state, fi.rld_state):
            before, after = fn(rho, drho).value, fn(out, dout).value
            worst = max(worst, (after - before) / max(1.0, before))
    return max(worst, 0.0)


def _dpi_geometric(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 4))
        rho, sigma = ens.random_density(d, rng), ens.random_density(d, rng)
        c = ens.random_channel(d, int(rng.integers(2, 4)), rng)
        ro, so = apply_channel(c, rho), apply_channel(c, sigma)
        for a in DPI_ALPHAS:
            before = dv.geometric_renyi(rho, sigma, a).value
            after = dv.geometric_renyi(ro, so, a).value
            worst = max(worst, (after - before) / max(1.0, before))
    return max(worst, 0.0)


def _gadc_closed(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        fam, theta, pr = ens.random_gadc_family(rng)
        ref = bd.gadc_closed_form(pr["param"], pr["gamma"], pr["N"])
        worst = max(worst, _rel(fi.rld_channel(fam, theta).value, ref))
    return worst


def _channel_rld_sdp(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        fam, theta, _ = ens.random_gadc_family(rng)
        ref = fi.rld_channel(fam, theta).value
        got = programs.rld_channel_sdp(fam, theta, tol=tol.sdp).value
        worst = max(worst, _rel(got, ref))
    return worst


def _chernoff_order(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        cN, _ = ens.random_gadc(rng)
        cM, _ = ens.random_gadc(rng)
        worst = max(worst, bd.chernoff_lower(cN, cM, grid=8, refine=1) - bd.geometric_chernoff_upper(cN, cM))
    return max(worst, 0.0)


def _seesaw_below_rld(rng, n, tol):
    worst = 0.0
    for _ in range(n):
        fam, theta, _ = ens.random_gadc_family(rng)
        s = sld_channel_seesaw(fam, theta, iters=200).lower_bound
        r = fi.rld_channel(fam, theta).value
        worst = max(worst, (s - r) / max(1.0, r))
    return max(worst, 0.0)


# name, runner, tolerance field or fixed slack, trials divisor
SUITES = (
    ("sld-sdp-vs-spectral", _sdp_state("sld"), "consistency", 5),
    ("rld-sdp-vs-spectral", _sdp_state("rld"), "consistency", 5),
    ("rld-dominates-sld", _rld_dominates, 1e-9, 1),
    ("renyi-ordering", _renyi_ordering, 1e-9, 1),
    ("geometric-fidelity-ordering", _fidelity_ordering, 1e-9, 1),
    ("data-processing-fisher", _dpi_fisher, 1e-7, 1),
    ("data-processing-geometric", _dpi_geometric, 1e-7, 1),
    ("gadc-closed-form", _gadc_closed, "consistency", 1),
    ("rld-channel-sdp-vs-spectral", _channel_rld_sdp, "consistency", 10),
    ("chernoff-ordering", _chernoff_order, 1e-6, 20),
    ("seesaw-below-rld", _seesaw_below_rld, 1e-6, 10),
)


def run(seed=0, trials=50, tol=None, only=None):
    """Run every suite (or those named in ``only``) and return their results in a fixed order."""
    tol = tol or Tolerances()
    children = np.random.SeedSequence(seed).spawn(len(SUITES))
    results = []
    for (name, fn, slack, div), ss in zip(SUITES, children):
        if only and name not in only:
            continue
        n = max(1, math.ceil(trials / div))
        limit = getattr(tol, slack) if isinstance(slack, str) else slack
        residual = float(fn(np.random.default_rng(ss), n, tol))
        results.append(SuiteResult(name, residual, limit, n))
    return results


def report(results, seed, trials):
    lines = [f"qdb selftest seed={seed} trials={trials}"]
    lines += [r.line() for r in results]
    failed = [r.name for r in results if not r.passed]
    lines.append("all invariants hold" if not failed else "failing: " + ", ".join(failed))
    return "\n".join(lines) + "\n"


__all__ = ["SuiteResult", "SUITES", "run", "report"]
