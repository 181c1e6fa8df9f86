"""Small dense reference solver for the l1-regularized masked fit.

Iterative shrinkage-thresholding (ISTA) on the explicit complex system

    minimize  1/K * |P * (psi @ X) - Y|^2 + mu/2 * (|Re X|_1 + |Im X|_1)

with ``Y = y + 0j``. It builds the full basis matrix, so it is meant for
``N <= 256`` only. It shares no code path with the blocked trainer, which is
what makes it useful as a cross-check.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError

__all__ = ["OracleResult", "dual_bound", "ista_solve", "operator_norm_sq", "soft_threshold", "zero_threshold"]

MAX_ORACLE_N = 256


@dataclass(frozen=True)
class OracleResult:
    x_real: np.ndarray
    x_imag: np.ndarray
    objective: float
    iterations: int
    converged: bool = True
    history: tuple = ()


def soft_threshold(v, level):
    return np.sign(v) * np.maximum(np.abs(v) - level, 0.0)


def _dense_basis(problem):
    n = problem.n
    if problem.basis.kind == "identity":
        return np.eye(n, dtype=complex)
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n)


def operator_norm_sq(psi, p, iters=200, seed=0):
    """Largest squared singular value of ``X -> P * (psi @ X)`` (power iteration)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((psi.shape[1], p.shape[1])) + 0j
    lam = 0.0
    for _ in range(iters):
        z = psi.conj().T @ (p * (psi @ x))
        lam_new = np.linalg.norm(z) / np.linalg.norm(x)
        x = z / np.linalg.norm(z)
        if abs(lam_new - lam) <= 1e-12 * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return float(lam)


def _objective_from(resid, x, mu, k):
    l1 = np.abs(x.real).sum() + np.abs(x.imag).sum()
    return float(np.sum(resid.real**2 + resid.imag**2) / k + 0.5 * mu * l1)


def zero_threshold(problem):
    """Smallest ``mu`` for which ``X = 0`` is a fixed point of the ISTA map."""
    psi = _dense_basis(problem)
    g = (2.0 / problem.k) * (psi.conj().T @ (problem.mask.bits * problem.y))
    return float(2.0 * max(np.abs(g.real).max(), np.abs(g.imag).max()))


def dual_bound(problem, x_real, x_imag):
    """Lower bound on the optimal objective from a candidate solution.

    The Lagrange dual of ``min 1/K |r|^2 + lam*|x|_1`` with ``r = P*(psi@X) - Y``
    and ``lam = mu/2`` is ``max -K/4 |nu|^2 - Re<nu, Y>`` subject to
    ``|Re psi^H P nu|, |Im psi^H P nu| <= lam`` elementwise. Scaling the
    candidate's residual into the feasible set gives a bound that is tight at
    the optimum, so ``objective - dual_bound`` certifies suboptimality.
    """
    k = problem.k
    if problem.n > MAX_ORACLE_N:
        raise ParameterError(f"oracle is dense; N={problem.n} exceeds {MAX_ORACLE_N}")
    psi = _dense_basis(problem)
    p = problem.mask.bits
    y = problem.y + 0j
    resid = p * (psi @ (np.asarray(x_real) + 1j * np.asarray(x_imag))) - y
    nu = (2.0 / k) * resid
    corr = psi.conj().T @ (p * nu)
    worst = max(np.abs(corr.real).max(), np.abs(corr.imag).max())
    lam = 0.5 * problem.mu
    if worst > lam:
        nu = nu * (lam / worst)
    return float(-0.25 * k * np.sum(np.abs(nu) ** 2) - np.sum((nu.conj() * y).real))


def ista_solve(problem, step=None, max_iter=20000, tol=1e-13, x0=None):
    """Run ISTA until the objective decrease falls below ``tol`` (relative).

    Parameters
    ----------
    problem : ReconstructionProblem
    step : float, optional
        Gradient step. Defaults to ``1/L`` with ``L = 2*sigma_max^2/K``, the
        Lipschitz constant of the smooth part.
    max_iter : int
    tol : float
        Stop once ``f_prev - f <= tol * max(1, |f|)``.
    x0 : complex ndarray, optional
        Starting coefficients (zero by default).

    Returns
    -------
    OracleResult
        ``converged`` is False (and a warning is issued) when ``max_iter``
        is exhausted; the best iterate is returned. ``history`` holds the
        objective at the start and after every iteration.
    """
    n, k = problem.n, problem.k
    if n > MAX_ORACLE_N:
        raise ParameterError(f"oracle is dense; N={n} exceeds {MAX_ORACLE_N}")
    psi = _dense_basis(problem)
    p = problem.mask.bits
    y = problem.y + 0j
    lip = 2.0 * operator_norm_sq(psi, p) / k
    if step is None:
        step = 1.0 / lip
    elif step <= 0 or step > 1.0 / lip * (1 + 1e-9):
        raise ParameterError(f"step must be in (0, 1/L]; 1/L = {1.0 / lip:.6g}")
    thresh = step * 0.5 * problem.mu

    x = np.zeros((n, k), complex) if x0 is None else np.array(x0, dtype=complex)
    psi_h = psi.conj().T
    # y vanishes off the mask, so the residual is already masked
    resid = p * (psi @ x) - y
    f = _objective_from(resid, x, mu=problem.mu, k=k)
    best_x, best_f = x, f
    history = [f]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = x - step * (2.0 / k) * (psi_h @ resid)
        x = soft_threshold(w.real, thresh) + 1j * soft_threshold(w.imag, thresh)
        resid = p * (psi @ x) - y
        f_new = _objective_from(resid, x, mu=problem.mu, k=k)
        history.append(f_new)
        if f_new < best_f:
            best_x, best_f = x, f_new
        if f - f_new <= tol * max(1.0, abs(f_new)):
            converged = True
            break
        f = f_new
    if not converged:
        warnings.warn(f"ISTA did not converge in {max_iter} iterations", RuntimeWarning, stacklevel=2)
    return OracleResult(best_x.real.copy(), best_x.imag.copy(), best_f, it, converged, tuple(history))
