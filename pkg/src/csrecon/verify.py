"""Fast self-checks of the numerical invariants, runnable without pytest."""

import numpy as np

from .basis import BasisSpec, basis_block, basis_rows, synthesize
from .numerics import AdamConfig, AdamState, adam_step
from .oracle import ista_solve
from .reconstructor import (
    CoefficientState,
    ReconstructionProblem,
    ScheduleSegment,
    TrainingSchedule,
    batch_gradients,
    batch_loss,
    forward_batch,
    objective,
    train,
)
from .sampling import apply_mask, generate_mask


def _rand_problem(rng, n, k, ratio, mu, seed=0):
    mask = generate_mask(n, k, ratio, seed)
    return ReconstructionProblem.from_signal(rng.standard_normal((n, k)), mask, BasisSpec(n), mu)


def check_adam():
    p = np.array([[1.0, -2.0]])
    g = np.array([[2.0, -0.5]])
    cfg = AdamConfig(learning_rate=0.1)
    same, _ = adam_step(p, np.zeros_like(p), AdamState.zeros(p.shape), cfg)
    new, _ = adam_step(p, g, AdamState.zeros(p.shape), cfg)
    expect = p - 0.1 * g / (np.abs(g) + 1e-8)
    err = float(np.abs(new - expect).max())
    return bool(np.array_equal(same, p) and err < 1e-12), f"first-step error {err:.2e}"


def check_basis():
    n = 16
    psi = BasisSpec(n).dense()
    mirror = psi[:, (-np.arange(n)) % n]
    sym = float(np.abs(psi - mirror.conj()).max())
    orth = float(np.abs(psi.conj().T @ psi / n - np.eye(n)).max())
    return sym < 1e-12 and orth < 1e-9, f"symmetry {sym:.1e}, orthogonality {orth:.1e}"


def check_blockwise():
    rng = np.random.default_rng(1)
    spec = BasisSpec(32)
    xr, xi = rng.standard_normal((32, 3)), rng.standard_normal((32, 3))
    ref = synthesize(spec, xr, xi, 32)
    worst = 0.0
    for b in (1, 3, 5, 7, 32):
        out = synthesize(spec, xr, xi, b)
        worst = max(worst, float(np.abs(out[0] - ref[0]).max()), float(np.abs(out[1] - ref[1]).max()))
    return worst < 1e-12, f"max deviation {worst:.1e}"


def check_mask():
    a = generate_mask(200, 3, 0.3, 42)
    b = generate_mask(200, 3, 0.3, 42)
    u = np.random.default_rng(0).standard_normal((200, 3))
    once = apply_mask(a, u)
    ok = np.array_equal(a.bits, b.bits) and np.array_equal(apply_mask(a, once), once)
    return bool(ok), "deterministic and idempotent" if ok else "mask mismatch"


def check_gradient():
    rng = np.random.default_rng(2)
    prob = _rand_problem(rng, 16, 2, 0.6, 0.0)
    state = CoefficientState(rng.standard_normal((16, 2)), rng.standard_normal((16, 2)))
    seg = ScheduleSegment(1, 1e-3, 3.0, 2.0, 5)
    rows = np.array([3, 7, 1, 12, 9])
    block = basis_rows(prob.basis, rows)
    y_rows = prob.y[rows]

    def loss(s):
        yr, yi = forward_batch(s, block, prob.mask)
        return batch_loss(yr, yi, y_rows, s, seg, 0.0, 5, 16).total

    gr, gi = batch_gradients(state, block, prob.mask, y_rows, seg, 0.0, 5, 16)
    h = 1e-6
    worst = 0.0
    for part, g in (("x_real", gr), ("x_imag", gi)):
        for idx in np.ndindex(16, 2):
            plus = {f: getattr(state, f).copy() for f in ("x_real", "x_imag")}
            minus = {f: getattr(state, f).copy() for f in ("x_real", "x_imag")}
            plus[part][idx] += h
            minus[part][idx] -= h
            fd = (loss(CoefficientState(**plus)) - loss(CoefficientState(**minus))) / (2 * h)
            worst = max(worst, abs(fd - g[idx]) / max(abs(fd), abs(g[idx]), 1e-8))
    return worst < 1e-5, f"max relative error {worst:.1e}"


def check_epoch_sum():
    rng = np.random.default_rng(3)
    prob = _rand_problem(rng, 24, 2, 0.5, 0.1)
    state = CoefficientState(rng.standard_normal((24, 2)), rng.standard_normal((24, 2)))
    seg = ScheduleSegment(1, 1e-3, 4.0, 2.0, 7)
    total = 0.0
    perm = rng.permutation(24)
    for s in range(0, 24, 7):
        rows = perm[s : s + 7]
        block = basis_rows(prob.basis, rows)
        yr, yi = forward_batch(state, block, prob.mask)
        total += batch_loss(yr, yi, prob.y[rows], state, seg, prob.mu, len(rows), 24).total
    full = objective(prob, state, 4.0, 2.0)
    rel = abs(total - full) / abs(full)
    return rel < 1e-9, f"relative gap {rel:.1e}"


def check_oracle_agreement():
    n = 16
    t = np.arange(n) / n
    u = np.column_stack([np.cos(2 * np.pi * 3 * t + 0.4)])
    prob = ReconstructionProblem.from_signal(u, generate_mask(n, 1, 0.6, 5), BasisSpec(n), 1e-2)
    ref = ista_solve(prob, max_iter=50000, tol=1e-14)
    sched = TrainingSchedule(
        tuple(ScheduleSegment(e, lr, 1.0, 1.0, n) for e, lr in ((3000, 1e-2), (1500, 1e-3), (1000, 1e-4)))
    )
    state, _ = train(prob, sched, seed=0)
    rel = abs(objective(prob, state) - ref.objective) / ref.objective
    return rel < 0.01, f"objective gap {rel:.1e}"


CHECKS = (
    ("adam update", check_adam),
    ("basis symmetry/orthogonality", check_basis),
    ("blockwise synthesis", check_blockwise),
    ("mask determinism/idempotence", check_mask),
    ("gradient vs finite differences", check_gradient),
    ("epoch loss decomposition", check_epoch_sum),
    ("trainer vs ISTA objective", check_oracle_agreement),
)


def run_checks(out=print):
    """Run every check, report one line each, return True iff all pass."""
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= bool(ok)
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok_all
