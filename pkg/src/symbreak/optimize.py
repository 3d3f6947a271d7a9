"""Multi-start gradient descent, Newton polishing and critical-point classification."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from .loss import LossProblem, hess, loss, loss_and_grad

STEP_POLICIES = ("backtracking", "fixed")


class NotCriticalError(ValueError):
    """classify() was called at a point whose gradient is not small."""


@dataclass(frozen=True)
class GDConfig:
    step: str = "backtracking"
    eta: float = 0.5
    beta: float = 0.5
    c1: float = 1e-4
    max_iter: int = 500_000
    eps_g: float = 1e-10
    seed: int = 0
    # survey post-processing
    polish: bool = True
    symmetrize: bool = True
    dedup_tol: float = 1e-6
    iso_tol: float = 1e-6
    eps_h: float = 1e-6

    def __post_init__(self) -> None:
        if self.step not in STEP_POLICIES:
            raise ValueError(f"step must be one of {STEP_POLICIES}")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.c1 < 0.5:
            raise ValueError("c1 must lie in (0, 1/2)")
        if not self.eps_g > 0 or self.max_iter < 0:
            raise ValueError("need eps_g > 0 and max_iter >= 0")


@dataclass
class CriticalPointRecord:
    W: np.ndarray = field(repr=False)
    loss: float
    grad_norm: float
    status: str
    seed: int | None = None
    iterations: int = 0
    min_eig: float | None = None
    max_eig: float | None = None
    isotropy: str | None = None
    hits: int = 1

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "status": self.status,
                "loss": self.loss,
                "grad_norm": self.grad_norm,
                "min_eig": self.min_eig,
                "max_eig": self.max_eig,
                "isotropy": self.isotropy,
                "iterations": self.iterations,
                "hits": self.hits,
                "matrix": np.asarray(self.W).tolist(),
            }
        )

    @classmethod
    def from_json(cls, line: str) -> CriticalPointRecord:
        obj = json.loads(line)
        return cls(
            W=np.array(obj["matrix"], dtype=float),
            loss=obj["loss"],
            grad_norm=obj["grad_norm"],
            status=obj["status"],
            seed=obj["seed"],
            iterations=obj["iterations"],
            min_eig=obj["min_eig"],
            max_eig=obj["max_eig"],
            isotropy=obj["isotropy"],
            hits=obj.get("hits", 1),
        )


def xavier_init(k: int, d: int, seed: int) -> np.ndarray:
    """Entries i.i.d. N(0, 1/d): PCG64 uniforms pushed through Box-Muller."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = k * d
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)  # (0, 1], keeps the log finite
    u2 = rng.random(m)
    rad = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([rad * np.cos(2 * np.pi * u2), rad * np.sin(2 * np.pi * u2)])[:n]
    return (z / np.sqrt(d)).reshape(k, d)


def gd_run(problem: LossProblem, W0, config: GDConfig = GDConfig(), *, record_history: bool = False):
    """Gradient descent from ``W0``.

    Returns a record; with ``record_history`` returns ``(record, losses)``.
    """
    W0 = problem.check(W0)
    if not np.all(np.isfinite(W0)):
        raise ValueError("W0 must be finite")
    kind = problem.kernel
    W, L, gn, it, code, hist = backend.get().gd_loop(
        kind.code,
        kind.r,
        W0,
        problem.V,
        problem.c,
        config.step == "backtracking",
        config.eta,
        config.beta,
        config.c1,
        config.max_iter,
        config.eps_g,
        record_history,
    )
    rec = CriticalPointRecord(
        W=np.asarray(W), loss=float(L), grad_norm=float(gn), status=backend.STATUS[code],
        seed=config.seed, iterations=int(it),
    )
    return (rec, np.asarray(hist)) if record_history else rec


def polish_newton(
    problem: LossProblem, W, tol: float = 1e-10, max_iter: int = 200, seed: int | None = None
) -> CriticalPointRecord:
    """Levenberg-Marquardt on the system grad L(W) = 0.

    The step solves (H^2 + lam I) dx = -H g, which is a Newton step for small
    ``lam`` and a short gradient-like step on 1/2 |g|^2 for large ``lam``.
    Steps that do not reduce |g| are rejected and the damping raised.
    """
    W = problem.check(W).copy()
    shape = W.shape
    L, G = loss_and_grad(problem, W)
    gn = float(np.linalg.norm(G))
    lam = 1e-8
    it = 0
    while gn > tol and it < max_iter:
        H = hess(problem, W)
        H2 = H @ H
        scale = max(1.0, float(np.max(np.abs(np.diag(H2)))))
        g = G.ravel()
        rhs = -(H @ g)
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(H2 + lam * scale * np.eye(H.shape[0]), rhs)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            Wt = W + step.reshape(shape)
            Lt, Gt = loss_and_grad(problem, Wt)
            gnt = float(np.linalg.norm(Gt))
            if np.isfinite(gnt) and gnt < gn:
                W, L, G, gn = Wt, Lt, Gt, gnt
                lam = max(lam / 10.0, 1e-16)
                accepted = True
                break
            lam *= 10.0
        it += 1
        if not accepted:
            break
    status = "converged" if gn <= tol else "not_converged"
    return CriticalPointRecord(W=W, loss=float(L), grad_norm=gn, status=status, seed=seed, iterations=it)


def classify(problem: LossProblem, W, eps_h: float = 1e-6, eps_g: float = 1e-8) -> dict:
    """Second-order test: min_eig >= -eps_h * max(1, max_eig)."""
    _, G = loss_and_grad(problem, W)
    gn = float(np.linalg.norm(G))
    if gn > eps_g:
        raise NotCriticalError(f"gradient norm {gn:.3g} exceeds {eps_g:.3g}")
    ev = np.linalg.eigvalsh(hess(problem, W))
    lo, hi = float(ev[0]), float(ev[-1])
    return {"is_second_order_min": lo >= -eps_h * max(1.0, hi), "min_eig": lo, "max_eig": hi}


def refine_symmetric(
    problem: LossProblem,
    W,
    eps_g: float = 1e-10,
    eps_h: float = 1e-6,
    ladder: tuple[float, ...] = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2),
) -> tuple[np.ndarray, float]:
    """Move a converged minimum onto the most symmetric nearby critical point.

    Minima of these problems often sit on flat families, so GD stops at an
    arbitrary member.  For each tolerance on the ladder the isotropy group is
    detected at that tolerance, ``W`` is averaged over it and re-polished.
    The candidate is kept only when it is again a second-order point at the
    same loss, is exactly fixed by the detected group at the finest
    tolerance and lies within 5*tol of the input.  Returns the accepted
    matrix and the tolerance used (0.0 when nothing was accepted).
    """
    from .symmetry import isotropy_group, orbit_average

    W = problem.check(W)
    L0 = loss(problem, W)
    best, used = W, 0.0
    for tol in ladder:
        group = isotropy_group(W, tol)
        if group.order <= isotropy_group(best, ladder[0]).order:
            continue
        cand = orbit_average(W, group)
        rec = polish_newton(problem, cand, tol=eps_g)
        if not rec.converged or abs(rec.loss - L0) > max(1e-9, 1e-9 * abs(L0)):
            continue
        if np.max(np.abs(rec.W - W)) > 5 * tol:
            continue
        if isotropy_group(rec.W, ladder[0]).order != group.order:
            continue
        try:
            if not classify(problem, rec.W, eps_h, eps_g=max(eps_g, 1e-8))["is_second_order_min"]:
                continue
        except NotCriticalError:
            continue
        best, used = rec.W, tol
    return best, used


def _threads(default: int | None = None) -> int:
    env = os.environ.get("SYMBREAK_THREADS")
    if env:
        return max(1, int(env))
    return default or (os.cpu_count() or 1)


def _one_start(problem: LossProblem, k: int, seed: int, config: GDConfig, label: bool) -> CriticalPointRecord:
    cfg = replace(config, seed=seed)
    W0 = xavier_init(k, problem.d, seed)
    rec = gd_run(problem, W0, cfg)
    if rec.status in ("max_iter", "stalled") and config.polish:
        pol = polish_newton(problem, rec.W, tol=config.eps_g, seed=seed)
        pol.iterations += rec.iterations
        if pol.converged:
            rec = pol
    rec.seed = seed
    if not rec.converged:
        return rec
    info = classify(problem, rec.W, config.eps_h, eps_g=config.eps_g)
    if config.symmetrize and info["is_second_order_min"]:
        W, used = refine_symmetric(problem, rec.W, config.eps_g, config.eps_h)
        if used:
            L, G = loss_and_grad(problem, W)
            rec.W, rec.loss, rec.grad_norm = W, float(L), float(np.linalg.norm(G))
            info = classify(problem, rec.W, config.eps_h, eps_g=config.eps_g)
    rec.min_eig, rec.max_eig = info["min_eig"], info["max_eig"]
    if label:
        from .symmetry import label_matrix

        rec.isotropy = label_matrix(rec.W, config.iso_tol)
    return rec


def survey(
    problem: LossProblem,
    n_starts: int,
    config: GDConfig = GDConfig(),
    k: int | None = None,
    *,
    workers: int | None = None,
    label: bool = True,
) -> list[CriticalPointRecord]:
    """Run ``n_starts`` seeded descents (seeds config.seed, config.seed+1, ...).

    Records whose canonically aligned matrices agree to ``config.dedup_tol``
    are merged (the survivor counts them in ``hits``).  Output is sorted by
    (loss, seed) independently of worker scheduling.
    """
    from .symmetry import canonical_align

    k = problem.V.shape[0] if k is None else k
    seeds = [config.seed + i for i in range(n_starts)]
    nw = min(_threads(workers), max(1, n_starts))
    if nw == 1:
        records = [_one_start(problem, k, s, config, label) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            records = list(pool.map(lambda s: _one_start(problem, k, s, config, label), seeds))
    records.sort(key=lambda r: (np.nan_to_num(r.loss, nan=np.inf), r.seed))
    kept: list[tuple[CriticalPointRecord, np.ndarray]] = []
    for rec in records:
        if not np.all(np.isfinite(rec.W)):
            kept.append((rec, rec.W))
            continue
        canon = canonical_align(rec.W, config.iso_tol)[1]
        for other, other_canon in kept:
            if (
                other.status == rec.status
                and other_canon.shape == canon.shape
                and np.max(np.abs(other_canon - canon)) <= config.dedup_tol
            ):
                other.hits += 1
                break
        else:
            kept.append((rec, canon))
    return [rec for rec, _ in kept]
