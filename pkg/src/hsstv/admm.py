"""ADMM engine for the constrained restoration problems.

The denoising splitting is ``G(u, s) = (L u, Phi u + s, s, u)`` with
``g = ||.||_{1,p} + iota_{B2} + iota_{B1} + iota_box``. The CS splitting
moves the sampling into the l2-ball term, ``G u = (L u, u, u)`` with
``g = ||.||_{1,p} + iota_{B2} o Phi + iota_box``, which keeps the u-step
system ``L^T L + 2 I`` diagonalizable by the 3-D FFT.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linops import cg_solve, solve_regularized_normal
from .problems import RestorationProblem, constraint_slacks
from .prox import project_box, project_l1_ball, project_l2_ball, prox_l2ball_after_sampling

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Hard failure inside an ADMM iteration."""


@dataclass(frozen=True)
class SolverConfig:
    gamma: float = 0.05
    max_iter: int = 10000
    stop_tol: float = 0.01
    cg_tol: float = 1e-8
    cg_max_iter: int = 1000

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not self.stop_tol > 0:
            raise ValueError(f"stop_tol must be positive, got {self.stop_tol}")


@dataclass
class AdmmState:
    """Primal iterates, split variables and scaled duals of one ADMM run."""

    u: np.ndarray
    s: Optional[np.ndarray]
    z: list
    d: list
    iteration: int = 0
    u_change: float = float("inf")
    primal_residual: float = float("inf")
    cg_failures: int = 0
    history: list = field(default_factory=list)


@dataclass
class SolveReport:
    iterations: int
    converged: bool
    u_change: float
    primal_residual: float
    initial_primal_residual: float
    slacks: dict
    wall_time: float
    cg_failures: int = 0
    history: list = field(default_factory=list, repr=False)
    state: Optional[AdmmState] = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "u_change": self.u_change,
            "primal_residual": self.primal_residual,
            "initial_primal_residual": self.initial_primal_residual,
            "slacks": dict(self.slacks),
            "wall_time": self.wall_time,
            "cg_failures": self.cg_failures,
        }


def block_sizes(problem: RestorationProblem) -> list[int]:
    nb, m = problem.dims.nb, problem.m
    if problem.kind == "denoise":
        return [problem.recipe.size, m, m, nb]
    return [problem.recipe.size, nb, nb]


def initial_state(problem: RestorationProblem) -> AdmmState:
    """All-zero primal, split and dual variables."""
    sizes = block_sizes(problem)
    s = np.zeros(problem.m) if problem.kind == "denoise" else None
    return AdmmState(
        u=np.zeros(problem.dims.nb),
        s=s,
        z=[np.zeros(k) for k in sizes],
        d=[np.zeros(k) for k in sizes],
    )


def _solve_u(problem: RestorationProblem, c_phi: float, c_id: float, rhs, x0, config):
    """Solve ``(L^T L + c_phi Phi^T Phi + c_id I) u = rhs`` on the configured path."""
    op = problem.recipe.operator
    if problem.path == "fft" and (problem.mask is None or problem.mask.is_full or c_phi == 0):
        return solve_regularized_normal(rhs, problem.symbol, c_phi + c_id), True
    if problem.mask is None or c_phi == 0:
        def matvec(x):
            return op.gram(x) + (c_phi + c_id) * x
    else:
        keep = np.zeros(problem.dims.nb)
        keep[problem.mask.indices] = c_phi

        def matvec(x):
            return op.gram(x) + keep * x + c_id * x
    u, info = cg_solve(matvec, rhs, tol=config.cg_tol, max_iter=config.cg_max_iter, x0=x0)
    return u, info.converged


def solve_joint_quadratic(z, d, problem: RestorationProblem, config=None, x0=None):
    """Exact minimizer of the denoising u/s subproblem.

    Minimizes ``||z1 - L u - d1||^2 + ||z2 - (Phi u + s) - d2||^2
    + ||z3 - s - d3||^2 + ||z4 - u - d4||^2`` through its normal equations

        s = ((z2 - d2) - Phi u + (z3 - d3)) / 2
        (L^T L + Phi^T Phi / 2 + I) u
            = L^T (z1 - d1) + Phi^T ((z2 - d2) - (z3 - d3)) / 2 + (z4 - d4)

    Returns ``(u, s, ok)`` where ``ok`` is False if CG did not converge.
    """
    config = config or SolverConfig()
    a, b, c, e = (zi - di for zi, di in zip(z, d))
    op = problem.recipe.operator
    rhs = op.adjoint(a) + 0.5 * problem.phi_t(b - c) + e
    u, ok = _solve_u(problem, 0.5, 1.0, rhs, x0, config)
    s = 0.5 * (b - problem.phi(u) + c)
    return u, s, ok


def solve_cs_quadratic(z, d, problem: RestorationProblem, config=None, x0=None):
    """Exact minimizer of ``||z1 - L u - d1||^2 + ||z2 - u - d2||^2 + ||z3 - u - d3||^2``."""
    config = config or SolverConfig()
    a, b, c = (zi - di for zi, di in zip(z, d))
    rhs = problem.recipe.operator.adjoint(a) + b + c
    u, ok = _solve_u(problem, 0.0, 2.0, rhs, x0, config)
    return u, ok


def _finish(state, u, s, Gx, z_new, ok):
    r = [g - zi for g, zi in zip(Gx, z_new)]
    d_new = [di + ri for di, ri in zip(state.d, r)]
    resid = float(np.sqrt(sum(float(ri @ ri) for ri in r)))
    change = float(np.linalg.norm(u - state.u))
    n = state.iteration + 1
    # the history list is handed over to the successor state, not copied
    history = state.history
    history.append((n, change, resid))
    return AdmmState(u, s, z_new, d_new, n, change, resid,
                     state.cg_failures + (0 if ok else 1), history)


def admm_denoise_step(state: AdmmState, problem: RestorationProblem,
                      config: SolverConfig) -> AdmmState:
    """One full ADMM cycle for the mixed-noise denoising problem."""
    if problem.kind != "denoise":
        raise ValueError("admm_denoise_step needs a denoising problem")
    try:
        u, s, ok = solve_joint_quadratic(state.z, state.d, problem, config, x0=state.u)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        raise SolverError(f"u/s update failed at iteration {state.iteration + 1}: {exc}") from exc
    d1, d2, d3, d4 = state.d
    Lu = problem.recipe.analysis(u)
    fit = problem.phi(u) + s
    z_new = [
        problem.recipe.prox(Lu + d1, config.gamma),
        project_l2_ball(fit + d2, problem.ball2),
        project_l1_ball(s + d3, problem.ball1),
        project_box(u + d4, problem.box),
    ]
    return _finish(state, u, s, [Lu, fit, s, u], z_new, ok)


def admm_cs_step(state: AdmmState, problem: RestorationProblem,
                 config: SolverConfig) -> AdmmState:
    """One full ADMM cycle for CS reconstruction."""
    if problem.kind != "cs":
        raise ValueError("admm_cs_step needs a CS problem")
    try:
        u, ok = solve_cs_quadratic(state.z, state.d, problem, config, x0=state.u)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        raise SolverError(f"u update failed at iteration {state.iteration + 1}: {exc}") from exc
    d1, d2, d3 = state.d
    Lu = problem.recipe.analysis(u)
    z_new = [
        problem.recipe.prox(Lu + d1, config.gamma),
        prox_l2ball_after_sampling(u + d2, problem.mask, problem.ball2),
        project_box(u + d3, problem.box),
    ]
    return _finish(state, u, None, [Lu, u, u], z_new, ok)


def run(
    problem: RestorationProblem,
    config: SolverConfig = SolverConfig(),
    initial: Optional[AdmmState] = None,
    callback: Optional[Callable[[int, float, float], None]] = None,
):
    """Iterate ADMM until ``||u_n - u_{n+1}|| < stop_tol`` or ``max_iter``.

    The stopping test is skipped on the first iteration, whose predecessor
    is the initialization rather than an iterate. Returns ``(u, s, report)``;
    ``s`` is None for CS problems.
    """
    step = admm_denoise_step if problem.kind == "denoise" else admm_cs_step
    state = initial if initial is not None else initial_state(problem)
    t0 = time.perf_counter()
    converged = False
    first_resid = None
    while state.iteration < config.max_iter:
        state = step(state, problem, config)
        if first_resid is None:
            first_resid = state.primal_residual
        if callback is not None:
            callback(state.iteration, state.u_change, state.primal_residual)
        if not np.all(np.isfinite(state.u)):
            raise SolverError(f"non-finite iterate at iteration {state.iteration}")
        if state.iteration > 1 and state.u_change < config.stop_tol:
            converged = True
            break
    elapsed = time.perf_counter() - t0
    if not converged:
        log.warning("ADMM stopped at max_iter=%d (u change %.3e)", config.max_iter, state.u_change)
    report = SolveReport(
        iterations=state.iteration,
        converged=converged,
        u_change=state.u_change,
        primal_residual=state.primal_residual,
        initial_primal_residual=first_resid if first_resid is not None else 0.0,
        slacks=constraint_slacks(problem, state.u, state.s),
        wall_time=elapsed,
        cg_failures=state.cg_failures,
        history=state.history,
        state=state,
    )
    return state.u, state.s, report
