"""Closed-loop simulation of finite step-function network systems.

A network of n nodes with symmetric coupling matrix ``entries`` evolves
as ``dx/dt = A x + B u`` with ``A = alpha0*I + entries/n`` and
``B = poly_b(entries/n)``; running and terminal costs weight states by
``poly_q(entries/n)`` and ``poly_p0(entries/n)`` under the cell inner
product ``<x, y> = sum(x*y)/n``.  Controllers are closures
``(t, x) -> u``; the module also provides the direct matrix-Riccati
controller used as the verification oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BlowUpError
from .graphon import StepGraphon, midpoint_grid
from .integrate import uniform_grid
from .lqr import (GainSchedule, LqrProblem, feedback_controller, ratio_prediction,
                  reconstruct_P, synthesize_gains, truncate_problem)
from .poly import apply_poly_matrix
from .riccati import solve_matrix_riccati

# Eigenvalue slack for "positive semidefinite up to rounding".
_PSD_TOL = -1e-9


@dataclass(frozen=True)
class StepSystem:
    """Finite network realization of an LQR problem on n cells."""

    n: int
    entries: np.ndarray
    a_mat: np.ndarray
    b_mat: np.ndarray
    q_mat: np.ndarray
    p0_mat: np.ndarray
    problem: LqrProblem
    f_cells: np.ndarray  # (rank, n) eigenfunction cell values
    lams: np.ndarray

    def __post_init__(self):
        for name in ("a_mat", "b_mat", "q_mat", "p0_mat"):
            m = getattr(self, name)
            if not np.array_equal(m, m.T):
                raise ValueError(f"system matrix {name} is not symmetric")
        for name in ("q_mat", "p0_mat"):
            low = float(np.linalg.eigvalsh(getattr(self, name)).min())
            if low < _PSD_TOL:
                raise ValueError(
                    f"{name} must be positive semidefinite, smallest eigenvalue {low:.3e}")


def build_step_system(entries, p: LqrProblem) -> StepSystem:
    """Assemble the n-cell system matrices from a coupling matrix.

    ``entries`` may be a raw symmetric matrix or a `StepGraphon`; all
    matrices are polynomials of the scaled coupling ``entries / n``.
    Asymmetric or out-of-bound entries are rejected with the offending
    indices.
    """
    if isinstance(entries, StepGraphon):
        entries = entries.entries
    else:
        entries = StepGraphon(entries, bound=p.graphon.bound).entries
    n = entries.shape[0]
    scaled = entries / n
    a_mat = p.alpha0 * np.eye(n) + scaled
    return StepSystem(
        n=n,
        entries=entries,
        a_mat=0.5 * (a_mat + a_mat.T),
        b_mat=apply_poly_matrix(p.poly_b, scaled),
        q_mat=apply_poly_matrix(p.poly_q, scaled),
        p0_mat=apply_poly_matrix(p.poly_p0, scaled),
        problem=p,
        f_cells=p.graphon.eigfun_values(midpoint_grid(n)),
        lams=p.graphon.lambdas,
    )


@dataclass(frozen=True)
class Trajectory:
    """Closed-loop run: states and applied controls on a time grid."""

    grid: np.ndarray
    states: np.ndarray    # (len(grid), n)
    controls: np.ndarray  # (len(grid), n)

    def __post_init__(self):
        if not (self.states.shape[0] == self.grid.size == self.controls.shape[0]):
            raise ValueError("grid, states and controls lengths disagree")
        if not (np.all(np.isfinite(self.states)) and np.all(np.isfinite(self.controls))):
            raise ValueError("trajectory contains non-finite entries")


@dataclass(frozen=True)
class CostBreakdown:
    """Total cost and its split into auxiliary and eigendirection parts."""

    total: float
    aux: float
    eigen: np.ndarray

    @property
    def decomposed(self) -> float:
        return float(self.aux + self.eigen.sum())


def initial_state(n: int, seed: int) -> np.ndarray:
    """Reproducible standard-normal initial state for a given seed."""
    return np.random.default_rng(seed).standard_normal(n)


def simulate(sys: StepSystem, controller: Callable, x0, horizon: float,
             dt: float) -> Trajectory:
    """Integrate ``dx/dt = A x + B u(t, x)`` with RK4, recording controls.

    The recorded control at each grid node is ``controller(t_k, x_k)``.
    A non-finite state aborts with a `BlowUpError` naming the time.
    """
    x = np.asarray(x0, dtype=float)
    if x.shape != (sys.n,):
        raise ValueError(f"initial state must have shape ({sys.n},), got {x.shape}")
    grid = uniform_grid(horizon, dt)
    a, b = sys.a_mat, sys.b_mat
    states = np.empty((grid.size, sys.n))
    controls = np.empty_like(states)
    states[0] = x

    for k in range(grid.size - 1):
        t = grid[k]
        h = grid[k + 1] - t
        tm = t + 0.5 * h
        u1 = controller(t, x)
        controls[k] = u1
        k1 = a @ x + b @ u1
        ym = x + 0.5 * h * k1
        k2 = a @ ym + b @ controller(tm, ym)
        ym = x + 0.5 * h * k2
        k3 = a @ ym + b @ controller(tm, ym)
        ym = x + h * k3
        k4 = a @ ym + b @ controller(t + h, ym)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(x).all():
            raise BlowUpError(
                f"closed-loop state blew up at t = {grid[k + 1]:.6g}")
        states[k + 1] = x
    controls[-1] = controller(grid[-1], x)
    return Trajectory(grid=grid, states=states, controls=controls)


def evaluate_cost(traj: Trajectory, sys: StepSystem) -> CostBreakdown:
    """Quadratic cost of a run and its decoupled breakdown.

    The total is the trapezoid rule applied to
    ``(x'Qx + u'u)/n`` plus the terminal ``x'P0x/n``; the breakdown
    projects states and controls on the problem's eigenfunctions and
    accumulates the scalar costs of each decoupled subsystem.
    """
    x, u, grid = traj.states, traj.controls, traj.grid
    n = sys.n
    p = sys.problem
    run = (np.einsum("ki,ij,kj->k", x, sys.q_mat, x) + np.einsum("ki,ki->k", u, u)) / n
    total = float(np.trapezoid(run, grid) + x[-1] @ sys.p0_mat @ x[-1] / n)

    f = sys.f_cells
    xc = x @ f.T / n          # (K+1, rank) eigenstate coordinates
    uc = u @ f.T / n
    xa = x - xc @ f
    ua = u - uc @ f
    q_eig = np.atleast_1d(p.poly_q(sys.lams))
    z_eig = np.atleast_1d(p.poly_p0(sys.lams))
    eigen_run = q_eig * xc ** 2 + uc ** 2
    eigen = (np.trapezoid(eigen_run, grid, axis=0) + z_eig * xc[-1] ** 2
             if p.d else np.zeros(0))
    aux_run = (p.q0 * np.einsum("ki,ki->k", xa, xa)
               + np.einsum("ki,ki->k", ua, ua)) / n
    aux = float(np.trapezoid(aux_run, grid) + p.z0 * (xa[-1] @ xa[-1]) / n)
    return CostBreakdown(total=total, aux=aux, eigen=np.atleast_1d(eigen))


def oracle_controller(sys: StepSystem, horizon: float, dt: float):
    """Feedback ``u = -B P(T-t) x`` from the direct matrix Riccati solve.

    Returns ``(controller, matrix_path)``.
    """
    path = solve_matrix_riccati(sys.a_mat, sys.b_mat, sys.q_mat, sys.p0_mat,
                                horizon, dt)
    b = sys.b_mat

    def controller(t, x):
        return -b @ (path(horizon - t) @ x)

    return controller, path


@dataclass(frozen=True)
class OracleReport:
    """Gaps between the decoupled synthesis and the matrix-Riccati oracle."""

    j_decoupled: float
    j_oracle: float
    cost_rel_gap: float
    state_gap: float
    p_gap: float


def oracle_compare(sys: StepSystem, p: LqrProblem, x0, horizon: float,
                   dt: float) -> OracleReport:
    """Run both controllers and report P-matrix, state and cost gaps.

    The P gap is the max-abs difference between the reconstructed
    operator ``L_t*(I - sum Pi_l) + sum M_l(t)*Pi_l`` and the matrix
    Riccati path at up to 21 sampled grid times.
    """
    gains = synthesize_gains(p, dt)
    ctrl_dec = feedback_controller(p, gains)
    ctrl_orc, path = oracle_controller(sys, horizon, dt)
    traj_dec = simulate(sys, ctrl_dec, x0, horizon, dt)
    traj_orc = simulate(sys, ctrl_orc, x0, horizon, dt)
    j_dec = evaluate_cost(traj_dec, sys).total
    j_orc = evaluate_cost(traj_orc, sys).total
    stride = max(1, (path.grid.size - 1) // 20)
    p_gap = 0.0
    for k in range(0, path.grid.size, stride):
        rec = reconstruct_P(gains, p.graphon, path.grid[k], sys.n)
        p_gap = max(p_gap, float(np.abs(rec - path.values[k]).max()))
    return OracleReport(
        j_decoupled=j_dec,
        j_oracle=j_orc,
        cost_rel_gap=abs(j_dec - j_orc) / abs(j_orc),
        state_gap=float(np.abs(traj_dec.states - traj_orc.states).max()),
        p_gap=p_gap,
    )


@dataclass(frozen=True)
class TruncationRow:
    """One truncation level: costs plus per-direction terminal ratios."""

    level: int
    j_truncated: float
    j_optimal: float
    measured_ratio: np.ndarray   # NaN for kept directions / tiny denominators
    predicted_ratio: np.ndarray  # NaN where the prediction does not apply


def truncation_study(sys: StepSystem, p: LqrProblem, x0,
                     levels: Sequence[int], horizon: float,
                     dt: float) -> list[TruncationRow]:
    """Cost inflation and terminal-state ratios for each truncation level.

    For every level the truncated controller is simulated and compared
    with the optimal one; for each ignored direction the measured
    terminal ratio ``x_tilde(T)/x_bar(T)`` sits next to its prediction
    (available when the input polynomial is constant).
    """
    gains = synthesize_gains(p, dt)
    traj_opt = simulate(sys, feedback_controller(p, gains), x0, horizon, dt)
    j_opt = evaluate_cost(traj_opt, sys).total
    coords_opt = sys.f_cells @ traj_opt.states[-1] / sys.n
    can_predict = p.poly_b.degree == 0
    rows = []
    for level in levels:
        if not 0 <= level <= p.d:
            raise ValueError(f"truncation level {level} outside [0, {p.d}]")
        p_trunc = truncate_problem(p, level)
        schedule = GainSchedule(aux=gains.aux, eigen=gains.eigen[:level])
        traj = simulate(sys, feedback_controller(p_trunc, schedule), x0,
                        horizon, dt)
        coords = sys.f_cells @ traj.states[-1] / sys.n
        measured = np.full(p.d, np.nan)
        predicted = np.full(p.d, np.nan)
        for h in range(level, p.d):
            if abs(coords_opt[h]) > 1e-12:
                measured[h] = coords[h] / coords_opt[h]
            if can_predict:
                predicted[h] = ratio_prediction(p, h, dt)
        rows.append(TruncationRow(
            level=level,
            j_truncated=evaluate_cost(traj, sys).total,
            j_optimal=j_opt,
            measured_ratio=measured,
            predicted_ratio=predicted,
        ))
    return rows
