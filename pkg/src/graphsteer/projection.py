"""Linear projection engine.

Solves for the p x 2 matrix P that brings the projected data X @ P closest
(in Frobenius norm) to a target view T, supports warm starts and bounded
stepping for animated re-solves, and provides the PCA bootstrap plus the two
target builders (k-gon cluster separation and direct drags).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dataset import AttributeMatrix, Clustering


class ProjectionError(ValueError):
    """Raised on invalid solver inputs."""


@dataclass(frozen=True)
class SolverConfig:
    """Iterative solver settings.

    ``method`` selects conjugate-direction least-squares descent ("cg", the
    default) or plain fixed-step gradient descent ("gd"). For "gd" a
    ``learning_rate`` of None means 1 / lambda_max(X'X) estimated by power
    iteration, which guarantees a non-increasing residual.
    """

    learning_rate: float | None = None
    max_epochs: int = 10_000
    tolerance: float = 1e-7  # relative per-epoch residual improvement
    rng_seed: int = 0
    epochs_per_step: int = 25
    method: str = "cg"

    def __post_init__(self) -> None:
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ProjectionError("learning_rate must be positive")
        if self.max_epochs <= 0 or self.epochs_per_step <= 0:
            raise ProjectionError("epoch counts must be positive")
        if self.tolerance <= 0:
            raise ProjectionError("tolerance must be positive")
        if self.method not in ("cg", "gd"):
            raise ProjectionError(f"unknown solver method {self.method!r}")


@dataclass(frozen=True)
class ProjectionMatrix:
    """p x 2 attribute weights; column 0 is x, column 1 is y.

    Rows for excluded attributes are exactly zero.
    """

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[1] != 2:
            raise ProjectionError("projection matrix must be p x 2")
        if not np.isfinite(w).all():
            raise ProjectionError("projection matrix has non-finite entries")
        object.__setattr__(self, "weights", w)
        w.setflags(write=False)

    @property
    def p(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class TargetView:
    """n x 2 desired node positions driving a solve."""

    positions: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.positions, dtype=float)
        if t.ndim != 2 or t.shape[1] != 2:
            raise ProjectionError("target view must be n x 2")
        if not np.isfinite(t).all():
            raise ProjectionError("target view has non-finite entries")
        object.__setattr__(self, "positions", t)
        t.setflags(write=False)


@dataclass(frozen=True)
class Layout:
    """Node positions X @ P plus the residual of the last solve.

    Positions are always the exact matrix product; the layout is never
    post-edited. ``residual`` is 0.0 for layouts that did not come from a
    targeted solve (e.g. the PCA bootstrap).
    """

    positions: np.ndarray
    residual: float = 0.0

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        pos.setflags(write=False)
        if self.residual < 0:
            raise ProjectionError("residual must be non-negative")

    def half_extent(self) -> float:
        if self.positions.size == 0:
            return 1.0
        spans = self.positions.max(axis=0) - self.positions.min(axis=0)
        return float(max(spans.max() / 2.0, 0.0))


@dataclass
class SolveResult:
    projection: ProjectionMatrix
    layout: Layout
    converged: bool
    epochs: int


@dataclass
class PcaResult:
    projection: ProjectionMatrix
    layout: Layout
    degenerate: bool


def _check_solvable(X: AttributeMatrix, T: TargetView) -> None:
    if X.included_count < 2:
        raise ProjectionError("need at least 2 included attributes")
    if T.positions.shape[0] != X.n:
        raise ProjectionError("target row count does not match node count")
    if not np.isfinite(X.values).all():
        raise ProjectionError("attribute matrix has non-finite entries")


def _expand(P_inc: np.ndarray, mask: np.ndarray) -> np.ndarray:
    full = np.zeros((mask.shape[0], 2))
    full[mask] = P_inc
    return full


def _top_eigenvalue(M: np.ndarray, iters: int = 30) -> float:
    """Largest eigenvalue of a symmetric PSD matrix via power iteration."""
    rng = np.random.default_rng(0)
    v = rng.normal(size=M.shape[0])
    v /= np.linalg.norm(v)
    lam = 1.0
    for _ in range(iters):
        w = M @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 1.0
        lam = float(v @ w)
        v = w / norm
    return max(lam, np.finfo(float).tiny)


class ProjectionSolver:
    """Stateful iterative least-squares solver, steppable in epoch chunks.

    The solver minimizes ||T - X P||_F over the included attribute columns.
    Stepping in chunks is arithmetically identical to one uninterrupted run,
    which is what makes recorded command logs replayable bit-for-bit.

    Convergence: the per-epoch residual improvement must stay below
    ``tolerance * ||T||_F`` for 3 consecutive epochs, and at least
    ``2 * min(n, p) + 5`` epochs must have run (the conjugate-direction method
    needs the full Krylov dimension on ill-conditioned inputs). A gradient
    norm below ``tolerance * ||X'T||_F`` converges immediately, so re-solves
    that start at the optimum finish in a single step.
    """

    _PATIENCE = 3

    def __init__(self, X: AttributeMatrix, T: TargetView,
                 warm_start: ProjectionMatrix | None = None,
                 cfg: SolverConfig = SolverConfig()) -> None:
        _check_solvable(X, T)
        self.cfg = cfg
        self.mask = np.array(X.included_mask, dtype=bool)
        self._values = X.values
        self._X = X.included_values()
        self._T = T.positions
        n, p = self._X.shape
        self._min_epochs = 2 * min(n, p) + 5

        if warm_start is not None:
            if warm_start.p != X.p:
                raise ProjectionError("warm start row count does not match attributes")
            P0 = warm_start.weights[self.mask].copy()
        else:
            rng = np.random.default_rng(cfg.rng_seed)
            P0 = rng.normal(scale=0.01, size=(p, 2))

        self._P = P0
        self._R = self._T - self._X @ self._P
        self._grad = self._X.T @ self._R  # negative gradient direction
        self._gamma = float(np.sum(self._grad * self._grad))
        self._D = self._grad.copy()
        self._target_norm = max(float(np.linalg.norm(self._T)), np.finfo(float).tiny)
        self._grad_floor = cfg.tolerance * max(
            float(np.linalg.norm(self._values.T @ self._T)), np.finfo(float).tiny)
        self._prev_res = float(np.linalg.norm(self._R))
        self._stall = 0
        self._lr = cfg.learning_rate
        if cfg.method == "gd" and self._lr is None:
            self._lr = 1.0 / _top_eigenvalue(self._X.T @ self._X)
        self.epochs = 0
        self.converged = False
        self.residual_history: list[float] = [self._prev_res]
        if np.sqrt(self._gamma) <= self._grad_floor:
            self.converged = True

    # -- stepping ----------------------------------------------------------

    def step(self, epochs: int | None = None) -> bool:
        """Run up to ``epochs`` epochs (default cfg.epochs_per_step).

        Returns the converged flag. Stops early at cfg.max_epochs.
        """
        if epochs is None:
            epochs = self.cfg.epochs_per_step
        if epochs <= 0:
            raise ProjectionError("epochs per step must be positive")
        for _ in range(epochs):
            if self.converged or self.epochs >= self.cfg.max_epochs:
                break
            self._epoch()
        return self.converged

    def _epoch(self) -> None:
        if self.cfg.method == "gd":
            self._P += self._lr * (self._X.T @ (self._T - self._X @ self._P))
            res = float(np.linalg.norm(self._T - self._X @ self._P))
        else:
            Q = self._X @ self._D
            qq = float(np.sum(Q * Q))
            if qq == 0.0 or self._gamma == 0.0:
                self.converged = True
                self.epochs += 1
                self.residual_history.append(self._prev_res)
                return
            alpha = self._gamma / qq
            self._P += alpha * self._D
            self._R -= alpha * Q
            self._grad = self._X.T @ self._R
            gamma_new = float(np.sum(self._grad * self._grad))
            res = float(np.linalg.norm(self._R))
            beta = gamma_new / self._gamma
            self._gamma = gamma_new
            self._D = self._grad + beta * self._D

        self.epochs += 1
        self.residual_history.append(res)
        improvement = self._prev_res - res
        self._stall = self._stall + 1 if improvement < self.cfg.tolerance * self._target_norm else 0
        self._prev_res = res
        grad_norm = float(np.sqrt(self._gamma)) if self.cfg.method == "cg" else None
        if grad_norm is not None and grad_norm <= self._grad_floor:
            self.converged = True
        elif self._stall >= self._PATIENCE and self.epochs >= self._min_epochs:
            self.converged = True

    # -- results -----------------------------------------------------------

    @property
    def projection(self) -> ProjectionMatrix:
        return ProjectionMatrix(_expand(self._P, self.mask))

    @property
    def layout(self) -> Layout:
        full = _expand(self._P, self.mask)
        positions = self._values @ full
        residual = float(np.linalg.norm(self._T - positions))
        return Layout(positions=positions, residual=residual)

    def result(self) -> SolveResult:
        return SolveResult(self.projection, self.layout, self.converged, self.epochs)


def solve_projection(X: AttributeMatrix, T: TargetView,
                     warm_start: ProjectionMatrix | None = None,
                     cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Solve min ||T - X P||_F to within tolerance of the least-squares optimum.

    ``warm_start`` (normally the current projection) is the initialization
    when given, otherwise the init is seeded-random from cfg.rng_seed. If the
    tolerance is not reached within cfg.max_epochs the best-so-far result is
    returned with converged=False.
    """
    solver = ProjectionSolver(X, T, warm_start, cfg)
    while not solver.converged and solver.epochs < cfg.max_epochs:
        solver.step()
    return solver.result()


def step_projection(X: AttributeMatrix, T: TargetView,
                    warm_start: ProjectionMatrix | None = None,
                    cfg: SolverConfig = SolverConfig(),
                    solver: ProjectionSolver | None = None) -> tuple[SolveResult, ProjectionSolver]:
    """Run one bounded chunk (cfg.epochs_per_step epochs) of the solve.

    Pass the returned solver back in to continue the same run; calling with
    only a warm start restarts the descent from that projection, which
    converges to the same optimum across repeated calls.
    """
    if solver is None:
        solver = ProjectionSolver(X, T, warm_start, cfg)
    solver.step()
    return solver.result(), solver


def instant_projection(X: AttributeMatrix, T: TargetView) -> SolveResult:
    """Closed-form least-squares solve (minimum-norm on rank deficiency)."""
    _check_solvable(X, T)
    Xi = X.included_values()
    P_inc, *_ = np.linalg.lstsq(Xi, T.positions, rcond=None)
    full = _expand(P_inc, np.array(X.included_mask, dtype=bool))
    positions = X.values @ full
    residual = float(np.linalg.norm(T.positions - positions))
    return SolveResult(ProjectionMatrix(full), Layout(positions, residual), True, 0)


# ---------------------------------------------------------------------------
# PCA bootstrap


def pca_projection(X: AttributeMatrix) -> PcaResult:
    """Top-2 principal directions of the column-centered included attributes.

    Columns of P are unit length in descending eigenvalue order, with rows of
    excluded attributes zero. When the centered matrix has rank < 2 the
    second axis is an arbitrary unit vector orthogonal to the first and the
    result is flagged degenerate.
    """
    if X.included_count < 2:
        raise ProjectionError("need at least 2 included attributes")
    if X.n < 2:
        raise ProjectionError("need at least 2 nodes for PCA")
    Xi = X.included_values()
    centered = Xi - Xi.mean(axis=0)
    cov = centered.T @ centered / (Xi.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    top = eigvecs[:, order[:2]]
    lam = eigvals[order[:2]]
    # deterministic sign: largest-magnitude component positive
    for c in range(2):
        j = int(np.argmax(np.abs(top[:, c])))
        if top[j, c] < 0:
            top[:, c] = -top[:, c]
    degenerate = bool(lam[0] <= 0 or lam[1] <= lam[0] * 1e-12)
    full = _expand(top, np.array(X.included_mask, dtype=bool))
    positions = X.values @ full
    return PcaResult(ProjectionMatrix(full), Layout(positions), degenerate)


# ---------------------------------------------------------------------------
# Target builders


def simplex_vertices(k: int, radius: float) -> np.ndarray:
    """Vertices of the regular k-gon: cluster c at angle 2*pi*c/k."""
    if k < 1:
        raise ProjectionError("need at least one cluster")
    if radius <= 0:
        raise ProjectionError("radius must be positive")
    angles = 2.0 * np.pi * np.arange(k) / k
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


def default_separation_radius(current: Layout) -> float:
    """1.2 x the current layout half-extent (1.2 when the layout is a point)."""
    half = current.half_extent()
    return 1.2 * half if half > 0 else 1.2


def simplex_target(current: Layout, clustering: Clustering, alpha: float,
                   radius: float, node_ids: Sequence[str],
                   only_clusters: Iterable[str] | None = None) -> TargetView:
    """Interpolate nodes toward their cluster's k-gon vertex.

    Row i of the target is (1 - alpha) * current + alpha * vertex(cluster(i)).
    With ``only_clusters`` given, nodes of other clusters keep their current
    position as target.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ProjectionError("alpha must be in [0, 1]")
    vertices = simplex_vertices(clustering.k, radius)
    vertex_of = {label: vertices[c] for c, label in enumerate(clustering.cluster_ids)}
    moving = set(clustering.cluster_ids if only_clusters is None else only_clusters)
    unknown = moving - set(clustering.cluster_ids)
    if unknown:
        raise ProjectionError(f"unknown clusters: {sorted(unknown)}")
    target = np.array(current.positions, dtype=float)
    for i, node in enumerate(node_ids):
        label = clustering.label_of(node)
        if label in moving:
            target[i] = (1.0 - alpha) * target[i] + alpha * vertex_of[label]
    return TargetView(target)


def drag_target(current: Layout, selection: Iterable[str],
                displacement: Sequence[float], node_ids: Sequence[str]) -> TargetView:
    """Translate the selected rows of the current layout by ``displacement``."""
    selected = set(selection)
    if not selected:
        raise ProjectionError("selection is empty")
    unknown = selected - set(node_ids)
    if unknown:
        raise ProjectionError(f"unknown node ids in selection: {sorted(unknown)}")
    d = np.asarray(displacement, dtype=float)
    if d.shape != (2,) or not np.isfinite(d).all():
        raise ProjectionError("displacement must be a finite 2-vector")
    target = np.array(current.positions, dtype=float)
    rows = [i for i, node in enumerate(node_ids) if node in selected]
    target[rows] += d
    return TargetView(target)
