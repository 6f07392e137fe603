"""Two-objective genetic localization of unknown nodes.

Each unknown node is an independent problem over its (x, y, z): minimize
the squared-residual loss against the hop-size distances (f1) and against
the expected band distances (f2).  The optimizer is an elitist
non-dominated-sorting GA with binary tournaments on (rank, crowding),
simulated binary crossover, bounded polynomial mutation and (mu + lambda)
survival.

Every node owns its random stream and consumes it in a fixed pattern, so
a node's result does not depend on which other nodes are solved with it
or in what order.  The generational loop itself lives in ``_kernels``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ParameterError

PARETO_PICKS = ("normalized_sum", "min_f1")


@dataclass(frozen=True)
class GaConfig:
    pop_size: int = 20
    max_iter: int = 500
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    eta_c: float = 20.0
    eta_m: float = 20.0
    pareto_pick: str = "normalized_sum"

    def __post_init__(self):
        if not (0.0 <= self.crossover_prob <= 1.0 and 0.0 <= self.mutation_prob <= 1.0):
            raise ParameterError("crossover and mutation probabilities must lie in [0, 1]")
        if self.pop_size < 4 or self.pop_size % 2:
            raise ParameterError(f"pop_size must be even and >= 4, got {self.pop_size}")
        if self.max_iter < 0:
            raise ParameterError("max_iter must be nonnegative")
        if self.pareto_pick not in PARETO_PICKS:
            raise ParameterError(f"pareto_pick must be one of {PARETO_PICKS}")

    @property
    def uniforms_per_generation(self) -> int:
        p = self.pop_size
        return 2 * p + p // 2 + 3 * p + 6 * p


@dataclass(frozen=True, eq=False)
class NodeContext:
    """Everything one unknown node's search needs.

    ``anchors`` may be padded; rows with ``mask == 0`` do not contribute.
    """

    anchors: np.ndarray
    dis: np.ndarray
    e_dis: np.ndarray
    side: float
    init: np.ndarray | None = None
    mask: np.ndarray | None = None

    def weights(self) -> np.ndarray:
        return np.ones(len(self.anchors)) if self.mask is None else self.mask


# ---------------------------------------------------------------------------
# objectives

def _loss(candidate, anchors, target, mask=None):
    c = np.asarray(candidate, dtype=float)
    d = np.linalg.norm(c[..., None, :] - anchors, axis=-1)
    res = np.nan_to_num(d - target)
    if mask is not None:
        res = res * mask
    return np.sum(res**2, axis=-1)


def loss_l1(candidate, anchors, dis_row, mask=None):
    """Sum over anchors of (distance to anchor - hop-size distance)^2."""
    return _loss(candidate, np.asarray(anchors, float), np.asarray(dis_row, float), mask)


def loss_l2(candidate, anchors, e_dis_row, mask=None):
    """Same residual form against the expected band distances."""
    return _loss(candidate, np.asarray(anchors, float), np.asarray(e_dis_row, float), mask)


# ---------------------------------------------------------------------------
# ranking

def dominates(a, b) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_sort(objectives) -> list[list[int]]:
    """Fast non-dominated sort; returns fronts as lists of indices."""
    f = np.asarray(objectives, dtype=float)
    n = len(f)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    count = np.zeros(n, dtype=int)
    for p in range(n):
        for q in range(p + 1, n):
            if dominates(f[p], f[q]):
                dominated_by[p].append(q)
                count[q] += 1
            elif dominates(f[q], f[p]):
                dominated_by[q].append(p)
                count[p] += 1
    fronts = [[i for i in range(n) if count[i] == 0]]
    while fronts[-1]:
        nxt = []
        for p in fronts[-1]:
            for q in dominated_by[p]:
                count[q] -= 1
                if count[q] == 0:
                    nxt.append(q)
        fronts.append(sorted(nxt))
    return fronts[:-1]


def crowding_distance(front_objectives) -> np.ndarray:
    f = np.asarray(front_objectives, dtype=float)
    n, k = f.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(k):
        order = np.argsort(f[:, j], kind="stable")
        col = f[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def batch_ranks(f: np.ndarray) -> np.ndarray:
    """Front index (1-based) for each member of each population, ``f``: (B, N, 2)."""
    a1, a2 = f[:, :, None, 0], f[:, :, None, 1]
    b1, b2 = f[:, None, :, 0], f[:, None, :, 1]
    # dom[b, i, j]: i dominates j
    dom = (a1 <= b1) & (a2 <= b2) & ((a1 < b1) | (a2 < b2))
    domf = dom.astype(np.float64)
    count = domf.sum(axis=1)
    B, N = f.shape[:2]
    rank = np.zeros((B, N), dtype=np.int64)
    remaining = np.ones((B, N), dtype=bool)
    level = 0
    while remaining.any():
        level += 1
        front = remaining & (count == 0)
        rank[front] = level
        remaining &= ~front
        count = count - np.matmul(front[:, None, :].astype(np.float64), domf)[:, 0, :]
    return rank


def _stack_context(c: NodeContext, width: int):
    k = len(c.anchors)
    w = c.weights()
    anchors = np.zeros((width, 3))
    dis = np.zeros(width)
    e_dis = np.zeros(width)
    mask = np.zeros(width)
    anchors[:k] = c.anchors
    dis[:k] = np.where(w > 0, c.dis, 0.0)
    e_dis[:k] = np.where(w > 0, c.e_dis, 0.0)
    mask[:k] = w
    return anchors, dis, e_dis, mask


def run_node(context: NodeContext, config: GaConfig, rng: np.random.Generator, width: int | None = None):
    """Full search for one node; returns ``(positions, objectives, best_per_gen)``.

    The generator is consumed in a fixed pattern: the initial population,
    then one block of uniforms for all generations.
    """
    P = config.pop_size
    side = float(context.side)
    anchors, dis, e_dis, mask = _stack_context(context, width or len(context.anchors))
    pos0 = rng.uniform(0.0, side, size=(P, 3))
    if context.init is not None and np.all(np.isfinite(context.init)):
        pos0[0] = np.clip(context.init, 0.0, side)
    uniforms = rng.random((config.max_iter, config.uniforms_per_generation))
    return _kernels.evolve_node(
        anchors, dis, e_dis, mask, side, pos0, uniforms,
        config.crossover_prob, config.mutation_prob, config.eta_c, config.eta_m,
    )


def evolve_batch(
    contexts: Sequence[NodeContext],
    config: GaConfig,
    rngs: Sequence[np.random.Generator],
) -> np.ndarray:
    """Locate every context; one generator per context."""
    if len(rngs) != len(contexts):
        raise ValueError("need one random generator per context")
    if not contexts:
        return np.zeros((0, 3))
    width = max(len(c.anchors) for c in contexts)
    finals = [run_node(c, config, rng, width)[:2] for c, rng in zip(contexts, rngs)]
    pos = np.stack([p for p, _ in finals])
    f = np.stack([q for _, q in finals])
    return pick_solution(pos, f, config.pareto_pick)


def pick_solution(pos: np.ndarray, f: np.ndarray, rule: str = "normalized_sum") -> np.ndarray:
    """Choose one member of each population's non-dominated set.

    ``normalized_sum`` minimizes the sum of min-max normalized objectives
    over the front; ``min_f1`` takes the smallest f1.  Ties go to lower f1,
    then to the lexicographically smaller position.
    """
    B, N, _ = f.shape
    front = batch_ranks(f) == 1
    big = np.inf
    if rule == "min_f1":
        score = np.where(front, f[..., 0], big)
    else:
        fm = np.where(front[..., None], f, np.nan)
        fmin = np.nanmin(fm, axis=1, keepdims=True)
        fmax = np.nanmax(fm, axis=1, keepdims=True)
        span = fmax - fmin
        with np.errstate(invalid="ignore", divide="ignore"):
            norm = np.where(span > 0, (f - fmin) / span, 0.0)
        score = np.where(front, norm.sum(axis=-1), big)
    keys = (pos[..., 2], pos[..., 1], pos[..., 0], f[..., 0], score)
    best = np.lexsort(keys, axis=-1)[:, 0]
    return pos[np.arange(B), best]


def evolve(context: NodeContext, config: GaConfig, rng: np.random.Generator) -> np.ndarray:
    """Locate a single node."""
    return evolve_batch([context], config, [rng])[0]
