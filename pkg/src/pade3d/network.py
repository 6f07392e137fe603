"""Seeded 3D sensor deployments and unit-ball connectivity."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ParameterError

JITTER_MAX = 5.0


class Distribution(str, enum.Enum):
    UNIFORM = "uniform"
    MULTIMODAL = "multimodal"


@dataclass(frozen=True)
class DeploymentSpec:
    total_nodes: int = 150
    anchor_count: int = 25
    side_length: float = 100.0
    radius: float = 30.0
    distribution: Distribution = Distribution.UNIFORM
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        if not 4 <= self.anchor_count < self.total_nodes:
            raise ParameterError(
                f"need 4 <= anchor_count < total_nodes, got "
                f"anchor_count={self.anchor_count}, total_nodes={self.total_nodes}"
            )
        if not self.radius > 0:
            raise ParameterError(f"radius must be positive, got {self.radius}")
        if not self.side_length > 0:
            raise ParameterError(f"side_length must be positive, got {self.side_length}")


@dataclass(frozen=True)
class TerrainMode:
    cx: float
    cy: float
    sigma: float
    amplitude: float


@dataclass(frozen=True)
class Terrain:
    """Sum of isotropic Gaussian bumps over the ground plane."""

    modes: tuple[TerrainMode, ...]

    def height(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = np.zeros(np.broadcast(x, y).shape)
        for m in self.modes:
            d2 = (x - m.cx) ** 2 + (y - m.cy) ** 2
            z = z + m.amplitude * np.exp(-d2 / (2.0 * m.sigma**2))
        return z


def random_terrain(rng: np.random.Generator, side: float) -> Terrain:
    """Draw 3 to 5 well-separated peaks inside the square of the given side."""
    k = int(rng.integers(3, 6))
    modes: list[TerrainMode] = []
    # separation >= 2.5 sigma of the wider bump keeps every peak a distinct maximum
    while len(modes) < k:
        cx, cy = rng.uniform(0.15 * side, 0.85 * side, size=2)
        sigma = rng.uniform(0.10 * side, 0.16 * side)
        amp = rng.uniform(0.35 * side, 0.80 * side)
        if all(np.hypot(cx - m.cx, cy - m.cy) >= 2.5 * max(sigma, m.sigma) for m in modes):
            modes.append(TerrainMode(float(cx), float(cy), float(sigma), float(amp)))
        elif rng.random() < 0.02:
            # stuck on a crowded layout; restart the placement
            modes.clear()
    return Terrain(tuple(modes))


@dataclass(frozen=True, eq=False)
class Network:
    positions: np.ndarray
    anchor_ids: np.ndarray
    radius: float
    side_length: float
    adjacency: tuple[np.ndarray, ...] | None = None
    terrain: Terrain | None = field(default=None, repr=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        pos.setflags(write=False)
        anchors = np.array(sorted(int(a) for a in self.anchor_ids), dtype=np.int64)
        anchors.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "anchor_ids", anchors)

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def anchor_positions(self) -> np.ndarray:
        return self.positions[self.anchor_ids]

    @property
    def is_anchor(self) -> np.ndarray:
        mask = np.zeros(self.n_nodes, dtype=bool)
        mask[self.anchor_ids] = True
        return mask

    @property
    def unknown_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.is_anchor)

    def same_as(self, other: "Network") -> bool:
        return (
            np.array_equal(self.positions, other.positions)
            and np.array_equal(self.anchor_ids, other.anchor_ids)
            and self.radius == other.radius
            and self.side_length == other.side_length
        )


def generate_deployment(spec: DeploymentSpec) -> Network:
    """Place nodes, pick anchors and build connectivity.

    Positions and the anchor permutation come from one stream seeded by
    ``spec.seed``, so for a fixed seed the node cloud does not depend on
    ``anchor_count`` or ``radius`` and anchor sets are nested in
    ``anchor_count``.
    """
    rng = np.random.default_rng(spec.seed)
    side = spec.side_length
    n = spec.total_nodes
    terrain = None
    if spec.distribution is Distribution.UNIFORM:
        pos = rng.uniform(0.0, side, size=(n, 3))
    else:
        terrain = random_terrain(rng, side)
        xy = rng.uniform(0.0, side, size=(n, 2))
        z = terrain.height(xy[:, 0], xy[:, 1]) + rng.uniform(0.0, JITTER_MAX, size=n)
        pos = np.column_stack([xy, np.clip(z, 0.0, side)])
    order = rng.permutation(n)
    anchors = order[: spec.anchor_count]
    net = Network(pos, anchors, spec.radius, side, terrain=terrain)
    return build_connectivity(net)


def build_connectivity(network: Network) -> Network:
    """Return a copy with symmetric neighbor lists (closed ball, d <= R)."""
    d = cdist(network.positions, network.positions)
    adj = d <= network.radius
    np.fill_diagonal(adj, False)
    neighbors = tuple(np.flatnonzero(row) for row in adj)
    return replace(network, adjacency=neighbors)


def with_anchors(network: Network, anchor_ids) -> Network:
    return replace(network, anchor_ids=np.asarray(anchor_ids))


def with_radius(network: Network, radius: float) -> Network:
    return build_connectivity(replace(network, radius=float(radius), adjacency=None))


def write_deployment_csv(network: Network, path) -> None:
    path = Path(path)
    is_anchor = network.is_anchor
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "x", "y", "z", "is_anchor"])
        for k, (x, y, z) in enumerate(network.positions):
            w.writerow([k, f"{x:.6f}", f"{y:.6f}", f"{z:.6f}", int(is_anchor[k])])


def read_deployment_csv(path, radius: float, side_length: float = 100.0) -> Network:
    rows = []
    with Path(path).open(newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                (int(rec["node_id"]), float(rec["x"]), float(rec["y"]), float(rec["z"]),
                 int(rec["is_anchor"]))
            )
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ParameterError(f"{path}: node ids must be 0..n-1")
    pos = np.array([r[1:4] for r in rows], dtype=float).reshape(-1, 3)
    anchors = [r[0] for r in rows if r[4]]
    return build_connectivity(Network(pos, anchors, float(radius), float(side_length)))
