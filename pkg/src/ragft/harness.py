"""Rate-distortion and complexity evaluation."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import coding
from .errors import CountMismatchError
from .hierarchy import BlockSchedule, PartitionTree
from .io import VoxelizedCloud
from .spectral import DEFAULT_THRESHOLD
from .transforms import Backend, SpectralConfig, plan_for

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "schema", "backend", "schedule", "step", "rate_bpv", "psnr_y",
    "bits", "points", "frames", "bridged_blocks",
)
LOSSLESS = "lossless"


def psnr_y(originals: Sequence[np.ndarray], decoded: Sequence[np.ndarray]) -> float:
    """Frame-averaged luma PSNR in dB; ``inf`` for perfect reconstruction.

    Frames are 1-D luma arrays or ``(N, C)`` arrays whose first column is Y.
    """
    if len(originals) != len(decoded) or not originals:
        raise CountMismatchError("need the same, nonzero number of original and decoded frames")
    total = 0.0
    for y, y_hat in zip(originals, decoded):
        y = np.asarray(y, dtype=np.float64)
        y_hat = np.asarray(y_hat, dtype=np.float64)
        if y.ndim == 2:
            y = y[:, 0]
        if y_hat.ndim == 2:
            y_hat = y_hat[:, 0]
        if len(y) != len(y_hat):
            raise CountMismatchError(f"frame has {len(y)} original and {len(y_hat)} decoded points")
        total += float(np.sum((y - y_hat) ** 2)) / (255.0**2 * len(y))
    mse = total / len(originals)
    if mse == 0:
        return math.inf
    return -10.0 * math.log10(mse)


def rate_bpv(streams: Sequence, counts: Sequence[int]) -> float:
    """Total coded bits (header included) over total points."""
    if not streams or len(streams) != len(counts):
        raise CountMismatchError("need one point count per stream")
    bits = 0
    for s in streams:
        bits += s.n_bits if isinstance(s, coding.Bitstream) else 8 * len(s)
    return bits / sum(counts)


@dataclass
class ComplexityReport:
    """Sum of cubed block sizes per cloud, with a per-level breakdown."""

    per_cloud: list[int]
    counts: list[int]
    per_level: list[list[int]] = field(default_factory=list)

    @property
    def aggregate(self) -> float:
        return sum(self.per_cloud) / sum(self.counts)

    def combine(self, other: "ComplexityReport") -> "ComplexityReport":
        return ComplexityReport(
            self.per_cloud + other.per_cloud, self.counts + other.counts, self.per_level + other.per_level
        )


def complexity_proxy(tree: PartitionTree | Iterable[PartitionTree]) -> ComplexityReport:
    trees = [tree] if isinstance(tree, PartitionTree) else list(tree)
    report = ComplexityReport([], [], [])
    for t in trees:
        levels = [int(np.sum(t.block_sizes(l).astype(np.int64) ** 3)) for l in range(t.levels)]
        report.per_cloud.append(sum(levels))
        report.counts.append(t.n_points)
        report.per_level.append(levels)
    return report


@dataclass
class RDPoint:
    step: float
    rate: float
    psnr_y: float
    backend: str
    schedule: str
    bits: int = 0
    points: int = 0
    frames: int = 1
    bridged_blocks: int = 0

    def row(self) -> dict:
        d = asdict(self)
        psnr = LOSSLESS if math.isinf(self.psnr_y) else f"{self.psnr_y:.6f}"
        return {
            "schema": CSV_SCHEMA_VERSION, "backend": d["backend"], "schedule": d["schedule"],
            "step": repr(self.step), "rate_bpv": f"{self.rate:.6f}", "psnr_y": psnr,
            "bits": self.bits, "points": self.points, "frames": self.frames,
            "bridged_blocks": self.bridged_blocks,
        }


def describe_schedule(backend: Backend, schedule: BlockSchedule | None, block: int | None) -> str:
    if backend is Backend.RAGFT and schedule is not None:
        return "-".join(str(b) for b in schedule.sizes)
    if backend is Backend.BLOCKGFT:
        return str(block)
    return "2x2x2-separable"


def rd_sweep(
    clouds: VoxelizedCloud | Sequence[VoxelizedCloud],
    backend: Backend | str,
    steps: Sequence[float],
    schedule: BlockSchedule | None = None,
    block: int | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[RDPoint]:
    """Encode and decode every frame at each step; one :class:`RDPoint` per step.

    Block bases depend on geometry only, so they are computed once per frame and
    shared by encoder and decoder.
    """
    backend = Backend(backend)
    frames = [clouds] if isinstance(clouds, VoxelizedCloud) else list(clouds)
    threshold = coding.round_threshold(threshold)
    prepared = []
    bridged = 0
    for frame in frames:
        ordered, _ = coding.morton_sorted(frame)
        sched = schedule
        if backend is Backend.RAGFT and sched is None:
            sched = BlockSchedule.dyadic(frame.depth)
        plan = plan_for(ordered, backend, sched, block, SpectralConfig(threshold))
        bridged += plan.bridged_blocks
        prepared.append((ordered, plan, sched))
    label_sched = prepared[0][2] if prepared else schedule
    points = []
    for step in steps:
        streams, originals, decoded = [], [], []
        for ordered, plan, sched in prepared:
            stream = coding.encode(ordered, backend, sched, step, threshold, block, plan=plan)
            data = stream.to_bytes()
            rec = coding.decode(data, ordered.coords, ordered.weights, plan=plan)
            streams.append(data)
            originals.append(ordered.attributes)
            decoded.append(rec)
        counts = [f.count for f in frames]
        points.append(
            RDPoint(
                step=float(step),
                rate=rate_bpv(streams, counts),
                psnr_y=psnr_y(originals, decoded),
                backend=backend.value,
                schedule=describe_schedule(backend, label_sched, block),
                bits=sum(8 * len(s) for s in streams),
                points=sum(counts),
                frames=len(frames),
                bridged_blocks=bridged,
            )
        )
    return points


def write_csv(points: Sequence[RDPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for p in points:
            writer.writerow(p.row())


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def psnr_at_rates(points: Sequence[RDPoint], rates: Sequence[float]) -> np.ndarray:
    """Piecewise-linear PSNR over log-rate, evaluated at ``rates``.

    Rates outside the covered range give ``nan``.
    """
    pts = sorted((p.rate, p.psnr_y) for p in points)
    r = np.log([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    q = np.log(np.asarray(rates, dtype=np.float64))
    out = np.interp(q, r, y)
    out[(q < r[0] - 1e-12) | (q > r[-1] + 1e-12)] = np.nan
    return out
