"""Regions, latency matrix and the per-message transfer delay."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import yaml

BYTES_PER_MB = 1_000_000


class UnknownRegion(KeyError):
    pass


class RegionDataError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    region_id: str
    download_mbps: float
    upload_mbps: float
    node_count: int = 0
    mine_power_share: float = 0.0

    def __post_init__(self):
        if not self.download_mbps > 0 or not self.upload_mbps > 0:
            raise RegionDataError(f"region {self.region_id}: bandwidth must be > 0")
        if self.node_count < 0:
            raise RegionDataError(f"region {self.region_id}: node_count must be >= 0")
        if not 0.0 <= self.mine_power_share <= 1.0:
            raise RegionDataError(f"region {self.region_id}: mine_power_share must be in [0, 1]")


class LatencyMatrix:
    """One-way latency in milliseconds for every ordered pair of regions."""

    def __init__(self, latency_ms: dict[tuple[str, str], float]):
        for pair, ms in latency_ms.items():
            if ms < 0:
                raise RegionDataError(f"negative latency for {pair}")
        self.latency_ms = dict(latency_ms)

    @classmethod
    def from_nested(cls, table: dict[str, dict[str, float]], symmetric: bool = True) -> "LatencyMatrix":
        pairs: dict[tuple[str, str], float] = {}
        for a, row in table.items():
            for b, ms in row.items():
                pairs[(a, b)] = float(ms)
        if symmetric:
            for (a, b), ms in list(pairs.items()):
                pairs.setdefault((b, a), ms)
        return cls(pairs)

    def get(self, a: str, b: str) -> float:
        try:
            return self.latency_ms[(a, b)]
        except KeyError:
            raise UnknownRegion(f"no latency entry for ({a}, {b})") from None

    def regions(self) -> set[str]:
        return {a for a, _ in self.latency_ms} | {b for _, b in self.latency_ms}


def _exact(x) -> Fraction:
    # decimal reading of floats, so 0.1 means 1/10
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@lru_cache(maxsize=65536)
def _delay_steps(latency_ms, size_bytes: int, bandwidth_mbps, seconds_per_step) -> int:
    seconds = _exact(latency_ms) / 1000 + Fraction(size_bytes) / (_exact(bandwidth_mbps) * BYTES_PER_MB)
    return max(1, math.ceil(seconds / _exact(seconds_per_step)))


def compute_delay_steps(
    sender_region: Region,
    recipient_region: Region,
    latency: LatencyMatrix,
    size_bytes: int,
    seconds_per_step: float,
) -> int:
    """Latency plus size over the bottleneck bandwidth, rounded up to whole steps (min 1).

    Arithmetic is exact so that e.g. 0.3 s at 0.1 s/step gives 3 steps, not 4.
    """
    if size_bytes < 0:
        raise ValueError("size_bytes must be >= 0")
    if not seconds_per_step > 0:
        raise ValueError("seconds_per_step must be > 0")
    ms = latency.get(sender_region.region_id, recipient_region.region_id)
    bandwidth = min(sender_region.upload_mbps, recipient_region.download_mbps)
    return _delay_steps(ms, int(size_bytes), bandwidth, seconds_per_step)


@dataclass
class RegionDataset:
    regions: dict[str, Region]
    latency: LatencyMatrix

    def __post_init__(self):
        missing = [
            (a, b)
            for a in self.regions
            for b in self.regions
            if (a, b) not in self.latency.latency_ms
        ]
        if missing:
            raise RegionDataError(f"latency matrix is missing pairs: {missing[:5]}")
        total = sum(r.mine_power_share for r in self.regions.values())
        if total > 1.0 + 1e-9:
            raise RegionDataError(f"mine_power_share sums to {total:.4f} > 1")

    def subset(self, region_ids) -> "RegionDataset":
        region_ids = list(region_ids)
        for rid in region_ids:
            if rid not in self.regions:
                raise UnknownRegion(rid)
        return RegionDataset({rid: self.regions[rid] for rid in region_ids}, self.latency)


def load_regions(path: str | Path) -> RegionDataset:
    """Read a region dataset file.

    Layout::

        regions:
          - {region_id: us, download_mbps: 20.1, upload_mbps: 7.5,
             node_count: 2300, mine_power_share: 0.07}
        latency_ms:
          us: {us: 30, de: 110}
          de: {de: 20}

    Latency entries given for only one direction are mirrored.
    """
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict) or "regions" not in raw or "latency_ms" not in raw:
        raise RegionDataError(f"{path}: expected 'regions' and 'latency_ms' tables")
    regions = {}
    for row in raw["regions"]:
        try:
            region = Region(
                region_id=str(row["region_id"]),
                download_mbps=float(row["download_mbps"]),
                upload_mbps=float(row["upload_mbps"]),
                node_count=int(row.get("node_count", 0)),
                mine_power_share=float(row.get("mine_power_share", 0.0)),
            )
        except KeyError as exc:
            raise RegionDataError(f"{path}: region row missing column {exc}") from None
        if region.region_id in regions:
            raise RegionDataError(f"{path}: duplicate region {region.region_id}")
        regions[region.region_id] = region
    latency = LatencyMatrix.from_nested(
        {str(a): {str(b): v for b, v in row.items()} for a, row in raw["latency_ms"].items()}
    )
    return RegionDataset(regions, latency)
