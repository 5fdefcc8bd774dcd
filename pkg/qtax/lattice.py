"""Discrete 1+1 dimensional spacetime: sites, regions, lightcones and shells."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator

import networkx as nx

from .errors import InvalidArgument, NotApplicable

logger = logging.getLogger(__name__)


class Arrow(str, Enum):
    FORWARD = "forward"
    NONE = "none"


class ConePart(str, Enum):
    FULL = "full"
    PAST = "past"
    FUTURE = "future"


@dataclass(frozen=True, slots=True, order=True)
class Site:
    x: int
    t: int

    def shifted(self, dx: int, dt: int) -> "Site":
        return Site(self.x + dx, self.t + dt)

    def __str__(self) -> str:
        return f"({self.x},{self.t})"


@dataclass(frozen=True, slots=True)
class Region:
    """Finite set of lattice sites; a single point is a valid region."""

    sites: frozenset[Site]

    @classmethod
    def of(cls, sites: Iterable[Site | tuple[int, int]]) -> "Region":
        return cls(frozenset(s if isinstance(s, Site) else Site(*s) for s in sites))

    @classmethod
    def point(cls, x: int, t: int) -> "Region":
        return cls(frozenset({Site(x, t)}))

    def __iter__(self) -> Iterator[Site]:
        return iter(sorted(self.sites))

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site: object) -> bool:
        return site in self.sites

    def is_empty(self) -> bool:
        return not self.sites

    def issubset(self, other: "Region") -> bool:
        return self.sites <= other.sites

    def intersects(self, other: "Region") -> bool:
        return not self.sites.isdisjoint(other.sites)

    def union(self, other: "Region") -> "Region":
        return Region(self.sites | other.sites)

    def intersection(self, other: "Region") -> "Region":
        return Region(self.sites & other.sites)

    def difference(self, other: "Region") -> "Region":
        return Region(self.sites - other.sites)

    def times(self) -> tuple[int, ...]:
        return tuple(sorted({s.t for s in self.sites}))

    @property
    def min_time(self) -> int:
        return min(s.t for s in self.sites)

    @property
    def max_time(self) -> int:
        return max(s.t for s in self.sites)

    def shifted(self, dx: int, dt: int) -> "Region":
        return Region(frozenset(s.shifted(dx, dt) for s in self.sites))

    def label(self) -> str:
        return "{" + ", ".join(str(s) for s in self) + "}"

    def __str__(self) -> str:
        return str(next(iter(self.sites))) if len(self.sites) == 1 else self.label()


@dataclass(frozen=True, slots=True)
class Lattice:
    x_min: int
    x_max: int
    t_min: int
    t_max: int
    c: int = 1
    arrow: Arrow = Arrow.FORWARD

    spatial_dim = 1

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.t_min > self.t_max:
            raise InvalidArgument(
                f"Lattice bounds are inverted: x:[{self.x_min},{self.x_max}] t:[{self.t_min},{self.t_max}]."
            )
        if self.c < 1:
            raise InvalidArgument(f"Lightcone slope must be a positive integer, got {self.c}.")

    def contains(self, site: Site) -> bool:
        return self.x_min <= site.x <= self.x_max and self.t_min <= site.t <= self.t_max

    def covers(self, region: Region) -> bool:
        return all(self.contains(s) for s in region.sites)

    def sites(self) -> Iterator[Site]:
        for t in range(self.t_min, self.t_max + 1):
            for x in range(self.x_min, self.x_max + 1):
                yield Site(x, t)

    def times(self) -> range:
        return range(self.t_min, self.t_max + 1)

    def shifted(self, dx: int, dt: int) -> "Lattice":
        return Lattice(self.x_min + dx, self.x_max + dx, self.t_min + dt, self.t_max + dt, self.c, self.arrow)

    def mirror(self, region: Region) -> Region:
        """Reflect a region in time about the middle of the lattice."""
        return Region(frozenset(Site(s.x, self.t_max + self.t_min - s.t) for s in region.sites))

    def describe(self) -> str:
        return (
            f"lattice x:[{self.x_min},{self.x_max}] t:[{self.t_min},{self.t_max}] "
            f"c:{self.c} arrow:{self.arrow.value}"
        )


def in_cone(site: Site, region: Region, c: int, part: ConePart = ConePart.FULL) -> bool:
    """Unclipped cone membership of ``site`` relative to ``region``."""
    for origin in region.sites:
        dt = site.t - origin.t
        if abs(site.x - origin.x) > c * abs(dt):
            continue
        if part is ConePart.PAST and dt > 0:
            continue
        if part is ConePart.FUTURE and dt < 0:
            continue
        return True
    return False


def _require_region(region: Region, lat: Lattice, label: str) -> None:
    if region.is_empty():
        raise InvalidArgument(f"{label} must be a nonempty region.")
    if not lat.covers(region):
        raise InvalidArgument(f"{label} {region.label()} lies outside the lattice bounds.")


@lru_cache(maxsize=4096)
def lightcone(region: Region, lat: Lattice, part: ConePart = ConePart.FULL) -> Region:
    """Return L(A), L_p(A) or L_f(A) clipped to the lattice bounds."""
    _require_region(region, lat, "Lightcone origin")
    part = ConePart(part)
    if part is not ConePart.FULL and lat.arrow is Arrow.NONE:
        raise NotApplicable("acausal: past and future are undefined without an arrow of time")
    return Region(frozenset(s for s in lat.sites() if in_cone(s, region, lat.c, part)))


def spacelike_separated(a: Region, b: Region, lat: Lattice) -> bool:
    _require_region(a, lat, "First region")
    _require_region(b, lat, "Second region")
    return not b.intersects(lightcone(a, lat))


@dataclass(frozen=True, slots=True)
class Shell:
    """Boundary of the rectangle ``[x0, x1] x [t0, t1]``, clipped to the lattice."""

    corners: tuple[int, int, int, int]
    region: Region

    def boundary(self) -> Iterator[Site]:
        """All boundary sites of the rectangle, including those off the lattice."""
        x0, t0, x1, t1 = self.corners
        for t in range(t0, t1 + 1):
            for x in range(x0, x1 + 1):
                if x in (x0, x1) or t in (t0, t1):
                    yield Site(x, t)

    def cuts_lightcone(self, origin: Region, lat: Lattice) -> bool:
        """True when the shell meets the lightcone of ``origin`` only inside the lattice."""
        return not any(
            not lat.contains(site) and in_cone(site, origin, lat.c) for site in self.boundary()
        )


@lru_cache(maxsize=64)
def _adjacency(lat: Lattice) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(lat.sites())
    for site in lat.sites():
        for dx, dt in ((1, -1), (1, 0), (1, 1), (0, 1)):
            other = site.shifted(dx, dt)
            if lat.contains(other):
                graph.add_edge(site, other)
    return graph


def separates(shell: Region, a: Region, b: Region, lat: Lattice) -> bool:
    """Graph check that removing ``shell`` disconnects ``a`` from ``b`` (king moves)."""
    graph = _adjacency(lat)
    view = nx.restricted_view(graph, shell.sites, [])
    reached: set[Site] = set()
    for site in a.sites:
        if site not in reached and site not in shell.sites:
            reached |= nx.node_connected_component(view, site)
    return reached.isdisjoint(b.sites)


@lru_cache(maxsize=4096)
def enclosing_shells(a: Region, b: Region, lat: Lattice) -> tuple[Shell, ...]:
    """Every rectangle shell with ``a`` in its interior and ``b`` outside, by corners."""
    _require_region(a, lat, "Enclosed region")
    _require_region(b, lat, "Excluded region")
    if a.intersects(b):
        raise InvalidArgument("Shielding surfaces need disjoint regions.")

    ax = [s.x for s in a.sites]
    at = [s.t for s in a.sites]
    shells: list[Shell] = []
    for x0 in range(lat.x_min - 1, min(ax)):
        for t0 in range(lat.t_min - 1, min(at)):
            for x1 in range(max(ax) + 1, lat.x_max + 2):
                for t1 in range(max(at) + 1, lat.t_max + 2):
                    if any(x0 <= s.x <= x1 and t0 <= s.t <= t1 for s in b.sites):
                        continue
                    corners = (x0, t0, x1, t1)
                    ring = Region(
                        frozenset(
                            s for s in Shell(corners, Region(frozenset())).boundary() if lat.contains(s)
                        )
                    )
                    if not separates(ring, a, b, lat):
                        logger.warning("Shell %s does not separate %s from %s; skipped", corners, a, b)
                        continue
                    shells.append(Shell(corners, ring))
    return tuple(shells)


def shielding_surfaces(a: Region, b: Region, lat: Lattice) -> list[Region]:
    """Distinct shells around ``a`` that exclude ``b``, ordered by rectangle corners."""
    seen: set[Region] = set()
    surfaces: list[Region] = []
    for shell in enclosing_shells(a, b, lat):
        if shell.region not in seen:
            seen.add(shell.region)
            surfaces.append(shell.region)
    return surfaces
