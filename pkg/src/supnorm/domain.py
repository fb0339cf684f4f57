"""Fundamental-domain data model and its derived geometric quantities.

A domain is loaded from a JSON document (see ``load_domain``) or taken from
the built-in modular-group instance.  Once constructed it is immutable, and
all derived quantities (covolume, truncation constants, region volumes) are
pure functions of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from scipy.integrate import quad

from .geometry import GeodesicSegment, MoebiusMap, require_point

__all__ = [
    "LoadError",
    "MembershipError",
    "CuspData",
    "EllipticPoint",
    "FundamentalDomain",
    "load_domain",
    "modular_group",
    "is_modular_group",
    "covolume",
    "dimension_d2k",
    "classify",
    "shortest_geodesic_length",
    "truncation_heights",
    "diameter_upper_bound",
    "volume_region",
]

#: Samples taken per boundary segment when scanning for the minimum of
#: Im(sigma_j^{-1} z); the result is rounded down by _HEIGHT_MARGIN so the
#: reported m_Y is a true lower bound.
_BOUNDARY_SAMPLES = 512
_HEIGHT_MARGIN = 1e-9

_MEMBERSHIP_TOL = 1e-9


class LoadError(ValueError):
    """A domain document violates the schema or a domain invariant."""


class MembershipError(ValueError):
    """A point handed to a region operation lies outside the domain."""


@dataclass(frozen=True)
class CuspData:
    """A cusp together with the map sending i*infinity to it."""

    label: str
    scaling: MoebiusMap


@dataclass(frozen=True)
class EllipticPoint:
    location: complex
    order: int
    is_class_rep: bool


@dataclass(frozen=True)
class RegionConstraint:
    """One membership condition: a vertical strip or a disk complement."""

    kind: str  # "strip" | "outside_disk"
    x_min: float = 0.0
    x_max: float = 0.0
    center: float = 0.0
    radius: float = 0.0

    def holds(self, z: complex, tol: float = _MEMBERSHIP_TOL) -> bool:
        if self.kind == "strip":
            return self.x_min - tol <= z.real <= self.x_max + tol
        return abs(z - self.center) >= self.radius - tol


@dataclass(frozen=True)
class FundamentalDomain:
    """Closed connected fundamental domain of a Fuchsian group of the first kind."""

    genus: int
    boundary: tuple[GeodesicSegment, ...]
    cusps: tuple[CuspData, ...]
    elliptic: tuple[EllipticPoint, ...]
    min_hyperbolic_trace: float | None = None
    region: tuple[RegionConstraint, ...] = field(default_factory=tuple)
    bounding_rect: dict | None = None
    name: str = "domain"

    @property
    def n_cusps(self) -> int:
        return len(self.cusps)

    @property
    def cocompact(self) -> bool:
        return not self.cusps

    @property
    def torsionfree(self) -> bool:
        return not self.elliptic

    def elliptic_class_reps(self) -> tuple[EllipticPoint, ...]:
        return tuple(e for e in self.elliptic if e.is_class_rep)

    def theta_gamma(self) -> float:
        """Smallest rotation angle 2*pi/n over all elliptic points (pi if none)."""
        if not self.elliptic:
            return math.pi
        return min(2.0 * math.pi / e.order for e in self.elliptic)

    def elliptic_excess(self) -> int:
        """Sum of (order - 1) over the full elliptic list."""
        return sum(e.order - 1 for e in self.elliptic)

    def contains(self, z: complex, tol: float = _MEMBERSHIP_TOL) -> bool:
        z = require_point(z)
        if not self.region:
            raise LoadError(f"domain {self.name!r} carries no region description")
        return all(c.holds(z, tol) for c in self.region)

    def strip_bounds(self) -> tuple[float, float]:
        strips = [c for c in self.region if c.kind == "strip"]
        if not strips:
            raise LoadError(f"domain {self.name!r} has no strip constraint")
        return max(c.x_min for c in strips), min(c.x_max for c in strips)

    def floor_height(self, x: float) -> float:
        """Lower y-boundary of the region above abscissa x (0 if unconstrained)."""
        lo = 0.0
        for c in self.region:
            if c.kind == "outside_disk":
                gap = c.radius**2 - (x - c.center) ** 2
                if gap > 0.0:
                    lo = max(lo, math.sqrt(gap))
        return lo


# ---------------------------------------------------------------------------
# Loading and validation


def _as_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise LoadError(f"{what} must be a number, got {value!r}")
    return float(value)


def _parse_scaling(rows, index: int) -> MoebiusMap:
    try:
        (a, b), (c, d) = rows
    except (TypeError, ValueError):
        raise LoadError(f"cusp {index}: scaling matrix must be two rows of two numbers")
    try:
        return MoebiusMap(float(a), float(b), float(c), float(d))
    except ValueError as exc:
        raise LoadError(f"cusp {index}: {exc}") from exc


def _parse_segment(desc: dict, index: int) -> GeodesicSegment:
    kind = desc.get("type")
    try:
        if kind == "vertical":
            return GeodesicSegment.vertical(
                _as_number(desc["x"], "vertical x"),
                _as_number(desc["y_min"], "vertical y_min"),
                _as_number(desc["y_max"], "vertical y_max") if "y_max" in desc else math.inf,
            )
        if kind == "arc":
            return GeodesicSegment.arc(
                _as_number(desc["center"], "arc center"),
                _as_number(desc["radius"], "arc radius"),
                _as_number(desc["x_min"], "arc x_min"),
                _as_number(desc["x_max"], "arc x_max"),
            )
    except (KeyError, ValueError) as exc:
        raise LoadError(f"boundary segment {index}: {exc}") from exc
    raise LoadError(f"boundary segment {index}: unknown type {kind!r}")


def _parse_constraint(desc: dict, index: int) -> RegionConstraint:
    kind = desc.get("type")
    try:
        if kind == "strip":
            return RegionConstraint(
                kind="strip",
                x_min=_as_number(desc["x_min"], "strip x_min"),
                x_max=_as_number(desc["x_max"], "strip x_max"),
            )
        if kind == "outside_disk":
            return RegionConstraint(
                kind="outside_disk",
                center=_as_number(desc["center"], "disk center"),
                radius=_as_number(desc["radius"], "disk radius"),
            )
    except KeyError as exc:
        raise LoadError(f"region constraint {index}: missing field {exc}") from exc
    raise LoadError(f"region constraint {index}: unknown type {kind!r}")


def load_domain(source) -> FundamentalDomain:
    """Build a validated FundamentalDomain from a JSON file path or a dict."""
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        except OSError as exc:
            raise LoadError(f"cannot read domain file {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise LoadError(f"domain file {source} is not valid JSON: {exc}") from exc
    elif isinstance(source, dict):
        doc = source
    else:
        raise LoadError(f"unsupported domain source {type(source).__name__}")

    if "genus" not in doc:
        raise LoadError("domain document lacks the required field 'genus'")
    genus = doc["genus"]
    if isinstance(genus, bool) or not isinstance(genus, int) or genus < 0:
        raise LoadError(f"genus must be a nonnegative integer, got {genus!r}")

    cusps = tuple(
        CuspData(label=f"cusp{i + 1}", scaling=_parse_scaling(rows, i + 1))
        for i, rows in enumerate(doc.get("cusps", []))
    )

    elliptic = []
    for i, desc in enumerate(doc.get("elliptic", [])):
        try:
            x = _as_number(desc["x"], "elliptic x")
            y = _as_number(desc["y"], "elliptic y")
            order = desc["order"]
            rep = bool(desc.get("is_class_rep", True))
        except KeyError as exc:
            raise LoadError(f"elliptic point {i + 1}: missing field {exc}") from exc
        if isinstance(order, bool) or not isinstance(order, int) or order < 2:
            raise LoadError(f"elliptic point {i + 1}: order must be an integer >= 2, got {order!r}")
        if y <= 0.0:
            raise LoadError(f"elliptic point {i + 1}: must lie in the upper half-plane")
        elliptic.append(EllipticPoint(location=complex(x, y), order=order, is_class_rep=rep))
    elliptic = tuple(elliptic)

    boundary = tuple(_parse_segment(s, i + 1) for i, s in enumerate(doc.get("boundary", [])))
    region = tuple(_parse_constraint(c, i + 1) for i, c in enumerate(doc.get("region", [])))

    trace = doc.get("min_hyperbolic_trace")
    if trace is not None:
        trace = _as_number(trace, "min_hyperbolic_trace")

    domain = FundamentalDomain(
        genus=genus,
        boundary=boundary,
        cusps=cusps,
        elliptic=elliptic,
        min_hyperbolic_trace=trace,
        region=region,
        bounding_rect=doc.get("bounding_rect"),
        name=str(doc.get("name", "domain")),
    )
    _validate(domain)
    return domain


def _validate(domain: FundamentalDomain) -> None:
    gb = (
        (2 * domain.genus - 2)
        + domain.n_cusps
        + sum(1.0 - 1.0 / e.order for e in domain.elliptic_class_reps())
    )
    if gb <= 0.0:
        raise LoadError(
            f"domain {domain.name!r} has nonpositive Gauss-Bonnet sum {gb:.6g}; "
            "no Fuchsian group of the first kind has this signature"
        )
    if domain.region:
        for i, e in enumerate(domain.elliptic):
            if not domain.contains(e.location, tol=1e-6):
                raise LoadError(
                    f"elliptic point {i + 1} at {e.location} lies outside the domain region"
                )


_PSL2Z_RESOURCE = "psl2z.json"


def modular_group() -> FundamentalDomain:
    """The built-in PSL(2,Z) domain: |z| >= 1, |Re z| <= 1/2."""
    with resources.files("supnorm.data").joinpath(_PSL2Z_RESOURCE).open("r") as fh:
        return load_domain(json.load(fh))


def is_modular_group(domain: FundamentalDomain) -> bool:
    """Whether a loaded domain coincides with the built-in PSL(2,Z) instance."""
    ref = modular_group()
    if (domain.genus, domain.n_cusps, len(domain.elliptic)) != (0, 1, 3):
        return False
    if not domain.cusps[0].scaling.is_identity(tol=1e-9):
        return False
    got = sorted((e.location.real, e.location.imag, e.order) for e in domain.elliptic)
    want = sorted((e.location.real, e.location.imag, e.order) for e in ref.elliptic)
    for (gx, gy, go), (wx, wy, wo) in zip(got, want):
        if go != wo or abs(gx - wx) > 1e-9 or abs(gy - wy) > 1e-9:
            return False
    return domain.min_hyperbolic_trace is not None and abs(domain.min_hyperbolic_trace - 3.0) < 1e-9


# ---------------------------------------------------------------------------
# Derived quantities


def covolume(domain: FundamentalDomain) -> float:
    """Hyperbolic volume 2*pi*((2g-2) + h + sum over classes of (1 - 1/n))."""
    total = (2 * domain.genus - 2) + domain.n_cusps
    total += sum(1.0 - 1.0 / e.order for e in domain.elliptic_class_reps())
    return 2.0 * math.pi * total


def dimension_d2k(domain: FundamentalDomain, k: int) -> int:
    """Dimension of the weight-2k cusp form space, for k >= 2.

    The closed formula (2k-1)(g-1) + (k-1)h + sum of floor(k(1-1/n)) is wrong
    at k = 1 (weight 2 has dimension g), so that weight is refused here.
    """
    if k < 2:
        raise ValueError(f"dimension formula requires k >= 2, got k={k}")
    dim = (2 * k - 1) * (domain.genus - 1) + (k - 1) * domain.n_cusps
    dim += sum(math.floor(k * (1.0 - 1.0 / e.order)) for e in domain.elliptic_class_reps())
    return dim


def shortest_geodesic_length(domain: FundamentalDomain) -> float:
    """Length of the shortest closed geodesic, from the minimal hyperbolic trace."""
    trace = domain.min_hyperbolic_trace
    if trace is None:
        raise ValueError(
            f"domain {domain.name!r} carries no min_hyperbolic_trace; the systole is an input"
        )
    if trace <= 2.0:
        raise ValueError(f"trace {trace} does not belong to a hyperbolic element (need > 2)")
    return 2.0 * math.acosh(trace / 2.0)


def classify(domain: FundamentalDomain, Y: float, z: complex) -> int:
    """Region tag of z: 0 for the compact part, j >= 1 for the j-th cusp zone.

    z must lie in the domain; the tag is j exactly when Im(sigma_j^{-1} z) >= Y.
    """
    z = require_point(z)
    if not domain.contains(z):
        raise MembershipError(f"point {z} is not in the fundamental domain")
    for j, cusp in enumerate(domain.cusps, start=1):
        if cusp.scaling.inverse().apply(z).imag >= Y - 1e-12:
            return j
    return 0


def _truncated_boundary(domain: FundamentalDomain, Y: float) -> list[GeodesicSegment]:
    """Boundary segments of the truncated region (rays cut at height Y)."""
    pieces = []
    for seg in domain.boundary:
        if seg.kind == "vertical":
            top = min(seg.y_max, Y)
            if top > seg.y_min:
                pieces.append(GeodesicSegment.vertical(seg.foot, seg.y_min, top))
        else:
            pieces.append(seg)
    return pieces


def truncation_heights(domain: FundamentalDomain, Y: float) -> tuple[float, float]:
    """Constants (m_Y, M_Y) framing Im(sigma_j^{-1} z) on the truncated region.

    m_Y is a sampled boundary minimum rounded down (the height function is
    harmonic, so its minimum over the compact region sits on the boundary);
    M_Y equals Y by construction of the cusp zones.
    """
    if domain.cocompact:
        raise ValueError("truncation heights only apply to domains with cusps")
    lowest = Y
    inverses = [c.scaling.inverse() for c in domain.cusps]
    for seg in _truncated_boundary(domain, Y):
        for p in seg.sample(_BOUNDARY_SAMPLES):
            for inv in inverses:
                h = inv.apply(p).imag
                if h < lowest:
                    lowest = h
    m_y = lowest - _HEIGHT_MARGIN
    if not 0.0 < m_y < Y:
        raise ValueError(f"degenerate truncation: m_Y={m_y!r} against Y={Y!r}")
    return m_y, Y


def _base_chart_ok(domain: FundamentalDomain) -> None:
    if not domain.region:
        raise ValueError(
            f"domain {domain.name!r} has no region description; region quadrature unavailable"
        )
    for cusp in domain.cusps:
        if not cusp.scaling.is_identity(tol=1e-9):
            raise ValueError(
                "region quadrature supports cusps placed at infinity in the base chart; "
                f"{cusp.label} has a nontrivial scaling map"
            )


def diameter_upper_bound(domain: FundamentalDomain, Y: float) -> float:
    """Diameter bound from a bounding rectangle [x0,x1] x [a,b] with b = Y.

    Any two points z, w of the rectangle satisfy |z-w|^2 <= w^2 + (b-a)^2 and
    Im(z) Im(w) >= a^2, so arccosh(1 + (w^2+(b-a)^2)/(2a^2)) bounds the
    diameter of the truncated region from above.
    """
    if domain.bounding_rect is not None:
        r = domain.bounding_rect
        try:
            x0, x1 = float(r["x_min"]), float(r["x_max"])
            a = float(r["y_min"])
            b = min(float(r["y_max"]), Y) if "y_max" in r else Y
        except KeyError as exc:
            raise ValueError(f"bounding_rect misses field {exc}") from exc
    else:
        if domain.cocompact:
            raise ValueError(
                f"cocompact domain {domain.name!r} needs an explicit bounding_rect"
            )
        _base_chart_ok(domain)
        x0, x1 = domain.strip_bounds()
        a, _ = truncation_heights(domain, Y)
        b = Y
    if not (0.0 < a <= b):
        raise ValueError(f"bounding rectangle heights are degenerate: a={a}, b={b}")
    width = x1 - x0
    return math.acosh(1.0 + (width**2 + (b - a) ** 2) / (2.0 * a * a))


def volume_region(domain: FundamentalDomain, Y: float | None = None) -> float:
    """Hyperbolic volume of the region truncated at height Y (full domain if None).

    The area form dx dy / y^2 integrates exactly in y between the region floor
    and the truncation height, which leaves a one-dimensional adaptive
    quadrature in x; this is the (x, 1/y) substitution, under which the
    improper cusp direction becomes a finite interval.
    """
    if domain.cocompact:
        return covolume(domain)
    _base_chart_ok(domain)
    x0, x1 = domain.strip_bounds()
    cap = math.inf if Y is None else Y

    def column(x: float) -> float:
        lo = domain.floor_height(x)
        if lo <= 0.0:
            raise ValueError(f"region is not bounded away from the real axis at x={x}")
        if cap <= lo:
            return 0.0
        return 1.0 / lo - (0.0 if math.isinf(cap) else 1.0 / cap)

    breaks = sorted(
        {x0, x1}
        | {
            v
            for c in domain.region
            if c.kind == "outside_disk"
            for v in (c.center - c.radius, c.center, c.center + c.radius)
            if x0 < v < x1
        }
    )
    total = 0.0
    achieved = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, err = quad(column, lo, hi, epsabs=1e-10, epsrel=1e-8, limit=300)
        total += val
        achieved += err
    if achieved > max(1e-8, 1e-6 * abs(total)):
        raise ValueError(
            f"volume quadrature did not converge: estimate {total!r}, error {achieved!r}"
        )
    if total <= 0.0:
        raise ValueError(
            f"truncation height {Y} sits below the domain floor; the region is empty"
        )
    return total
