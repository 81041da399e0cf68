"""Sampled profile curves with per-point certificates, and their CSV form."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError

CERTIFICATES = ("exact", "lower", "upper")
KINDS = ("isoperimetric", "separation")


@dataclass(frozen=True)
class ProfilePoint:
    size: int
    value: Fraction
    certificate: str

    def __post_init__(self):
        if self.certificate not in CERTIFICATES:
            raise InputError(f"unknown certificate {self.certificate!r}")


@dataclass
class ProfileCurve:
    kind: str
    points: list[ProfilePoint]
    source: str = ""
    witnesses: dict[int, tuple[int, ...]] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown profile kind {self.kind!r}")
        sizes = [p.size for p in self.points]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InputError("profile sizes must be strictly increasing")
        exact = [p.value for p in self.points if p.certificate == "exact"]
        if any(b < a for a, b in zip(exact, exact[1:])):
            raise InputError("exact profile values must be non-decreasing")

    @property
    def sizes(self) -> list[int]:
        return [p.size for p in self.points]

    @property
    def values(self) -> list[float]:
        return [float(p.value) for p in self.points]

    def __len__(self):
        return len(self.points)

    def value_at(self, size: int) -> Fraction | None:
        """Step interpolation: value of the last point with ``point.size <= size``."""
        best = None
        for p in self.points:
            if p.size > size:
                break
            best = p.value
        return best

    def point(self, size: int) -> ProfilePoint | None:
        for p in self.points:
            if p.size == size:
                return p
        return None


def running_max_points(samples, certificate: str) -> list[ProfilePoint]:
    """Collapse ``(size, value)`` samples into a running-maximum curve."""
    by_size: dict[int, Fraction] = {}
    for size, value in samples:
        value = Fraction(value)
        if size not in by_size or value > by_size[size]:
            by_size[size] = value
    out, best = [], None
    for size in sorted(by_size):
        v = by_size[size]
        best = v if best is None or v > best else best
        out.append(ProfilePoint(size, best, certificate))
    return out


# ---------------------------------------------------------------------------
# CSV: size,value_num,value_den,certificate with "# key=value" preamble


def write_curve_csv(curve: ProfileCurve, path) -> None:
    lines = [f"# kind={curve.kind}", f"# source={curve.source}"]
    for k in sorted(curve.metadata):
        lines.append(f"# {k}={curve.metadata[k]}")
    lines.append("size,value_num,value_den,certificate")
    for p in curve.points:
        lines.append(f"{p.size},{p.value.numerator},{p.value.denominator},{p.certificate}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if curve.witnesses:
        write_witnesses(curve.witnesses, witness_path(path))


def witness_path(path) -> str:
    return os.fspath(path) + ".witnesses"


def read_curve_csv(path) -> ProfileCurve:
    meta: dict[str, str] = {}
    points = []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
                continue
            if not header_seen:
                if line != "size,value_num,value_den,certificate":
                    raise InputError(f"{path}:{lineno}: unexpected CSV header {line!r}")
                header_seen = True
                continue
            try:
                size, num, den, cert = line.split(",")
                points.append(ProfilePoint(int(size), Fraction(int(num), int(den)), cert))
            except ValueError:
                raise InputError(f"{path}:{lineno}: malformed row {line!r}") from None
    kind = meta.pop("kind", None)
    source = meta.pop("source", "")
    if kind is None:
        raise InputError(f"{path}: missing '# kind=' line")
    wpath = witness_path(path)
    witnesses = read_witnesses(wpath) if os.path.exists(wpath) else {}
    return ProfileCurve(kind, points, source, witnesses, meta)


def write_witnesses(witnesses: dict[int, tuple[int, ...]], path) -> None:
    with open(path, "w") as fh:
        for size in sorted(witnesses):
            fh.write(f"{size}: {' '.join(map(str, witnesses[size]))}\n")


def read_witnesses(path) -> dict[int, tuple[int, ...]]:
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.strip():
                size, _, rest = line.partition(":")
                out[int(size)] = tuple(int(x) for x in rest.split())
    return out
