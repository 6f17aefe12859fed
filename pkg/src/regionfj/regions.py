"""Regions: ``Null`` and one ``Created@l`` per allocation label."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional

from .syntax import Program, fields_of


@dataclass(frozen=True, order=True)
class Region:
    label: Optional[str] = None  # None is the Null region

    @property
    def is_null(self) -> bool:
        return self.label is None

    def __str__(self) -> str:
        return "Null" if self.label is None else f"Created@{self.label}"

    __repr__ = __str__


NULL = Region()


def created(label: str) -> Region:
    return Region(label)


def parse_region(text: str) -> Region:
    if text == "Null":
        return NULL
    if text.startswith("Created@"):
        return Region(text[len("Created@"):])
    raise ValueError(f"not a region: {text!r}")


def region_key(r: Region) -> tuple:
    return (r.label is not None, r.label or "")


@dataclass(frozen=True)
class RegionUniverse:
    regions: List[Region]
    classes: Dict[Region, FrozenSet[str]]
    fields: Dict[Region, FrozenSet[str]]

    def cls_of(self, r: Region) -> FrozenSet[str]:
        return self.classes.get(r, frozenset())

    def fld_of(self, r: Region) -> FrozenSet[str]:
        return self.fields.get(r, frozenset())


def region_universe(p: Program) -> RegionUniverse:
    regions = [NULL] + [Region(l) for l in sorted(p.label_class)]
    classes = {r: frozenset() if r.is_null else frozenset({p.label_class[r.label]}) for r in regions}
    fields = {}
    for r in regions:
        fs: set = set()
        for c in classes[r]:
            fs |= set(fields_of(p, c))
        fields[r] = frozenset(fs)
    return RegionUniverse(regions, classes, fields)
