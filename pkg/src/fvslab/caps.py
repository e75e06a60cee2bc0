"""Enumeration caps.

The density constraint families have no known polynomial separation oracle, so
their builders enumerate vertex subsets and refuse inputs above a cap rather
than silently truncating.  Caps can be overridden through the FVS_LAB_CAPS
environment variable, e.g. ``FVS_LAB_CAPS="subset=20,cycles=14"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Caps:
    subset_enum: int = 18       # weak/strong density subset enumeration
    cycle_enum: int = 12        # simple-cycle enumeration
    brute_force: int = 20       # FVS/PFDS brute-force optimum
    brute_mc2pt: int = 12       # minimum-cost 2-pseudotree brute force
    cut_iterations: int = 10000  # cutting-plane rounds

    _ENV_KEYS = {
        "subset": "subset_enum",
        "cycles": "cycle_enum",
        "brute": "brute_force",
        "mc2pt": "brute_mc2pt",
        "cut_iters": "cut_iterations",
    }

    @classmethod
    def from_env(cls, env: str | None = None) -> "Caps":
        text = os.environ.get("FVS_LAB_CAPS", "") if env is None else env
        caps = cls()
        if not text.strip():
            return caps
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            key, _, value = item.partition("=")
            field = cls._ENV_KEYS.get(key.strip())
            if field is None:
                raise ValueError(f"unknown cap {key!r} (known: {sorted(cls._ENV_KEYS)})")
            caps = replace(caps, **{field: int(value)})
        return caps


class CapExceeded(Exception):
    """An enumeration-based operation was asked to run above its cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


def check_cap(what: str, size: int, cap: int) -> None:
    if size > cap:
        raise CapExceeded(what, size, cap)
