"""Stokes multipliers ``s_k``, ``k mod 7``, and the tritronquee presets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = ("typeI", "typeII")


@dataclass(frozen=True)
class StokesVector:
    """Seven multipliers indexed by ``k = -3..3`` and extended 7-periodically.

    Internally ``s[k % 7]`` is stored, so ``s[0]`` is ``s_0`` and ``s[6]``
    is ``s_{-1}``.
    """

    s: tuple

    def __post_init__(self):
        if len(self.s) != 7:
            raise ValueError("a StokesVector has seven entries")
        object.__setattr__(self, "s", tuple(complex(v) for v in self.s))

    def __getitem__(self, k: int) -> complex:
        return self.s[k % 7]

    @classmethod
    def from_map(cls, values: dict[int, complex]) -> "StokesVector":
        s = [0j] * 7
        for k, v in values.items():
            s[k % 7] = complex(v)
        return cls(tuple(s))

    def as_map(self) -> dict[int, complex]:
        return {k: self[k] for k in range(-3, 4)}

    def allclose(self, other: "StokesVector", tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(np.array(self.s) - np.array(other.s)) <= tol))


def constraint(sv: StokesVector, k: int) -> complex:
    """``s_k + s_{k+2} + s_k s_{k+1} s_{k+2} + i (1 + s_{k+4} s_{k+5})``."""
    return (sv[k] + sv[k + 2] + sv[k] * sv[k + 1] * sv[k + 2]
            + 1j * (1 + sv[k + 4] * sv[k + 5]))


def validate(sv: StokesVector) -> float:
    """Largest violation of the cyclic relations over ``k = 0..6``."""
    return max(abs(constraint(sv, k)) for k in range(7))


def rotate(sv: StokesVector, n: int) -> StokesVector:
    """Multipliers of the rotated solution: ``s'_{k-2n} = s_k``."""
    return StokesVector(tuple(sv[j + 2 * n] for j in range(7)))


def preset(family: str, m: int) -> StokesVector:
    """Tritronquee multipliers.

    ``typeII:m`` has ``s_{m+-1} = s_{m+-2} = 0`` and ``s_m = s_{m+-3} = -i``;
    ``typeI:m`` has ``s_{m+-2} = s_{m+-3} = 0`` and ``s_m = s_{m+-1} = -i``.
    """
    if family == "typeII":
        nonzero = (m, m + 3, m - 3)
    elif family == "typeI":
        nonzero = (m, m + 1, m - 1)
    else:
        raise ValueError(f"unknown family {family!r}")
    return StokesVector.from_map({k: -1j for k in nonzero})


def preset_by_name(name: str) -> StokesVector:
    """Parse ``"typeI:m"`` / ``"typeII:m"``."""
    try:
        family, m = name.split(":")
        return preset(family, int(m))
    except ValueError as err:
        raise ValueError(f"bad preset name {name!r}") from err


def all_presets() -> dict[str, StokesVector]:
    return {f"{fam}:{m}": preset(fam, m) for fam in FAMILIES for m in range(7)}
