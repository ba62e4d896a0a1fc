"""Registry of currents with closed-form Lelong data, addressable by id."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import forms as fm
from .currents import AmbientSmooth, Atomic, Current, subspace_current, zero_current

__all__ = ["FixtureInfo", "FIXTURES", "get_fixture", "list_fixtures", "UnknownFixtureError"]


class UnknownFixtureError(KeyError):
    pass


@dataclass(frozen=True)
class FixtureInfo:
    id: str
    n: int
    p: int
    sign_class: str
    facts: tuple  # (fact, provenance) pairs
    build: Callable[[], Current]


def _dirac(n: int, mass: float) -> Current:
    return Current(n, 0, (Atomic((0.0,) * n, mass),), None, "closed", "dirac")


def _t0() -> Current:
    def coeffs(z):
        r2 = np.sum(np.abs(z) ** 2, axis=1)[:, None, None]
        return fm.DDC * np.conj(z)[:, :, None] * z[:, None, :] / r2**2

    form = fm.Form(2, 1, 1, coeffs, ((0.0, 0.0),))
    return Current(2, 1, (AmbientSmooth(form),), _dirac(2, -1.0), "plurisuperharmonic", "T0")


def _t1() -> Current:
    c = subspace_current((0, 0), (1, 0), lambda z: -np.log(np.abs(z[:, 0]) ** 2), singular=[(0, 0)])
    return Current(2, 1, (c,), _dirac(2, -1.0), "plurisuperharmonic", "T1")


def _line(direction, weight, name, sign, declared=None) -> Current:
    c = subspace_current((0, 0), direction, weight)
    return Current(2, 1, (c,), declared, sign, name)


def _radial(n: int, name: str) -> Current:
    def coeffs(z):
        r2 = np.sum(np.abs(z) ** 2, axis=1)
        return fm.DDC * r2[:, None, None] * np.eye(n)[None]

    return Current(n, n - 1, (AmbientSmooth(fm.Form(n, 1, 1, coeffs)),), None, "plurisubharmonic", name)


FIXTURES: dict[str, FixtureInfo] = {}


def _register(id, n, p, sign, facts, build):
    FIXTURES[id] = FixtureInfo(id, n, p, sign, tuple(facts), build)


_register(
    "T0", 2, 1, "plurisuperharmonic",
    [("conic; nu constant; dd^c = -delta_0", "reference"),
     ("nu = 1 under dd^c = (i/2pi) d dbar", "derived"),
     ("alpha-mass over (1/2, 1) = 2 log 2", "derived")],
    _t0,
)
_register(
    "T1", 2, 1, "plurisuperharmonic",
    [("nu(r) = 1 - 2 log r, no Lelong number at 0", "derived"),
     ("dd^c = -delta_0", "derived")],
    _t1,
)
_register(
    "T2", 2, 1, "plurisubharmonic",
    [("nu(r) = r^2/2, nu_ddc(t) = t^2", "derived"), ("tangent cone 0", "derived")],
    lambda: _line((1, 0), lambda z: np.abs(z[:, 0]) ** 2, "T2", "plurisubharmonic"),
)
_register(
    "T2prime", 2, 1, "plurisubharmonic",
    [("|z2|^2 on {z1 = 0}; nu(r) = r^2/2", "derived")],
    lambda: _line((0, 1), lambda z: np.abs(z[:, 1]) ** 2, "T2prime", "plurisubharmonic"),
)
_register(
    "H", 2, 1, "closed",
    [("nu = 1", "derived"), ("conic, dd^c = 0", "derived")],
    lambda: _line((1, 0), None, "H", "closed", zero_current(2, 0)),
)
_register(
    "Hprime", 2, 1, "closed",
    [("nu = 1; visible in the chart z' / z_2", "derived")],
    lambda: _line((0, 1), None, "Hprime", "closed", zero_current(2, 0)),
)
_register(
    "S_rad", 2, 1, "plurisubharmonic",
    [("|z|^2 beta; nu(r) = 2 r^4 / 3, nu_ddc(t) = t^4", "derived")],
    lambda: _radial(2, "S_rad"),
)
_register(
    "W", 2, 1, "plurisubharmonic",
    [("(1 + |z1|^2) on {z2 = 0}; nu(r) = 1 + r^2/2, tangent cone [z2 = 0]", "derived")],
    lambda: _line((1, 0), lambda z: 1 + np.abs(z[:, 0]) ** 2, "W", "plurisubharmonic"),
)
_register(
    "S3", 3, 2, "plurisubharmonic",
    [("|z|^2 beta on C^3; nu(r) = 3 r^4 / 4", "derived")],
    lambda: _radial(3, "S3"),
)
_register(
    "P3", 3, 2, "plurisubharmonic",
    [("|z1|^2 on {z3 = 0} in C^3; nu(r) = r^2/3", "derived")],
    lambda: Current(
        3, 2, (subspace_current((0, 0, 0), [(1, 0), (0, 1), (0, 0)], lambda z: np.abs(z[:, 0]) ** 2),),
        None, "plurisubharmonic", "P3",
    ),
)
_register("zero", 2, 1, "closed", [("nu = 0", "trivial")], lambda: zero_current(2, 1))


def get_fixture(id: str) -> Current:
    try:
        info = FIXTURES[id]
    except KeyError:
        raise UnknownFixtureError(id) from None
    return info.build()


def list_fixtures(filter: str = "") -> list[FixtureInfo]:
    f = filter.lower()
    return [
        info for info in FIXTURES.values()
        if not f or f in info.id.lower() or any(f in fact.lower() for fact, _ in info.facts)
    ]
