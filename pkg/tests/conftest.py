"""Shared fixtures: catalog charts and geometries, built once per session.

Chart construction is deterministic and cheap, but frame assembly at the
default resolutions is not free, so geometries are cached per family and
shared read-only across test modules.
"""

from __future__ import annotations

import numpy as np
import pytest

from quatsurf import SurfaceGeometry, build

_CHARTS: dict = {}
_GEOMS: dict = {}


def get_chart(family: str, **kwargs):
    """Session-cached default-parameter chart of one catalog family."""
    key = (family, tuple(sorted(kwargs.items())))
    if key not in _CHARTS:
        _CHARTS[key] = build(family, **kwargs)
    return _CHARTS[key]


def get_geometry(family: str, **kwargs) -> SurfaceGeometry:
    key = (family, tuple(sorted(kwargs.items())))
    if key not in _GEOMS:
        _GEOMS[key] = SurfaceGeometry(get_chart(family, **kwargs))
    return _GEOMS[key]


@pytest.fixture(scope="session")
def sphere_geometry() -> SurfaceGeometry:
    return get_geometry("sphere")


@pytest.fixture(scope="session")
def catenoid_geometry() -> SurfaceGeometry:
    return get_geometry("catenoid")


@pytest.fixture(scope="session")
def clifford_geometry() -> SurfaceGeometry:
    return get_geometry("clifford-torus")


@pytest.fixture(scope="session")
def cylinder_geometry() -> SurfaceGeometry:
    return get_geometry("circular-cylinder")


@pytest.fixture(scope="session")
def elastica_geometry() -> SurfaceGeometry:
    return get_geometry("elastica-cylinder")


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)
