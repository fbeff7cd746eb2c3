import functools

import pytest

from d2d_cachescale import NetworkGrid, PhyParams, edge_capacities


@functools.lru_cache(maxsize=None)
def caps_for(m_levels: int, kappa: float, alpha: float, multihop_only: bool = False):
    """Shared capacity tables; construction is deterministic so caching is safe."""
    grid = NetworkGrid(m_levels, kappa, alpha)
    params = PhyParams(alpha)
    return grid, params, edge_capacities(grid, params, multihop_only=multihop_only)


@pytest.fixture
def caps_factory():
    return caps_for
