import pytest

from grushin3d import AlphaParam, QuadratureConfig
from grushin3d.grids import resample
from grushin3d.solver import Domain, SolverConfig, power_nonlinearity, solve_ground_state

ALPHAS = (0.5, 1.0, 2.0)


@pytest.fixture(scope="session")
def fast_cfg():
    return QuadratureConfig(volume_resolution=64, surface_resolution=128, refine_depth=2)


@pytest.fixture(scope="session")
def ground_states():
    """Ground states of the q = 4, alpha = 1 cube problem, warm-started up
    the resolution ladder and cached for the whole session."""
    cache = {}
    ap = AlphaParam(1.0)
    nl = power_nonlinearity(4.0, ap)

    def get(n, tol=1e-6):
        if n in cache:
            return cache[n]
        domain = Domain.cube(1.0, n)
        initial = None
        smaller = [m for m in cache if m < n]
        if smaller:
            src = cache[max(smaller)]
            initial = resample(src.u, (n, n, n), domain.bbox).values
        cfg = SolverConfig(outer_tol=tol)
        cache[n] = solve_ground_state(domain, nl, ap, cfg, initial=initial)
        return cache[n]

    return get
