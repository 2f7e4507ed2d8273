"""Worked systems: the three-type bridge and the automotive brake.

These back the bundled corpus files, the acceptance tests and the README
walkthrough.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .beta_binomial import DEFAULT_EPSILON
from .prior_sets import PriorRectangle, PriorSpec, TestData, expand_grid, fill_bounds, weibull_prior_bounds

BRIDGE_SYSTEM = """\
# bridge: two T1 pairs joined through the T2 bridge, then T3 in series
edge: s 1
edge: s 4
edge: 1 2
edge: 4 5
edge: 1 6
edge: 4 6
edge: 6 2
edge: 6 5
edge: 2 3
edge: 5 3
edge: 3 t
type: T1 = 1,2,4,5
type: T2 = 6
type: T3 = 3
"""

# Master cylinder M (1) feeds wheel cylinders C1-C4 (2-5), each driving pad
# assembly P1-P4 (6-9). The hand brake H (10) reaches the wheel cylinders and
# pads P3, P4 directly; this wiring reproduces the published signature table.
BRAKE_SYSTEM = """\
edge: s 1
edge: s 10
edge: 1 2
edge: 1 3
edge: 1 4
edge: 1 5
edge: 10 2
edge: 10 3
edge: 10 4
edge: 10 5
edge: 2 6
edge: 3 7
edge: 4 8
edge: 5 9
edge: 10 8
edge: 10 9
edge: 6 t
edge: 7 t
edge: 8 t
edge: 9 t
type: M = 1
type: C = 2,3,4,5
type: P = 6,7,8,9
type: H = 10
"""

# Same system with H wired only to P3 and P4.
BRAKE_SYSTEM_PADS_ONLY = "\n".join(
    line for line in BRAKE_SYSTEM.splitlines() if not line.startswith(("edge: 10 2", "edge: 10 3", "edge: 10 4", "edge: 10 5"))
) + "\n"

# Lower/upper prior functioning probability of T3 on [0,1), [1,2), ..., [4,5).
BRIDGE_T3_STEPS = (
    (0.625, 0.999),
    (0.375, 0.875),
    (0.250, 0.500),
    (0.125, 0.375),
    (0.010, 0.250),
)

BRIDGE_DATA_T1 = (2.2, 2.4, 2.6, 2.8)
BRIDGE_DATA_T2 = (3.2, 3.4, 3.6, 3.8)
BRIDGE_SCENARIOS = {
    1: (0.5, 1.5, 2.5, 3.5),  # failures as expected
    2: (0.6, 0.7, 0.8, 0.9),  # earlier than expected
    3: (4.1, 4.2, 4.3, 4.4),  # later than expected
}


grid = expand_grid


def bridge_t3_bound(t: float) -> tuple[float, float]:
    j = min(max(int(math.floor(t + 1e-12)), 0), len(BRIDGE_T3_STEPS) - 1)
    return BRIDGE_T3_STEPS[j]


def bridge_prior(times: Sequence[float], epsilon: float = DEFAULT_EPSILON) -> PriorSpec:
    vague = PriorRectangle(1.0, 2.0, epsilon, 1.0 - epsilon)
    t3 = tuple(PriorRectangle(1.0, 4.0, *bridge_t3_bound(t)) for t in times)
    return PriorSpec(tuple(times), {"T1": (vague,) * len(times), "T2": (vague,) * len(times), "T3": t3}, epsilon)


def bridge_data(scenario: int) -> TestData:
    return TestData({"T1": BRIDGE_DATA_T1, "T2": BRIDGE_DATA_T2, "T3": BRIDGE_SCENARIOS[scenario]})


def brake_prior(times: Sequence[float], epsilon: float = DEFAULT_EPSILON) -> PriorSpec:
    """Brake priors: Weibull band for M, one elicited point for P, vague H and C."""
    times = tuple(times)
    m_bounds = weibull_prior_bounds(2.5, 6.0, 8.0, times, epsilon)
    on_grid = [t for t in times if abs(t - 5.0) < 1e-9]
    p_bounds = fill_bounds({on_grid[0]: (0.5, 0.65)} if on_grid else {}, times, epsilon)
    vague = PriorRectangle(1.0, 2.0, epsilon, 1.0 - epsilon)
    return PriorSpec(
        times,
        {
            "M": tuple(PriorRectangle(1.0, 8.0, lo, hi) for lo, hi in m_bounds),
            "H": (vague,) * len(times),
            "C": (vague,) * len(times),
            "P": tuple(PriorRectangle(1.0, 2.0, lo, hi) for lo, hi in p_bounds),
        },
        epsilon,
    )


def brake_data(seed: int = 2016) -> TestData:
    """Synthetic brake test data with the published sample sizes (5, 10, 15, 20).

    The published failure times are only shown graphically, so these are
    Weibull draws with plausible shapes and scales.
    """
    rng = np.random.default_rng(seed)
    spec = {"M": (5, 2.5, 5.0), "H": (10, 1.5, 7.0), "C": (15, 2.0, 5.5), "P": (20, 3.5, 3.2)}
    return TestData({lab: tuple(np.round(scale * rng.weibull(shape, n), 3)) for lab, (n, shape, scale) in spec.items()})
