"""Synthetic censored cohorts drawn from the parametric families.

Draws use numpy's PCG64 generator seeded with ``SimSpec.seed`` and
the inverse-survival transform ``t = S^-1(u)``, ``u ~ U(0, 1)``. Results are
bit-reproducible for a given numpy version and seed.
"""

from dataclasses import dataclass

import numpy as np

from .core import Cohort
from .errors import InvalidInputError
from .parametric import Family


@dataclass(frozen=True)
class SimSpec:
    family: Family
    n: int
    censor_time: float = None
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise InvalidInputError(f"n must be a non-negative integer, got {self.n!r}")
        if self.censor_time is not None and not self.censor_time > 0:
            raise InvalidInputError(f"censor_time must be positive, got {self.censor_time!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must fit in 64 unsigned bits")


def simulate_cohort(spec, label=None):
    """Draw ``spec.n`` durations; those past ``censor_time`` are censored there."""
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    # 1 - random() lies in (0, 1], keeping S^-1 finite
    u = 1.0 - rng.random(int(spec.n))
    t = np.asarray(spec.family.inverse_survival(u), dtype=float).reshape(-1)
    if spec.censor_time is None:
        censored = np.zeros(t.shape, dtype=bool)
    else:
        censored = t > spec.censor_time
        t = np.where(censored, spec.censor_time, t)
    if label is None:
        label = f"{spec.family.tag}{spec.family.params}"
    return Cohort(t, censored, label)


def censor_time_for(family, censored_fraction):
    """Administrative censoring time that censors `censored_fraction` in expectation."""
    if not 0.0 < censored_fraction < 1.0:
        raise InvalidInputError("censored fraction must lie in (0, 1)")
    return float(family.inverse_survival(censored_fraction))
