"""Synthetic dynamic instances for the experiment grid."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .choice import DynamicInstance, Instance, choice_probabilities, revenue_ordered_optimum
from .exceptions import InvalidParameter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenConfig:
    T: int
    P0: float
    gamma: float
    alpha: float
    seed: int
    n: int = 40

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter("n must be a positive integer.", n=self.n)
        if int(self.T) != self.T or self.T < 1:
            raise InvalidParameter("T must be a positive integer.", T=self.T)
        if not 0.0 < self.P0 < 1.0:
            raise InvalidParameter("P0 must lie in (0, 1).", P0=self.P0)
        if not self.gamma > 0:
            raise InvalidParameter("gamma must be positive.", gamma=self.gamma)
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidParameter("alpha must lie in (0, 1].", alpha=self.alpha)


def generate(cfg: GenConfig) -> DynamicInstance:
    """Random revenues and weights; inventories scale the demand of a blend of S* and the full set."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    r = rng.uniform(0.0, 10.0, cfg.n)
    while np.any(r <= 0):
        zero = r <= 0
        r[zero] = rng.uniform(0.0, 10.0, int(zero.sum()))
    raw = rng.uniform(1.0, 10.0, cfg.n)
    v = (1.0 - cfg.P0) / cfg.P0 * raw / raw.sum()
    base = Instance(r=r, v=v, alpha=cfg.alpha)

    best, _ = revenue_ordered_optimum(r, v)
    demand = (
        0.75 * cfg.T * choice_probabilities(base, best)
        + 0.25 * cfg.T * choice_probabilities(base, range(cfg.n))
    )
    c = np.array([math.ceil(cfg.gamma * d) for d in demand], dtype=np.int64)
    logger.debug("Generated n=%d T=%d with |S*|=%d", cfg.n, cfg.T, len(best))
    return DynamicInstance(base=base, T=cfg.T, c=c)
