"""Sampler configuration."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..ball import BallSpec
from ..errors import ConfigError

SCHEMES = ("hb", "hb-block", "block-gibbs", "pure-mh")
THETA_UPDATES = ("conditional-gibbs", "joint-mh", "fixed")
BLOCK_AXES = ("columns", "rows")


@dataclass(frozen=True)
class SamplerConfig:
    """What to run and for how long.

    ``block_size`` is the block length ``K`` for vector states.  For matrix
    states the blocks are columns, except for ``block-gibbs`` with
    ``block_axis="rows"`` on chain models, where ``block_size`` rows are
    resampled jointly by forward filtering / backward sampling.

    ``theta_update="fixed"`` leaves the parameters untouched, which is what the
    exact-kernel checks need.
    """

    scheme: str = "hb"
    ball: BallSpec = field(default_factory=BallSpec)
    iterations: int = 1000
    burnin: int | None = None
    thin: int = 1
    seed: int = 0
    theta_update: str = "conditional-gibbs"
    block_size: int | None = None
    block_axis: str = "columns"
    product_bound: int = 100_000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}",
                              key="sampler.scheme")
        if self.theta_update not in THETA_UPDATES:
            raise ConfigError(f"unknown theta update {self.theta_update!r}",
                              key="sampler.theta_update")
        if self.block_axis not in BLOCK_AXES:
            raise ConfigError(f"unknown block axis {self.block_axis!r}", key="sampler.block_axis")
        if self.iterations < 0:
            raise ConfigError("must be >= 0", key="sampler.iterations")
        if self.burnin is None:
            object.__setattr__(self, "burnin", self.iterations // 10)
        if self.burnin < 0:
            raise ConfigError("must be >= 0", key="sampler.burnin")
        if self.thin < 1:
            raise ConfigError("must be >= 1", key="sampler.thin")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", key="sampler.seed")
        if self.block_size is not None and self.block_size < 1:
            raise ConfigError("must be >= 1", key="sampler.K")
        if self.theta_update == "joint-mh" and self.scheme != "hb":
            raise ConfigError("joint-mh parameter updates need the 'hb' scheme",
                              key="sampler.theta_update")
        if self.block_axis == "rows" and self.scheme != "block-gibbs":
            raise ConfigError("row blocks are only available for block-gibbs",
                              key="sampler.block_axis")

    @property
    def n_records(self) -> int:
        kept = self.iterations - self.burnin
        return 0 if kept <= 0 else -(-kept // self.thin)

    def with_(self, **changes) -> "SamplerConfig":
        return replace(self, **changes)
