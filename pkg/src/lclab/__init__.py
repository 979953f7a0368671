"""Monte Carlo and exact-geometry laboratory for isotropic log-concave measures."""

from .rng import RandomStream
from .sampler import DistributionSpec, SampleBatch, sample

__all__ = ["RandomStream", "DistributionSpec", "SampleBatch", "sample"]
__version__ = "0.1.0"
