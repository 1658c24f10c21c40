"""OptiVote: federated signSGD over a simulated non-coherent FSO PPM channel.

Subpackages cover the stochastic inter-satellite channel, the PPM
majority-vote PHY, importance-aware power control, desk-scale learners,
closed-form theory, and a Monte Carlo verification harness.
"""

__version__ = "0.1.0"
