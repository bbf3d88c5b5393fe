"""Generalized low-tubal-rank tensor bandits.

Submodules
----------
tensor_algebra
    Transformed t-product, t-SVD, tubal rank, tensor norms and singular
    value thresholding.
glm
    Exponential-family link functions, reward sampling and the GLM loss.
estimator
    Nuclear-norm penalized GLM fitting and subspace extraction.
environment
    Bandit instances, reward draws and regret bookkeeping.
policies
    The explore-subspace-then-refine policy, its UCB stage, and baselines.
harness
    Replicated experiments, aggregation and CSV output.
"""

from .tensor_algebra import *  # noqa: F401,F403
from .glm import *  # noqa: F401,F403
from .estimator import *  # noqa: F401,F403
from .environment import *  # noqa: F401,F403
from .policies import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403
from . import environment, estimator, glm, harness, policies, tensor_algebra

__version__ = "0.1.0"
