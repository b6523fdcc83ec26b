"""Bayesian posterior sampling for sign-restricted SVARs.

Implements accept-reject sampling and a soft-sign-restriction slice
sampler with importance resampling, plus a prior-robust Bayes layer built
on identified-set approximation.
"""

__version__ = "0.1.0"
