"""Small Monte Carlo bookkeeping helpers used by the estimator modules."""

import numpy as np

__all__ = ["mean_se", "binomial_se", "binomial_se_ac", "z_score"]


def mean_se(samples):
    """Sample mean and standard error of the mean."""
    a = np.asarray(samples, dtype=np.float64)
    if a.size < 2:
        raise ValueError("need at least 2 samples for a standard error")
    return float(a.mean()), float(a.std(ddof=1) / np.sqrt(a.size))


def binomial_se(p_hat, n):
    """Standard error of an empirical probability from n trials."""
    if n < 2:
        raise ValueError("need at least 2 trials")
    return float(np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n))


def binomial_se_ac(p_hat, n):
    """Agresti-Coull standard error for an empirical probability.

    Adds two pseudo-successes and two pseudo-failures before the normal
    approximation; near 0 or 1 the plain binomial formula collapses to an
    invalid zero while this stays calibrated.
    """
    if n < 2:
        raise ValueError("need at least 2 trials")
    x = p_hat * n
    p_t = (x + 2.0) / (n + 4.0)
    return float(np.sqrt(p_t * (1.0 - p_t) / (n + 4.0)))


def z_score(a, se_a, b, se_b):
    """|a - b| in units of the combined standard error (0 if both exact)."""
    denom = np.hypot(se_a, se_b)
    if denom == 0.0:
        return 0.0 if a == b else float("inf")
    return float(abs(a - b) / denom)
