"""Power-law tail fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import NonMonotoneTail


@dataclass(frozen=True)
class DecayFit:
    exponent: float  # b in |f| ~ C r^-b
    ci: tuple  # 95% interval for b
    prefactor: float
    samples: int

    @property
    def halfwidth(self):
        return 0.5 * (self.ci[1] - self.ci[0])

    def as_dict(self):
        return {"exponent": self.exponent, "ci_low": self.ci[0], "ci_high": self.ci[1],
                "samples": self.samples}


def decay_fit(r, f, min_samples=20, monotone_rtol=1e-6, check_span=True) -> DecayFit:
    """Least-squares slope of log|f| against log r.

    Needs at least ``min_samples`` points and |f| non-increasing in r (up to
    a relative wiggle ``monotone_rtol``); ``check_span`` additionally asks for
    the samples to cover a decade in r.  Returns the decay exponent with a
    Student-t 95% confidence interval.
    """
    r = np.asarray(r, dtype=float)
    a = np.abs(np.asarray(f, dtype=float))
    order = np.argsort(r)
    r, a = r[order], a[order]
    if r.size < min_samples:
        raise NonMonotoneTail(f"need at least {min_samples} samples, got {r.size}")
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise NonMonotoneTail("tail samples must be finite and non-zero")
    if check_span and r[-1] < 10.0 * r[0] * (1 - 1e-12):
        raise NonMonotoneTail(f"samples span r in [{r[0]:.3g}, {r[-1]:.3g}], less than a decade")
    if np.any(a[1:] > a[:-1] * (1.0 + monotone_rtol)):
        raise NonMonotoneTail("tail magnitude is not monotonically decreasing")
    res = stats.linregress(np.log(r), np.log(a))
    n = r.size
    t = stats.t.ppf(0.975, n - 2)
    b = -res.slope
    return DecayFit(float(b), (float(b - t * res.stderr), float(b + t * res.stderr)),
                    float(np.exp(res.intercept)), int(n))
