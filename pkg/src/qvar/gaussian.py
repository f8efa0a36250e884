"""Standard-normal math kernels and discretization of latent risk factors.

The default model treats each systemic risk factor as a standard normal
variable truncated to a finite range and discretized onto a qubit grid of
2**n_z equally spaced points.  The conditional default probability of an
obligor given factor realizations z = (z_1, ..., z_R) is

    PD(z) = F((F^-1(p0) - sqrt(rho) * sum_i alpha_i z_i) / sqrt(1 - rho))

where F is the standard normal CDF, p0 the unconditional anchor probability,
rho the factor sensitivity and alpha_i the per-factor weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

_SQRT2 = float(np.sqrt(2.0))
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


def std_normal_cdf(x):
    """Standard normal CDF, F(x) = erfc(-x / sqrt(2)) / 2.

    Accepts a scalar or an array; the erfc kernel keeps the absolute error
    well below 1e-12 over the whole real line.  Non-finite input is rejected.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("std_normal_cdf requires finite input")
    out = 0.5 * special.erfc(-arr / _SQRT2)
    if arr.ndim == 0:
        return float(out)
    return out


def std_normal_pdf(x):
    """Standard normal density."""
    arr = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * arr * arr) / _SQRT_2PI
    if arr.ndim == 0:
        return float(out)
    return out


def std_normal_ppf(p):
    """Inverse standard normal CDF.

    Seeded with scipy's ndtri, then polished with two guarded Newton steps
    against std_normal_cdf so the pair stays self-consistent:
    |std_normal_cdf(std_normal_ppf(p)) - p| < 1e-10 on (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("std_normal_ppf requires p strictly inside (0, 1)")
    x = np.asarray(special.ndtri(arr), dtype=float)
    scalar = arr.ndim == 0
    x = np.atleast_1d(x)
    target = np.atleast_1d(arr)
    for _ in range(2):
        density = std_normal_pdf(x)
        # Newton is only trustworthy where the density has not underflowed;
        # in the far tails the ndtri seed is already as good as doubles allow.
        ok = density > 1e-20
        err = 0.5 * special.erfc(-x / _SQRT2) - target
        step = np.zeros_like(x)
        step[ok] = np.clip(err[ok] / density[ok], -1.0, 1.0)
        x = x - step
    if scalar:
        return float(x[0])
    return x


@dataclass(eq=False)
class FactorGrid:
    """Truncated, discretized distribution of one latent risk factor.

    values[i] = a_z * i + b_z with a_z = (z_max - z_min) / (2**n_z - 1) and
    b_z = z_min; probs[i] is the probability assigned to grid point i.
    """

    n_z: int
    z_min: float
    z_max: float
    values: np.ndarray = field(repr=False)
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_z < 1:
            raise ValueError("FactorGrid needs n_z >= 1")
        size = 2 ** self.n_z
        self.values = np.asarray(self.values, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.values.shape != (size,) or self.probs.shape != (size,):
            raise ValueError(f"grid arrays must have length 2**n_z = {size}")
        steps = np.diff(self.values)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=0, atol=1e-12 * max(1.0, abs(steps[0]))):
            raise ValueError("grid values must be strictly increasing and equally spaced")
        if np.any(self.probs < 0):
            raise ValueError("grid probabilities must be nonnegative")
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("grid probabilities must sum to 1")

    @property
    def size(self) -> int:
        return 2 ** self.n_z

    @property
    def step(self) -> float:
        """Affine coefficient a_z (value spacing per index step)."""
        return (self.z_max - self.z_min) / (2 ** self.n_z - 1)

    @property
    def mid_value(self) -> float:
        """Center of the truncated range (not necessarily a grid point)."""
        return 0.5 * (self.z_min + self.z_max)


def discretize_normal(n_z: int, mean: float = 0.0, std: float = 1.0,
                      bound_sigmas: float = 3.0) -> FactorGrid:
    """Discretize a normal distribution onto 2**n_z equally spaced points.

    The grid spans [mean - bound_sigmas*std, mean + bound_sigmas*std] and each
    point receives probability proportional to the normal density there,
    renormalized to sum to one.
    """
    if not isinstance(n_z, (int, np.integer)) or n_z < 1:
        raise ValueError("discretize_normal requires an integer n_z >= 1")
    if std <= 0:
        raise ValueError("discretize_normal requires std > 0")
    if bound_sigmas <= 0:
        raise ValueError("discretize_normal requires bound_sigmas > 0")
    lo = mean - bound_sigmas * std
    hi = mean + bound_sigmas * std
    values = np.linspace(lo, hi, 2 ** n_z)
    density = std_normal_pdf((values - mean) / std)
    probs = density / density.sum()
    return FactorGrid(n_z=int(n_z), z_min=lo, z_max=hi, values=values, probs=probs)


def conditional_pd(p0: float, rho: float, alphas, z):
    """Conditional default probability given factor realizations.

    With R = 1 and alphas = (1,) this is the classic single-factor form.
    `z` may be a vector of R realizations or an array whose last axis has
    length R, in which case the result is vectorized over the leading axes.
    """
    if not 0.0 < p0 < 1.0:
        raise ValueError("conditional_pd requires p0 strictly inside (0, 1)")
    if not 0.0 <= rho < 1.0:
        raise ValueError("conditional_pd requires rho in [0, 1)")
    alphas = np.asarray(alphas, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    if alphas.ndim != 1 or alphas.size < 1:
        raise ValueError("alphas must be a nonempty 1-D weight vector")
    if z_arr.shape[-1:] != alphas.shape:
        raise ValueError(f"realization vector must have length {alphas.size}")
    combined = z_arr @ alphas
    quantile = std_normal_ppf(p0)
    arg = (quantile - np.sqrt(rho) * combined) / np.sqrt(1.0 - rho)
    out = std_normal_cdf(arg)
    # F never reaches 0 or 1 for finite arguments; keep the output strictly
    # inside the open interval even where the double-precision cdf saturates.
    tiny = np.nextafter(0.0, 1.0)
    top = np.nextafter(1.0, 0.0)
    if np.ndim(out) == 0:
        return float(min(max(out, tiny), top))
    return np.clip(out, tiny, top)
