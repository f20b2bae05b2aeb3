"""Fractional Gaussian noise synthesis and fractional Ornstein-Uhlenbeck
price simulation on a uniform grid.

The noise generator uses circulant embedding of the increment covariance,
which is exact in distribution and costs O(N log N); a Cholesky fallback
guards against floating-point edge cases in the embedding eigenvalues.
Log-variance follows a mean-reverting Euler recursion driven by the
fractional noise, and the log-price accumulates conditionally Gaussian
returns driven by an independent Brownian stream.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import lfilter

# Fixed offsets deriving independent generator streams from one seed, so the
# volatility and price noises are independent by construction.
_FGN_STREAM = 0
_VOL_STREAM = 1
_PRICE_STREAM = 2

# Embedding eigenvalues below this trigger the dense fallback; tiny negative
# values above it are clipped to zero as floating-point noise.
_EIG_TOLERANCE = -1e-10
_CHOLESKY_LIMIT = 8192

PATH_KINDS = ("log_price", "log_variance", "fgn")

CSV_FLOAT_FORMAT = "%.17g"  # round-trips float64 exactly


class SynthesisError(RuntimeError):
    """Noise synthesis failed: embedding indefinite and no fallback applies."""


class VolatilityOverflowError(RuntimeError):
    """|log variance| escaped the configured safety bound during simulation."""


@dataclass(frozen=True, eq=False)
class GridPath:
    """Uniformly sampled trajectory with step-size and origin metadata.

    ``kind`` is one of ``log_price``, ``log_variance`` (path levels) or
    ``fgn`` (raw noise increments).
    """

    values: np.ndarray
    dt: float
    t0: float = 0.0
    kind: str = "log_price"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.kind not in PATH_KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        min_len = 1 if self.kind == "fgn" else 2
        if values.ndim != 1 or len(values) < min_len:
            raise ValueError(f"{self.kind} path needs >= {min_len} values")
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must all be finite")

    def __len__(self):
        return len(self.values)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def to_csv(self, path) -> None:
        """Write ``t,value`` rows at full float precision."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "value"])
            for t, v in zip(self.times(), self.values):
                writer.writerow([CSV_FLOAT_FORMAT % t, CSV_FLOAT_FORMAT % v])

    @classmethod
    def from_csv(cls, path, kind: str = "log_price") -> "GridPath":
        """Read a ``t,value`` file and infer the (uniform) step size."""
        ts, vs = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip() for c in header[:2]] != ["t", "value"]:
                raise ValueError(f"{path}: expected header 't,value'")
            for lineno, row in enumerate(reader, start=2):
                try:
                    ts.append(float(row[0]))
                    vs.append(float(row[1]))
                except (IndexError, ValueError) as exc:
                    raise ValueError(f"{path}: bad row at line {lineno}") from exc
        if len(vs) < 2:
            raise ValueError(f"{path}: need at least two grid points")
        ts = np.asarray(ts)
        steps = np.diff(ts)
        dt = steps[0]
        if dt <= 0 or not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
            raise ValueError(f"{path}: grid is not uniformly spaced")
        return cls(np.asarray(vs), dt=float(dt), t0=float(ts[0]), kind=kind)


@dataclass(frozen=True)
class FgnSpec:
    """Fractional Gaussian noise request: ``n_steps`` increments with
    variance ``dt**(2*hurst)`` each."""

    hurst: float
    n_steps: int
    dt: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.hurst <= 1.0:
            raise ValueError(f"hurst must be in (0, 1], got {self.hurst}")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class FouSpec:
    """Mean-reverting fractional volatility model on a daily grid.

    Log-variance solves d(log sigma^2) = alpha*(c - log sigma^2) du
    + eta dW^H, discretized with step ``delta / (m * substeps)``; the price
    has zero drift and accumulates sigma dB with B independent of W^H.
    """

    hurst: float
    eta: float
    alpha: float
    c: float
    delta: float
    m: int
    n_days: int
    seed: int
    logvar0: float | None = None  # defaults to the long-run mean c
    s0: float = 100.0
    substeps: int = 1
    logvar_bound: float = 50.0

    def __post_init__(self):
        if not 0.0 < self.hurst <= 1.0:
            raise ValueError(f"hurst must be in (0, 1], got {self.hurst}")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n_days < 1:
            raise ValueError("n_days must be >= 1")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.s0 <= 0.0:
            raise ValueError("s0 must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.logvar_bound <= 0.0:
            raise ValueError("logvar_bound must be positive")

    @property
    def start_logvar(self) -> float:
        return self.c if self.logvar0 is None else self.logvar0


def fgn_autocovariance(hurst, lag):
    """Autocovariance of unit-step, unit-variance fractional Gaussian noise.

    gamma(tau) = ((|tau|+1)^(2H) - 2|tau|^(2H) + ||tau|-1|^(2H)) / 2.
    Accepts a scalar or array lag.
    """
    if not 0.0 < hurst <= 1.0:
        raise ValueError(f"hurst must be in (0, 1], got {hurst}")
    tau = np.abs(np.asarray(lag, dtype=float))
    h2 = 2.0 * hurst
    gamma = 0.5 * ((tau + 1.0) ** h2 - 2.0 * tau**h2 + np.abs(tau - 1.0) ** h2)
    if np.isscalar(lag) or np.ndim(lag) == 0:
        return float(gamma)
    return gamma


@lru_cache(maxsize=8)
def _circulant_eigenvalues(hurst: float, n: int) -> np.ndarray:
    # First row of the 2n circulant embedding the n x n Toeplitz covariance.
    gamma = fgn_autocovariance(hurst, np.arange(n + 1))
    gamma = np.atleast_1d(gamma)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    eig.flags.writeable = False
    return eig


def _fgn_unit_increments(hurst: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n stationary fGn values with unit variance and exact covariance."""
    eig = _circulant_eigenvalues(hurst, n)
    if eig.min() < _EIG_TOLERANCE:
        return _fgn_cholesky(hurst, n, rng, eig.min())
    lam = np.clip(eig, 0.0, None)
    m2 = 2 * n
    v = np.empty(m2, dtype=complex)
    ends = rng.standard_normal(2)
    v[0] = ends[0]
    v[n] = ends[1]
    if n > 1:
        pairs = rng.standard_normal((n - 1, 2))
        inner = (pairs[:, 0] + 1j * pairs[:, 1]) / np.sqrt(2.0)
        v[1:n] = inner
        v[n + 1 :] = np.conj(inner[::-1])
    return np.fft.fft(np.sqrt(lam) * v)[:n].real / np.sqrt(m2)


def _fgn_cholesky(hurst: float, n: int, rng: np.random.Generator, worst: float) -> np.ndarray:
    if n > _CHOLESKY_LIMIT:
        raise SynthesisError(
            f"circulant embedding indefinite (min eigenvalue {worst:.3e}) and "
            f"n={n} exceeds the dense fallback limit {_CHOLESKY_LIMIT}"
        )
    cov = toeplitz(fgn_autocovariance(hurst, np.arange(n)))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SynthesisError("exact covariance is not positive definite") from exc
    return chol @ rng.standard_normal(n)


def simulate_fgn(spec: FgnSpec) -> GridPath:
    """Sample fractional Gaussian noise increments on the grid.

    Each increment is N(0, dt^(2H)); the joint law is stationary Gaussian
    with autocovariance dt^(2H) * fgn_autocovariance. Deterministic given
    the seed.
    """
    rng = np.random.default_rng([spec.seed, _FGN_STREAM])
    unit = _fgn_unit_increments(spec.hurst, spec.n_steps, rng)
    return GridPath(spec.dt**spec.hurst * unit, dt=spec.dt, kind="fgn")


def simulate_fou_price(spec: FouSpec) -> tuple[GridPath, GridPath]:
    """Simulate (log-variance, log-price) on a grid of n_days*m*substeps steps.

    The recursion is logvar[k+1] = logvar[k] + alpha*(c - logvar[k])*dt
    + eta*dW[k] with dW fractional noise of step dt = delta/(m*substeps);
    with alpha = 0 this reproduces logvar0 + eta*fBm with no drift error.
    Returns per-step paths of length n_days*m*substeps + 1.
    """
    n_steps = spec.n_days * spec.m * spec.substeps
    dt = spec.delta / (spec.m * spec.substeps)

    rng_vol = np.random.default_rng([spec.seed, _VOL_STREAM])
    rng_price = np.random.default_rng([spec.seed, _PRICE_STREAM])

    dw = dt**spec.hurst * _fgn_unit_increments(spec.hurst, n_steps, rng_vol)
    decay = 1.0 - spec.alpha * dt
    drive = spec.alpha * spec.c * dt + spec.eta * dw

    logvar = np.empty(n_steps + 1)
    logvar[0] = spec.start_logvar
    # One-pole recursion y[k] = drive[k] + decay*y[k-1], run in C.
    logvar[1:] = lfilter([1.0], [1.0, -decay], drive, zi=[decay * logvar[0]])[0]

    worst = np.max(np.abs(logvar))
    if not np.isfinite(worst) or worst > spec.logvar_bound:
        raise VolatilityOverflowError(
            f"|log variance| reached {worst:.3g}, beyond the bound "
            f"{spec.logvar_bound:.3g}; check alpha, eta, dt"
        )

    sigma = np.exp(0.5 * logvar[:-1])
    db = np.sqrt(dt) * rng_price.standard_normal(n_steps)
    logprice = np.empty(n_steps + 1)
    logprice[0] = np.log(spec.s0)
    logprice[1:] = logprice[0] + np.cumsum(sigma * db)

    return (
        GridPath(logvar, dt=dt, kind="log_variance"),
        GridPath(logprice, dt=dt, kind="log_price"),
    )
