"""Deterministic diffusion sampler: schedule, inversion and reverse process.

With the stochastic term switched off, one reverse step is

    x_{t-1} = sqrt(abar_{t-1}) * (x_t - sqrt(1-abar_t) * eps(x_t, t)) / sqrt(abar_t)
              + sqrt(1-abar_{t-1}) * eps(x_t, t)

which in the rescaled variable y_t = x_t / sqrt(abar_t) is the Euler step
y_{t-1} = y_t - (gamma_t - gamma_{t-1}) * eps with gamma_t =
sqrt((1-abar_t)/abar_t).  Inversion runs the same update forward,
evaluating the estimator at the lower node.  Both directions walk a
sub-step grid over [0, T], so a noise sample maps to an image and back
deterministically; the round trip is exact for state-independent
estimators and O(1/sub_steps) otherwise.

The noise estimator is anything callable as ``est(x, t, condition) ->
array`` of the same shape, deterministic in its inputs.  The solver is
single-threaded per trajectory; estimators must tolerate concurrent calls
from independent trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteStateError, ScheduleError
from .images import PixelGrid


@dataclass(frozen=True)
class DiffusionSchedule:
    """Cumulative signal levels abar_0..abar_T and the sub-step grid."""

    total_steps: int
    alpha_bar: np.ndarray      # float64, length T+1, alpha_bar[0] == 1
    sub_grid: np.ndarray       # int step indices, 0 = first, T = last

    def __post_init__(self):
        for name in ("alpha_bar", "sub_grid"):
            a = getattr(self, name)
            if a.flags.writeable:
                a = a.copy()
                a.flags.writeable = False
                object.__setattr__(self, name, a)

    @property
    def sub_step_count(self) -> int:
        return len(self.sub_grid) - 1

    def gamma(self, t: int) -> float:
        ab = self.alpha_bar[t]
        return float(np.sqrt((1.0 - ab) / ab))


def build_schedule(
    total_steps: int,
    beta_start: float = 1e-4,
    beta_end: float = 0.02,
    sub_steps: int | None = None,
) -> DiffusionSchedule:
    """Linear-beta schedule: abar_t is the running product of (1 - beta_s).

    ``sub_steps`` picks how many Euler steps the solvers actually take
    (default: all of them); the grid is rounded evenly over [0, T].
    """
    if total_steps < 1:
        raise ScheduleError(f"total_steps must be >= 1, got {total_steps}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ScheduleError(f"need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]")
    n = total_steps if sub_steps is None else sub_steps
    if not 1 <= n <= total_steps:
        raise ScheduleError(f"sub_steps must lie in [1, {total_steps}], got {n}")
    if total_steps == 1:
        betas = np.array([beta_start])
    else:
        betas = np.linspace(beta_start, beta_end, total_steps)
    alpha_bar = np.empty(total_steps + 1, dtype=np.float64)
    alpha_bar[0] = 1.0
    np.cumprod(1.0 - betas, out=alpha_bar[1:])
    grid = np.rint(np.linspace(0, total_steps, n + 1)).astype(np.int64)
    if np.any(np.diff(grid) < 1):
        raise ScheduleError("sub-step grid is not strictly increasing")
    return DiffusionSchedule(total_steps=total_steps, alpha_bar=alpha_bar, sub_grid=grid)


@dataclass(frozen=True)
class LatentState:
    """Real-valued working tensor at a given schedule step."""

    tensor: np.ndarray
    step: int

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=np.float64)
        if not np.all(np.isfinite(t)):
            raise NonFiniteStateError("latent state contains non-finite entries")
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "tensor", t)


def _check_finite(x: np.ndarray, t: int, label: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFiniteStateError(f"{label} became non-finite at step {t}")


def ode_invert(x0: LatentState, estimator, condition, sched: DiffusionSchedule) -> LatentState:
    """Image-to-noise: walk the sub-step grid from step 0 up to step T."""
    if x0.step != 0:
        raise ValueError(f"inversion starts at step 0, state is at {x0.step}")
    grid = sched.sub_grid
    x = np.asarray(x0.tensor, dtype=np.float64)
    for i in range(len(grid) - 1):
        t_lo, t_hi = int(grid[i]), int(grid[i + 1])
        eps = np.asarray(estimator(x, t_lo, condition), dtype=np.float64)
        if eps.shape != x.shape:
            raise ValueError(f"estimator returned shape {eps.shape}, expected {x.shape}")
        y = x / np.sqrt(sched.alpha_bar[t_lo])
        y = y + (sched.gamma(t_hi) - sched.gamma(t_lo)) * eps
        x = y * np.sqrt(sched.alpha_bar[t_hi])
        _check_finite(x, t_hi, "inversion state")
    return LatentState(tensor=x, step=int(grid[-1]))


def ode_reverse(xT: LatentState, estimator, condition, sched: DiffusionSchedule) -> LatentState:
    """Noise-to-image: walk the sub-step grid from step T down to step 0."""
    if xT.step != sched.total_steps:
        raise ValueError(f"reverse starts at step {sched.total_steps}, state is at {xT.step}")
    grid = sched.sub_grid
    x = np.asarray(xT.tensor, dtype=np.float64)
    for i in range(len(grid) - 1, 0, -1):
        t_hi, t_lo = int(grid[i]), int(grid[i - 1])
        eps = np.asarray(estimator(x, t_hi, condition), dtype=np.float64)
        if eps.shape != x.shape:
            raise ValueError(f"estimator returned shape {eps.shape}, expected {x.shape}")
        y = x / np.sqrt(sched.alpha_bar[t_hi])
        y = y - (sched.gamma(t_hi) - sched.gamma(t_lo)) * eps
        x = y * np.sqrt(sched.alpha_bar[t_lo])
        _check_finite(x, t_lo, "reverse state")
    return LatentState(tensor=x, step=int(grid[0]))


def quantize(state: LatentState) -> tuple[PixelGrid, int]:
    """Affine [-1, 1] -> [0, 255] with round-half-even.

    Out-of-range values clamp; the clamp count is returned alongside."""
    x = np.asarray(state.tensor, dtype=np.float64)
    scaled = (x + 1.0) * 127.5
    clamped = np.clip(scaled, 0.0, 255.0)
    n_clamped = int(np.count_nonzero((scaled < 0.0) | (scaled > 255.0)))
    # numpy rint rounds half to even
    return PixelGrid(np.rint(clamped).astype(np.uint8)), n_clamped


def dequantize(grid: PixelGrid) -> LatentState:
    """Inverse affine map [0, 255] -> [-1, 1] at step 0."""
    return LatentState(tensor=grid.array.astype(np.float64) / 127.5 - 1.0, step=0)
