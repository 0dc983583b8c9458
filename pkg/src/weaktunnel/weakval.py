"""Two-time conditional (weak) values between pre- and post-selected states.

For a system prepared in |i> and later found in |f>, the conditional value of
an operator A at an intermediate time is

    A_w(t) = <f(t)| A |i(t)> / <f(t)|i(t)>,

with |i(t)> evolved forward from preparation and <f(t)| evolved backward from
the post-selection time.  Taken over a complete set of position-cell
projectors this yields a distribution over x that sums to one at every
intermediate time but is not non-negative; its real part is the natural
reading of "where was the particle, given where it ended up".  The imaginary
part is kept in a companion channel.

The post-selection overlap enters as a denominator, so runs are guarded by a
floor on |<f|i>|^2 (default 1e-12) below which conditional values are
numerically meaningless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, BarrierSpec, RegionProjector, WaveFunction, region_projector
from .errors import ConfigError, OverlapFloorError, SchemeInstabilityError
from .tdse import (EDGE_PROBABILITY_LIMIT, PropagatorConfig, propagate,
                   propagate_backward)

__all__ = [
    "OVERLAP_FLOOR",
    "PrePostPair",
    "ConditionalDistribution",
    "BarrierOccupation",
    "weak_value",
    "weak_moment",
    "make_pair",
    "transmitted_pair",
    "conditional_distribution",
    "conditional_dwell_time",
    "barrier_occupation",
]

OVERLAP_FLOOR = 1e-12


def _check_floor(overlap: complex, floor: float) -> None:
    if abs(overlap) ** 2 < floor:
        raise OverlapFloorError(
            f"post-selection overlap too small: |<f|i>|^2 = {abs(overlap)**2:.3e} < {floor:.3e}"
        )


def _inner(f, i) -> complex:
    if isinstance(f, WaveFunction):
        return f.inner(i)
    return complex(np.vdot(f, i))


def _apply(op, state):
    if isinstance(state, WaveFunction):
        return op.apply(state)
    return np.asarray(op) @ state


def weak_value(op, pre, post, floor: float = OVERLAP_FLOOR) -> complex:
    """<post|op|pre> / <post|pre>; complex in general.

    pre/post are either plain complex vectors (spin states, with op a matrix)
    or WaveFunction instances (with op exposing .apply, e.g. RegionProjector).
    Both states must refer to the same instant.
    """
    return weak_moment(op, 1, pre, post, floor)


def weak_moment(op, n: int, pre, post, floor: float = OVERLAP_FLOOR) -> complex:
    """n-th conditional moment <post|op^n|pre> / <post|pre>."""
    if n < 1:
        raise ConfigError(f"moment order must be >= 1, got {n}")
    overlap = _inner(post, pre)
    _check_floor(overlap, floor)
    state = pre
    for _ in range(n):
        state = _apply(op, state)
    return _inner(post, state) / overlap


@dataclass(frozen=True)
class PrePostPair:
    """A preparation at t=0 and a post-selection at t=duration.

    ``final`` is the post-selected state expressed at the post-selection time;
    ``overlap`` is <final| U(duration) |initial>, fixed at construction.
    """

    initial: WaveFunction
    final: WaveFunction
    duration: float
    overlap: complex


def make_pair(initial: WaveFunction, final: WaveFunction, cfg: PropagatorConfig,
              barrier: BarrierSpec | None = None,
              floor: float = OVERLAP_FLOOR) -> PrePostPair:
    """Build a pair from explicit states, computing the overlap by propagation."""
    (_, evolved), = propagate(initial, _only_final(cfg), barrier)
    overlap = final.inner(evolved)
    _check_floor(overlap, floor)
    return PrePostPair(initial, final, cfg.duration, overlap)


def transmitted_pair(initial: WaveFunction, cfg: PropagatorConfig,
                     barrier: BarrierSpec, cut: float,
                     floor: float = OVERLAP_FLOOR) -> tuple[PrePostPair, float]:
    """Post-select on transmission: project the evolved state onto x >= cut.

    The cut should sit beyond the barrier exit by a couple of packet widths so
    the projector does not clip barrier-edge structure.  Returns the pair and
    the post-selection success probability.
    """
    grid = initial.grid
    if not barrier.x_right < cut < grid.x_max:
        raise ConfigError(
            f"transmission cut {cut} must lie between the barrier exit "
            f"{barrier.x_right} and the domain edge {grid.x_max}"
        )
    (_, evolved), = propagate(initial, _only_final(cfg), barrier)
    projected = region_projector(grid, cut, grid.x_max).apply(evolved)
    prob = projected.norm() ** 2
    if prob < floor:
        raise OverlapFloorError(
            f"transmission probability {prob:.3e} below the overlap floor {floor:.3e}"
        )
    final = projected.normalized()
    overlap = final.inner(evolved)
    _check_floor(overlap, floor)
    return PrePostPair(initial, final, cfg.duration, overlap), float(prob)


def _only_final(cfg: PropagatorConfig) -> PropagatorConfig:
    return PropagatorConfig(dt=cfg.dt, n_steps=cfg.n_steps, scheme=cfg.scheme,
                            record_times=(cfg.duration,))


@dataclass(frozen=True)
class ConditionalDistribution:
    """Re/Im of the cell-projector conditional values on (times x grid).

    values[j, :] has units 1/length; sum(values[j] * dx) = 1 at every time.
    """

    grid: Grid
    times: tuple[float, ...]
    re: np.ndarray
    im: np.ndarray
    overlaps: tuple[complex, ...]

    def norm_per_time(self) -> np.ndarray:
        return np.sum(self.re, axis=1) * self.grid.dx

    def integrate_region(self, a: float, b: float, time_index: int) -> float:
        """Signed conditional weight of the half-open region [a, b) at one time."""
        mask = (self.grid.x >= a) & (self.grid.x < b)
        return float(np.sum(self.re[time_index, mask]) * self.grid.dx)

    def region_magnitude(self, a: float, b: float, time_index: int) -> float:
        """Unsigned conditional weight of [a, b) at one time.

        The real part oscillates through zero wherever counter-propagating
        components interfere, so the signed integral of a window that holds a
        fringe train flaps with the fringe alignment while the magnitude
        integral tracks the envelope.
        """
        mask = (self.grid.x >= a) & (self.grid.x < b)
        return float(np.sum(np.abs(self.re[time_index, mask])) * self.grid.dx)


@dataclass(frozen=True)
class BarrierOccupation:
    """Per-time conditional weight near the barrier faces and at its center.

    entrance/exit are magnitude integrals over windows one third of the
    barrier width to either side of each face (the fringe trains live
    there); center is the signed weight of the middle third of the barrier
    interior, where a thick barrier admits no fringes.
    """

    times: tuple[float, ...]
    entrance: np.ndarray
    center: np.ndarray
    exit: np.ndarray

    def center_to_peak(self) -> float:
        """max_t |center| relative to the peak entrance+exit weight."""
        peak = float(np.max(self.entrance + self.exit))
        return float(np.max(np.abs(self.center)) / peak)


def barrier_occupation(dist: ConditionalDistribution,
                       barrier: BarrierSpec) -> BarrierOccupation:
    """Reduce a conditional distribution to face/center weights per time."""
    a, b = barrier.x_left, barrier.x_right
    third = (b - a) / 3.0
    n = len(dist.times)
    entrance = np.empty(n)
    center = np.empty(n)
    exit_ = np.empty(n)
    for j in range(n):
        entrance[j] = dist.region_magnitude(a - third, a + third, j)
        center[j] = dist.integrate_region(a + third, b - third, j)
        exit_[j] = dist.region_magnitude(b - third, b + third, j)
    return BarrierOccupation(times=dist.times, entrance=entrance,
                             center=center, exit=exit_)


def _paired_snapshots(pair: PrePostPair, cfg: PropagatorConfig,
                      barrier: BarrierSpec | None, floor: float):
    """Forward snapshots of |i> and backward snapshots of |f> at cfg.record_times.

    The backward leg runs with the edge-density threshold divided by
    |pair.overlap|^2.  Conditional values are invariant under rescaling the
    bra, so boundary contamination competes with the physics at the
    pre-projection amplitude scale, not at the unit norm the bra was
    renormalized to; a post-selected bra with success probability p may
    therefore carry up to 1e-8/p of relative edge weight before its history
    stops being trustworthy.
    """
    duration = cfg.duration
    if abs(duration - pair.duration) > 1e-9 * max(1.0, duration):
        raise ConfigError(
            f"config duration {duration} does not match pair duration {pair.duration}"
        )
    fwd = propagate(pair.initial, cfg, barrier)
    back_cfg = PropagatorConfig(
        dt=cfg.dt, n_steps=cfg.n_steps, scheme=cfg.scheme,
        record_times=tuple(duration - t for t in reversed(cfg.record_times)),
    )
    back_limit = EDGE_PROBABILITY_LIMIT / min(1.0, abs(pair.overlap) ** 2)
    bwd = propagate_backward(pair.final, back_cfg, barrier, edge_limit=back_limit)
    pairs = []
    for (t, ket), (tau, bra) in zip(fwd, reversed(bwd)):
        if abs((duration - tau) - t) > 1e-9 * max(1.0, duration):
            raise ConfigError("forward and backward record times failed to line up")
        overlap = bra.inner(ket)
        _check_floor(overlap, floor)
        drift = abs(overlap - pair.overlap) / abs(pair.overlap)
        if drift > 1e-6:
            raise SchemeInstabilityError(
                f"post-selection overlap drifted by {drift:.3e} at t={t}; "
                "forward and backward evolutions are no longer adjoint"
            )
        pairs.append((t, ket, bra, overlap))
    return pairs


def conditional_distribution(pair: PrePostPair, cfg: PropagatorConfig,
                             barrier: BarrierSpec | None = None,
                             floor: float = OVERLAP_FLOOR) -> ConditionalDistribution:
    """Conditional position distribution at every time in cfg.record_times."""
    snaps = _paired_snapshots(pair, cfg, barrier, floor)
    grid = pair.initial.grid
    re = np.empty((len(snaps), grid.n))
    im = np.empty_like(re)
    times, overlaps = [], []
    for row, (t, ket, bra, overlap) in enumerate(snaps):
        w = np.conj(bra.amp) * ket.amp / overlap
        re[row] = w.real
        im[row] = w.imag
        times.append(t)
        overlaps.append(overlap)
    return ConditionalDistribution(grid=grid, times=tuple(times), re=re, im=im,
                                   overlaps=tuple(overlaps))


def conditional_dwell_time(pair: PrePostPair, region: RegionProjector,
                           cfg: PropagatorConfig,
                           barrier: BarrierSpec | None = None,
                           floor: float = OVERLAP_FLOOR) -> float:
    """Time integral of Re of the conditional region weight over [0, duration].

    The trapezoid rule runs over cfg.record_times, which must start at 0 and
    end at the pair duration; the caller chooses the time resolution.  With
    the full evolved state as post-selection this reduces to the ordinary
    sojourn time integral of the region probability; with region = whole
    domain it returns the duration exactly.
    """
    times = cfg.record_times
    if times[0] != 0.0 or abs(times[-1] - pair.duration) > 1e-9 * max(1.0, pair.duration):
        raise ConfigError("dwell integration needs record_times spanning [0, duration]")
    snaps = _paired_snapshots(pair, cfg, barrier, floor)
    dx = pair.initial.grid.dx
    values = []
    for _, ket, bra, overlap in snaps:
        num = np.sum(np.conj(bra.amp[region.mask]) * ket.amp[region.mask]) * dx
        values.append((num / overlap).real)
    return float(np.trapezoid(values, times))
