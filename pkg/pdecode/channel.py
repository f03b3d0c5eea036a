"channel.py: Gaussian pulse shaping, sensor sampling and AWGN for PDE channels"
# Copyright (C) 2026 pdecode contributors
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
#
# SPDX-License-Identifier: GPL-3.0-or-later
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple
import math

import numpy as np

from .errors import ConfigError, DimensionError, LayoutError
from .solvers.heat import check_sensors


@dataclass(frozen=True)
class LayoutParams:
    """ How pulses and sensors are placed, before a grid is known """
    t0: float
    spacing: Optional[float] = None
    """ distance between neighbouring pulse centers; None spreads them evenly """
    min_spacing: float = 6.0
    """ in multiples of the pulse half-width """
    clearance: float = 4.0
    """ in multiples of the pulse half-width """
    sensors: str = "all"
    dispersion_length: float = 1.0
    """ L_D; the half-width on the grid is t0·sqrt(L_D) """

    def __post_init__(self):
        if not self.t0 > 0:
            raise ConfigError("layout.t0", f"must be positive, got {self.t0}")
        if self.spacing is not None and not self.spacing > 0:
            raise ConfigError("layout.spacing", f"must be positive, got {self.spacing}")
        if self.sensors not in ("all", "centers"):
            raise ConfigError("layout.sensors", f"must be 'all' or 'centers', got {self.sensors!r}")
        if not self.dispersion_length > 0:
            raise ConfigError("layout.dispersion_length", f"must be positive, got {self.dispersion_length}")
        if self.min_spacing < 0 or self.clearance < 0:
            raise ConfigError("layout.min_spacing", "spacing factors must not be negative")

    @property
    def pulse_width(self) -> float:
        return self.t0 * math.sqrt(self.dispersion_length)


class ChannelLayout(object):
    """ Pulse centers and sensors bound to one solver's grid """
    def __init__(self, t0: float, pulse_centers: Sequence[float], sensors: Sequence[int],
                 positions: np.ndarray, domain: Tuple[float, float], noise_sigma: float = 0.0,
                 min_spacing: float = 6.0, clearance: float = 4.0):
        if not t0 > 0:
            raise LayoutError(f"pulse half-width must be positive, got {t0}")
        positions = np.asarray(positions, dtype=np.float64)
        self.t0 = t0
        self.positions = positions
        """ Coordinates of the solver state samples """

        spacing = positions[1] - positions[0]
        indices = np.rint((np.asarray(pulse_centers, dtype=np.float64) - positions[0]) / spacing)
        indices = indices.astype(np.int64)
        if indices.size == 0:
            raise LayoutError("at least one pulse is needed")
        if indices.min() < 0 or indices.max() >= positions.size:
            raise LayoutError("pulse center outside the grid")
        self.center_indices: Tuple[int, ...] = tuple(indices.tolist())
        """ State index nearest to each pulse center """

        self.pulse_centers: Tuple[float, ...] = tuple(positions[indices].tolist())
        """ Pulse centers, snapped to grid points """

        lo, hi = domain
        centers = np.array(self.pulse_centers)
        if centers.min() - lo < clearance * t0 or hi - centers.max() < clearance * t0:
            raise LayoutError(f"pulse centers need {clearance:g}·t0 = {clearance * t0:g} "
                              f"clearance from the boundaries {domain}")
        gaps = np.diff(np.sort(centers))
        if gaps.size and gaps.min() < min_spacing * t0:
            raise LayoutError(f"pulse spacing {gaps.min():g} is below {min_spacing:g}·t0 = {min_spacing * t0:g}")

        self.sensors = tuple(check_sensors(sensors, positions.size).tolist())
        """ State indices read by the receiver, in output order """

        self.sensor_positions: Tuple[float, ...] = tuple(positions[list(self.sensors)].tolist())
        self.noise_sigma = noise_sigma
        self.domain = domain

        slots: Dict[int, int] = {}
        for slot, index in enumerate(self.sensors):
            slots.setdefault(index, slot)
        self._sensor_slot = slots

        offsets = positions[None, :] - centers[:, None]
        self.pulse_matrix = pulse(offsets, t0)
        """ Row i samples the pulse centered at p_i, shape (n, state size) """
        self.pulse_matrix.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.pulse_centers)

    @property
    def m(self) -> int:
        return len(self.sensors)

    def sensor_slot(self, index: int) -> Optional[int]:
        """ Position in y of the sensor reading state index `index`, if any """
        return self._sensor_slot.get(index)

    def with_noise(self, noise_sigma: float) -> "ChannelLayout":
        clone = object.__new__(ChannelLayout)
        clone.__dict__.update(self.__dict__)
        clone.noise_sigma = noise_sigma
        return clone

    def to_dict(self) -> dict:
        return {"t0": self.t0,
                "pulse_centers": list(self.pulse_centers),
                "center_indices": list(self.center_indices),
                "sensors": "all" if self.sensors == tuple(range(self.positions.size)) else list(self.sensors),
                "noise_sigma": self.noise_sigma}

    def __repr__(self):
        return f"ChannelLayout <pulses: {self.n}, sensors: {self.m}, t0: {self.t0:g}>"


def build_layout(solver, n: int, params: LayoutParams, noise_sigma: float = 0.0) -> ChannelLayout:
    """ Place n pulses on the solver grid. Without an explicit spacing the
    centers are spread evenly with equal gaps to both boundaries. """
    lo, hi = solver.domain
    if params.spacing is None:
        gap = (hi - lo) / (n + 1)
        centers = lo + gap * np.arange(1, n + 1)
    else:
        middle = 0.5 * (lo + hi)
        centers = middle + params.spacing * (np.arange(n) - 0.5 * (n - 1))
    indices = np.rint((centers - solver.positions[0]) / solver.spacing).astype(np.int64)
    if params.sensors == "all":
        sensors = range(solver.positions.size)
    else:
        sensors = indices.tolist()
    return ChannelLayout(params.pulse_width, centers, list(sensors), solver.positions, solver.domain,
                         noise_sigma=noise_sigma, min_spacing=params.min_spacing,
                         clearance=params.clearance)


def pulse(x, t0: float):
    """ exp(-x²/(2 t0²)) """
    if not t0 > 0:
        raise ValueError(f"pulse half-width must be positive, got {t0}")
    return np.exp(-np.square(x) / (2.0 * t0 * t0))


def synth_waveform(s, layout: ChannelLayout) -> np.ndarray:
    """ b(x; s) = Σ s_i φ(x - p_i) sampled on the grid. Words may be stacked
    along leading axes. """
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] != layout.n:
        raise DimensionError(f"word length {s.shape[-1]} does not match {layout.n} pulses")
    return s @ layout.pulse_matrix


def sample_sensors(u, layout: ChannelLayout) -> np.ndarray:
    u = np.asarray(u)
    if u.shape[-1] != layout.positions.size:
        raise DimensionError(f"waveform length {u.shape[-1]} does not match the grid")
    return u[..., list(layout.sensors)]


def add_noise(r, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """ r + n with n ~ N(0, σ²) per real component; complex r gets independent
    real and imaginary parts """
    if sigma < 0:
        raise ValueError(f"noise sigma must not be negative, got {sigma}")
    r = np.asarray(r)
    if sigma == 0:
        return r.copy()
    if np.iscomplexobj(r):
        noise = rng.normal(0.0, sigma, r.shape) + 1j * rng.normal(0.0, sigma, r.shape)
    else:
        noise = rng.normal(0.0, sigma, r.shape)
    return r + noise


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """ Independent generator for (seed, key...), e.g. key = (level, trial).
    Streams don't depend on the order they are created in. """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass
class Observation:
    y: np.ndarray
    """ Noisy sensor readings; complex for the fiber channel """
    true_word: Optional[np.ndarray] = None
    """ The transmitted word, kept for benchmarking """
    rng_seed: Optional[int] = None
    stream: Tuple[int, ...] = field(default_factory=tuple)
    sigma: float = 0.0

    def __eq__(self, other):
        if not isinstance(other, Observation):
            return NotImplemented
        words_equal = (self.true_word is None and other.true_word is None) or (
            self.true_word is not None and other.true_word is not None
            and np.array_equal(self.true_word, other.true_word))
        return (np.array_equal(self.y, other.y) and words_equal and self.rng_seed == other.rng_seed
                and self.stream == other.stream and self.sigma == other.sigma)


def forward_map(layout: ChannelLayout, solver) -> Callable[[np.ndarray], np.ndarray]:
    """ s -> noiseless sensor readings, the f̃ of the ML problem """
    def forward(s):
        return sample_sensors(solver.forward(synth_waveform(s, layout)), layout)
    return forward


def transmit(s, layout: ChannelLayout, solver, rng: np.random.Generator,
             sigma: Optional[float] = None, rng_seed: Optional[int] = None,
             stream: Tuple[int, ...] = ()) -> Observation:
    sigma = layout.noise_sigma if sigma is None else sigma
    r = forward_map(layout, solver)(s)
    y = add_noise(r, sigma, rng)
    return Observation(y=y, true_word=np.array(s, dtype=np.int8), rng_seed=rng_seed,
                       stream=tuple(stream), sigma=sigma)
