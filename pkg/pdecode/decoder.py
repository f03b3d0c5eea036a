"decoder.py: gradient-flow decoding through a differentiable PDE solver, and the baselines"
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
from typing import List, Optional
import logging

import numpy as np

from .channel import ChannelLayout, Observation, synth_waveform
from .codes import ParityCheckMatrix, syndrome, binary_map
from .errors import ConfigError, DimensionError, LayoutError, PdecodeError
from .potential import PotentialParams, potential_energy, potential_gradient, sgn

logger = logging.getLogger(__name__)

INIT_MODES = ("random", "peak")


@dataclass(frozen=True)
class GfDecoderParams:
    eta: float = 0.1
    gamma: float = 0.1
    potential: PotentialParams = field(default_factory=PotentialParams)
    iterations: int = 20
    init_sigma: float = 0.5
    init_mode: str = "random"
    divergence_bound: float = 1e3
    keep_waveforms: bool = False
    """ store the solver output at every iteration in the trace """

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError("decoder.eta", f"must be positive, got {self.eta}")
        if self.gamma < 0:
            raise ConfigError("decoder.gamma", f"must not be negative, got {self.gamma}")
        if self.iterations < 1:
            raise ConfigError("decoder.iterations", f"must be at least 1, got {self.iterations}")
        if self.init_sigma < 0:
            raise ConfigError("decoder.init_sigma", f"must not be negative, got {self.init_sigma}")
        if self.init_mode not in INIT_MODES:
            raise ConfigError("decoder.init_mode", f"must be one of {INIT_MODES}, got {self.init_mode!r}")
        if not self.divergence_bound > 0:
            raise ConfigError("decoder.divergence_bound", f"must be positive, got {self.divergence_bound}")


@dataclass
class DecodeResult:
    estimate: np.ndarray
    """ sgn of the final state, sgn(0) = +1 """
    final_state: np.ndarray
    squared_error: List[float] = field(default_factory=list)
    """ ||y - r̃||² at s^(0), ..., s^(U) """
    potential: List[float] = field(default_factory=list)
    """ h(s^(k)) alongside `squared_error` """
    waveforms: Optional[List[np.ndarray]] = None
    is_codeword: bool = False
    diverged: bool = False
    iterations_run: int = 0

    @property
    def trajectory(self) -> List[float]:
        return self.squared_error


def hard_decision(x) -> np.ndarray:
    """ Entrywise sign as int8; NaN (a diverged coordinate) maps to +1 """
    return sgn(x).astype(np.int8)


def project_gradient(z, layout: ChannelLayout) -> np.ndarray:
    """ g_i = z at the grid point nearest p_i; the real part for complex z """
    z = np.asarray(z)
    if z.shape[-1] != layout.positions.size:
        raise DimensionError(f"gradient length {z.shape[-1]} does not match the grid")
    return np.real(z[..., list(layout.center_indices)]).astype(np.float64)


def peak_detect(obs: Observation, layout: ChannelLayout) -> np.ndarray:
    """ Polarity of y at each pulse center """
    y = np.real(np.asarray(obs.y))
    slots = [layout.sensor_slot(index) for index in layout.center_indices]
    if any(slot is None for slot in slots):
        missing = [i for i, slot in enumerate(slots) if slot is None]
        raise LayoutError(f"no sensor at the center of pulse(s) {missing}")
    return hard_decision(y[slots])


def bp_detect(obs: Observation, layout: ChannelLayout, solver) -> np.ndarray:
    """ Back-propagate the received field to ξ = 0, then detect peaks """
    if not hasattr(solver, "reverse"):
        raise PdecodeError(f"back-propagation needs an NLSE channel, not {solver.name}")
    field = np.zeros(layout.positions.size, dtype=np.complex128)
    field[list(layout.sensors)] = obs.y
    back = solver.reverse(field)
    return hard_decision(np.real(back[list(layout.center_indices)]))


def initial_state(obs: Observation, layout: ChannelLayout, params: GfDecoderParams,
                  rng: Optional[np.random.Generator]) -> np.ndarray:
    if params.init_mode == "peak":
        return peak_detect(obs, layout).astype(np.float64)
    if rng is None:
        rng = np.random.default_rng()
    return rng.normal(0.0, params.init_sigma, layout.n)


def gf_decode(obs: Observation, layout: ChannelLayout, solver, H: ParityCheckMatrix,
              params: GfDecoderParams, rng: Optional[np.random.Generator] = None,
              start: Optional[np.ndarray] = None) -> DecodeResult:
    """ s <- s - η(g + γ∇h) for U iterations, g being the solver's input
    gradient read off at the pulse centers.

    `start` overrides the initialisation mode.
    """
    if H.n != layout.n:
        raise DimensionError(f"code length {H.n} does not match {layout.n} pulses")
    y = np.asarray(obs.y)
    if y.shape != (layout.m,):
        raise DimensionError(f"observation length {y.shape} does not match {layout.m} sensors")

    if start is not None:
        s = np.array(start, dtype=np.float64)
        if s.shape != (layout.n,):
            raise DimensionError(f"initial state length {s.shape} does not match {layout.n} pulses")
    else:
        s = initial_state(obs, layout, params, rng)

    sensors = list(layout.sensors)
    squared_error: List[float] = []
    potential: List[float] = []
    waveforms: Optional[List[np.ndarray]] = [] if params.keep_waveforms else None
    diverged = False
    k = 0
    for k in range(params.iterations):
        u0 = synth_waveform(s, layout)
        loss, z = solver.loss_and_gradient(u0, y, sensors)
        squared_error.append(loss)
        potential.append(potential_energy(s, H, params.potential))
        if waveforms is not None:
            waveforms.append(solver.forward(u0))

        g = project_gradient(z, layout)
        h = potential_gradient(s, H, params.potential)
        s = s - params.eta * (g + params.gamma * h)
        if not np.all(np.isfinite(s)) or np.max(np.abs(s)) > params.divergence_bound:
            logger.debug("decoder diverged at iteration %d", k)
            diverged = True
            break

    if not diverged:
        u_final = solver.forward(synth_waveform(s, layout))
        residual = u_final[..., sensors] - y
        squared_error.append(float(np.sum(np.abs(residual) ** 2)))
        potential.append(potential_energy(s, H, params.potential))
        if waveforms is not None:
            waveforms.append(u_final)

    estimate = hard_decision(s)
    is_codeword = not diverged and not syndrome(H, binary_map(estimate)).any()
    return DecodeResult(estimate=estimate, final_state=s, squared_error=squared_error,
                        potential=potential, waveforms=waveforms, is_codeword=bool(is_codeword),
                        diverged=diverged, iterations_run=k + 1)
