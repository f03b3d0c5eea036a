"solvers/heat.py: explicit finite differences for u_t = λ u_xx with zero Dirichlet boundaries"
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
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import DimensionError, StabilityError

COURANT_LIMIT = 0.5
# c is computed in floating point, so 0.5 may come out a hair above
COURANT_SLACK = 1e-12


def courant_number(lam: float, h: float, ell: float) -> float:
    for name, value in (("lambda", lam), ("h", h), ("ell", ell)):
        if not value > 0:
            raise StabilityError(f"heat.{name} must be positive, got {value}")
    return lam * h / ell ** 2


@dataclass(frozen=True)
class HeatGrid:
    """ N_x × N_t grid of cells ℓ × h. The state holds the N_x - 1 interior
    points x = ℓ, 2ℓ, ..., (N_x - 1)ℓ; both boundary values are zero. """
    lam: float
    h: float
    ell: float
    n_x: int
    n_t: int

    def __post_init__(self):
        c = courant_number(self.lam, self.h, self.ell)
        if c > COURANT_LIMIT + COURANT_SLACK:
            raise StabilityError(f"Courant number {c:g} exceeds {COURANT_LIMIT} "
                                 f"(heat.lambda={self.lam}, heat.h={self.h}, heat.ell={self.ell})")
        if self.n_x < 3:
            raise StabilityError(f"heat.n_x must be at least 3, got {self.n_x}")
        if self.n_t < 0:
            raise StabilityError(f"heat.n_t must not be negative, got {self.n_t}")

    @property
    def courant(self) -> float:
        return courant_number(self.lam, self.h, self.ell)

    @property
    def T(self) -> float:
        return self.n_t * self.h

    @property
    def L(self) -> float:
        return self.n_x * self.ell

    @property
    def size(self) -> int:
        return self.n_x - 1

    @property
    def positions(self) -> np.ndarray:
        return self.ell * np.arange(1, self.n_x)


def courant(grid: HeatGrid) -> float:
    return grid.courant


def fdm_step(u: np.ndarray, c: float) -> np.ndarray:
    """ u(t+h, x) = (1-2c) u(t,x) + c u(t,x+ℓ) + c u(t,x-ℓ), along the last axis """
    out = (1.0 - 2.0 * c) * u
    out[..., 1:] += c * u[..., :-1]
    out[..., :-1] += c * u[..., 1:]
    return out


def _check_state(u, grid: HeatGrid) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape[-1] != grid.size:
        raise DimensionError(f"state length {u.shape[-1]} does not match n_x - 1 = {grid.size}")
    return u


def fdm_solve(u0, grid: HeatGrid) -> np.ndarray:
    """ n_t steps from u0. Accepts states stacked along leading axes. """
    u = _check_state(u0, grid).copy()
    c = grid.courant
    for _ in range(grid.n_t):
        u = fdm_step(u, c)
    return u


def fdm_history(u0, grid: HeatGrid) -> np.ndarray:
    """ Every time level, shape (n_t + 1, n_x - 1) """
    u = _check_state(u0, grid).copy()
    c = grid.courant
    levels = [u]
    for _ in range(grid.n_t):
        u = fdm_step(u, c)
        levels.append(u)
    return np.stack(levels)


def check_sensors(sensors: Sequence[int], size: int) -> np.ndarray:
    sensors = np.asarray(sensors, dtype=np.int64)
    if sensors.ndim != 1:
        raise DimensionError("sensor indices must form a flat list")
    if sensors.size and (sensors.min() < 0 or sensors.max() >= size):
        raise DimensionError(f"sensor index out of range [0, {size})")
    return sensors


def fdm_input_gradient(u0, y, sensors: Sequence[int], grid: HeatGrid) -> np.ndarray:
    """ ∇_{u0} ||y - S·fdm_solve(u0)||².

    The zero-boundary update is a symmetric matrix, so its transpose is
    itself: scatter 2(r̃ - y) onto the sensors and step it forward n_t times.
    """
    u0 = _check_state(u0, grid)
    if u0.ndim != 1:
        raise DimensionError("input gradient works on a single state")
    sensors = check_sensors(sensors, grid.size)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != sensors.shape:
        raise DimensionError(f"observation length {y.shape} does not match {sensors.size} sensors")

    return fdm_loss_and_gradient(u0, y, sensors, grid)[1]


def fdm_loss_and_gradient(u0, y, sensors: Sequence[int], grid: HeatGrid) -> Tuple[float, np.ndarray]:
    """ Squared error and its input gradient from one forward solve """
    u0 = _check_state(u0, grid)
    sensors = check_sensors(sensors, grid.size)
    residual = fdm_solve(u0, grid)[sensors] - np.asarray(y, dtype=np.float64)
    z = np.zeros(grid.size)
    np.add.at(z, sensors, 2.0 * residual)
    return float(np.sum(residual ** 2)), fdm_solve(z, grid)


class HeatSolver(object):
    """ Forward map and input gradient for the heat channel """
    is_complex = False
    name = "heat"

    def __init__(self, grid: HeatGrid):
        self.grid = grid
        self.positions = grid.positions
        """ Coordinate of every state sample """

        self.spacing = grid.ell
        self.domain = (0.0, grid.L)
        """ Pulses must keep clear of these boundaries """

    def forward(self, u0) -> np.ndarray:
        return fdm_solve(u0, self.grid)

    def input_gradient(self, u0, y, sensors) -> np.ndarray:
        return fdm_input_gradient(u0, y, sensors, self.grid)

    def loss_and_gradient(self, u0, y, sensors) -> Tuple[float, np.ndarray]:
        return fdm_loss_and_gradient(u0, y, sensors, self.grid)

    def history(self, u0) -> np.ndarray:
        return fdm_history(u0, self.grid)

    def describe(self) -> dict:
        g = self.grid
        return {"lambda": g.lam, "h": g.h, "ell": g.ell, "n_x": g.n_x, "n_t": g.n_t,
                "T": g.T, "L": g.L, "courant": g.courant}

    def __repr__(self):
        return f"HeatSolver <n_x: {self.grid.n_x}, n_t: {self.grid.n_t}, c: {self.grid.courant:g}>"
