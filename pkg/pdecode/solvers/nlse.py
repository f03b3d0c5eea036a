"solvers/nlse.py: symmetrized split-step Fourier solver for the normalized NLSE"
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
#
# The equation solved is
#
#     ∂U/∂ξ = -(i s / 2) ∂²U/∂τ² + i N² |U|² U
#
# One step of length ℓ is D(ℓ/2) N(ℓ) D(ℓ/2): half a dispersion step in the
# Fourier domain, a full nonlinear phase rotation in the τ domain, and the
# other dispersion half.
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, StabilityError
from .heat import check_sensors


@dataclass(frozen=True)
class NlseGrid:
    s_sign: int
    n_sq: float
    n_tau: int
    tau_span: float
    ell_xi: float
    n_steps: int

    def __post_init__(self):
        if self.s_sign not in (1, -1):
            raise StabilityError(f"nlse.s_sign must be +1 or -1, got {self.s_sign}")
        if self.n_tau < 2 or self.n_tau & (self.n_tau - 1):
            raise StabilityError(f"nlse.n_tau must be a power of two, got {self.n_tau}")
        if not self.tau_span > 0:
            raise StabilityError(f"nlse.tau_span must be positive, got {self.tau_span}")
        if not self.ell_xi > 0:
            raise StabilityError(f"nlse.ell_xi must be positive, got {self.ell_xi}")
        if self.n_steps < 0:
            raise StabilityError(f"nlse.n_steps must not be negative, got {self.n_steps}")

    @property
    def xi_end(self) -> float:
        return self.n_steps * self.ell_xi

    @property
    def dtau(self) -> float:
        return self.tau_span / self.n_tau

    @property
    def size(self) -> int:
        return self.n_tau

    @property
    def positions(self) -> np.ndarray:
        return self.dtau * np.arange(self.n_tau)

    @property
    def omega(self) -> np.ndarray:
        """ Angular frequencies 2πk/tau_span in FFT order """
        return 2.0 * np.pi * np.fft.fftfreq(self.n_tau, d=self.dtau)


def energy(U, grid: NlseGrid) -> float:
    """ Σ|U_k|² Δτ """
    return float(np.sum(np.abs(U) ** 2) * grid.dtau)


def _check_field(U, grid: NlseGrid) -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    if U.shape[-1] != grid.n_tau:
        raise DimensionError(f"field length {U.shape[-1]} does not match n_tau = {grid.n_tau}")
    return U


def _dispersion_phase(grid: NlseGrid, length: float) -> np.ndarray:
    return np.exp(0.5j * grid.s_sign * grid.omega ** 2 * length)


def dispersion_step(U, grid: NlseGrid, length: float) -> np.ndarray:
    """ Exact linear evolution over `length` in ξ; negative lengths run it backwards """
    U = _check_field(U, grid)
    spectrum = np.fft.fft(U, axis=-1, norm="ortho")
    return np.fft.ifft(spectrum * _dispersion_phase(grid, length), axis=-1, norm="ortho")


def dispersion_half_step(U, grid: NlseGrid, fraction: float = 0.5) -> np.ndarray:
    """ Dispersion over fraction·ℓ_ξ """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    return dispersion_step(U, grid, fraction * grid.ell_xi)


def nonlinear_step(U, grid: NlseGrid, direction: int = 1) -> np.ndarray:
    """ U -> U·exp(i N² |U|² ℓ_ξ); direction -1 undoes it exactly since |U| is kept """
    U = _check_field(U, grid)
    return U * np.exp(1j * direction * grid.n_sq * np.abs(U) ** 2 * grid.ell_xi)


def ssfm_solve(U0, grid: NlseGrid) -> np.ndarray:
    """ n_steps symmetrized steps. Accepts fields stacked along leading axes. """
    U = _check_field(U0, grid)
    half = _dispersion_phase(grid, 0.5 * grid.ell_xi)
    for _ in range(grid.n_steps):
        U = np.fft.ifft(np.fft.fft(U, axis=-1, norm="ortho") * half, axis=-1, norm="ortho")
        U = nonlinear_step(U, grid)
        U = np.fft.ifft(np.fft.fft(U, axis=-1, norm="ortho") * half, axis=-1, norm="ortho")
    return U


def reverse_propagate(U, grid: NlseGrid) -> np.ndarray:
    """ Undo `ssfm_solve` step by step: inverse sub-steps in reverse order """
    U = _check_field(U, grid)
    back = np.conj(_dispersion_phase(grid, 0.5 * grid.ell_xi))
    for _ in range(grid.n_steps):
        U = np.fft.ifft(np.fft.fft(U, axis=-1, norm="ortho") * back, axis=-1, norm="ortho")
        U = nonlinear_step(U, grid, direction=-1)
        U = np.fft.ifft(np.fft.fft(U, axis=-1, norm="ortho") * back, axis=-1, norm="ortho")
    return U


def _forward_with_tape(U0: np.ndarray, grid: NlseGrid) -> Tuple[np.ndarray, List[np.ndarray]]:
    half = _dispersion_phase(grid, 0.5 * grid.ell_xi)
    tape = []
    U = U0
    for _ in range(grid.n_steps):
        U = np.fft.ifft(np.fft.fft(U, norm="ortho") * half, norm="ortho")
        tape.append(U)
        U = nonlinear_step(U, grid)
        U = np.fft.ifft(np.fft.fft(U, norm="ortho") * half, norm="ortho")
    return U, tape


def ssfm_input_gradient(U0, y, sensors: Sequence[int], grid: NlseGrid) -> Tuple[np.ndarray, np.ndarray]:
    """ Gradient of Σ|y_i - (S·ssfm_solve(U0))_i|² with respect to Re U0 and Im U0.

    Adjoints are carried as G = ∂L/∂Re + i ∂L/∂Im. Dispersion is unitary, so
    its adjoint multiplies the spectrum by the conjugate phase. For the
    nonlinear map V = U e^{iθ}, θ = c|U|², c = N²ℓ_ξ:

        G_U = e^{-iθ} G_V - 2c Im(V conj(G_V)) U
    """
    U0 = _check_field(U0, grid)
    if U0.ndim != 1:
        raise DimensionError("input gradient works on a single field")
    sensors = check_sensors(sensors, grid.n_tau)
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != sensors.shape:
        raise DimensionError(f"observation length {y.shape} does not match {sensors.size} sensors")

    G = ssfm_loss_and_gradient(U0, y, sensors, grid)[1]
    return G.real.copy(), G.imag.copy()


def ssfm_loss_and_gradient(U0, y, sensors: Sequence[int], grid: NlseGrid) -> Tuple[float, np.ndarray]:
    """ Squared error and the complex adjoint G = ∂L/∂Re U0 + i ∂L/∂Im U0 """
    U0 = _check_field(U0, grid)
    sensors = check_sensors(sensors, grid.n_tau)
    final, tape = _forward_with_tape(U0, grid)
    residual = final[sensors] - np.asarray(y, dtype=np.complex128)
    G = np.zeros(grid.n_tau, dtype=np.complex128)
    np.add.at(G, sensors, 2.0 * residual)

    back = np.conj(_dispersion_phase(grid, 0.5 * grid.ell_xi))
    c = grid.n_sq * grid.ell_xi
    for U in reversed(tape):
        G = np.fft.ifft(np.fft.fft(G, norm="ortho") * back, norm="ortho")
        rotation = np.exp(1j * c * np.abs(U) ** 2)
        V = U * rotation
        G = np.conj(rotation) * G - 2.0 * c * np.imag(V * np.conj(G)) * U
        G = np.fft.ifft(np.fft.fft(G, norm="ortho") * back, norm="ortho")
    return float(np.sum(np.abs(residual) ** 2)), G


class NlseSolver(object):
    """ Forward map, input gradient and back-propagation for the fiber channel """
    is_complex = True
    name = "nlse"

    def __init__(self, grid: NlseGrid):
        self.grid = grid
        self.positions = grid.positions
        """ τ coordinate of every sample """

        self.spacing = grid.dtau
        self.domain = (0.0, grid.tau_span)

    def forward(self, U0) -> np.ndarray:
        return ssfm_solve(U0, self.grid)

    def input_gradient(self, U0, y, sensors) -> np.ndarray:
        """ Complex gradient Re-part + i·Im-part, so callers can pick either half """
        return ssfm_loss_and_gradient(U0, y, sensors, self.grid)[1]

    def loss_and_gradient(self, U0, y, sensors) -> Tuple[float, np.ndarray]:
        return ssfm_loss_and_gradient(U0, y, sensors, self.grid)

    def reverse(self, U) -> np.ndarray:
        return reverse_propagate(U, self.grid)

    def describe(self) -> dict:
        g = self.grid
        return {"s_sign": g.s_sign, "n_sq": g.n_sq, "n_tau": g.n_tau, "tau_span": g.tau_span,
                "ell_xi": g.ell_xi, "n_steps": g.n_steps, "xi_end": g.xi_end}

    def __repr__(self):
        return f"NlseSolver <n_tau: {self.grid.n_tau}, steps: {self.grid.n_steps}, xi_end: {self.grid.xi_end:g}>"
