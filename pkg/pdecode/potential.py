""" Code potential energy h(x) = α Σ (x_j² - 1)² + β Σ (Π_{j∈A(i)} x_j - 1)²
and its gradient """
# Copyright (C) 2026 pdecode contributors
#
# SPDX-License-Identifier: GPL-3.0-or-later
from dataclasses import dataclass
import math

import numpy as np

from .codes import ParityCheckMatrix
from .errors import ConfigError, DimensionError


@dataclass(frozen=True)
class PotentialParams:
    alpha: float = 1.0
    beta: float = 1.0
    epsilon_clamp: float = 1e-8

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon_clamp"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"decoder.{name}", f"must be positive, got {value}")


def bmod(a):
    """ Real remainder modulo 2, a - 2⌊a/2⌋, always in [0, 2) """
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("bmod needs finite input")
    out = a - 2.0 * np.floor(a / 2.0)
    return float(out) if out.ndim == 0 else out


def sgn(x) -> np.ndarray:
    """ Sign with sgn(0) = +1 """
    return np.where(np.asarray(x) < 0, -1.0, 1.0)


def _check(x, H: ParityCheckMatrix) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (H.n,):
        raise DimensionError(f"expected a vector of length {H.n}, got shape {x.shape}")
    return x


def row_products(x, H: ParityCheckMatrix) -> np.ndarray:
    """ Π_{j∈A(i)} x_j for every row, by explicit products """
    x = _check(x, H)
    return np.array([math.prod(x[list(support)]) for support in H.row_support])


def potential_energy(x, H: ParityCheckMatrix, p: PotentialParams = PotentialParams()) -> float:
    x = _check(x, H)
    bipolar = np.sum((x * x - 1.0) ** 2)
    parity = np.sum((row_products(x, H) - 1.0) ** 2)
    return float(p.alpha * bipolar + p.beta * parity)


def parity_sign(x, H: ParityCheckMatrix) -> np.ndarray:
    """ 1 - 2·bmod(H(1 - sgn(x))/2): the sign of each row product, via a
    count of negative entries """
    negatives = H.bits @ ((1.0 - sgn(x)) / 2.0)
    return 1.0 - 2.0 * bmod(negatives)


def potential_gradient(x, H: ParityCheckMatrix, p: PotentialParams = PotentialParams()) -> np.ndarray:
    """ 4α(x⊙x - 1)⊙x + 2β Hᵀ(d⊙d - d)/x, d = sign part ⊙ exp(H ln|x|).

    Coordinates closer to zero than `p.epsilon_clamp` are evaluated at the
    clamped magnitude, keeping their sign (sgn(0) = +1).
    """
    x = _check(x, H)
    signs = sgn(x)
    clamped = np.where(np.abs(x) < p.epsilon_clamp, signs * p.epsilon_clamp, x)

    bits = H.bits.astype(np.float64)
    d_abs = np.exp(bits @ np.log(np.abs(clamped)))
    d = parity_sign(clamped, H) * d_abs
    return 4.0 * p.alpha * (clamped * clamped - 1.0) * clamped \
        + 2.0 * p.beta * (bits.T @ (d * d - d)) / clamped


def potential_gradient_naive(x, H: ParityCheckMatrix, p: PotentialParams = PotentialParams()) -> np.ndarray:
    """ Term-by-term product rule; a reference for `potential_gradient` """
    x = _check(x, H)
    grad = 4.0 * p.alpha * (x * x - 1.0) * x
    for support in H.row_support:
        product = math.prod(x[list(support)])
        for j in support:
            others = math.prod(x[l] for l in support if l != j)
            grad[j] += 2.0 * p.beta * (product - 1.0) * others
    return grad
