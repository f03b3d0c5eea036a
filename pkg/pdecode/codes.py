"codes.py: binary linear codes, GF(2) elimination and an exhaustive ML oracle"
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
from typing import Callable, List, Optional, Tuple
import logging

import numpy as np

from .errors import CodebookTooLarge, DimensionError, ParityCheckFormatError

logger = logging.getLogger(__name__)

DEFAULT_CODEBOOK_CAP = 2 ** 20
IMAGE_BATCH = 4096


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class ParityCheckMatrix(object):
    """ A binary m×n parity-check matrix with its row and column supports """
    def __init__(self, bits):
        bits = np.asarray(bits)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ParityCheckFormatError(f"expected a 2-D matrix, got shape {bits.shape}")
        if not np.isin(bits, (0, 1)).all():
            raise ParityCheckFormatError("matrix entries must be 0 or 1")
        bits = bits.astype(np.uint8)

        zero_rows = np.flatnonzero(bits.sum(axis=1) == 0)
        if zero_rows.size:
            raise ParityCheckFormatError(f"all-zero row(s) {zero_rows.tolist()}")
        zero_cols = np.flatnonzero(bits.sum(axis=0) == 0)
        if zero_cols.size:
            raise ParityCheckFormatError(f"all-zero column(s) {zero_cols.tolist()}")

        self.m, self.n = bits.shape
        self.bits = _frozen(bits)
        """ The matrix itself, uint8, read-only """

        self.row_support: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(np.flatnonzero(row).tolist()) for row in bits)
        """ A(i): columns taking part in parity check i (0-based) """

        self.col_support: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(np.flatnonzero(col).tolist()) for col in bits.T)
        """ B(j): parity checks column j takes part in (0-based) """

        self._rank: Optional[int] = None

    @property
    def rank(self) -> int:
        if self._rank is None:
            self._rank = len(_row_reduce(_pack_rows(self.bits), self.n)[1])
        return self._rank

    def __repr__(self):
        return f"ParityCheckMatrix <m: {self.m}, n: {self.n}, rank: {self.rank}>"

    def __eq__(self, other):
        return isinstance(other, ParityCheckMatrix) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.m, self.n, self.bits.tobytes()))

    def to_text(self) -> str:
        """ Serialize in the same plain text format `load_parity_check` reads """
        lines = [f"{self.m} {self.n}"]
        lines += [" ".join(str(b) for b in row) for row in self.bits.tolist()]
        return "\n".join(lines) + "\n"


def load_parity_check(text: str) -> ParityCheckMatrix:
    """ Parse "m n" followed by m rows of n space separated bits.
    Blank lines and lines starting with '#' are ignored. """
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines:
        raise ParityCheckFormatError("empty parity-check file")

    header = lines[0].split()
    try:
        m, n = (int(v) for v in header)
    except ValueError:
        raise ParityCheckFormatError(f"malformed dimensions line {lines[0]!r}") from None
    if m < 1 or n < 1:
        raise ParityCheckFormatError(f"malformed dimensions {m}x{n}")

    rows = lines[1:]
    if len(rows) != m:
        raise ParityCheckFormatError(f"expected {m} rows, found {len(rows)}")
    bits = []
    for number, row in enumerate(rows, start=1):
        symbols = row.split()
        if len(symbols) != n:
            raise ParityCheckFormatError(f"row {number} has {len(symbols)} entries, expected {n}")
        for symbol in symbols:
            if symbol not in ("0", "1"):
                raise ParityCheckFormatError(f"row {number}: non-binary symbol {symbol!r}")
        bits.append([int(s) for s in symbols])
    return ParityCheckMatrix(np.array(bits, dtype=np.uint8))


def load_parity_check_file(path: str) -> ParityCheckMatrix:
    with open(path, "r", encoding="utf-8") as f:
        return load_parity_check(f.read())


def bipolar_map(b) -> np.ndarray:
    """ 0 -> +1, 1 -> -1, entrywise """
    b = np.asarray(b)
    return (1 - 2 * b.astype(np.int8)).astype(np.int8)


def binary_map(x) -> np.ndarray:
    """ Inverse of `bipolar_map` on {+1, -1}; anything non-negative maps to 0 """
    return (np.asarray(x) < 0).astype(np.uint8)


def syndrome(H: ParityCheckMatrix, b) -> np.ndarray:
    b = np.asarray(b)
    if b.shape[-1] != H.n:
        raise DimensionError(f"word length {b.shape[-1]} does not match n={H.n}")
    return ((b.astype(np.int64) @ H.bits.T.astype(np.int64)) % 2).astype(np.uint8)


def _pack_rows(bits: np.ndarray) -> List[int]:
    # column 0 is the most significant bit, so pivots go leftmost first
    n = bits.shape[1]
    return [sum(int(v) << (n - 1 - j) for j, v in enumerate(row)) for row in bits.tolist()]


def _row_reduce(rows: List[int], n: int) -> Tuple[List[int], List[int]]:
    """ Reduced row echelon form over GF(2) on bit-packed rows.
    Returns the nonzero rows and their pivot columns. """
    rows = list(rows)
    pivots = []
    r = 0
    for col in range(n):
        bit = 1 << (n - 1 - col)
        pivot = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def gf2_rank(bits) -> int:
    bits = np.asarray(bits, dtype=np.uint8)
    return len(_row_reduce(_pack_rows(bits), bits.shape[1])[1])


def null_space(H: ParityCheckMatrix) -> np.ndarray:
    """ Basis of {b : Hb = 0} as rows of a (n - rank) × n binary matrix """
    n = H.n
    reduced, pivots = _row_reduce(_pack_rows(H.bits), n)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        bit = 1 << (n - 1 - f)
        for row, p in zip(reduced, pivots):
            if row & bit:
                basis[k, p] = 1
    return basis


class Codebook(object):
    """ A list of bipolar codewords, one per row """
    def __init__(self, words):
        words = np.array(words, dtype=np.int8)
        if words.ndim != 2:
            raise DimensionError(f"codebook must be 2-D, got shape {words.shape}")
        self.words = _frozen(words)
        """ Bipolar words, shape (count, n) """

        self.n = words.shape[1]
        count = words.shape[0]
        self.dimension = int(np.log2(count)) if count else 0
        """ k = log2(count) """

    def __len__(self):
        return self.words.shape[0]

    def __iter__(self):
        return iter(self.words)

    def __repr__(self):
        return f"Codebook <count: {len(self)}, n: {self.n}>"

    def binary(self) -> np.ndarray:
        return binary_map(self.words)

    def minimum_distance(self) -> int:
        """ Smallest pairwise Hamming distance; for a linear code that's the
        smallest nonzero weight, but the pairwise scan works for any list """
        if len(self) < 2:
            raise ValueError("minimum distance needs at least two words")
        binary = self.binary().astype(np.int16)
        best = self.n
        for i in range(len(self) - 1):
            distances = np.count_nonzero(binary[i + 1:] != binary[i], axis=1)
            best = min(best, int(distances.min()))
        return best


def enumerate_codebook(H: ParityCheckMatrix, cap: int = DEFAULT_CODEBOOK_CAP) -> Codebook:
    """ All codewords of C(H), word index i being the GF(2) combination of the
    null space basis selected by the bits of i """
    k = H.n - H.rank
    if 2 ** k > cap:
        raise CodebookTooLarge(f"codebook has 2^{k} words, cap is {cap}")
    basis = null_space(H)
    indices = np.arange(2 ** k, dtype=np.int64)
    coefficients = ((indices[:, None] >> np.arange(k)) & 1).astype(np.uint8)
    # sums stay below 256 because k <= 20
    binary = (coefficients @ basis) % 2
    logger.debug("enumerated %d codewords of a %dx%d matrix", 2 ** k, H.m, H.n)
    return Codebook(bipolar_map(binary))


def codebook_images(book: Codebook, forward: Callable[[np.ndarray], np.ndarray],
                    batch: int = IMAGE_BATCH) -> np.ndarray:
    """ Apply `forward` to every codeword. `forward` must accept words stacked
    along the leading axis. """
    if len(book) == 0:
        raise ValueError("empty codebook")
    parts = [forward(book.words[i:i + batch].astype(np.float64))
             for i in range(0, len(book), batch)]
    return np.concatenate(parts, axis=0)


def ml_decode(y, forward: Optional[Callable[[np.ndarray], np.ndarray]], book: Codebook,
              images: Optional[np.ndarray] = None) -> np.ndarray:
    """ argmin over codewords of ||y - forward(s)||^2, lowest index wins ties.
    Pass precomputed `images` to skip evaluating `forward`. """
    if len(book) == 0:
        raise ValueError("empty codebook")
    if images is None:
        images = codebook_images(book, forward)
    y = np.asarray(y)
    if images.shape[1:] != y.shape:
        raise DimensionError(f"observation shape {y.shape} does not match images {images.shape[1:]}")
    distances = np.sum(np.abs(images - y) ** 2, axis=tuple(range(1, images.ndim)))
    return book.words[int(np.argmin(distances))].copy()


def all_binary_words(n: int) -> np.ndarray:
    """ Every binary word of length n, index order; for brute-force checks """
    indices = np.arange(2 ** n, dtype=np.int64)
    return ((indices[:, None] >> np.arange(n)) & 1).astype(np.uint8)
