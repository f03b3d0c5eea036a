"dump.py: CSV files written and read by the pdecode commands"
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
# Every file starts with "# " comment lines (format tag, then free-form
# metadata), followed by a regular CSV header row. Floats are written with
# repr() so a rerun with the same seed produces the same bytes.
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple
import csv
import io
import os

import numpy as np

from .channel import ChannelLayout, Observation
from .codes import Codebook
from .decoder import DecodeResult
from .errors import DimensionError, PdecodeError

BER_FORMAT = "pdecode-ber/1"
BER_COLUMNS = ("decoder", "sigma", "snr_db", "trials", "n", "bit_errors", "block_errors",
               "diverged", "ber", "bler", "ber_stderr", "bler_stderr", "config_hash")
""" Column order of BER files; changing it means bumping BER_FORMAT """


def _number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _writer(out: TextIO, tag: str, comments: Sequence[str] = ()):
    out.write(f"# {tag}\n")
    for comment in comments:
        out.write(f"# {comment}\n")
    return csv.writer(out, lineterminator="\n")


def _open(path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def _read(path: str) -> Tuple[List[str], List[dict]]:
    """ Split a file into its comment lines and its CSV records """
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = f.read().splitlines()
    comments = [line[2:] for line in lines if line.startswith("# ")]
    body = [line for line in lines if line and not line.startswith("#")]
    return comments, list(csv.DictReader(body))


def write_waveform(path: str, positions, u) -> None:
    """ x,u for real waveforms; tau,re,im,abs for complex ones """
    u = np.asarray(u)
    positions = np.asarray(positions)
    if u.shape != positions.shape:
        raise DimensionError(f"waveform shape {u.shape} does not match positions {positions.shape}")
    with _open(path) as f:
        if np.iscomplexobj(u):
            w = _writer(f, "pdecode-waveform/1 complex")
            w.writerow(("tau", "re", "im", "abs"))
            for x, v in zip(positions.tolist(), u.tolist()):
                w.writerow((_number(x), _number(v.real), _number(v.imag), _number(abs(v))))
        else:
            w = _writer(f, "pdecode-waveform/1 real")
            w.writerow(("x", "u"))
            for x, v in zip(positions.tolist(), u.tolist()):
                w.writerow((_number(x), _number(v)))


def read_waveform(path: str) -> Tuple[np.ndarray, np.ndarray]:
    _, records = _read(path)
    if records and "tau" in records[0]:
        x = np.array([float(r["tau"]) for r in records])
        u = np.array([complex(float(r["re"]), float(r["im"])) for r in records])
    else:
        x = np.array([float(r["x"]) for r in records])
        u = np.array([float(r["u"]) for r in records])
    return x, u


def write_observation(path: str, layout: ChannelLayout, obs: Observation) -> None:
    """ One row per sensor: state index, position, y. `y_im` is blank for real channels. """
    y = np.asarray(obs.y)
    if y.shape != (layout.m,):
        raise DimensionError(f"observation length {y.shape} does not match {layout.m} sensors")
    comments = [f"sigma {_number(obs.sigma)}"]
    if obs.true_word is not None:
        comments.append("word " + " ".join(str(int(v)) for v in obs.true_word))
    if obs.rng_seed is not None:
        comments.append("seed " + " ".join(str(int(v)) for v in (obs.rng_seed,) + tuple(obs.stream)))
    with _open(path) as f:
        w = _writer(f, "pdecode-observation/1", comments)
        w.writerow(("sensor", "position", "y_re", "y_im"))
        complex_y = np.iscomplexobj(y)
        for index, position, v in zip(layout.sensors, layout.sensor_positions, y.tolist()):
            w.writerow((index, _number(position), _number(v.real if complex_y else v),
                        _number(v.imag) if complex_y else ""))


def read_observation(path: str, layout: Optional[ChannelLayout] = None) -> Observation:
    """ Inverse of `write_observation`. Given a layout, the sensor list must match it. """
    comments, records = _read(path)
    if not comments or not comments[0].startswith("pdecode-observation/"):
        raise PdecodeError(f"{path}: not an observation file")
    sensors = [int(r["sensor"]) for r in records]
    if layout is not None and tuple(sensors) != layout.sensors:
        raise DimensionError(f"{path}: sensors do not match the configured layout")
    if any(r["y_im"] != "" for r in records):
        y = np.array([complex(float(r["y_re"]), float(r["y_im"] or 0.0)) for r in records])
    else:
        y = np.array([float(r["y_re"]) for r in records])

    sigma = 0.0
    true_word = None
    rng_seed = None
    stream: Tuple[int, ...] = ()
    for comment in comments[1:]:
        key, _, value = comment.partition(" ")
        if key == "sigma":
            sigma = float(value)
        elif key == "word":
            true_word = np.array([int(v) for v in value.split()], dtype=np.int8)
        elif key == "seed":
            numbers = [int(v) for v in value.split()]
            rng_seed, stream = numbers[0], tuple(numbers[1:])
    return Observation(y=y, true_word=true_word, rng_seed=rng_seed, stream=stream, sigma=sigma)


def write_trace(path: str, result: DecodeResult) -> None:
    with _open(path) as f:
        w = _writer(f, "pdecode-trace/1", [f"diverged {int(result.diverged)}",
                                           f"codeword {int(result.is_codeword)}"])
        w.writerow(("iteration", "squared_error", "potential_energy"))
        for k, (err, energy) in enumerate(zip(result.squared_error, result.potential)):
            w.writerow((k, _number(err), _number(energy)))


def write_evolution(path: str, positions, history, h: float) -> None:
    """ Long format, one row per (t, x): the space-time picture of the channel """
    history = np.asarray(history)
    positions = np.asarray(positions)
    if history.ndim != 2 or history.shape[1] != positions.size:
        raise DimensionError(f"history shape {history.shape} does not match {positions.size} positions")
    with _open(path) as f:
        w = _writer(f, "pdecode-evolution/1")
        w.writerow(("x", "t", "u"))
        for level, row in enumerate(history.tolist()):
            t = _number(level * h)
            for x, v in zip(positions.tolist(), row):
                w.writerow((_number(x), t, _number(v)))


def format_ber(records: Iterable, header_json: str) -> str:
    out = io.StringIO()
    w = _writer(out, BER_FORMAT, [f"config {header_json}"])
    w.writerow(BER_COLUMNS)
    for record in records:
        w.writerow(tuple(_number(v) if not isinstance(v, str) else v
                         for v in record.to_row()))
    return out.getvalue()


def write_ber(path: str, records: Iterable, header_json: str) -> None:
    with _open(path) as f:
        f.write(format_ber(records, header_json))


def read_ber(path: str) -> List[dict]:
    comments, records = _read(path)
    if not comments or comments[0] != BER_FORMAT:
        raise PdecodeError(f"{path}: expected a {BER_FORMAT} file")
    return records


def write_codebook(path: str, book: Codebook) -> None:
    """ One bipolar codeword per line, index order """
    with _open(path) as f:
        f.write(f"# pdecode-codebook/1\n# n {book.n}\n# k {book.dimension}\n")
        for word in book.words.tolist():
            f.write(" ".join("+1" if v > 0 else "-1" for v in word) + "\n")
