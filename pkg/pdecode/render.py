""" render reports as terminal-compatible unicode tables """
# render.py
#
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
from .bundled import describe_code
from datetime import datetime
from typing import Dict, List, Optional, Sequence
import dateutil.tz

ANSI_GREEN = "\033[32m"
ANSI_RED = "\033[31m"
ANSI_RESET = "\033[0m"


def _visible_len(cell: str) -> int:
    # colour escapes take no room on screen
    for code in (ANSI_GREEN, ANSI_RED, ANSI_RESET):
        cell = cell.replace(code, "")
    return len(cell)


def _ljust(cell: str, width: int) -> str:
    return cell + " " * (width - _visible_len(cell))


def table(header_lines: List[str], rows: List[List[str]]) -> str:
    """ Draw a unicode box drawing characters based table. The first row is
    the column header. """
    width: Dict[int, int] = {}

    # First pass: column widths
    for row in rows:
        for x, cell in enumerate(row):
            width[x] = max(width.get(x, 0), _visible_len(cell) + 2)

    table_width = sum(width.values()) + len(width) - 1
    header_width = max(len(line) for line in header_lines)
    if table_width < header_width:
        # stretch the last column so the title fits
        width[len(width) - 1] += header_width - table_width
        table_width = header_width

    ret = ["╒" + ("═" * table_width) + "╕"]
    for header_line in header_lines:
        ret.append(f"│{header_line.center(table_width)}│")

    # Second pass: table content
    for y, row in enumerate(rows):
        cells = [" " + _ljust(cell, width[x] - 1) for x, cell in enumerate(row)]
        if y == 0:
            ret.append("╞" + "╤".join("═" * width[x] for x in range(len(row))) + "╡")
        ret.append("│" + "│".join(cells) + "│")
        if y == 0:
            ret.append("├" + "┼".join("─" * width[x] for x in range(len(row))) + "┤")
    ret.append("╰" + "┴".join("─" * width[x] for x in range(len(width))) + "╯")
    ret.append("")

    return "\n".join(ret)


def boxify(lines: Sequence[str], padding: int = 2) -> List[str]:
    """ Draw a unicode box around some lines """
    longest_line = max(len(line) for line in lines)
    padded = longest_line + padding * 2
    ret = ["╒" + ("═" * padded) + "╕"]
    for line in lines:
        ret.append(f"│{line.ljust(longest_line).center(padded)}│")
    ret.append("╰" + ("─" * padded) + "╯")
    return ret


def timestamp(now: Optional[datetime] = None) -> str:
    """ Report time in the local timezone """
    if now is None:
        now = datetime.now(dateutil.tz.tzlocal())
    elif now.tzinfo is None:
        now = now.replace(tzinfo=dateutil.tz.tzlocal())
    return now.strftime("%Y-%m-%d %H:%M %Z")


def _verdict(passed: bool, color: bool) -> str:
    if not color:
        return "PASS" if passed else "FAIL"
    return f"{ANSI_GREEN}PASS{ANSI_RESET}" if passed else f"{ANSI_RED}FAIL{ANSI_RESET}"


def _rate(value: float) -> str:
    return f"{value:.3e}"


def render_ber(records: Sequence, cfg, now: Optional[datetime] = None,
               sanity: Sequence[str] = ()) -> str:
    header = [f"BER sweep, {cfg.pde} channel",
              describe_code(cfg.code),
              f"{cfg.trials} trials per level, seed {cfg.seed}, config {cfg.config_hash}",
              timestamp(now)]
    with_snr = any(r.snr_db is not None for r in records)
    columns = ["decoder", "σ"] + (["SNR dB"] if with_snr else []) + \
        ["bit errors", "BER", "± se", "blocks", "BLER", "diverged"]
    rows = [columns]
    for r in records:
        row = [r.decoder, f"{r.sigma:g}"]
        if with_snr:
            row.append("" if r.snr_db is None else f"{r.snr_db:.2f}")
        row += [str(r.bit_errors), _rate(r.ber), _rate(r.ber_stderr),
                str(r.block_errors), _rate(r.bler), str(r.diverged)]
        rows.append(row)
    text = table(header, rows)
    for line in sanity:
        text += f"warning: {line}\n"
    return text


def render_gradcheck(rows: Sequence, now: Optional[datetime] = None, color: bool = True) -> str:
    header = ["Gradient checks", timestamp(now)]
    body = [["component", "grid", "instances", "max rel err", "tolerance", "result"]]
    for row in rows:
        body.append([row.component, row.grid, str(row.instances), f"{row.max_error:.2e}",
                     f"{row.tolerance:.0e}", _verdict(row.passed, color)])
    return table(header, body)


def _word(word) -> str:
    return " ".join("+" if v > 0 else "-" for v in word)


def render_decode(estimates: Dict[str, dict], true_word=None, now: Optional[datetime] = None,
                  title: str = "Decode", sent_is_codeword: bool = True) -> str:
    """ `estimates` maps decoder name to {"estimate", "is_codeword", "diverged"} """
    header = [title, timestamp(now)]
    columns = ["decoder", "estimate", "codeword"]
    if true_word is not None:
        columns.append("bit errors")
    rows = [columns]
    if true_word is not None:
        rows.append(["sent", _word(true_word), "yes" if sent_is_codeword else "no", ""])
    for name, info in estimates.items():
        codeword = "diverged" if info.get("diverged") else ("yes" if info["is_codeword"] else "no")
        row = [name, _word(info["estimate"]), codeword]
        if true_word is not None:
            row.append(str(int(sum(1 for a, b in zip(info["estimate"], true_word) if a != b))))
        rows.append(row)
    return table(header, rows)


def render_files(title: str, paths: Dict[str, str]) -> str:
    """ A box listing the files a command wrote """
    lines = [title, ""] + [f"{name}: {path}" for name, path in paths.items()]
    return "\n".join(boxify(lines)) + "\n"
