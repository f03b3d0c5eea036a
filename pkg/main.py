#!/usr/bin/env python3
# main.py - pdecode main script
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
"""Usage:
  main.py gradcheck [-v] [-c <file>] [--seed <n>] [--html <file>]
  main.py simulate [-v] [-c <file>] [--seed <n>] [--sigma <list>] [--output <dir>] [--word <word>] [--no-decode] [--evolution] [--codebook <file>] [--html <file>]
  main.py decode <observation> [-v] [-c <file>] [--seed <n>] [--decoders <list>] [--html <file>]
  main.py ber-sweep [-v] [-c <file>] [--seed <n>] [--trials <n>] [--sigma <list>] [--workers <n>] [--output <dir>] [--html <file>]
  main.py (-h | --help)
  main.py --version

Physics-aware decoding of linear codes over PDE channels
Options:
  -c <file>, --config <file>  Use the specified configuration file (JSON or INI).
  --seed <n>                  Master seed, overrides experiment.seed.
  --trials <n>                Trials per noise level, overrides experiment.trials.
  --sigma <list>              Comma separated noise levels, overrides experiment.noise_levels.
  --workers <n>               Worker processes, overrides experiment.workers.
  --output <dir>              Output directory, overrides experiment.output_dir.
  --word <word>               Word to simulate, e.g. "++--+-+" or "1,1,-1,-1,1,-1,1".
  --no-decode                 Only simulate the channel.
  --evolution                 Also dump the heat solution at every time step.
  --codebook <file>           Also write every codeword, one bipolar word per line.
  --decoders <list>           Comma separated subset of gf,peak,bp,ml.
  --html <file>               Also write the report as an HTML page.
  -v, --verbose               Debug logging.
"""
import asyncio
import logging
import os.path
import sys

from docopt import docopt

from pdecode import __version__
from pdecode.bench import BenchRunner
from pdecode.config import load_config
from pdecode.dump import write_ber
from pdecode.errors import PdecodeError
from pdecode.html import write_html
from pdecode.render import render_ber, render_decode, render_files, render_gradcheck

logger = logging.getLogger("pdecode")


def parse_word(text: str):
    """ "++--+-+" or "1,1,-1,-1,1,-1,1" -> list of ±1 """
    text = text.strip()
    if text and set(text) <= {"+", "-"}:
        return [1 if c == "+" else -1 for c in text]
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise PdecodeError(f"cannot parse word {text!r}") from None


def run(arguments) -> int:
    configfile = arguments['--config'] or "config.json"
    overrides = {"seed": arguments['--seed'],
                 "trials": arguments['--trials'],
                 "sigma": arguments['--sigma'],
                 "workers": arguments['--workers'],
                 "output": arguments['--output']}
    cfg = load_config(configfile, overrides)
    runner = BenchRunner(cfg)
    logger.debug("%r", runner)
    status = 0

    if arguments['gradcheck']:
        rows = runner.gradcheck()
        text = render_gradcheck(rows, color=sys.stdout.isatty() or bool(arguments['--html']))
        if not all(row.passed for row in rows):
            status = 1
    elif arguments['simulate']:
        word = parse_word(arguments['--word']) if arguments['--word'] else None
        out = runner.simulate(word, decode=not arguments['--no-decode'],
                              evolution=arguments['--evolution'])
        if arguments['--codebook']:
            out["paths"]["codebook"] = asyncio.run(runner.export_codebook(arguments['--codebook']))
        text = render_files(f"simulate, {cfg.pde} channel, σ={cfg.noise_levels[0]:g}", out["paths"])
        if "result" in out:
            result = out["result"]
            text += render_decode({"gf": {"estimate": result.estimate,
                                          "is_codeword": result.is_codeword,
                                          "diverged": result.diverged}},
                                  out["word"], title="Simulated decode",
                                  sent_is_codeword=runner.is_codeword(out["word"]))
    elif arguments['decode']:
        decoders = None
        if arguments['--decoders']:
            decoders = [d.strip() for d in arguments['--decoders'].split(",") if d.strip()]
        obs, estimates = asyncio.run(runner.decode_file(arguments['<observation>'], decoders))
        text = render_decode(estimates, obs.true_word,
                             title=f"Decode {os.path.basename(arguments['<observation>'])}",
                             sent_is_codeword=obs.true_word is None or runner.is_codeword(obs.true_word))
    else:
        records = asyncio.run(runner.run_ber_sweep())
        path = os.path.join(cfg.output_dir, f"ber_{cfg.config_hash}.csv")
        write_ber(path, records, cfg.canonical_json())
        text = render_ber(records, cfg, sanity=runner.sanity_failures)
        text += f"records written to {path}\n"
        if runner.sanity_failures:
            status = 1

    print(text)
    if arguments['--html']:
        write_html(arguments['--html'], text, version=__version__, config_hash=cfg.config_hash)
    return status


def main():
    arguments = docopt(__doc__, version=f"pdecode {__version__}")
    logging.basicConfig(level=logging.DEBUG if arguments['--verbose'] else logging.INFO,
                        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    try:
        status = run(arguments)
    except PdecodeError as e:
        print(f"error: {e}", file=sys.stderr)
        status = 2
    sys.exit(status)


if __name__ == "__main__":
    main()
