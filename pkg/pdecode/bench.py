""" Experiment runner for pdecode: gradient checks, single-shot simulations and BER sweeps """
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
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple
import asyncio
import logging
import math
import os.path

from aiocache import SimpleMemoryCache
import numpy as np

from .bundled import bundled_codes, resolve_code_path
from .channel import Observation, build_layout, forward_map, synth_waveform, transmit, trial_rng
from .codes import (Codebook, ParityCheckMatrix, bipolar_map, binary_map, codebook_images,
                    enumerate_codebook, load_parity_check_file, ml_decode, null_space, syndrome)
from .config import ExperimentConfig
from .decoder import bp_detect, gf_decode, peak_detect
from .dump import (read_observation, write_codebook, write_evolution, write_observation,
                   write_trace, write_waveform)
from .errors import CodebookTooLarge, ConfigError, DimensionError, PdecodeError
from .potential import PotentialParams, potential_gradient, potential_gradient_naive
from .solvers.heat import HeatGrid, HeatSolver, fdm_input_gradient, fdm_solve
from .solvers.nlse import NlseGrid, NlseSolver, ssfm_input_gradient, ssfm_solve

logger = logging.getLogger(__name__)

HEAT_TOLERANCE = 1e-6
NLSE_TOLERANCE = 1e-4
POTENTIAL_TOLERANCE = 1e-9
ORACLE_SIGMAS = 3.0
""" gf may beat ml by at most this many binomial standard errors """


def build_solver(cfg: ExperimentConfig):
    if cfg.pde == "heat":
        return HeatSolver(cfg.heat)
    return NlseSolver(cfg.nlse)


def snr_db(sigma: float, convention: Optional[str]) -> Optional[float]:
    """ SNR label of a noise level. "peak": unit pulse peak over σ, in dB """
    if convention != "peak" or sigma <= 0:
        return None
    return 20.0 * math.log10(1.0 / sigma)


@dataclass
class BerRecord:
    decoder: str
    sigma: float
    trials: int
    n: int
    """ code length; BER is bit errors over trials·n """
    bit_errors: int = 0
    block_errors: int = 0
    diverged: int = 0
    snr_db: Optional[float] = None
    config_hash: str = ""

    def __post_init__(self):
        if self.trials < 1 or self.n < 1:
            raise ValueError(f"trials and n must be positive, got {self.trials}, {self.n}")
        if not 0 <= self.bit_errors <= self.trials * self.n:
            raise ValueError(f"bit error count {self.bit_errors} out of range")
        if not 0 <= self.block_errors <= self.trials:
            raise ValueError(f"block error count {self.block_errors} out of range")
        if not 0 <= self.diverged <= self.block_errors:
            raise ValueError("diverged trials must be counted as block errors")

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.n)

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials

    @property
    def ber_stderr(self) -> float:
        return math.sqrt(self.ber * (1.0 - self.ber) / (self.trials * self.n))

    @property
    def bler_stderr(self) -> float:
        return math.sqrt(self.bler * (1.0 - self.bler) / self.trials)

    def to_row(self) -> tuple:
        """ Values in `dump.BER_COLUMNS` order """
        return (self.decoder, self.sigma, self.snr_db, self.trials, self.n, self.bit_errors,
                self.block_errors, self.diverged, self.ber, self.bler, self.ber_stderr,
                self.bler_stderr, self.config_hash)

    def to_dict(self) -> dict:
        return {"decoder": self.decoder, "sigma": self.sigma, "snr_db": self.snr_db,
                "trials": self.trials, "n": self.n, "bit_errors": self.bit_errors,
                "block_errors": self.block_errors, "diverged": self.diverged,
                "ber": self.ber, "bler": self.bler, "config_hash": self.config_hash}

    def __repr__(self):
        return f"BerRecord <decoder: {self.decoder}, sigma: {self.sigma:g}, ber: {self.ber:.3e}>"


def oracle_violations(records: Sequence[BerRecord]) -> List[str]:
    """ gf can't beat exhaustive ML by more than noise; a gap means a bug """
    ml = {r.sigma: r for r in records if r.decoder == "ml"}
    problems = []
    for r in records:
        if r.decoder != "gf" or r.sigma not in ml:
            continue
        ref = ml[r.sigma]
        stderr = math.sqrt(ref.trials * ref.bler * (1.0 - ref.bler))
        if r.block_errors < ref.block_errors - ORACLE_SIGMAS * stderr:
            problems.append(f"σ={r.sigma:g}: gf has {r.block_errors} block errors, "
                            f"ml has {ref.block_errors} (± {stderr:.1f})")
    return problems


@dataclass(frozen=True)
class GradcheckRow:
    component: str
    grid: str
    instances: int
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)


def _relative(approx: np.ndarray, exact: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(exact))), 1e-300)
    return float(np.max(np.abs(approx - exact))) / scale


def heat_gradcheck(rng: np.random.Generator, instances: int = 20, n_x: int = 64, n_t: int = 30,
                   courant: float = 0.4, step: float = 1e-5) -> GradcheckRow:
    """ fdm_input_gradient against central differences of the squared error """
    ell = 1.0 / n_x
    grid = HeatGrid(lam=1.0, h=courant * ell * ell, ell=ell, n_x=n_x, n_t=n_t)
    size = grid.size
    worst = 0.0
    for _ in range(instances):
        u0 = rng.normal(size=size)
        sensors = np.sort(rng.choice(size, size=size // 4, replace=False))
        y = rng.normal(size=sensors.size)
        exact = fdm_input_gradient(u0, y, sensors, grid)

        shift = step * np.eye(size)
        plus = fdm_solve(u0 + shift, grid)[:, sensors]
        minus = fdm_solve(u0 - shift, grid)[:, sensors]
        approx = (np.sum((plus - y) ** 2, axis=1) - np.sum((minus - y) ** 2, axis=1)) / (2 * step)
        worst = max(worst, _relative(approx, exact))
    return GradcheckRow("heat", f"{n_x}x{n_t}", instances, worst, HEAT_TOLERANCE)


def nlse_gradcheck(rng: np.random.Generator, instances: int = 3, n_tau: int = 64,
                   n_steps: int = 10, s_sign: int = 1, step: float = 1e-5) -> GradcheckRow:
    """ ssfm_input_gradient against central differences along Re and Im of every sample """
    grid = NlseGrid(s_sign=s_sign, n_sq=1.0, n_tau=n_tau, tau_span=20.0, ell_xi=0.05, n_steps=n_steps)
    worst = 0.0
    for _ in range(instances):
        U0 = 0.5 * (rng.normal(size=n_tau) + 1j * rng.normal(size=n_tau))
        sensors = np.sort(rng.choice(n_tau, size=n_tau // 2, replace=False))
        y = rng.normal(size=sensors.size) + 1j * rng.normal(size=sensors.size)
        exact_re, exact_im = ssfm_input_gradient(U0, y, sensors, grid)

        def difference(direction: complex) -> np.ndarray:
            shift = direction * step * np.eye(n_tau)
            plus = ssfm_solve(U0 + shift, grid)[:, sensors]
            minus = ssfm_solve(U0 - shift, grid)[:, sensors]
            return (np.sum(np.abs(plus - y) ** 2, axis=1)
                    - np.sum(np.abs(minus - y) ** 2, axis=1)) / (2 * step)

        approx = np.concatenate([difference(1.0), difference(1j)])
        worst = max(worst, _relative(approx, np.concatenate([exact_re, exact_im])))
    return GradcheckRow("nlse", f"{n_tau}x{n_steps}", instances, worst, NLSE_TOLERANCE)


def potential_gradcheck(rng: np.random.Generator, H: ParityCheckMatrix, name: str,
                        instances: int = 100, params: PotentialParams = PotentialParams()) -> GradcheckRow:
    """ Vectorized potential gradient against the product rule, |x_j| in [0.1, 1.2] """
    worst = 0.0
    for _ in range(instances):
        x = rng.uniform(0.1, 1.2, H.n) * rng.choice((-1.0, 1.0), H.n)
        diff = potential_gradient(x, H, params) - potential_gradient_naive(x, H, params)
        worst = max(worst, float(np.max(np.abs(diff))))
    return GradcheckRow(f"potential {name}", f"n={H.n}", instances, worst, POTENTIAL_TOLERANCE)


def random_codeword(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """ Uniform codeword: a random combination of the null space basis rows """
    coefficients = rng.integers(0, 2, basis.shape[0])
    return bipolar_map((coefficients @ basis) % 2)


class TrialContext(object):
    """ Everything one process needs to run trials: solver, layout and code.
    Built once per worker. """
    def __init__(self, cfg: ExperimentConfig, book: Optional[Codebook] = None,
                 images: Optional[np.ndarray] = None):
        self.cfg = cfg
        self.H = load_parity_check_file(resolve_code_path(cfg.code))
        self.solver = build_solver(cfg)
        self.layout = build_layout(self.solver, self.H.n, cfg.layout)
        self.basis = null_space(self.H)
        """ Rows span the code; random codewords are random combinations """

        self.book = book
        self.images = images
        if "ml" in cfg.decoders and book is None:
            self.book = enumerate_ml_codebook(self.H, cfg)
            self.images = codebook_images(self.book, forward_map(self.layout, self.solver))

    def decode_one(self, name: str, obs: Observation, rng: np.random.Generator) -> Tuple[np.ndarray, bool]:
        """ (estimate, diverged) for one decoder """
        if name == "gf":
            result = gf_decode(obs, self.layout, self.solver, self.H, self.cfg.decoder, rng)
            return result.estimate, result.diverged
        if name == "peak":
            return peak_detect(obs, self.layout), False
        if name == "bp":
            return bp_detect(obs, self.layout, self.solver), False
        if name == "ml":
            return ml_decode(obs.y, None, self.book, self.images), False
        raise PdecodeError(f"unknown decoder {name!r}")

    def run_trial(self, level: int, trial: int, sigma: float) -> Dict[str, Tuple[int, int, int]]:
        """ One codeword through the channel, decoded by every configured
        decoder. Returns decoder -> (bit errors, block error, diverged). """
        seed = self.cfg.seed
        rng = trial_rng(seed, level, trial, 0)
        word = random_codeword(self.basis, rng)
        obs = transmit(word, self.layout, self.solver, rng, sigma=sigma, rng_seed=seed,
                       stream=(level, trial))
        ret = {}
        for name in self.cfg.decoders:
            estimate, diverged = self.decode_one(name, obs, trial_rng(seed, level, trial, 1))
            bit_errors = int(np.count_nonzero(estimate != word))
            block_error = int(diverged or bit_errors > 0)
            ret[name] = (bit_errors, block_error, int(diverged))
        return ret

    def run_chunk(self, level: int, sigma: float, start: int, stop: int
                  ) -> Tuple[int, Dict[str, Tuple[int, int, int]]]:
        totals = {name: (0, 0, 0) for name in self.cfg.decoders}
        for trial in range(start, stop):
            for name, counts in self.run_trial(level, trial, sigma).items():
                totals[name] = tuple(a + b for a, b in zip(totals[name], counts))
        return level, totals


def enumerate_ml_codebook(H: ParityCheckMatrix, cfg: ExperimentConfig) -> Codebook:
    try:
        return enumerate_codebook(H, cfg.codebook_cap)
    except CodebookTooLarge as e:
        raise ConfigError("experiment.decoders", f"ml needs the full codebook: {e}") from None


_worker_context: Optional[TrialContext] = None


def _init_worker(cfg: ExperimentConfig) -> None:
    global _worker_context
    _worker_context = TrialContext(cfg)


def _run_chunk(level: int, sigma: float, start: int, stop: int):
    return _worker_context.run_chunk(level, sigma, start, stop)


class BenchRunner(object):
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.cache = SimpleMemoryCache()
        self.H = load_parity_check_file(resolve_code_path(cfg.code))
        self.solver = build_solver(cfg)
        self.layout = build_layout(self.solver, self.H.n, cfg.layout)
        self.sanity_failures: List[str] = []
        """ Filled in by `run_ber_sweep` """

    def __repr__(self):
        return f"BenchRunner <{self.solver!r}, {self.layout!r}>"

    async def codebook(self) -> Codebook:
        key = f"codebook:{self.cfg.code}"
        book = await self.cache.get(key)
        if book is None:
            book = enumerate_ml_codebook(self.H, self.cfg)
            await self.cache.set(key, book)
        return book

    async def codebook_images(self) -> np.ndarray:
        """ Noiseless sensor readings of every codeword, for the ML oracle """
        key = f"images:{self.cfg.config_hash}"
        images = await self.cache.get(key)
        if images is None:
            book = await self.codebook()
            logger.info("computing channel images of %d codewords", len(book))
            images = codebook_images(book, forward_map(self.layout, self.solver))
            await self.cache.set(key, images)
        return images

    async def export_codebook(self, path: str) -> str:
        book = await self.codebook()
        write_codebook(path, book)
        logger.info("wrote %d codewords to %s", len(book), path)
        return path

    async def trial_context(self) -> TrialContext:
        if "ml" in self.cfg.decoders:
            return TrialContext(self.cfg, await self.codebook(), await self.codebook_images())
        return TrialContext(self.cfg)

    def gradcheck(self) -> List[GradcheckRow]:
        rng = np.random.default_rng(self.cfg.seed)
        rows = [heat_gradcheck(rng),
                nlse_gradcheck(rng, s_sign=self.cfg.nlse.s_sign if self.cfg.nlse else 1)]
        bch = load_parity_check_file(bundled_codes["bch_15_7"])
        rows.append(potential_gradcheck(rng, bch, "bch_15_7", params=self.cfg.decoder.potential))
        if self.H != bch:
            rows.append(potential_gradcheck(rng, self.H, os.path.basename(self.cfg.code),
                                            params=self.cfg.decoder.potential))
        for row in rows:
            logger.info("gradcheck %s: max error %.2e (tolerance %.0e)", row.component,
                        row.max_error, row.tolerance)
        return rows

    def check_word(self, word) -> np.ndarray:
        word = np.asarray(word)
        if word.shape != (self.H.n,):
            raise DimensionError(f"word has {word.size} symbols, the code has n={self.H.n}")
        if not np.isin(word, (-1, 1)).all():
            raise PdecodeError("word symbols must be +1 or -1")
        return word.astype(np.int8)

    def is_codeword(self, word) -> bool:
        return not syndrome(self.H, binary_map(word)).any()

    def simulate(self, word=None, decode: bool = True, evolution: bool = False,
                 output_dir: Optional[str] = None) -> Dict[str, object]:
        """ Send one word through the channel, dump the waveforms and optionally
        decode it with a trace. Without `word` a random codeword is drawn. """
        cfg = self.cfg
        output_dir = output_dir or cfg.output_dir
        rng = trial_rng(cfg.seed)
        if word is None:
            word = random_codeword(null_space(self.H), rng)
        word = self.check_word(word)
        if not self.is_codeword(word):
            logger.warning("simulated word is not a codeword of %s", cfg.code)
        sigma = cfg.noise_levels[0]

        u0 = synth_waveform(word, self.layout)
        output = self.solver.forward(u0)
        obs = transmit(word, self.layout, self.solver, rng, sigma=sigma, rng_seed=cfg.seed)

        paths = {"input": os.path.join(output_dir, "input_waveform.csv"),
                 "output": os.path.join(output_dir, "output_waveform.csv"),
                 "observation": os.path.join(output_dir, "observation.csv")}
        write_waveform(paths["input"], self.layout.positions, u0)
        write_waveform(paths["output"], self.layout.positions, output)
        write_observation(paths["observation"], self.layout, obs)

        if evolution:
            if not hasattr(self.solver, "history"):
                raise PdecodeError("--evolution needs the heat channel")
            paths["evolution"] = os.path.join(output_dir, "evolution.csv")
            write_evolution(paths["evolution"], self.layout.positions, self.solver.history(u0),
                            cfg.heat.h)

        ret: Dict[str, object] = {"paths": paths, "observation": obs, "word": word,
                                  "input": u0, "output": output}
        if decode:
            params = replace(cfg.decoder, keep_waveforms=True)
            result = gf_decode(obs, self.layout, self.solver, self.H, params, trial_rng(cfg.seed, 1))
            paths["trace"] = os.path.join(output_dir, "trace.csv")
            paths["estimate"] = os.path.join(output_dir, "estimated_waveform.csv")
            write_trace(paths["trace"], result)
            write_waveform(paths["estimate"], self.layout.positions, result.waveforms[-1])
            ret["result"] = result
        return ret

    async def decode(self, obs: Observation, decoders: Optional[Sequence[str]] = None) -> Dict[str, dict]:
        """ Run decoders on one observation. Returns name -> estimate info. """
        decoders = list(decoders or self.cfg.decoders)
        if "ml" in decoders:
            book, images = await self.codebook(), await self.codebook_images()
        else:
            book = images = None
        context = TrialContext(replace(self.cfg, decoders=tuple(decoders)), book, images)
        rng = trial_rng(self.cfg.seed, 1)
        ret = {}
        for name in decoders:
            estimate, diverged = context.decode_one(name, obs, rng)
            ret[name] = {"estimate": estimate, "diverged": diverged,
                         "is_codeword": not diverged and self.is_codeword(estimate)}
        return ret

    async def decode_file(self, path: str, decoders: Optional[Sequence[str]] = None):
        obs = read_observation(path, self.layout)
        return obs, await self.decode(obs, decoders)

    def work_units(self) -> List[Tuple[int, float, int, int]]:
        """ (level index, σ, first trial, end trial) """
        cfg = self.cfg
        return [(level, sigma, start, min(start + cfg.chunk_size, cfg.trials))
                for level, sigma in enumerate(cfg.noise_levels)
                for start in range(0, cfg.trials, cfg.chunk_size)]

    async def run_ber_sweep(self) -> List[BerRecord]:
        """ Monte-Carlo BER for every (σ, decoder). Trial t at level l always
        uses the streams (seed, l, t, ·), so the totals don't depend on how
        the work is split between processes. """
        cfg = self.cfg
        units = self.work_units()
        workers = cfg.workers or os.cpu_count() or 1
        totals: Dict[Tuple[int, str], Tuple[int, int, int]] = {
            (level, name): (0, 0, 0) for level in range(len(cfg.noise_levels)) for name in cfg.decoders}

        def merge(level, counts):
            for name, values in counts.items():
                totals[level, name] = tuple(a + b for a, b in zip(totals[level, name], values))

        if workers == 1 or len(units) == 1:
            context = await self.trial_context()
            for number, unit in enumerate(units, start=1):
                merge(*context.run_chunk(*unit))
                logger.debug("work unit %d/%d done", number, len(units))
        else:
            logger.info("running %d work units on %d processes", len(units), workers)
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                     initargs=(cfg,)) as pool:
                futures = [loop.run_in_executor(pool, _run_chunk, *unit) for unit in units]
                for number, future in enumerate(asyncio.as_completed(futures), start=1):
                    merge(*(await future))
                    logger.debug("work unit %d/%d done", number, len(units))

        records = []
        for level, sigma in enumerate(cfg.noise_levels):
            for name in cfg.decoders:
                bits, blocks, diverged = totals[level, name]
                records.append(BerRecord(decoder=name, sigma=sigma, trials=cfg.trials, n=self.H.n,
                                         bit_errors=bits, block_errors=blocks, diverged=diverged,
                                         snr_db=snr_db(sigma, cfg.snr_convention),
                                         config_hash=cfg.config_hash))
            logger.info("σ=%g: %s", sigma, ", ".join(
                f"{r.decoder} {r.ber:.3e}" for r in records if r.sigma == sigma))

        self.sanity_failures = oracle_violations(records)
        for problem in self.sanity_failures:
            logger.error("ml oracle check failed, %s", problem)
        return records
