"config.py: load, validate and freeze experiment configurations"
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
# A configuration starts life as a sectioned dict, {section: {key: value}},
# read either from JSON or from an INI file. INI values are strings and get
# coerced here; JSON values may already have the right type.
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple
import configparser
import hashlib
import json
import logging
import os

from .bundled import bundled_codes
from .decoder import GfDecoderParams
from .channel import LayoutParams
from .errors import ConfigError, StabilityError
from .potential import PotentialParams
from .solvers.heat import HeatGrid
from .solvers.nlse import NlseGrid

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "PDECODE_OUTPUT_DIR"
PDES = ("heat", "nlse")
DECODERS = ("gf", "peak", "bp", "ml")
SNR_CONVENTIONS = ("peak",)


class _Required(object):
    def __repr__(self):
        return "<required>"


REQUIRED = _Required()


def _to_int(value) -> int:
    if isinstance(value, bool):
        raise ValueError("booleans are not integers")
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"not an integer: {value!r}")
        return int(value)
    if isinstance(value, int):
        return value
    text = str(value).strip()
    # INI files may spell 2^20 as 1048576 or 2**20
    if "**" in text:
        base, exponent = text.split("**", 1)
        return int(base) ** int(exponent)
    return int(text)


def _to_float(value) -> float:
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    return float(value)


def _to_list(item: Callable[[Any], Any]) -> Callable[[Any], Tuple]:
    def convert(value):
        if isinstance(value, str):
            value = [v for v in value.replace(";", ",").split(",") if v.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        return tuple(item(v) for v in value)
    return convert


def _to_str(value) -> str:
    return str(value).strip()


def _optional(convert: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def wrapped(value):
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
            return None
        return convert(value)
    return wrapped


SCHEMA: Dict[str, Dict[str, Tuple[Callable[[Any], Any], Any]]] = {
    "experiment": {
        "pde": (_to_str, REQUIRED),
        "code": (_to_str, REQUIRED),
        "seed": (_to_int, 0),
        "trials": (_to_int, 100),
        "noise_levels": (_to_list(_to_float), REQUIRED),
        "decoders": (_to_list(_to_str), ("gf", "peak")),
        "workers": (_optional(_to_int), None),
        "output_dir": (_optional(_to_str), None),
        "chunk_size": (_to_int, 50),
        "codebook_cap": (_to_int, 2 ** 20),
        "snr_convention": (_optional(_to_str), None),
    },
    "heat": {
        "lambda": (_to_float, REQUIRED),
        "h": (_to_float, REQUIRED),
        "ell": (_to_float, REQUIRED),
        "n_x": (_to_int, REQUIRED),
        "n_t": (_to_int, REQUIRED),
    },
    "nlse": {
        "s_sign": (_to_int, 1),
        "n_sq": (_to_float, 1.0),
        "n_tau": (_to_int, REQUIRED),
        "tau_span": (_to_float, REQUIRED),
        "ell_xi": (_to_float, REQUIRED),
        "n_steps": (_to_int, REQUIRED),
    },
    "layout": {
        "t0": (_to_float, REQUIRED),
        "spacing": (_optional(_to_float), None),
        "min_spacing": (_to_float, 6.0),
        "clearance": (_to_float, 4.0),
        "sensors": (_to_str, "all"),
        "dispersion_length": (_to_float, 1.0),
    },
    "decoder": {
        "eta": (_to_float, 0.1),
        "gamma": (_to_float, 0.1),
        "alpha": (_to_float, 1.0),
        "beta": (_to_float, 1.0),
        "iterations": (_to_int, 20),
        "init_sigma": (_to_float, 0.5),
        "init_mode": (_to_str, "random"),
        "epsilon_clamp": (_to_float, 1e-8),
        "divergence_bound": (_to_float, 1e3),
    },
}
""" section -> key -> (coercion, default). Grid sections are only read for
the selected PDE. """


@dataclass(frozen=True)
class ExperimentConfig:
    pde: str
    code: str
    seed: int
    trials: int
    noise_levels: Tuple[float, ...]
    decoders: Tuple[str, ...]
    layout: LayoutParams
    decoder: GfDecoderParams
    heat: Optional[HeatGrid] = None
    nlse: Optional[NlseGrid] = None
    workers: Optional[int] = None
    """ None means one per CPU """
    output_dir: str = "."
    chunk_size: int = 50
    codebook_cap: int = 2 ** 20
    snr_convention: Optional[str] = None

    @property
    def grid(self):
        return self.heat if self.pde == "heat" else self.nlse

    def to_dict(self, run_only: bool = False) -> dict:
        """ Canonical, JSON-ready form. `run_only` leaves out settings that
        can't change results (parallelism and where files go). """
        ret: Dict[str, Dict[str, Any]] = {
            "experiment": {"pde": self.pde,
                           "code": self.code,
                           "seed": self.seed,
                           "trials": self.trials,
                           "noise_levels": list(self.noise_levels),
                           "decoders": list(self.decoders),
                           "chunk_size": self.chunk_size,
                           "codebook_cap": self.codebook_cap,
                           "snr_convention": self.snr_convention},
            "layout": {"t0": self.layout.t0,
                       "spacing": self.layout.spacing,
                       "min_spacing": self.layout.min_spacing,
                       "clearance": self.layout.clearance,
                       "sensors": self.layout.sensors,
                       "dispersion_length": self.layout.dispersion_length},
            "decoder": {"eta": self.decoder.eta,
                        "gamma": self.decoder.gamma,
                        "alpha": self.decoder.potential.alpha,
                        "beta": self.decoder.potential.beta,
                        "iterations": self.decoder.iterations,
                        "init_sigma": self.decoder.init_sigma,
                        "init_mode": self.decoder.init_mode,
                        "epsilon_clamp": self.decoder.potential.epsilon_clamp,
                        "divergence_bound": self.decoder.divergence_bound},
        }
        if self.heat is not None:
            g = self.heat
            ret["heat"] = {"lambda": g.lam, "h": g.h, "ell": g.ell, "n_x": g.n_x, "n_t": g.n_t}
        if self.nlse is not None:
            g = self.nlse
            ret["nlse"] = {"s_sign": g.s_sign, "n_sq": g.n_sq, "n_tau": g.n_tau,
                           "tau_span": g.tau_span, "ell_xi": g.ell_xi, "n_steps": g.n_steps}
        if not run_only:
            ret["experiment"]["workers"] = self.workers
            ret["experiment"]["output_dir"] = self.output_dir
        return ret

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(run_only=True), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        """ First 12 hex digits of the SHA-256 of the canonical form """
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:12]

    def __repr__(self):
        return (f"ExperimentConfig <pde: {self.pde}, code: {self.code}, "
                f"trials: {self.trials}, hash: {self.config_hash}>")


def read_config_file(path: str) -> Dict[str, Dict[str, Any]]:
    """ Read a JSON (*.json) or INI file into a sectioned dict """
    if not os.path.exists(path):
        raise ConfigError("config", f"no such file {path!r}")
    if path.lower().endswith(".json"):
        with open(path, "r", encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError("config", f"{path}: {e}") from None
        if not isinstance(document, dict):
            raise ConfigError("config", f"{path}: expected an object of sections")
        # "$schema" and friends are editor hints, not sections
        sections = {k: v for k, v in document.items() if not k.startswith("$")}
        if not all(isinstance(v, dict) for v in sections.values()):
            raise ConfigError("config", f"{path}: expected an object of sections")
        return {section: dict(values) for section, values in sections.items()}
    config = configparser.ConfigParser()
    try:
        config.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError("config", f"{path}: {e}") from None
    return {s: dict(config.items(s)) for s in config.sections()}


def _section(config_dict: Dict[str, Dict[str, Any]], section: str) -> Dict[str, Any]:
    schema = SCHEMA[section]
    raw = config_dict.get(section, {})
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"{section}.{unknown[0]}", "unknown key")
    values = {}
    for key, (convert, default) in schema.items():
        if key not in raw:
            if default is REQUIRED:
                raise ConfigError(f"{section}.{key}", "missing")
            values[key] = default
            continue
        try:
            values[key] = convert(raw[key])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{section}.{key}", f"invalid value {raw[key]!r} ({e})") from None
    return values


def _grid(section: str, build: Callable[[], Any]):
    try:
        return build()
    except StabilityError as e:
        # grid messages already name their key ("heat.n_x must ..."), Courant
        # violations name every key taking part
        field = str(e).split(" ", 1)[0] if str(e).startswith(section + ".") else section
        raise ConfigError(field, str(e)) from None


def resolve_config(config_dict: Dict[str, Dict[str, Any]],
                   overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """ Validate a sectioned dict, apply command line overrides and freeze the result.

    Recognised overrides: seed, trials, sigma (list of σ), workers, output.
    """
    unknown = sorted(set(config_dict) - set(SCHEMA))
    if unknown:
        raise ConfigError(unknown[0], "unknown section")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    experiment = _section(config_dict, "experiment")
    for key, target in (("seed", "seed"), ("trials", "trials"), ("workers", "workers"),
                        ("sigma", "noise_levels"), ("output", "output_dir")):
        if key in overrides:
            convert = SCHEMA["experiment"][target][0]
            try:
                experiment[target] = convert(overrides[key])
            except (TypeError, ValueError) as e:
                raise ConfigError(f"experiment.{target}", f"invalid override {overrides[key]!r} ({e})") from None

    pde = experiment["pde"]
    if pde not in PDES:
        raise ConfigError("experiment.pde", f"must be one of {PDES}, got {pde!r}")
    code = experiment["code"]
    if code not in bundled_codes and not os.path.exists(code):
        raise ConfigError("experiment.code", f"neither a bundled code {sorted(bundled_codes)} nor a file: {code!r}")
    if experiment["trials"] < 1:
        raise ConfigError("experiment.trials", f"must be at least 1, got {experiment['trials']}")
    levels = experiment["noise_levels"]
    if not levels:
        raise ConfigError("experiment.noise_levels", "must not be empty")
    if any(not (sigma >= 0) for sigma in levels):
        raise ConfigError("experiment.noise_levels", f"every σ must be >= 0, got {list(levels)}")
    decoders = experiment["decoders"]
    if not decoders:
        raise ConfigError("experiment.decoders", "must not be empty")
    bad = [d for d in decoders if d not in DECODERS]
    if bad:
        raise ConfigError("experiment.decoders", f"unknown decoder(s) {bad}, expected a subset of {DECODERS}")
    if len(set(decoders)) != len(decoders):
        raise ConfigError("experiment.decoders", f"duplicate entries in {list(decoders)}")
    if "bp" in decoders and pde != "nlse":
        raise ConfigError("experiment.decoders", "bp needs the nlse channel")
    if experiment["workers"] is not None and experiment["workers"] < 1:
        raise ConfigError("experiment.workers", f"must be at least 1, got {experiment['workers']}")
    if experiment["chunk_size"] < 1:
        raise ConfigError("experiment.chunk_size", f"must be at least 1, got {experiment['chunk_size']}")
    if experiment["codebook_cap"] < 1:
        raise ConfigError("experiment.codebook_cap", f"must be at least 1, got {experiment['codebook_cap']}")
    if experiment["snr_convention"] is not None and experiment["snr_convention"] not in SNR_CONVENTIONS:
        raise ConfigError("experiment.snr_convention",
                          f"must be one of {SNR_CONVENTIONS}, got {experiment['snr_convention']!r}")
    output_dir = experiment["output_dir"] or os.environ.get(OUTPUT_DIR_ENV) or "."

    heat = nlse = None
    if pde == "heat":
        h = _section(config_dict, "heat")
        heat = _grid("heat", lambda: HeatGrid(lam=h["lambda"], h=h["h"], ell=h["ell"],
                                              n_x=h["n_x"], n_t=h["n_t"]))
    else:
        s = _section(config_dict, "nlse")
        nlse = _grid("nlse", lambda: NlseGrid(**s))

    lay = _section(config_dict, "layout")
    layout = LayoutParams(**lay)

    dec = _section(config_dict, "decoder")
    potential = PotentialParams(alpha=dec.pop("alpha"), beta=dec.pop("beta"),
                                epsilon_clamp=dec.pop("epsilon_clamp"))
    decoder = GfDecoderParams(potential=potential, **dec)

    cfg = ExperimentConfig(pde=pde, code=code, seed=experiment["seed"], trials=experiment["trials"],
                           noise_levels=tuple(levels), decoders=tuple(decoders), layout=layout,
                           decoder=decoder, heat=heat, nlse=nlse, workers=experiment["workers"],
                           output_dir=output_dir, chunk_size=experiment["chunk_size"],
                           codebook_cap=experiment["codebook_cap"],
                           snr_convention=experiment["snr_convention"])
    logger.debug("resolved %r", cfg)
    return cfg


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    return resolve_config(read_config_file(path), overrides)
