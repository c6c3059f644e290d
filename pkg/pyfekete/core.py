import os
import json
import logging
import importlib.resources as resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm.auto import tqdm

from pyfekete import charmod, randmodel, spectrum, theory
from pyfekete.charmod import DirichletCharacter
from pyfekete.helpers import PyFeketeHelpers
from pyfekete.writer import ResultWriter

USER_CONFIG = '.pyfekete_config.json'
ENV_PREFIX = 'PYFEKETE_'


class PyFekete:
    def __init__(
        self,
        config_path: Optional[str] = None,
        use_env_variables: bool = False,
        log_level: Optional[str] = None,
        threads: Optional[int] = None,
    ) -> None:
        self.config = self.read_default_config()
        default_path = os.path.join(Path.home(), USER_CONFIG)
        if config_path is not None:
            if not os.path.isfile(config_path):
                raise ValueError(f"Config file {config_path} not found\nRun `fekete setup` to copy the default config file to your HOME directory.")
            self.config_path = config_path
        else:
            self.config_path = default_path if os.path.isfile(default_path) else None

        if self.config_path is not None:
            self.config.update(self.read_config_locally(self.config_path))
        if use_env_variables:
            self.config.update(self.read_config_from_env())

        level = (log_level or self.config['LOG_LEVEL']).upper()
        if not logging.getLogger().hasHandlers():
            logging.basicConfig(level=getattr(logging, level), format='%(asctime)s - %(levelname)s - %(message)s')

        self.threads = self.resolve_threads(threads)
        logging.info(f"Config: {self.config_path or 'packaged defaults'}, threads: {self.threads}")

        self.helpers = PyFeketeHelpers()
        self.writer = ResultWriter()
        self._characters: Dict[Tuple[int, int, int], DirichletCharacter] = {}
        self._midpoint_g: Dict[Tuple[int, int, int, int], np.ndarray] = {}

    @staticmethod
    def read_default_config() -> Dict[str, Any]:
        with (resources.files('pyfekete') / 'config.json').open('r', encoding='utf-8') as file:
            return json.load(file)

    def read_config_locally(self, path: str) -> Dict[str, Any]:
        """Reads settings from a JSON config file, keeping only known keys."""
        with open(path, 'r', encoding='utf-8') as file:
            loaded = json.load(file)
        known = {k: v for k, v in loaded.items() if k in self.config}
        for key in set(loaded) - set(known):
            logging.warning(f"Ignoring unknown config key '{key}' in {path}")
        return known

    def read_config_from_env(self) -> Dict[str, Any]:
        """Reads PYFEKETE_<KEY> overrides from environment variables."""
        overrides = {}
        for key, default in self.config.items():
            raw = os.getenv(ENV_PREFIX + key)
            if raw is None:
                continue
            overrides[key] = self._coerce(key, raw, default)
        if overrides:
            logging.info(f"Environment overrides: {sorted(overrides)}")
        return overrides

    @staticmethod
    def _coerce(key: str, raw: str, default: Any) -> Any:
        try:
            if isinstance(default, bool):
                return raw.lower() in ('1', 'true', 'yes')
            if isinstance(default, int):
                return int(raw)
            if isinstance(default, float):
                return float(raw)
            if default is None:
                return json.loads(raw)
        except ValueError:
            raise ValueError(f"Cannot parse {ENV_PREFIX}{key}={raw!r} as {type(default).__name__}")
        return raw

    def resolve_threads(self, threads: Optional[int] = None) -> int:
        """Flag, then PYFEKETE_THREADS, then the config file, then available parallelism."""
        if threads is None:
            env = os.getenv(ENV_PREFIX + 'THREADS')
            threads = int(env) if env else self.config.get('THREADS')
        if threads is None:
            threads = os.cpu_count() or 1
        threads = int(threads)
        if threads < 1:
            raise ValueError(f"Thread count must be positive, got {threads}")
        return threads

    def character(self, p: int, d: int, m: int = 1) -> DirichletCharacter:
        key = (int(p), int(d), int(m))
        if key not in self._characters:
            self._characters[key] = charmod.make_character(*key)
        return self._characters[key]

    def midpoint_g(self, p: int, d: int, m: int = 1, shift: int = 0) -> np.ndarray:
        key = (int(p), int(d), int(m), int(shift) % int(p))
        if key not in self._midpoint_g:
            self._midpoint_g[key] = spectrum.midpoint_g(self.character(p, d, m), shift, self.threads)
        return self._midpoint_g[key]

    def get_spectrum(self, p: int, d: int, m: int = 1, kind: str = 'midpoint', shift: int = 0,
                     grid: Optional[int] = None, refine_tol: Optional[float] = None,
                     refine_top: Optional[int] = None) -> spectrum.Spectrum:
        chi = self.character(p, d, m)
        if kind == 'midpoint':
            return spectrum.midpoint_spectrum(chi, shift, self.threads)
        if kind == 'arcmax':
            tol = self.config['REFINE_TOL'] if refine_tol is None else refine_tol
            top = self.config['REFINE_TOP'] if refine_top is None else refine_top
            return spectrum.arc_max_spectrum(
                chi, shift,
                grid=self.config['ARC_GRID'] if grid is None else grid,
                # zero or negative switches refinement off
                refine_tol=tol if tol and tol > 0 else None,
                # zero or negative refines every arc
                refine_top=top if top and top > 0 else None,
                workers=self.threads)
        raise ValueError(f"Unknown spectrum kind '{kind}', expected one of {spectrum.SPECTRUM_KINDS}")

    def tail(self, p: int, d: int, m: int = 1, kind: str = 'midpoint', shift: int = 0,
             vstep: Optional[float] = None, **spectrum_kwargs) -> Tuple[spectrum.Spectrum, spectrum.TailCurve]:
        spec = self.get_spectrum(p, d, m, kind, shift, **spectrum_kwargs)
        curve = spectrum.tail_curve(spec, vstep=self.config['VSTEP'] if vstep is None else vstep)
        return spec, curve

    def exceptional_set(self, p: int, d: int, m: int = 1, include_members: bool = False) -> spectrum.ExceptionalSetReport:
        return spectrum.exceptional_set(self.character(p, d, m), include_members=include_members,
                                        workers=self.threads)

    def constants(self, d: int) -> theory.TheoryConstants:
        return theory.constants(d, self.config['QUAD_TOL'], self.config['TAIL_CUTOFF'])

    def random_model(self, p: int, d: int, samples: Optional[int] = None, seed: Optional[int] = None,
                     truncation: Optional[int] = None) -> randmodel.RandomModelConfig:
        return randmodel.RandomModelConfig(
            p, d,
            samples=self.config['SAMPLES'] if samples is None else samples,
            seed=self.config['SEED'] if seed is None else seed,
            truncation=truncation,
            block_size=self.config['BLOCK_SIZE'])

    def laplace_records(self, p: int, d: int, s_values: Sequence[float], m: int = 1,
                        samples: Optional[int] = None, seed: Optional[int] = None) -> List[Dict[str, Any]]:
        """Empirical, theoretical and arithmetic Laplace transforms at every s, sharing one sample set."""
        config = self.random_model(p, d, samples, seed)
        draws = randmodel.sample_many(config, self.threads)
        chi = self.character(p, d, m)
        g = self.midpoint_g(p, d, m)
        excluded = self.exceptional_set(p, d, m).count
        laplace_window = self.helpers.laplace_window(p)
        saddle_window = self.helpers.saddle_window(p)

        records = []
        for s in tqdm(s_values, desc="laplace", disable=None):
            estimate = randmodel.empirical_laplace(config, s, samples=draws)
            theoretical = randmodel.theoretical_laplace(p, d, s)
            arithmetic = randmodel.arithmetic_laplace(chi, s, g=g)
            records.append({
                **estimate.to_record(),
                "m": int(m),
                "theoretical": theoretical.value,
                "theoretical_log": theoretical.log_value,
                "log_p1": theoretical.log_p1,
                "log_p2": theoretical.log_p2,
                "arithmetic": arithmetic,
                "exceptional_count": excluded,
                "gap_empirical_theoretical": abs(estimate.value - theoretical.value),
                "gap_arithmetic_theoretical": abs(arithmetic - theoretical.value),
                "in_laplace_window": abs(s) <= laplace_window,
                "in_saddle_window": abs(s) <= saddle_window,
            })
        return records

    def moments(self, p: int, d: int, n_max: int = 4, m: int = 1) -> List[randmodel.MomentComparison]:
        chi = self.character(p, d, m)
        g = self.midpoint_g(p, d, m)
        return [randmodel.moment_compare(chi, n, samples=self.config['SAMPLES'], seed=self.config['SEED'],
                                         g=g, workers=self.threads)
                for n in range(1, n_max + 1)]
