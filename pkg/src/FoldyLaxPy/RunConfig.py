"""
Resolved configuration of a run, read from a flat `key = value` file and/or command-line
flags, and echoed into the header of every output file.
"""
import configparser
import dataclasses
import logging
from dataclasses import dataclass, fields

from FoldyLaxPy.PointField import Medium, radius_for_unit_density
from FoldyLaxPy.Scattering import parse_model
from FoldyLaxPy.utils import MASK_64, format_value, parse_complex, parse_floats, parse_grid, read_csv

logger = logging.getLogger(__name__)

TASKS = ('resonance-map', 'effective-resonances', 'wavefield', 'radial-profile', 'diffusion-modes',
         'boltzmann-mc', 'hankel-zeros')

# Keys that do not change the numbers of a run
_UNECHOED_KEYS = ('threads', 'out')


def _parse_task(text: str) -> str:
    task = str(text).strip().replace('_', '-')
    if task not in TASKS:
        raise ValueError(f"Unknown task: {text}, expected one of {', '.join(TASKS)}")
    return task


def _parse_seed(text) -> int:
    seed = int(text, 0) if isinstance(text, str) else int(text)
    if not 0 <= seed <= MASK_64:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {text}")
    return seed


def _parse_model(text) -> str:
    return parse_model(text).label


def _parse_window(text):
    return text if isinstance(text, tuple) else parse_floats(text, 4)


def _parse_grid(text):
    return text if isinstance(text, tuple) else parse_grid(text)


def _parse_k(text):
    return complex(text) if isinstance(text, (int, float, complex)) else parse_complex(text)


_PARSERS = {
    'task': _parse_task,
    'dim': int,
    'num': int,
    'radius': float,
    'model': _parse_model,
    'seed': _parse_seed,
    'threads': int,
    'out': str,
    'k': _parse_k,
    'source': lambda text: str(text).strip(),
    'grid': _parse_grid,
    'window': _parse_window,
    'k_window': _parse_window,
    'configs': int,
    'config_index': int,
    'ell_max': int,
    'nu': float,
    'count': int,
    'lscat': float,
    'velocity': float,
    'walkers': int,
    't_max': float,
    't_points': int,
    'bins': int,
    'quantity': lambda text: str(text).strip(),
    'gamma': float,
}


@dataclass
class RunConfig:
    """
    All parameters of a run. Lengths are in units of varsigma, wavenumbers in 1/varsigma.

    Attributes:
        task (str): One of TASKS.
        dim (int): The dimension.
        num (int): Number of scatterers.
        radius (float): Ball radius, None for the unit-density radius.
        model (str): `max` or `hardsphere:<alpha>`.
        seed (int): 64-bit master seed.
        threads (int): Worker threads.
        out (str): Output path, None for stdout.
        k (complex): Wavenumber.
        source (str): `plane:<d1,..>` or `point:<x1,..>`; `point` alone is the origin.
        grid (tuple): (nx, ny) of field and resonance maps.
        window (tuple): (xmin, xmax, ymin, ymax) of the field map, None for 1.2 R around the ball.
        k_window (tuple): (re_min, re_max, im_min, im_max) of the resonance map.
        configs (int): Number of configurations averaged.
        config_index (int): Configuration of single-configuration tasks.
        ell_max (int): Highest angular momentum of the effective resonances.
        nu (float): Order of the Hankel zeros.
        count (int): Number of diffusion modes.
        lscat (float): Mean free path of the transport tasks, None to derive it from k.
        velocity (float): Walker speed, None for 2 Re k.
        walkers (int): Number of Monte Carlo walkers.
        t_max (float): Last recording time of the walkers.
        t_points (int): Number of recording times.
        bins (int): Number of radial bins.
        quantity (str): `intensity` (|psi|^2) or `green` (Re g) for the radial profile.
        gamma (float): Laplace variable of the Bethe-Salpeter solve.
    """
    task: str = 'wavefield'
    dim: int = 2
    num: int = 100
    radius: float = None
    model: str = 'max'
    seed: int = 0
    threads: int = 1
    out: str = None
    k: complex = 6 + 0j
    source: str = 'point'
    grid: tuple = (128, 128)
    window: tuple = None
    k_window: tuple = (1.0, 5.0, -1.5, 0.0)
    configs: int = 1
    config_index: int = 0
    ell_max: int = 2
    nu: float = 1.5
    count: int = 4
    lscat: float = None
    velocity: float = None
    walkers: int = 10000
    t_max: float = 100.0
    t_points: int = 101
    bins: int = 32
    quantity: str = 'intensity'
    gamma: float = 0.0

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.configs < 1:
            raise ValueError(f"configs must be >= 1, got {self.configs}")
        if self.num < 1:
            raise ValueError(f"num must be >= 1, got {self.num}")

    @classmethod
    def from_mapping(cls, values: dict, base: 'RunConfig' = None) -> 'RunConfig':
        """
        Builds a configuration from string (or already typed) values, on top of `base`.
        None values are skipped.

        Raises:
            ValueError: If a key is unknown or a value does not parse.
        """
        parsed = {}
        for key, value in values.items():
            name = key.strip().lower().replace('-', '_')
            if name not in _PARSERS:
                raise ValueError(f"Unknown configuration key: {key}")
            if value is None:
                continue
            try:
                parsed[name] = _PARSERS[name](value)
            except ValueError as e:
                raise ValueError(f"Invalid value for {name}: {value} ({e})") from e
        return dataclasses.replace(base or cls(), **parsed)

    @classmethod
    def from_text(cls, text: str, base: 'RunConfig' = None) -> 'RunConfig':
        """
        Parses flat `key = value` lines; `#` and `;` start comments.
        """
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
        parser.read_string('[run]\n' + text)
        return cls.from_mapping(dict(parser['run']), base)

    @classmethod
    def from_file(cls, path, base: 'RunConfig' = None) -> 'RunConfig':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_text(f.read(), base)

    @classmethod
    def from_header(cls, path) -> 'RunConfig':
        """
        Rebuilds the configuration echoed in the header of a CSV output.
        """
        header, _ = read_csv(path)
        known = {key: value for key, value in header.items() if key in _PARSERS}
        if 'task' not in known:
            raise ValueError(f"{path} has no run configuration header")
        return cls.from_mapping(known)

    def merged(self, overrides: dict) -> 'RunConfig':
        """
        Returns a copy with the non-None overrides applied (command-line flags win).
        """
        return self.from_mapping(overrides, base=self)

    @property
    def resolved_radius(self) -> float:
        if self.radius is not None:
            return self.radius
        return radius_for_unit_density(self.dim, self.num)

    def medium(self) -> Medium:
        return Medium(d=self.dim, N=self.num, R=self.resolved_radius, model=parse_model(self.model),
                      master_seed=self.seed)

    def header(self) -> dict:
        """
        Ordered key/value echo of the configuration, without the keys that cannot change
        the output (threads, out). Unset optional keys are omitted.
        """
        echo = {}
        for f in fields(self):
            if f.name in _UNECHOED_KEYS:
                continue
            value = self.resolved_radius if f.name == 'radius' else getattr(self, f.name)
            if value is None:
                continue
            if f.name == 'grid':
                value = f"{value[0]}x{value[1]}"
            echo[f.name] = value
        return echo

    def header_text(self) -> str:
        return '\n'.join(f"{key}={format_value(value)}" for key, value in self.header().items())
