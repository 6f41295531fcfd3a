import io
import logging
import math
import os
import sys

import numpy as np
from scipy import special

DEBUG = False
MASK_64 = (1 << 64) - 1
PGM_MAXVAL = 65535

logger = logging.getLogger(__name__)


def configure_logging(debug: bool = DEBUG) -> None:
    """
    Attaches a stderr handler to the package logger. The library itself never configures
    handlers; this is called by the command-line entry point only.

    Args:
        debug (bool): Log at DEBUG level instead of INFO.
    """
    root = logging.getLogger('FoldyLaxPy')
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
        root.addHandler(handler)
    root.setLevel(logging.DEBUG if debug else logging.INFO)


def ball_volume(d: int) -> float:
    """
    Volume V_d of the unit d-ball, pi^(d/2) / Gamma(d/2 + 1). V_0 = 1.

    Args:
        d (int): The dimension, d >= 0.

    Returns:
        float: The volume of the unit ball.
    """
    if d < 0:
        raise ValueError(f"Dimension must be non-negative, got {d}")
    return math.pi ** (d / 2) / special.gamma(d / 2 + 1)


def ball_surface(d: int) -> float:
    """
    Surface S_d = d V_d of the unit (d-1)-sphere bounding the unit d-ball.

    Args:
        d (int): The dimension, d >= 1.

    Returns:
        float: The surface of the unit sphere (S_1 = 2, S_2 = 2 pi, S_3 = 4 pi).
    """
    if d < 1:
        raise ValueError(f"Dimension must be at least 1, got {d}")
    return d * ball_volume(d)


_BOUNDARY_RATIOS = {1: 1.0, 2: 2 / math.pi, 3: 0.5}


def boundary_ratio(d: int) -> float:
    """
    Returns 2 V_{d-1} / S_d, the coefficient of the mean free path in the Robin boundary
    condition and in the first-order effective radius (1 in d=1, 2/pi in d=2, 1/2 in d=3).
    """
    if d in _BOUNDARY_RATIOS:
        return _BOUNDARY_RATIOS[d]
    return 2 * ball_volume(d - 1) / ball_surface(d)


def splitmix64(x: int) -> int:
    """
    One step of the SplitMix64 generator, used as a 64-bit mixing function.

    Args:
        x (int): The 64-bit input state.

    Returns:
        int: The mixed 64-bit output.
    """
    z = (x + 0x9E3779B97F4A7C15) & MASK_64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK_64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK_64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """
    Derives the seed of stream `index` as SplitMix64(master_seed XOR index).

    Args:
        master_seed (int): The 64-bit master seed.
        index (int): The stream index (configuration or walker chunk), index >= 0.

    Returns:
        int: The derived 64-bit seed.
    """
    if index < 0:
        raise ValueError(f"Stream index must be non-negative, got {index}")
    return splitmix64((master_seed ^ index) & MASK_64)


def make_rng(master_seed: int, index: int) -> np.random.Generator:
    """
    Returns the numpy generator of stream `index` under `master_seed`.
    """
    return np.random.default_rng(derive_seed(master_seed, index))


def format_value(value) -> str:
    """
    Formats a scalar for headers and CSV cells. Floats use the shortest repr that
    round-trips; complex numbers are written as `re,im`.

    Args:
        value: A bool, int, float, complex, sequence or string.

    Returns:
        str: The formatted value.
    """
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return f"{repr(float(value.real))},{repr(float(value.imag))}"
    if isinstance(value, (tuple, list)):
        return ','.join(format_value(v) for v in value)
    return str(value)


def parse_complex(text: str) -> complex:
    """
    Parses a wavenumber written as `re,im` or as a single real number.

    Args:
        text (str): The text to parse.

    Returns:
        complex: The parsed number.

    Raises:
        ValueError: If the text is not a real number or a `re,im` pair.
    """
    parts = [p.strip() for p in str(text).split(',')]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"Invalid complex value: {text}")


def parse_floats(text: str, count: int = None) -> tuple:
    """
    Parses a comma separated list of floats, checking its length if `count` is given.
    """
    values = tuple(float(p) for p in str(text).split(','))
    if count is not None and len(values) != count:
        raise ValueError(f"Expected {count} comma separated values, got '{text}'")
    return values


def parse_grid(text: str) -> tuple:
    """
    Parses a grid size written as `<nx>x<ny>`.

    Returns:
        tuple: (nx, ny)
    """
    parts = str(text).lower().split('x')
    if len(parts) != 2:
        raise ValueError(f"Invalid grid size: {text}, expected <nx>x<ny>")
    nx, ny = int(parts[0]), int(parts[1])
    if nx < 1 or ny < 1:
        raise ValueError(f"Grid sizes must be positive, got {text}")
    return nx, ny


def _open_destination(destination):
    if destination is None:
        return sys.stdout, False
    if isinstance(destination, io.TextIOBase):
        return destination, False
    return open(destination, 'w', encoding='ascii', newline='\n'), True


def write_csv(destination, header: dict, columns: dict) -> None:
    """
    Writes columns as CSV preceded by `# key=value` header lines.

    Args:
        destination: A path, an open text stream, or None for stdout.
        header (dict): Ordered key/value pairs echoed as `# key=value` lines.
        columns (dict): Ordered column name -> 1-D array of equal lengths.

    Raises:
        ValueError: If the columns do not have equal lengths.
        OSError: If the path cannot be written.
    """
    names = list(columns)
    arrays = [np.asarray(columns[name]).ravel() for name in names]
    if len({a.size for a in arrays}) > 1:
        raise ValueError("All CSV columns must have the same length")
    stream, owned = _open_destination(destination)
    try:
        for key, value in header.items():
            stream.write(f"# {key}={format_value(value)}\n")
        stream.write(','.join(names) + '\n')
        for row in zip(*arrays):
            stream.write(','.join(format_value(v.item() if hasattr(v, 'item') else v) for v in row) + '\n')
    finally:
        if owned:
            stream.close()


def read_csv(path) -> tuple:
    """
    Reads a CSV file written by `write_csv`.

    Args:
        path: The file path.

    Returns:
        tuple: (header dict of strings, dict of column name -> float array)
    """
    header = {}
    rows = []
    names = None
    with open(path, 'r', encoding='ascii') as f:
        for line in f:
            line = line.rstrip('\n')
            if line.startswith('#'):
                key, _, value = line[1:].strip().partition('=')
                header[key] = value
            elif names is None:
                names = line.split(',')
            elif line:
                rows.append([float(v) for v in line.split(',')])
    if names is None:
        raise ValueError(f"No column line found in {path}")
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return header, {name: data[:, i] for i, name in enumerate(names)}


def to_gray_levels(grid: np.ndarray) -> tuple:
    """
    Maps a real field linearly from [min, max] onto [0, 65535]. Masked (non-finite)
    pixels map to 0 and are ignored for min/max.

    Args:
        grid (np.ndarray): 2-D real field.

    Returns:
        tuple: (integer levels, min, max)
    """
    grid = np.asarray(grid, dtype=float)
    finite = np.isfinite(grid)
    if not finite.any():
        return np.zeros(grid.shape, dtype=np.int64), float('nan'), float('nan')
    low = float(grid[finite].min())
    high = float(grid[finite].max())
    levels = np.zeros(grid.shape, dtype=np.int64)
    if high > low:
        levels[finite] = np.rint((grid[finite] - low) / (high - low) * PGM_MAXVAL).astype(np.int64)
    return levels, low, high


def write_pgm(path, grid: np.ndarray, header: dict = None) -> None:
    """
    Writes a 2-D field as an ASCII (P2) portable graymap with 16-bit depth. Row 0 of the
    grid is written first. The linear mapping is recorded in a `# min=... max=...` comment.

    Args:
        path: The output path.
        grid (np.ndarray): 2-D real field, non-finite pixels are masked.
        header (dict): Optional key/value pairs echoed as comments.

    Raises:
        OSError: If the path cannot be written.
    """
    levels, low, high = to_gray_levels(grid)
    ny, nx = levels.shape
    with open(path, 'w', encoding='ascii', newline='\n') as f:
        f.write('P2\n')
        for key, value in (header or {}).items():
            f.write(f"# {key}={format_value(value)}\n")
        f.write(f"# min={format_value(low)} max={format_value(high)}\n")
        f.write(f"{nx} {ny}\n{PGM_MAXVAL}\n")
        for row in levels:
            f.write(' '.join(str(int(v)) for v in row) + '\n')


def read_pgm(path) -> np.ndarray:
    """
    Reads the pixel levels of a P2 graymap written by `write_pgm`.
    """
    tokens = []
    with open(path, 'r', encoding='ascii') as f:
        for line in f:
            if not line.startswith('#'):
                tokens.extend(line.split())
    if not tokens or tokens[0] != 'P2':
        raise ValueError(f"{path} is not a P2 graymap")
    nx, ny = int(tokens[1]), int(tokens[2])
    return np.array([int(t) for t in tokens[4:4 + nx * ny]], dtype=np.int64).reshape(ny, nx)


def sibling_path(path, suffix: str) -> str:
    """
    Returns `path` with its extension replaced by `suffix` (e.g. the PGM next to a CSV).
    """
    root, _ = os.path.splitext(str(path))
    return root + suffix
