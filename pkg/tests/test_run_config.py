import pytest

from FoldyLaxPy.PointField import radius_for_unit_density
from FoldyLaxPy.RunConfig import RunConfig
from FoldyLaxPy.Scattering import HardSphere
from FoldyLaxPy.utils import write_csv

CONFIG_TEXT = """
task = resonance_map
dim = 3
num = 40   # scatterers
k = 2.5,-0.5
grid = 8x4
k-window = 0.5,2.5,-1,0
model = hardsphere:0.1
seed = 0x2a
"""


def test_from_text():
    config = RunConfig.from_text(CONFIG_TEXT)
    assert config.task == 'resonance-map'
    assert config.dim == 3 and config.num == 40
    assert config.k == 2.5 - 0.5j
    assert config.grid == (8, 4)
    assert config.k_window == (0.5, 2.5, -1.0, 0.0)
    assert config.model == 'hardsphere:0.1'
    assert config.seed == 42
    assert config.threads == 1


def test_from_file_and_merge(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text(CONFIG_TEXT)
    config = RunConfig.from_file(path).merged({'dim': '2', 'threads': '4', 'seed': None})
    assert config.dim == 2 and config.threads == 4 and config.seed == 42


@pytest.mark.parametrize("text", ["colour = red", "dim = three", "seed = -1", "task = fly", "grid = 8",
                                  "threads = 0", "k = 1,2,3"])
def test_invalid_values(text):
    with pytest.raises(ValueError):
        RunConfig.from_text(text)


def test_medium():
    config = RunConfig(dim=3, num=50, model='hardsphere:0.2', seed=9)
    assert config.resolved_radius == pytest.approx(radius_for_unit_density(3, 50))
    medium = config.medium()
    assert (medium.d, medium.N, medium.master_seed) == (3, 50, 9)
    assert medium.model == HardSphere(0.2)


def test_header_omits_run_only_keys():
    config = RunConfig(task='hankel-zeros', threads=3, out='zeros.csv')
    header = config.header()
    assert list(header)[0] == 'task'
    assert 'threads' not in header and 'out' not in header and 'lscat' not in header
    assert header['radius'] == config.resolved_radius
    assert 'grid=128x128' in config.header_text().splitlines()


def test_header_round_trip(tmp_path):
    config = RunConfig(task='wavefield', dim=2, num=30, radius=2.5, k=3 - 0.25j, source='plane:0,1',
                       grid=(16, 8), window=(-1.0, 1.0, -2.0, 2.0), seed=2 ** 64 - 1, lscat=1.5)
    path = tmp_path / 'out.csv'
    write_csv(path, {**config.header(), 'extra': 1.0}, {'x': [1.0]})
    assert RunConfig.from_header(path) == config


def test_from_header_requires_a_task(tmp_path):
    path = tmp_path / 'bare.csv'
    write_csv(path, {'dim': 2}, {'x': [1.0]})
    with pytest.raises(ValueError):
        RunConfig.from_header(path)


def test_header_echoes_task_and_seed():
    lines = RunConfig(task='boltzmann-mc', seed=17).header_text().splitlines()
    assert 'task=boltzmann-mc' in lines and 'seed=17' in lines
