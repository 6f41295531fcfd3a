from .RunConfig import RunConfig
from .tasks.ResonanceTasks import ResonanceTasks
from .tasks.SpecialFunctionTasks import SpecialFunctionTasks
from .tasks.TransportTasks import TransportTasks
from .tasks.WaveTasks import WaveTasks


class Simulation():
    """
    Entry point of a run. The resolved configuration is shared by 4 task categories:
    special_functions, waves, resonances, transport.
    `run()` dispatches the configured task and writes its output.

    Args:
        config (RunConfig): The resolved run configuration.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.special_functions = SpecialFunctionTasks(config)
        self.waves = WaveTasks(config)
        self.resonances = ResonanceTasks(config)
        self.transport = TransportTasks(config)
        self._tasks = {
            'hankel-zeros': self.special_functions.hankel_zeros,
            'wavefield': self.waves.wavefield,
            'radial-profile': self.waves.radial_profile,
            'resonance-map': self.resonances.resonance_map,
            'effective-resonances': self.resonances.effective_resonances,
            'diffusion-modes': self.transport.diffusion_modes,
            'boltzmann-mc': self.transport.boltzmann_mc,
        }

    def run(self):
        """
        Runs the configured task.

        Returns:
            The task result (array, map, spectrum, ...).
        """
        return self._tasks[self.config.task]()
