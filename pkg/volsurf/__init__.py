"""
Finite element simulation and verification of linear volume-surface
reaction-diffusion systems.
"""

__version__ = '1.0.0'

from .config import RunConfig
from .diagnostics.convergence import h_convergence_study, tau_convergence_study
from .diagnostics.decay import decay_study
from .diagnostics.spectral import gap_study
from .exceptions import ConfigError
from .pipeline.pipelines import InMemoryStorage
from .simulation import Simulation


def _config(config):
    if config is None:
        return RunConfig({})
    if isinstance(config, RunConfig):
        return config
    if isinstance(config, dict):
        return RunConfig(config)
    return RunConfig.from_file(config)


class VolumeSurface:
    """
    Access volsurf functionality via this interface. Every method takes a
    RunConfig, a partial config dict, a path to a config file or None for
    the defaults, and returns in-memory results without writing files.
    """

    @staticmethod
    def simulate(config=None, pipelines=None):
        """
        Runs one simulation.

        :param pipelines: extra stages appended after the in-memory storage
        :return: (TrajectorySummary, list of StepDiagnostics)
        """
        simulation = Simulation(_config(config))
        storage = InMemoryStorage()
        summary = simulation.run([storage] + list(pipelines or []))
        return summary, storage.diagnostics

    @staticmethod
    def convergence(config=None, mode='h'):
        """
        :param mode: 'h' (mesh refinement at fixed τ) or 'tau'
        :return: EocTable
        """
        if mode == 'h':
            return h_convergence_study(_config(config))
        if mode == 'tau':
            return tau_convergence_study(_config(config))
        raise ConfigError("convergence mode must be 'h' or 'tau' (got %r)" % (mode,))

    @staticmethod
    def decay(config=None):
        """
        :return: (list of DecayReport, floor ratios between consecutive levels)
        """
        reports, ratios, _ = decay_study(_config(config))
        return reports, ratios

    @staticmethod
    def gap(config=None):
        """
        :return: (c₀* of the finest level, certificate StateVector)
        """
        rows, _, certificate = gap_study(_config(config))
        return rows[-1]['c0'], certificate
