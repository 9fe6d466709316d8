# -*- coding: utf-8 -*-
"""
This is the config-loading module. A run configuration is a JSON (or hjson)
document merged over the packaged defaults of its model.

All object-getters create deepcopies.
"""

import logging
import math
import os
from collections.abc import Mapping
from copy import deepcopy

import hjson
from dotmap import DotMap

from .exceptions import ConfigError, ModelError, VolSurfError
from .fem.solvers import SOLVER_NAMES
from .mesh.curves import curve_from_config
from .models.initial_data import initial_data_from_config
from .models.params import params_from_config
from .models.system import model_for

DEFAULTS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'defaults')
DEFAULT_FILES = {
    'two-species': os.path.join(DEFAULTS_DIR, 'default.json'),
    'four-species': os.path.join(DEFAULTS_DIR, 'four_species.json'),
}
SECTIONS = ('model', 'params', 'mesh', 'gamma2', 'time', 'initial_data', 'options', 'convergence', 'decay', 'gap')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


def _plain(value):
    """hjson's ordered dicts to plain dicts and lists."""
    if isinstance(value, Mapping):
        return dict((key, _plain(item)) for key, item in value.items())
    if isinstance(value, list):
        return [_plain(item) for item in value]
    return value


def merge(base, override):
    """Recursive dict merge; override wins, non-dict values are replaced."""
    merged = deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = deepcopy(value)
    return merged


def load_defaults(model='two-species'):
    if model not in DEFAULT_FILES:
        raise ConfigError("model must be one of %s (got %r)" % (', '.join(sorted(DEFAULT_FILES)), model))
    with open(DEFAULT_FILES[model], 'r') as handle:
        return _plain(hjson.load(handle))


class RunConfig(object):
    """
    A validated run configuration.

    Usage:
        c = RunConfig()
        c.setup(<config_file>)        # or RunConfig.from_dict({...})
        c.section('time')['tau']
        c.dotmap().options.lumping
    """

    log = None
    __config = None

    def __init__(self, values=None):
        """
        :param values: partial configuration dict, merged over the defaults
        """
        self.log = logging.getLogger(__name__)
        self.filepath = None
        if values is not None:
            self.load_dict(values)

    @classmethod
    def from_dict(cls, values):
        return cls(values)

    @classmethod
    def from_file(cls, filepath):
        config = cls()
        config.setup(filepath)
        return config

    def setup(self, filepath):
        """
        Setup the actual class.

        :param str filepath: path to the config-file (including file-name)
        """
        self.log.debug("Loading config-file (%s)", filepath)
        self.filepath = filepath
        self.load_json(filepath)

    def load_json(self, filepath):
        """
        Loads the JSON-file from the filepath.

        :param filepath (string): The location of the JSON-file.
        """
        try:
            with open(filepath, 'r') as handle:
                values = _plain(hjson.load(handle))
        except (IOError, OSError) as error:
            raise ConfigError("cannot read config file %s: %s" % (filepath, error))
        except hjson.HjsonDecodeError as error:
            raise ConfigError("config file %s is not valid JSON: %s" % (filepath, error))
        if not isinstance(values, dict):
            raise ConfigError("config file %s must hold a JSON object" % filepath)
        self.load_dict(values)

    def load_dict(self, values):
        unknown = sorted(set(values) - set(SECTIONS))
        if unknown:
            raise ConfigError("unknown config sections: %s" % ', '.join(unknown))
        base = load_defaults(values.get('model', 'two-species'))
        # parameters belong to the model; a partial params block is completed from its defaults
        self.__config = merge(base, values)
        self.validate()

    def config(self):
        """
        Get the whole config as a dict.

        :return dict
        """
        return deepcopy(self.__config)

    def section(self, section):
        """
        Get the whole section of the config.

        :param section (string): The section to get.
        """
        if section not in self.__config:
            raise ConfigError("no config section '%s'" % section)
        return deepcopy(self.__config[section])

    def dotmap(self):
        """Attribute view of a copy of the config."""
        return DotMap(self.config())

    def with_overrides(self, values):
        """New RunConfig with values merged over this one."""
        return RunConfig(merge(self.config(), values))

    @property
    def model(self):
        return self.__config['model']

    def params(self):
        return params_from_config(self.model, self.__config['params'])

    def curve(self):
        return curve_from_config(self.__config['mesh']['curve'])

    def gamma2(self):
        """(theta_min, theta_max) for the four-species model, else None."""
        if self.model != 'four-species':
            return None
        section = self.__config['gamma2']
        return float(section['theta_min']), float(section['theta_max'])

    def initial_data(self, model=None):
        return initial_data_from_config(self.__config['initial_data'], model or model_for(self.params()))

    def validate(self):
        """
        :raises ConfigError: naming the offending field
        """
        c = self.__config
        if c['model'] not in DEFAULT_FILES:
            raise ConfigError("model must be one of %s (got %r)" % (', '.join(sorted(DEFAULT_FILES)), c['model']))

        try:
            params = self.params()
        except ModelError as error:
            raise ConfigError("params: %s" % error)
        try:
            self.initial_data(model_for(params))
        except ModelError as error:
            raise ConfigError("initial_data: %s" % error)
        try:
            self.curve()
        except VolSurfError as error:
            raise ConfigError("mesh.curve: %s" % error)

        _integer(c, 'mesh', 'rings', minimum=1)
        _integer(c, 'mesh', 'refinements', minimum=0)
        tau = _positive(c, 'time', 'tau')
        t_final = _number(c, 'time', 't_final')
        if t_final < tau:
            raise ConfigError("time.t_final must be >= time.tau (got %r < %r)" % (t_final, tau))

        if c['model'] == 'four-species':
            lo = _number(c, 'gamma2', 'theta_min')
            hi = _number(c, 'gamma2', 'theta_max')
            if not 0.0 < hi - lo < 2.0 * math.pi:
                raise ConfigError("gamma2 must satisfy 0 < theta_max - theta_min < 2pi (got %r, %r)" % (lo, hi))

        options = c['options']
        for flag in ('lumping', 'check_invariants'):
            if not isinstance(options.get(flag), bool):
                raise ConfigError("options.%s must be true or false (got %r)" % (flag, options.get(flag)))
        _integer(c, 'options', 'snapshot_every', minimum=0)
        _integer(c, 'options', 'number_of_processes', minimum=1)
        for key in ('solver_tolerance', 'mass_tolerance', 'identity_tolerance'):
            _positive(c, 'options', key)
        if options.get('solver') not in ('auto',) + SOLVER_NAMES:
            raise ConfigError("options.solver must be one of auto, %s (got %r)"
                              % (', '.join(SOLVER_NAMES), options.get('solver')))
        if str(options.get('log_level')).upper() not in LOG_LEVELS:
            raise ConfigError("options.log_level must be one of %s (got %r)"
                              % (', '.join(LOG_LEVELS), options.get('log_level')))
        times = options.get('snapshot_times')
        if not isinstance(times, list) or any(not _is_number(t) or t < 0.0 for t in times):
            raise ConfigError("options.snapshot_times must be a list of nonnegative times (got %r)" % (times,))
        if not isinstance(options.get('output_dir'), str) or not options['output_dir']:
            raise ConfigError("options.output_dir must be a path (got %r)" % (options.get('output_dir'),))

        _integer(c, 'convergence', 'base_level', minimum=0)
        _integer(c, 'convergence', 'levels', minimum=1)
        _positive(c, 'convergence', 'tau')
        _positive(c, 'convergence', 't_final')
        _integer(c, 'convergence', 'tau_level', minimum=0)
        tau_list = c['convergence'].get('tau_list')
        if (not isinstance(tau_list, list) or not tau_list
                or any(not _is_number(t) or not t > 0.0 for t in tau_list)):
            raise ConfigError("convergence.tau_list must be a nonempty list of positive steps (got %r)"
                              % (tau_list,))
        if any(fine >= coarse for coarse, fine in zip(tau_list, tau_list[1:])):
            raise ConfigError("convergence.tau_list must be strictly decreasing (got %r)" % (tau_list,))

        _integer(c, 'decay', 'base_level', minimum=0)
        _integer(c, 'decay', 'levels', minimum=1)
        decay_tau = _positive(c, 'decay', 'tau')
        if _positive(c, 'decay', 't_final') < decay_tau:
            raise ConfigError("decay.t_final must be >= decay.tau")
        for key in ('floor_fraction', 'transient_fraction'):
            value = _number(c, 'decay', key)
            if not 0.0 <= value < 1.0:
                raise ConfigError("decay.%s must lie in [0, 1) (got %r)" % (key, value))
        _positive(c, 'decay', 'window_factor')

        _integer(c, 'gap', 'levels', minimum=1)
        _number(c, 'gap', 'shift')
        _positive(c, 'gap', 'tolerance')
        return self


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _field(config, section, key):
    if not isinstance(config.get(section), Mapping) or key not in config[section]:
        raise ConfigError("%s.%s is missing" % (section, key))
    return config[section][key]


def _number(config, section, key):
    value = _field(config, section, key)
    if not _is_number(value):
        raise ConfigError("%s.%s must be a number (got %r)" % (section, key, value))
    return float(value)


def _positive(config, section, key):
    value = _number(config, section, key)
    if not value > 0.0:
        raise ConfigError("%s.%s must be > 0 (got %r)" % (section, key, _field(config, section, key)))
    return value


def _integer(config, section, key, minimum=0):
    value = _field(config, section, key)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError("%s.%s must be an integer >= %d (got %r)" % (section, key, minimum, value))
    return value
