"""
Initial data: the builtin data sets and per-species expressions from a run
configuration, plus the exact total mass of the data on the smooth domain.
"""

import logging
import math

import numpy as np
from scipy import integrate

from ..exceptions import ModelError
from ..expressions import parse_expression
from .entropy import SPECIES_DOMAINS

log = logging.getLogger(__name__)

BUILTIN_INITIAL_DATA = {
    'paper-2species': {
        'L': '0.5*(x**2 + y**2)',
        'ell': '0.5*(1 + x)',
    },
    'paper-4species': {
        'L': 'x*sin(x + 1) + 0.5',
        'P': '(2 - x)*cos(x + 1) + 0.5',
        'ell': '0.3*(2 - y) + 1',
        'p': '0.4*y + 1',
    },
}


def builtin_initial_data(name):
    """
    :param name: 'paper-2species' or 'paper-4species'
    :return: dict species -> callable f(x, y)
    """
    if name not in BUILTIN_INITIAL_DATA:
        raise ModelError("unknown builtin initial data '%s' (known: %s)"
                         % (name, ', '.join(sorted(BUILTIN_INITIAL_DATA))))
    return dict((species, parse_expression(text)) for species, text in BUILTIN_INITIAL_DATA[name].items())


def initial_data_from_config(value, model):
    """
    :param value: builtin name or dict species -> expression string
    :param model: the model whose species must all be covered
    """
    if isinstance(value, str):
        data = builtin_initial_data(value)
    elif isinstance(value, dict):
        data = dict((species, parse_expression(text)) for species, text in value.items())
    else:
        raise ModelError("initial_data must be a builtin name or a species -> expression map")

    missing = [name for name in model.species_names if name not in data]
    extra = [name for name in data if name not in model.species_names]
    if missing or extra:
        raise ModelError("initial data for the %s model must give exactly %s (missing: %s, unexpected: %s)"
                         % (model.name, ', '.join(model.species_names), ', '.join(missing) or '-',
                            ', '.join(extra) or '-'))
    return data


def exact_mass(curve, data, gamma2_interval=None, species_domains=None):
    """
    Total mass of the initial data on the smooth domain, by adaptive
    quadrature in polar coordinates.

    :param curve: BoundaryCurve
    :param data: dict species -> f(x, y)
    :param gamma2_interval: (theta_min, theta_max), needed when p is present
    """
    domains = species_domains or SPECIES_DOMAINS
    mass = 0.0
    for name, f in data.items():
        domain = domains[name]
        if domain == 'volume':
            def integrand(r, theta, f=f):
                return float(f(np.array([r * math.cos(theta)]), np.array([r * math.sin(theta)]))[0]) * r
            value, _ = integrate.dblquad(integrand, 0.0, 2.0 * math.pi,
                                         lambda theta: 0.0, lambda theta: float(curve.radius(theta)),
                                         epsabs=1e-13, epsrel=1e-12)
        else:
            if domain == 'boundary':
                lo, hi = 0.0, 2.0 * math.pi
            else:
                if gamma2_interval is None:
                    raise ModelError("exact mass of '%s' needs the Γ₂ interval" % name)
                lo, hi = gamma2_interval

            def integrand(theta, f=f):
                point = curve.point(np.array([theta]))
                return float(f(point[:, 0], point[:, 1])[0]) * float(curve.speed(theta))
            value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        log.debug("Exact mass of %s: %.17g", name, value)
        mass += value
    return mass
