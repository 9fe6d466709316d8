"""
Smooth closed curves bounding the computational domain. Only star-shaped
domains around the origin are supported: the curve is r = rho(theta).
"""

from abc import ABCMeta, abstractmethod
import logging
import math

import numpy as np
from scipy import integrate

from ..exceptions import ConfigError, MeshError
from ..expressions import parse_expression


class BoundaryCurve(object):
    """Base class; subclasses provide the radius function and its speed."""
    __metaclass__ = ABCMeta

    name = None

    @abstractmethod
    def radius(self, theta):
        pass

    @abstractmethod
    def speed(self, theta):
        """|d/dθ point(θ)| = sqrt(rho² + rho'²)"""
        pass

    def point(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = self.radius(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def project(self, points):
        """
        Radial projection of points onto the curve.

        :param points: (n, 2) array, no point at the origin
        :return: (n, 2) array on the curve
        """
        points = np.asarray(points, dtype=float)
        theta = np.arctan2(points[:, 1], points[:, 0])
        return self.point(theta)

    def distance(self, points):
        """Radial distance |r - rho(theta)| of points to the curve."""
        points = np.asarray(points, dtype=float)
        theta = np.arctan2(points[:, 1], points[:, 0])
        return np.abs(np.hypot(points[:, 0], points[:, 1]) - self.radius(theta))

    def exact_area(self):
        value, _ = integrate.quad(lambda t: 0.5 * float(self.radius(t)) ** 2, 0.0, 2.0 * math.pi,
                                  epsabs=1e-14, epsrel=1e-13, limit=200)
        return value

    def exact_length(self, theta_min=0.0, theta_max=2.0 * math.pi):
        value, _ = integrate.quad(lambda t: float(self.speed(t)), theta_min, theta_max,
                                  epsabs=1e-13, epsrel=1e-12, limit=200)
        return value


class UnitCircle(BoundaryCurve):
    """The unit circle; measures are known in closed form."""

    name = 'circle'

    def radius(self, theta):
        return np.ones_like(np.asarray(theta, dtype=float))

    def project(self, points):
        points = np.asarray(points, dtype=float)
        return points / np.hypot(points[:, 0], points[:, 1])[:, None]

    def speed(self, theta):
        return np.ones_like(np.asarray(theta, dtype=float))

    def exact_area(self):
        return math.pi

    def exact_length(self, theta_min=0.0, theta_max=2.0 * math.pi):
        return theta_max - theta_min


class RadialCurve(BoundaryCurve):
    """
    Star-shaped curve r = rho(theta) given as an expression in ``theta``,
    e.g. ``"1 + 0.1*cos(3*theta)"``.
    """

    def __init__(self, radius_expression):
        self.log = logging.getLogger(__name__)
        self.expression = parse_expression(radius_expression, variables=('theta',))
        self.slope = self.expression.derivative('theta')
        self.name = 'radial(%s)' % radius_expression
        samples = self.radius(np.linspace(0.0, 2.0 * math.pi, 721))
        if np.any(samples <= 0.0):
            raise MeshError("radius expression '%s' is not positive on [0, 2pi]" % radius_expression)
        self.log.debug("Radial curve %s, radius range [%g, %g]", radius_expression, samples.min(), samples.max())

    def radius(self, theta):
        return self.expression(theta)

    def speed(self, theta):
        return np.hypot(self.radius(theta), self.slope(theta))


def curve_from_config(value):
    """
    :param value: "circle" or {"radius": "<expression in theta>"}
    :return: BoundaryCurve
    """
    if value is None or value == 'circle':
        return UnitCircle()
    if isinstance(value, dict) and 'radius' in value:
        return RadialCurve(value['radius'])
    raise ConfigError("unknown curve specification: %r" % (value,))
