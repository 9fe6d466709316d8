import numpy as np

from ..exceptions import DimensionError


class StateVector(object):
    """
    Nodal coefficients per species at one time. Arrays are read-only;
    stepping produces new StateVectors.
    """

    def __init__(self, values, t=0.0, deviation=None):
        """
        :param values: dict species name -> 1-d array
        :param t: time stamp
        :param deviation: flattened distance to the discrete equilibrium, kept
            by the stepper so consecutive entropies use the same vector
        """
        self.values = {}
        for name, array in values.items():
            array = np.array(array, dtype=np.float64)
            array.setflags(write=False)
            self.values[name] = array
        self.t = float(t)
        self.deviation = deviation

    def __getitem__(self, name):
        return self.values[name]

    def __contains__(self, name):
        return name in self.values

    @property
    def species(self):
        return tuple(self.values)

    def check(self, model, dofs):
        """Raise DimensionError unless the arrays match the model's DOF layout."""
        for name, domain in model.species:
            if name not in self.values:
                raise DimensionError("state lacks species '%s'" % name)
            if len(self.values[name]) != dofs.size(domain):
                raise DimensionError("species '%s' has %d values, %s space has %d DOFs"
                                     % (name, len(self.values[name]), domain, dofs.size(domain)))
        return self

    def min_value(self):
        return float(min(np.min(a) for a in self.values.values() if len(a)))

    def get_dict(self):
        return {'t': self.t, 'values': dict((name, a.tolist()) for name, a in self.values.items())}

    def __repr__(self):
        return 'StateVector(t=%g, %s)' % (self.t, ', '.join('%s[%d]' % (n, len(a)) for n, a in self.values.items()))
