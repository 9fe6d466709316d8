"""
Parameter sets of the two-species model problem and the four-species system.
"""

from fractions import Fraction

from ..exceptions import ModelError

DETAILED_BALANCE_TOLERANCE = 1e-10


class ModelParams(object):
    """Common behaviour: positivity check and conversion from/to config dicts."""

    model = None
    # (attribute, config key)
    keys = ()

    def validate(self):
        for attribute, key in self.keys:
            value = getattr(self, attribute)
            if not value > 0.0:
                raise ModelError("params.%s must be > 0 (got %r)" % (key, value))
        return self

    @classmethod
    def from_dict(cls, values):
        unknown = set(values) - set(key for _, key in cls.keys)
        if unknown:
            raise ModelError("unknown parameters for the %s model: %s" % (cls.model, ', '.join(sorted(unknown))))
        kwargs = dict((attribute, values[key]) for attribute, key in cls.keys if key in values)
        return cls(**kwargs)

    def get_dict(self):
        return dict((key, getattr(self, attribute)) for attribute, key in self.keys)

    def __repr__(self):
        return '%s(%s)' % (type(self).__name__, ', '.join('%s=%g' % item for item in self.get_dict().items()))


class ModelParams2(ModelParams):
    """
    Diffusion coefficients d_L (volume), d_l (boundary) and the exchange
    rates lam (volume -> boundary) and gamma (boundary -> volume).
    """

    model = 'two-species'
    keys = (('d_L', 'd_L'), ('d_l', 'd_ell'), ('lam', 'lambda'), ('gamma', 'gamma'))

    def __init__(self, d_L=0.01, d_l=0.02, lam=4.0, gamma=2.0):
        self.d_L = float(d_L)
        self.d_l = float(d_l)
        self.lam = float(lam)
        self.gamma = float(gamma)
        self.validate()

    def scaled(self, factor):
        """Copy with both exchange rates multiplied by factor."""
        return ModelParams2(self.d_L, self.d_l, self.lam * factor, self.gamma * factor)


class ModelParams4(ModelParams):
    """
    Four-species system: L, P in the volume, l on the boundary, p on Γ₂.
    Reaction pairs: L <-> P (beta, alpha), L <-> l (lam, gamma),
    l <-> p (sigma, kappa), P <-> p (eta, xi).
    """

    model = 'four-species'
    keys = (('d_L', 'd_L'), ('d_P', 'd_P'), ('d_l', 'd_ell'), ('d_p', 'd_p'),
            ('alpha', 'alpha'), ('beta', 'beta'), ('lam', 'lambda'), ('gamma', 'gamma'),
            ('sigma', 'sigma'), ('kappa', 'kappa'), ('eta', 'eta'), ('xi', 'xi'))

    def __init__(self, d_L=0.01, d_P=0.01, d_l=0.02, d_p=0.02, alpha=1.0, beta=1.0, lam=4.0, gamma=2.0,
                 sigma=1.0, kappa=1.0, eta=2.0, xi=1.0):
        self.d_L = float(d_L)
        self.d_P = float(d_P)
        self.d_l = float(d_l)
        self.d_p = float(d_p)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.lam = float(lam)
        self.gamma = float(gamma)
        self.sigma = float(sigma)
        self.kappa = float(kappa)
        self.eta = float(eta)
        self.xi = float(xi)
        self.validate()
        self.detailed_balance_residual = self.compute_detailed_balance_residual()

    def compute_detailed_balance_residual(self):
        """
        |alpha·lam·sigma·xi / (beta·gamma·kappa·eta) - 1|, evaluated in exact
        rational arithmetic of the stored floats.
        """
        numerator = Fraction(self.alpha) * Fraction(self.lam) * Fraction(self.sigma) * Fraction(self.xi)
        denominator = Fraction(self.beta) * Fraction(self.gamma) * Fraction(self.kappa) * Fraction(self.eta)
        return float(abs(numerator / denominator - 1))

    @property
    def detailed_balance(self):
        return self.detailed_balance_residual <= DETAILED_BALANCE_TOLERANCE


def params_from_config(model, values):
    """
    :param model: 'two-species' or 'four-species'
    :param values: dict with JSON parameter keys
    """
    if model == 'two-species':
        return ModelParams2.from_dict(values or {})
    if model == 'four-species':
        return ModelParams4.from_dict(values or {})
    raise ModelError("unknown model '%s'" % model)
