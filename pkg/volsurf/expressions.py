"""
Restricted arithmetic expressions for initial data and boundary curves.

Expressions are parsed with sympy and compiled to vectorized numpy callables.
Only numbers, the declared variables, + - * / ** and parentheses, sin, cos and
pi are accepted.
"""

import logging

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from .exceptions import ModelError

log = logging.getLogger(__name__)

ALLOWED_FUNCTIONS = (sp.sin, sp.cos)


class Expression(object):
    """
    A pickleable compiled expression. Only the source text is pickled, the
    numpy callable is rebuilt lazily in the receiving process.
    """

    text = None
    variables = None
    derivative_of = None
    __compiled = None

    def __init__(self, text, variables=('x', 'y'), derivative_of=None):
        """
        :param derivative_of: name of a variable; the expression then stands
            for the exact derivative of text with respect to it
        """
        self.text = str(text)
        self.variables = tuple(variables)
        if derivative_of is not None and derivative_of not in self.variables:
            raise ModelError("Cannot differentiate '%s' by unknown variable %s" % (self.text, derivative_of))
        self.derivative_of = derivative_of
        self.__compiled = None
        self.__compiled = self.compile()

    def compile(self):
        symbols = [sp.Symbol(name, real=True) for name in self.variables]
        local_dict = dict(zip(self.variables, symbols))
        local_dict.update({'sin': sp.sin, 'cos': sp.cos, 'pi': sp.pi})
        try:
            expr = parse_expr(self.text, local_dict=local_dict, global_dict={'Integer': sp.Integer,
                                                                              'Float': sp.Float,
                                                                              'Rational': sp.Rational,
                                                                              'Symbol': sp.Symbol,
                                                                              'Function': sp.Function},
                              transformations=standard_transformations, evaluate=True)
        except Exception as error:
            raise ModelError("Cannot parse expression '%s': %s" % (self.text, error))

        if not isinstance(expr, sp.Expr):
            raise ModelError("Expression '%s' is not arithmetic" % self.text)
        unknown = set(str(s) for s in expr.free_symbols) - set(self.variables)
        if unknown:
            raise ModelError("Expression '%s' uses unknown names: %s" % (self.text, ', '.join(sorted(unknown))))
        for function in expr.atoms(sp.Function):
            if not isinstance(function, ALLOWED_FUNCTIONS):
                raise ModelError("Expression '%s' uses a function outside sin/cos: %s"
                                 % (self.text, function.func))

        if self.derivative_of is not None:
            expr = sp.diff(expr, local_dict[self.derivative_of])
        log.debug("Compiled expression %s -> %s", self.text, expr)
        return sp.lambdify(symbols, expr, 'numpy')

    def __call__(self, *args):
        if self.__compiled is None:
            self.__compiled = self.compile()
        arrays = [np.asarray(a, dtype=float) for a in args]
        value = self.__compiled(*arrays)
        # constant expressions come back as scalars
        return np.broadcast_to(np.asarray(value, dtype=float), np.broadcast(*arrays).shape).copy()

    def derivative(self, variable):
        if self.derivative_of is not None:
            raise ModelError("Only first derivatives of '%s' are supported" % self.text)
        return Expression(self.text, self.variables, derivative_of=variable)

    def __getstate__(self):
        return {'text': self.text, 'variables': self.variables, 'derivative_of': self.derivative_of}

    def __setstate__(self, state):
        self.text = state['text']
        self.variables = state['variables']
        self.derivative_of = state.get('derivative_of')
        self.__compiled = None

    def __repr__(self):
        if self.derivative_of is not None:
            return 'Expression(%r).derivative(%r)' % (self.text, self.derivative_of)
        return 'Expression(%r)' % self.text


def parse_expression(text, variables=('x', 'y')):
    """
    Compile an expression string.

    :param text: the expression, e.g. ``"0.5*(x**2 + y**2)"``
    :param variables: names of the free variables, in call order
    :return: Expression, callable on numpy arrays
    """
    return Expression(text, variables)
