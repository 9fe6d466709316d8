"""
The sharp entropy / entropy-dissipation constant c₀* of a discretization:
the smallest eigenvalue μ₁ of the entropy-scaled pencil As x = μ Ms x on the
zero-mass subspace, with c₀* = 2μ₁ because the entropy carries a ½.
"""

import logging

import numpy as np
import scipy.linalg
import scipy.sparse as sps
from scipy.sparse.linalg import LinearOperator, eigsh

from ..exceptions import ModelError, NumericalError, SpectralGapError
from ..fem.assembly import assemble
from ..fem.solvers import create_solver
from ..mesh.disk_mesh import quality
from ..models.system import model_for
from ..simulation import mesh_hierarchy

log = logging.getLogger(__name__)

MAX_POLISH_ITERATIONS = 50


class ScaledPencil(object):
    """Entropy-scaled dissipation and mass matrices with the kernel direction."""

    def __init__(self, forms, params, lumping=False):
        self.forms = forms
        self.model = model_for(params)
        self.model.check_forms(forms)
        weights = self.model.operator_weights()
        if weights is None:
            raise ModelError("the spectral gap needs a constant equilibrium; detailed balance residual %.3e"
                             % params.detailed_balance_residual)
        w = sps.diags(self.model.weight_vector(weights, forms.dofs))
        As = w @ self.model.reaction_diffusion(forms, lumping)
        Ms = w @ self.model.mass_block(forms, lumping)
        self.As = (0.5 * (As + As.T)).tocsr()
        self.Ms = (0.5 * (Ms + Ms.T)).tocsr()
        equilibrium = self.model.discrete_equilibrium(forms, 1.0)
        self.kernel = self.model.equilibrium_vector(equilibrium, forms.dofs)
        self.mass_weights = self.model.mass_weights(forms)

    @property
    def size(self):
        return self.As.shape[0]

    def deflate(self, x):
        """Ms-orthogonal projection onto the complement of the kernel (zero mass)."""
        Mk = self.Ms.dot(self.kernel)
        return x - self.kernel * (Mk.dot(x) / Mk.dot(self.kernel))

    def rayleigh(self, x):
        return float(x.dot(self.As.dot(x)) / x.dot(self.Ms.dot(x)))

    def dense_deflated(self):
        """(Qᵀ As Q, Qᵀ Ms Q) with Q an orthonormal basis of the zero-mass subspace."""
        Q = scipy.linalg.null_space(self.mass_weights[None, :])
        return Q, Q.T @ (self.As @ Q), Q.T @ (self.Ms @ Q)


def _bordered_inverse(pencil, shift, tolerance):
    """
    x = S b solving (As - σMs) x + Ms k η = b, kᵀ Ms x = 0: the inverse of
    the shifted pencil on the kernel complement. S Ms k = 0.
    """
    Mk = pencil.Ms.dot(pencil.kernel)
    column = sps.csr_matrix(Mk[:, None])
    bordered = sps.bmat([[pencil.As - shift * pencil.Ms, column], [column.T, None]], format='csc')
    solver = create_solver('lu_solver', tolerance).update(bordered)
    n = pencil.size

    def apply(b):
        x, _ = solver.solve(np.concatenate([np.ravel(b), [0.0]]))
        return x[:n]

    return LinearOperator((n, n), matvec=apply, dtype=float)


def _residual(pencil, x, mu):
    Ax = pencil.As.dot(x)
    Mx = pencil.Ms.dot(x)
    scale = np.linalg.norm(Ax) + abs(mu) * np.linalg.norm(Mx)
    return float(np.linalg.norm(Ax - mu * Mx) / scale) if scale > 0.0 else 0.0


def spectral_gap(forms, params, model=None, shift=0.0, tolerance=1e-8, lumping=False):
    """
    Smallest nonzero rate of the scaled pencil.

    :param forms: AssembledForms
    :param params: ModelParams2, or ModelParams4 under detailed balance
    :param model: ignored unless given; the model follows from params
    :param shift: shift of the shift-invert iteration, below μ₁
    :param tolerance: relative eigen-residual to reach
    :return: (c₀*, certificate StateVector of zero mass and unit scaled mass norm)
    :raises SpectralGapError: when the iteration does not converge
    """
    pencil = ScaledPencil(forms, params, lumping)
    if model is not None and model.name != pencil.model.name:
        raise ModelError("model %s does not match parameters for %s" % (model.name, pencil.model.name))
    n = pencil.size
    if n < 3:
        raise SpectralGapError("pencil of size %d is too small" % n, [])

    OPinv = _bordered_inverse(pencil, shift, min(1e-12, tolerance))
    v0 = pencil.deflate(np.random.default_rng(0).standard_normal(n))
    history = []
    try:
        values, vectors = eigsh(pencil.As, k=1, M=pencil.Ms, sigma=shift, which='LM', OPinv=OPinv, v0=v0,
                                tol=tolerance * 1e-2)
        x = pencil.deflate(vectors[:, 0])
    except (ArithmeticError, RuntimeError, NumericalError) as error:
        log.warning("Shift-invert Lanczos failed (%s); falling back to inverse iteration", error)
        x = v0

    mu = pencil.rayleigh(x)
    history.append(_residual(pencil, x, mu))
    iterations = 0
    while history[-1] > tolerance and iterations < MAX_POLISH_ITERATIONS:
        x = pencil.deflate(OPinv.matvec(pencil.Ms.dot(x)))
        x /= np.sqrt(x.dot(pencil.Ms.dot(x)))
        mu = pencil.rayleigh(x)
        history.append(_residual(pencil, x, mu))
        iterations += 1
    if not history[-1] <= tolerance:
        raise SpectralGapError("eigen-iteration stalled at relative residual %.3e (tolerance %.1e)"
                               % (history[-1], tolerance), history)

    x /= np.sqrt(x.dot(pencil.Ms.dot(x)))
    if x[np.argmax(np.abs(x))] < 0.0:
        x = -x
    c0 = 2.0 * mu
    log.info("Spectral gap c0* = %.10g (%d DOFs, residual %.2e after %d polishing sweeps)",
             c0, n, history[-1], iterations)
    return c0, pencil.model.unflatten(x, forms.dofs)


def dense_spectral_gap(forms, params, lumping=False):
    """c₀* from a dense full-spectrum solve of the deflated pencil; for small meshes."""
    pencil = ScaledPencil(forms, params, lumping)
    _, A, M = pencil.dense_deflated()
    return 2.0 * float(scipy.linalg.eigh(A, M, eigvals_only=True)[0])


def poincare_constant(forms, params, model=None, max_dofs=2000):
    """
    Sharp constant C_P of Σ_s w_s ‖u_s‖²_{H¹} ≤ C_P D(u) on zero-mass states,
    by a dense generalized eigensolve. 2/C_P ≤ c₀*.

    :raises NumericalError: when the system exceeds max_dofs
    """
    pencil = ScaledPencil(forms, params)
    n = pencil.size
    if n > max_dofs:
        raise NumericalError("Poincaré constant needs a dense solve; %d DOFs exceed max_dofs=%d" % (n, max_dofs))
    model = pencil.model
    w = model.weight_vector(model.operator_weights(), forms.dofs)
    h1 = sps.block_diag([forms.mass(domain) + forms.stiffness(domain) for _, domain in model.species], format='csr')
    N = sps.diags(w) @ h1
    Q, A, _ = pencil.dense_deflated()
    H = Q.T @ (N @ Q)
    constant = float(scipy.linalg.eigh(0.5 * (H + H.T), 0.5 * (A + A.T), eigvals_only=True)[-1])
    log.info("Poincaré constant C_P = %.10g (2/C_P = %.6g)", constant, 2.0 / constant)
    return constant


def gap_study(config, max_dofs=2000):
    """
    c₀* on the last gap.levels levels up to mesh.refinements, the certificate
    of the finest one and, on small meshes, the Poincaré bound 2/C_P.

    :param config: RunConfig
    :return: (rows of dicts level, h, c0, poincare_bound; finest forms; certificate)
    """
    section = config.section('gap')
    finest = config.section('mesh')['refinements']
    lumping = config.section('options')['lumping']
    params = config.params()
    hierarchy = mesh_hierarchy(config, finest)
    rows = []
    forms = certificate = None
    for mesh in hierarchy[max(0, finest - section['levels'] + 1):]:
        forms = assemble(mesh)[1]
        c0, certificate = spectral_gap(forms, params, shift=section['shift'], tolerance=section['tolerance'],
                                       lumping=lumping)
        bound = float('nan')
        if sum(model_for(params).sizes(forms.dofs)) <= max_dofs:
            bound = 2.0 / poincare_constant(forms, params, max_dofs=max_dofs)
        rows.append({'level': mesh.level, 'h': quality(mesh).h, 'c0': c0, 'poincare_bound': bound})
    return rows, forms, certificate
