"""Multi-spectral transmission model, preconditioning, and gradients.

The measurement in energy window ``W_k`` is the windowed sum of
attenuated intensities

    I[k] = sum_{i in W_k} s_i exp(-R(sum_m mu[i, m] f[m])),

a composition of four stages: material mixing, per-energy ray
transform, componentwise exponential, and windowed summation.  Because
the per-material attenuation curves are similar, reconstruction works
on preconditioned logarithmic data H = c @ log(I) instead, and the
solvers need the partial gradients of the windowed residual
functionals Phi_b(f) = 0.5 * ||H_b(f) - v_b||^2.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..solvers import DivergenceError
from ..validation import check_finite


@dataclass
class SpectralModel:
    """Discrete energies, spectrum weights, attenuation and preconditioning.

    ``windows`` are disjoint index sets covering all energies, one per
    material; ``attenuation[i, m]`` is the per-unit-length coefficient
    of material ``m`` at energy ``i``; the spectrum absorbs the energy
    bin width.
    """

    energies: np.ndarray
    spectrum: np.ndarray
    attenuation: np.ndarray
    windows: list
    precond: np.ndarray
    window_of: np.ndarray = field(init=False)

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        self.spectrum = np.asarray(self.spectrum, dtype=float)
        self.attenuation = np.asarray(self.attenuation, dtype=float)
        self.precond = np.asarray(self.precond, dtype=float)
        n = self.energies.size
        b = len(self.windows)
        if self.spectrum.shape != (n,):
            raise ValueError("spectrum must have one weight per energy")
        if np.any(self.spectrum < 0.0):
            raise ValueError("spectrum weights must be nonnegative")
        if self.attenuation.shape != (n, b):
            raise ValueError(
                f"attenuation must have shape ({n}, {b}), got {self.attenuation.shape}"
            )
        if self.precond.shape != (b, b):
            raise ValueError(f"preconditioner must be {b} x {b}")
        if abs(np.linalg.det(self.precond)) < 1e-12:
            raise ValueError("preconditioning matrix is singular")
        owner = np.full(n, -1, dtype=int)
        for k, w in enumerate(self.windows):
            w = np.asarray(w, dtype=int)
            if w.size == 0:
                raise ValueError(f"energy window {k} is empty")
            if np.any(owner[w] != -1):
                raise ValueError("energy windows overlap")
            if not np.any(self.spectrum[w] > 0.0):
                raise ValueError(f"window {k} has no positive spectrum weight")
            owner[w] = k
        if np.any(owner == -1):
            raise ValueError("energy windows do not cover all energies")
        self.window_of = owner

    @property
    def n_energies(self):
        return self.energies.size

    @property
    def n_materials(self):
        return len(self.windows)


def exp_derivative(g, h):
    """Derivative of the exponential stage: componentwise -exp(-g) * h."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    if g.shape != h.shape:
        raise ValueError(f"shape mismatch {g.shape} vs {h.shape}")
    return -np.exp(-g) * h


class ForwardStack(NamedTuple):
    """Intermediate quantities of one forward evaluation, reused by gradients."""

    transmission: np.ndarray    # (N, n_src, n_ang): exp(-R(mix_i))
    intensities: np.ndarray     # (B, n_src, n_ang): windowed sums
    preconditioned: np.ndarray  # (B, n_src, n_ang): c @ log(intensities)


class MultiSpectralOperator:
    """Binds a spectral model to a projector and evaluates the pipeline."""

    def __init__(self, model, projector):
        self.model = model
        self.projector = projector

    # -- individual stages (kept separate so the fused forward map can be
    #    cross-checked against their explicit composition) --------------

    def material_mix(self, f):
        """Combined attenuation per energy: (B, n, n) -> (N, n, n)."""
        f = np.asarray(f, dtype=float)
        return np.tensordot(self.model.attenuation, f, axes=(1, 0))

    def project_stack(self, images):
        """Ray transform applied to every image in a stack."""
        return np.stack([self.projector.forward(img) for img in images])

    @staticmethod
    def exp_stage(g):
        return np.exp(-np.asarray(g, dtype=float))

    def window_sum(self, transmission):
        """Spectrum-weighted window sums: (N, ...) -> (B, ...)."""
        model = self.model
        out = np.zeros((model.n_materials,) + transmission.shape[1:])
        for k, w in enumerate(model.windows):
            for i in np.asarray(w, dtype=int):
                out[k] += model.spectrum[i] * transmission[i]
        return out

    # -- fused pipeline -------------------------------------------------

    def forward(self, f):
        """Window intensities of material maps ``f``; strictly positive."""
        check_finite(np.asarray(f, dtype=float), "material maps")
        return self.forward_stack(f).intensities

    def forward_stack(self, f):
        model = self.model
        mixed = self.material_mix(f)
        sino_shape = self.projector.geometry.sino_shape
        transmission = np.empty((model.n_energies,) + sino_shape)
        intensities = np.zeros((model.n_materials,) + sino_shape)
        for i in range(model.n_energies):
            transmission[i] = np.exp(-self.projector.forward(mixed[i]))
            intensities[model.window_of[i]] += model.spectrum[i] * transmission[i]
        return ForwardStack(transmission, intensities, self.precondition(intensities))

    def precondition(self, intensities):
        """Mixed logarithmic data H[b] = sum_k c[b, k] log(I[k])."""
        intensities = np.asarray(intensities, dtype=float)
        if np.any(intensities <= 0.0):
            raise DivergenceError(
                "non-positive intensity: logarithmic preconditioning undefined "
                "(divergent iterate or invalid data)"
            )
        return np.tensordot(self.model.precond, np.log(intensities), axes=(1, 0))

    def preconditioned(self, f):
        return self.forward_stack(f).preconditioned

    def objective(self, f, v, b, stack=None):
        """Residual functional Phi_b(f) = 0.5 ||H_b(f) - v_b||^2."""
        if stack is None:
            stack = self.forward_stack(f)
        rho = stack.preconditioned[b] - v[b]
        return 0.5 * float(np.vdot(rho, rho))

    def gradient(self, f, v, b, stack=None, material=None):
        """Partial gradients of Phi_b with respect to the material maps.

        Each energy contributes through the window it belongs to: the
        chain rule through ``log I[k]`` pairs the preconditioner entry
        ``c[b, k]`` with the energies of window ``k``.  Agrees with
        central finite differences of :meth:`objective`.

        Returns the full (B, n, n) gradient, or a single (n, n)
        component when ``material`` is given.
        """
        model = self.model
        if stack is None:
            stack = self.forward_stack(f)
        rho = stack.preconditioned[b] - v[b]
        coeff = (
            model.precond[b, model.window_of][:, None, None]
            / stack.intensities[model.window_of]
        )
        weighted = model.spectrum[:, None, None] * stack.transmission * coeff * rho
        if material is not None:
            mixed = np.tensordot(model.attenuation[:, material], weighted, axes=(0, 0))
            return -self.projector.backproject(mixed)
        mixed = np.tensordot(model.attenuation.T, weighted, axes=(1, 0))
        n = self.projector.geometry.n
        grad = np.empty((model.n_materials, n, n))
        for m in range(model.n_materials):
            grad[m] = -self.projector.backproject(mixed[m])
        return grad
