"""Test phantoms and noise generation for the integral-equation benchmark."""

import numpy as np

from ..blocks import norm
from ..operators import project_column
from ..validation import check_blocks
from .rng import PortableRng

# Overall amplitude of the two components.  Chosen so that with the
# default p = 100 and noise_std = 0.001 the realized relative data
# errors land near 0.015 total / 0.011-0.012 per block.
_AMPLITUDE = 0.75


def make_integral_phantom(p):
    """Two-component test signal sampled on the p + 1 nodes t_j = j / p.

    Component 0 is a smooth bump, component 1 is piecewise linear with
    a jump, so the pair exercises both smooth and nonsmooth behaviour
    under the smoothing forward map.  Deterministic; requires p >= 4.
    """
    if p < 4:
        raise ValueError(f"need p >= 4 nodes, got p = {p}")
    t = np.linspace(0.0, 1.0, p + 1)
    bump = np.exp(-0.5 * ((t - 0.4) / 0.12) ** 2)
    ramp = np.where(t < 0.65, 0.25 + 1.1 * t, 0.1 + 0.4 * (t - 0.65))
    return _AMPLITUDE * np.stack([bump, ramp])


def add_noise(y, std, seed, V=None):
    """Perturb ``y`` with i.i.d. Gaussian noise of standard deviation ``std``.

    Returns ``(y_delta, delta, delta_b)`` where ``delta = ||y - y_delta||``
    is the realized total noise level and ``delta_b`` the realized
    per-block projected levels ``||Q_b (y - y_delta)||`` (``None`` when no
    mixing matrix ``V`` is supplied).  The levels are measured, not
    estimated: in simulation the true perturbation is known.
    """
    y = check_blocks(y, name="y")
    if std < 0:
        raise ValueError(f"noise standard deviation must be >= 0, got {std}")
    noise = std * PortableRng(seed).normal(y.shape)
    delta = norm(noise)
    delta_b = None
    if V is not None:
        V = np.asarray(V, dtype=float)
        delta_b = np.array(
            [norm(project_column(V, b, noise)) for b in range(V.shape[1])]
        )
    return y + noise, delta, delta_b
