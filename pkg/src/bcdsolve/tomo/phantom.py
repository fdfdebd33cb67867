"""Surrogate two-material head phantom and spectral tables.

The phantom is built from analytic discs and ellipses: an outer shell
in the "bone" channel, a filled interior with two elliptical features
in the "brain" channel, and one shared disc of value 1/2 added to both
channels so that mixed-material regions are exercised.  Attenuation
curves and the source spectrum are smooth analytic stand-ins with the
qualitative shape of measured data (bone larger and steeper than brain
at low energy; a single-peaked tube spectrum); measured tables can be
substituted from plain-text files.
"""

import numpy as np

from .spectral import SpectralModel


def _disc(xx, yy, cx, cy, r):
    return ((xx - cx) ** 2 + (yy - cy) ** 2 <= r ** 2).astype(float)


def _ellipse(xx, yy, cx, cy, ax, ay, angle=0.0):
    c, s = np.cos(angle), np.sin(angle)
    xr = c * (xx - cx) + s * (yy - cy)
    yr = -s * (xx - cx) + c * (yy - cy)
    return ((xr / ax) ** 2 + (yr / ay) ** 2 <= 1.0).astype(float)


def head_phantom(n, support_radius=0.85):
    """Brain and bone fractional-density maps on an n x n grid over [-1, 1]^2.

    Returns an array of shape (2, n, n) with values in [0, 1]:
    channel 0 is the brain map, channel 1 the bone shell.  Both carry
    the shared half-value disc.  All features scale with the support
    radius so the phantom stays inside the scanned disc.
    """
    c = np.linspace(-1.0, 1.0, n, endpoint=False) + 1.0 / n
    xx, yy = np.meshgrid(c, c, indexing="xy")
    r_out = 0.92 * support_radius
    r_in = 0.80 * support_radius

    bone = 0.9 * (_disc(xx, yy, 0.0, 0.0, r_out) - _disc(xx, yy, 0.0, 0.0, r_in))
    brain = 0.5 * _ellipse(xx, yy, 0.0, 0.0, r_in, 0.92 * r_in)
    brain += 0.15 * _ellipse(xx, yy, -0.25, 0.12, 0.18, 0.30, angle=0.4)
    brain -= 0.2 * _ellipse(xx, yy, 0.05, -0.3, 0.22, 0.12, angle=-0.2)

    mixed = 0.5 * _disc(xx, yy, 0.30, 0.18, 0.14)
    brain += mixed
    bone += mixed
    phantom = np.stack([brain, bone])
    return np.clip(phantom, 0.0, 1.0)


def source_spectrum(energies):
    """Single-peaked tube-like spectral weight, normalized to maximum 1."""
    e = np.asarray(energies, dtype=float)
    s = np.clip(e - 18.0, 0.0, None) * np.exp(-e / 28.0)
    return s / s.max()


def attenuation_table(energies):
    """Per-unit-length attenuation of (brain, bone), shape (N, 2).

    Smooth, monotone decreasing in energy; the bone curve dominates and
    falls off faster, which is what makes the two window measurements
    nearly collinear and the preconditioning worthwhile.
    """
    e = np.asarray(energies, dtype=float)
    brain = 0.9 * (30.0 / e) ** 1.6 + 0.25
    bone = 2.8 * (30.0 / e) ** 2.6 + 0.45
    return np.stack([brain, bone], axis=1)


def load_two_column_table(path, energies):
    """Interpolate a whitespace-separated (energy_keV, value) file onto a grid."""
    table = np.loadtxt(path, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2:
        raise ValueError(f"{path}: expected two whitespace-separated columns")
    order = np.argsort(table[:, 0])
    return np.interp(np.asarray(energies, dtype=float),
                     table[order, 0], table[order, 1])


def two_material_model(
    n_energies=10,
    e_min=20.0,
    e_max=120.0,
    window_split=70.0,
    precond=((1.0, -1.35), (-1.0, 2.3)),
    attenuation_files=None,
    spectrum_file=None,
):
    """Assemble the default brain/bone spectral model.

    Windows split the energy grid at ``window_split`` keV (low window
    exclusive of the split, high window inclusive).  Optional files
    override the surrogate attenuation curves (one per material) or
    the spectrum.
    """
    energies = np.linspace(e_min, e_max, n_energies)
    if spectrum_file:
        spectrum = load_two_column_table(spectrum_file, energies)
    else:
        spectrum = source_spectrum(energies)
    if attenuation_files:
        cols = [load_two_column_table(p, energies) for p in attenuation_files]
        attenuation = np.stack(cols, axis=1)
    else:
        attenuation = attenuation_table(energies)
    low = np.flatnonzero(energies < window_split)
    high = np.flatnonzero(energies >= window_split)
    return SpectralModel(
        energies=energies,
        spectrum=spectrum,
        attenuation=attenuation,
        windows=[low, high],
        precond=np.asarray(precond, dtype=float),
    )
