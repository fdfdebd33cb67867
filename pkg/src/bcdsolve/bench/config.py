"""Flat ``key = value`` experiment configuration.

The file format is plain text: one ``key = value`` pair per line,
``#`` starts a comment, blank lines are ignored.  Keys map one-to-one
onto the fields of :class:`IntegralConfig` and :class:`CTConfig`;
unknown keys are rejected.  Command-line flags override file values.
"""

import hashlib
from dataclasses import dataclass, fields

import numpy as np


def parse_config(path):
    """Read a flat key = value file into a string-to-string mapping."""
    values = {}
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def parse_matrix(text):
    """Parse a matrix literal like ``-3,1;-1,0`` (rows separated by ';')."""
    rows = [
        [float(entry) for entry in row.split(",") if entry.strip() != ""]
        for row in text.split(";")
    ]
    mat = np.array(rows, dtype=float)
    if mat.ndim != 2:
        raise ValueError(f"cannot parse matrix from {text!r}")
    return mat


def _coerce(value, typ):
    if typ is bool:
        lowered = str(value).strip().lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"cannot parse boolean from {value!r}")
    return typ(value)


class _ConfigBase:
    """Shared plumbing: build from a string mapping, canonicalize, hash."""

    @classmethod
    def field_names(cls):
        return {f.name for f in fields(cls)}

    @classmethod
    def from_mapping(cls, mapping):
        unknown = set(mapping) - cls.field_names()
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for f in fields(cls):
            if f.name in mapping:
                kwargs[f.name] = _coerce(mapping[f.name], f.type)
        return cls(**kwargs)

    def canonical(self):
        """Deterministic text rendering of the effective configuration."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"


def config_hash(cfg):
    """Short hex digest identifying an effective configuration."""
    return hashlib.sha256(cfg.canonical().encode()).hexdigest()[:16]


@dataclass
class IntegralConfig(_ConfigBase):
    """Settings for the system-of-integral-equations experiment.

    ``step_size = 0`` selects the certified constant step
    ``gamma_min / ||K||^2``; ``cycles`` is the fixed budget for runs
    without a data-driven stop (one cycle = one update per block).
    """

    problem: str = "integral"
    p: int = 100
    noise_std: float = 0.001
    seed: int = 0
    tau: float = 1.5
    gamma_min: float = 0.0       # 0 -> 1 - 1/tau
    theta: float = 1.0
    step_rule: str = "constant"  # constant | adaptive
    step_size: float = 0.0       # 0 -> certified default
    cycles: int = 5000
    max_iter: int = 10 ** 6
    control: str = "cyclic"
    v_matrix: str = "-3,1;-1,0"
    normalize_v: bool = True

    def mixing_matrix(self):
        V = parse_matrix(self.v_matrix)
        if self.normalize_v:
            V = V / np.linalg.svd(V, compute_uv=False)[0]
        return V

    def effective_gamma_min(self):
        return self.gamma_min if self.gamma_min > 0 else 1.0 - 1.0 / self.tau


@dataclass
class CTConfig(_ConfigBase):
    """Settings for the multi-spectral CT experiment.

    Defaults are desk scale; the full-size geometry (grid 400, 300
    sources, 481 angles, 400 ray samples, 30 energies) remains valid
    configuration but is far slower.
    """

    problem: str = "ct"
    grid_n: int = 64
    n_src: int = 60
    n_ang: int = 61
    n_samp: int = 100
    fan_half_angle: float = float(np.pi / 3)
    ray_length: float = 2.0
    support_radius: float = 0.85
    n_energies: int = 10
    e_min: float = 20.0
    e_max: float = 120.0
    window_split: float = 70.0
    precond: str = "1,-1.35;-1,2.3"
    noise_frac: float = 0.02
    seed: int = 0
    cycles_exact: int = 300
    cycles_noisy: int = 200     # full-size protocol uses 116; scaled for desk geometry
    step_bcd: float = 0.0        # 0 -> tuned default
    step_lw: float = 0.0         # 0 -> tuned default
    attenuation_file: str = ""
    spectrum_file: str = ""

    def precond_matrix(self):
        return parse_matrix(self.precond)
