"""Per-iteration run traces and their CSV serialization.

Every solver run produces a :class:`RunTrace` with one row per
iteration.  Columns:

``k``         iteration counter (0-based, strictly increasing)
``cycle``     k // B for cyclic block control; equals k for full-gradient runs
``block``     0-based index of the updated block; -1 means "all blocks"
``d``         1 if the update was applied, 0 if the step was skipped
``step``      effective step size (0.0 for skipped steps)
``residual``  residual measured at the pre-update iterate
``err2``      plain-norm error of the post-update iterate (nan without a reference)
``errV``      lifted-norm error of the post-update iterate (nan without a reference)
``objective`` 0.5 * squared residual of the pre-update iterate

The CT runs reuse the same schema with the two per-material relative
errors stored in ``err2``/``errV``.
"""

from dataclasses import dataclass, field

import numpy as np

_HEADER = "k,cycle,block,d,step,residual,err2,errV,objective"
_FLOAT_COLS = ("step", "residual", "err2", "errV", "objective")


@dataclass
class RunTrace:
    """Columnar per-iteration history of a solver run."""

    k: list = field(default_factory=list)
    cycle: list = field(default_factory=list)
    block: list = field(default_factory=list)
    d: list = field(default_factory=list)
    step: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    err2: list = field(default_factory=list)
    errV: list = field(default_factory=list)
    objective: list = field(default_factory=list)

    def append(self, k, cycle, block, d, step, residual, err2, errV, objective):
        self.k.append(int(k))
        self.cycle.append(int(cycle))
        self.block.append(int(block))
        self.d.append(int(d))
        self.step.append(float(step))
        self.residual.append(float(residual))
        self.err2.append(float(err2))
        self.errV.append(float(errV))
        self.objective.append(float(objective))

    def __len__(self):
        return len(self.k)

    def column(self, name):
        return np.asarray(getattr(self, name), dtype=float)

    def equals(self, other):
        """Exact equality, treating nan entries as equal."""
        for name in ("k", "cycle", "block", "d"):
            if getattr(self, name) != getattr(other, name):
                return False
        for name in _FLOAT_COLS:
            if not np.array_equal(
                self.column(name), other.column(name), equal_nan=True
            ):
                return False
        return True


def emit_csv(trace, path):
    """Write ``trace`` to ``path``: fixed header, 17 significant digits, LF endings."""
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(_HEADER + "\n")
            for i in range(len(trace)):
                row = (
                    f"{trace.k[i]},{trace.cycle[i]},{trace.block[i]},{trace.d[i]},"
                    f"{trace.step[i]:.17g},{trace.residual[i]:.17g},"
                    f"{trace.err2[i]:.17g},{trace.errV[i]:.17g},"
                    f"{trace.objective[i]:.17g}"
                )
                fh.write(row + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc
    return path


def read_csv(path):
    """Parse a trace written by :func:`emit_csv`."""
    trace = RunTrace()
    with open(path, "r") as fh:
        header = fh.readline().strip()
        if header != _HEADER:
            raise ValueError(f"unexpected trace header in {path}: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            k, cycle, block, d, step, residual, err2, errv, objective = line.split(",")
            trace.append(
                int(k), int(cycle), int(block), int(d),
                float(step), float(residual), float(err2), float(errv),
                float(objective),
            )
    return trace
