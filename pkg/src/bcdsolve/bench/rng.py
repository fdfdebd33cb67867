"""A portable, counter-based random number generator.

Noise realizations must be bit-reproducible across runs, platforms, and
reimplementations, so the harness does not rely on any library's
generator.  The algorithm is fully specified here:

* raw stream: splitmix64 outputs ``mix(seed + (i + 1) * GAMMA)`` for
  the counter ``i = 0, 1, 2, ...`` with ``GAMMA = 0x9E3779B97F4A7C15``
  and the standard finalizer (xor-shift 30, multiply
  0xBF58476D1CE4E5B9, xor-shift 27, multiply 0x94D049BB133111EB,
  xor-shift 31), all modulo 2**64;
* uniforms on (0, 1): ``((word >> 11) + 0.5) * 2**-53`` — strictly
  inside the open interval, so logarithms are safe;
* standard normals: Box-Muller on consecutive uniform pairs
  ``(u_{2j}, u_{2j+1})``, emitted in the order
  ``r cos(2 pi u2), r sin(2 pi u2)`` with ``r = sqrt(-2 ln u1)``.

Being counter-based, the stream can be generated in vectorized form.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


class PortableRng:
    """Deterministic generator with an explicit stream position."""

    def __init__(self, seed):
        self.seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self.counter = 0

    def words(self, n):
        """Next ``n`` raw 64-bit words of the stream."""
        idx = self.counter + 1 + np.arange(n, dtype=np.uint64)
        self.counter += n
        return _mix((self.seed + idx * _GAMMA) & _MASK)

    def uniform(self, n):
        """Next ``n`` uniforms on the open interval (0, 1)."""
        w = self.words(n)
        return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53

    def normal(self, shape):
        """Standard normal samples of the given shape (Box-Muller pairs)."""
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        ang = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(ang)
        out[1::2] = r * np.sin(ang)
        return out[:n].reshape(shape)
