"""16-bit binary PGM (P5) image dumps for reconstructed material maps."""

import numpy as np

_MAXVAL = 65535


def write_pgm(path, image, lo=0.0, hi=1.0):
    """Write ``image`` as 16-bit big-endian P5, mapping [lo, hi] to [0, 65535]."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    if hi <= lo:
        raise ValueError(f"empty value range [{lo}, {hi}]")
    scaled = np.clip((image - lo) / (hi - lo), 0.0, 1.0)
    data = np.round(scaled * _MAXVAL).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n{_MAXVAL}\n".encode())
        fh.write(data.tobytes())
    return path


def read_pgm(path):
    """Read a 16-bit P5 file back to floats in [0, 1]."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError(f"{path}: not a binary PGM file")
        width, height = (int(v) for v in fh.readline().split())
        maxval = int(fh.readline())
        if maxval != _MAXVAL:
            raise ValueError(f"{path}: expected 16-bit data, maxval {maxval}")
        raw = fh.read(width * height * 2)
    data = np.frombuffer(raw, dtype=">u2").reshape(height, width)
    return data.astype(float) / _MAXVAL
