import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF


def splitmix64(x):
    """One splitmix64 output step for a Python int state."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed, *stream):
    """Expand a master seed into an independent child seed for ``stream``."""
    z = splitmix64(int(seed) & _MASK)
    for s in stream:
        z = splitmix64(z ^ (int(s) & _MASK))
    return z


def uniform_at(seed, index):
    """Counter-based uniforms in [0, 1): one value per draw index.

    Vectorized over ``index``; draw ``i`` is a pure function of ``(seed, i)``.
    """
    idx = np.asarray(index, dtype=np.uint64)
    key = np.uint64(splitmix64(int(seed) & _MASK))
    with np.errstate(over="ignore"):
        z = idx * np.uint64(0x9E3779B97F4A7C15) + key
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
