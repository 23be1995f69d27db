"""Iterative radix-2 decimation-in-time FFT, batched over leading axes."""

import numpy as np

from .errors import ParameterError

_TWIDDLES = {}
_BITREV = {}


def _is_pow2(n):
    return n >= 1 and n & (n - 1) == 0


def _bitrev(n):
    perm = _BITREV.get(n)
    if perm is None:
        bits = n.bit_length() - 1
        idx = np.arange(n)
        perm = np.zeros(n, dtype=np.intp)
        for b in range(bits):
            perm |= ((idx >> b) & 1) << (bits - 1 - b)
        _BITREV[n] = perm
    return perm


def _twiddles(n):
    w = _TWIDDLES.get(n)
    if w is None:
        w = np.exp(-2j * np.pi * np.arange(n // 2) / n)
        _TWIDDLES[n] = w
    return w


def fft(x):
    """Discrete Fourier transform along the last axis.

    The last axis length must be a power of two.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if not _is_pow2(n):
        raise ParameterError(f"radix-2 transform needs a power-of-two length, got {n}")
    lead = x.shape[:-1]
    a = x.reshape(-1, n)[:, _bitrev(n)].astype(np.complex128)
    w_full = _twiddles(n)
    size = 2
    while size <= n:
        half = size // 2
        w = w_full[:: n // size]  # length half
        blocks = a.reshape(a.shape[0], n // size, size)
        even = blocks[:, :, :half]
        odd = blocks[:, :, half:] * w
        a = np.concatenate((even + odd, even - odd), axis=2).reshape(a.shape[0], n)
        size *= 2
    return a.reshape(*lead, n)


def fftshift(x):
    """Rotate the last axis so the zero-frequency bin sits at index n // 2."""
    x = np.asarray(x)
    return np.roll(x, x.shape[-1] // 2, axis=-1)
