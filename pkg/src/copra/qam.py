"""Gray-labelled rectangular 8-QAM.

Three bits per symbol: the first two pick the in-phase level from
{-3, -1, 1, 3} through a 2-bit Gray code, the third picks the quadrature
level from {-1, 1}.  Points are scaled by 1/sqrt(6) for unit mean energy.
"""

import numpy as np

from .errors import InvalidInputError

BITS_PER_SYMBOL = 3
_SCALE = 1.0 / np.sqrt(6.0)
_I_LEVELS = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}
_Q_LEVELS = {0: -1.0, 1: 1.0}


def _build():
    labels = np.array([[(k >> 2) & 1, (k >> 1) & 1, k & 1] for k in range(8)], dtype=np.uint8)
    points = np.array(
        [complex(_I_LEVELS[(int(b[0]), int(b[1]))], _Q_LEVELS[int(b[2])]) for b in labels]
    )
    return labels, points * _SCALE


# Row k of LABELS is the bit label of CONSTELLATION[k]; k is the label read MSB first.
LABELS, CONSTELLATION = _build()
LABELS.setflags(write=False)
CONSTELLATION.setflags(write=False)


def qam8_mod(bits):
    bits = np.asarray(bits).astype(np.uint8).reshape(-1)
    if bits.size % BITS_PER_SYMBOL:
        raise InvalidInputError(f"bit count {bits.size} is not a multiple of {BITS_PER_SYMBOL}")
    if np.any(bits > 1):
        raise InvalidInputError("bits must be 0 or 1")
    groups = bits.reshape(-1, BITS_PER_SYMBOL)
    index = (groups[:, 0].astype(int) << 2) | (groups[:, 1] << 1) | groups[:, 2]
    return CONSTELLATION[index]


def qam8_demod(symbols):
    """Minimum-distance hard decisions; equidistant points go to the smaller label."""
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    d = np.abs(symbols[:, None] - CONSTELLATION[None, :]) ** 2
    dmin = d.min(axis=1, keepdims=True)
    nearest = d <= dmin + 1e-12 * np.maximum(dmin, 1.0)
    index = np.argmax(nearest, axis=1)
    return LABELS[index].reshape(-1)


def bit_error_rate(bits_true, bits_hat):
    bits_true = np.asarray(bits_true).reshape(-1)
    bits_hat = np.asarray(bits_hat).reshape(-1)
    if bits_true.shape != bits_hat.shape or bits_true.size == 0:
        raise InvalidInputError("bit streams must be nonempty and of equal length")
    return float(np.mean(bits_true != bits_hat))
