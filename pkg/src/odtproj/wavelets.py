"""Periodized orthonormal Daubechies-3 filter bank (2D separable DWT).

The synthesis transform is the transpose of the analysis transform; because
the periodized filter-bank matrix is orthonormal for even lengths, that
transpose is the exact inverse, giving perfect reconstruction to machine
precision. Lengths must be divisible by 2 at every level (callers pad).
"""

from __future__ import annotations

import numpy as np

__all__ = ["dwt2", "idwt2", "wavedec2", "waverec2", "FILTERS"]

# Orthonormal Daubechies-3 scaling coefficients (sum = sqrt(2)), computed by
# spectral factorization of 1 + 3y + 6y^2 at 50-digit precision and rounded
# to the nearest doubles.
_DB3 = np.array([
    0.33267055295008263,
    0.8068915093110925,
    0.45987750211849154,
    -0.13501102001025458,
    -0.08544127388202666,
    0.03522629188570953,
])


def _filter_bank(rec_lo: np.ndarray):
    L = len(rec_lo)
    rec_hi = np.array([(-1) ** k * rec_lo[L - 1 - k] for k in range(L)])
    return {
        "rec_lo": rec_lo,
        "rec_hi": rec_hi,
        "dec_lo": rec_lo[::-1].copy(),
        "dec_hi": rec_hi[::-1].copy(),
    }


FILTERS = {"db3": _filter_bank(_DB3)}


def _dwt_axis(x: np.ndarray, bank) -> tuple[np.ndarray, np.ndarray]:
    """One analysis level along the last axis (length must be even)."""
    n = x.shape[-1]
    if n % 2:
        raise ValueError("axis length must be even")
    taps = len(bank["dec_lo"])
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n
    g = x[..., idx]
    return g @ bank["dec_lo"], g @ bank["dec_hi"]


def _idwt_axis(a: np.ndarray, d: np.ndarray, bank) -> np.ndarray:
    """Transpose (== inverse) of :func:`_dwt_axis` along the last axis."""
    m = a.shape[-1]
    n = 2 * m
    taps = len(bank["dec_lo"])
    idx = (2 * np.arange(m)[:, None] + np.arange(taps)[None, :]) % n
    vals = a[..., None] * bank["dec_lo"] + d[..., None] * bank["dec_hi"]
    lead = a.shape[:-1]
    x = np.zeros(lead + (n,), dtype=np.result_type(a, d))
    x2 = x.reshape(-1, n)
    v2 = vals.reshape(-1, m, taps)
    rows = np.arange(x2.shape[0])[:, None, None]
    np.add.at(x2, (rows, idx[None, :, :]), v2)
    return x2.reshape(lead + (n,))


def dwt2(x: np.ndarray, wavelet: str = "db3"):
    """One 2D level -> (aa, (ad, da, dd)); letters are (rows, cols) low/high."""
    bank = FILTERS[wavelet]
    lo, hi = _dwt_axis(x, bank)                      # along columns
    aa, ad = _dwt_axis(lo.swapaxes(-1, -2), bank)    # along rows
    da, dd = _dwt_axis(hi.swapaxes(-1, -2), bank)
    return aa.swapaxes(-1, -2), (ad.swapaxes(-1, -2), da.swapaxes(-1, -2), dd.swapaxes(-1, -2))


def idwt2(aa: np.ndarray, details, wavelet: str = "db3") -> np.ndarray:
    bank = FILTERS[wavelet]
    ad, da, dd = details
    lo = _idwt_axis(aa.swapaxes(-1, -2), ad.swapaxes(-1, -2), bank).swapaxes(-1, -2)
    hi = _idwt_axis(da.swapaxes(-1, -2), dd.swapaxes(-1, -2), bank).swapaxes(-1, -2)
    return _idwt_axis(lo, hi, bank)


def wavedec2(x: np.ndarray, levels: int, wavelet: str = "db3"):
    """Multi-level 2D decomposition: (approx, [details_coarsest..details_finest])."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if wavelet not in FILTERS:
        raise ValueError(f"unsupported wavelet {wavelet!r} (available: {sorted(FILTERS)})")
    details = []
    a = x
    for _ in range(levels):
        if a.shape[-1] % 2 or a.shape[-2] % 2:
            raise ValueError("frame dims must be divisible by 2**levels")
        a, det = dwt2(a, wavelet)
        details.append(det)
    return a, details[::-1]


def waverec2(approx: np.ndarray, details, wavelet: str = "db3") -> np.ndarray:
    a = approx
    for det in details:
        a = idwt2(a, det, wavelet)
    return a
