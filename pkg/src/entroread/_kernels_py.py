"""Pure-numpy implementation of the entropy kernels.

Same contract as the compiled extension ``entroread._kernels``; the public
module :mod:`entroread.kernels` picks whichever is importable.  All inputs are
natural-log probability rows; all outputs are in bits.
"""

import numpy as np

LN2 = float(np.log(2.0))

IMPL = "python"


def renyi_grid(logprobs, alphas, support_logeps):
    """Renyi entropies (bits) for each row of ``logprobs`` at each order.

    Parameters
    ----------
    logprobs : (n, v) float64 array
        Natural-log probabilities; ``-inf`` marks zero entries.
    alphas : (a,) float64 array
        Entropy orders; 0, 1 and ``inf`` get their closed forms.
    support_logeps : float
        Entries with log-probability above this count toward the order-0
        support size.

    Returns
    -------
    (n, a) float64 array of entropies, clamped at 0.
    """
    lp = np.asarray(logprobs, dtype=np.float64)
    if lp.ndim == 1:
        lp = lp[None, :]
    alphas = np.asarray(alphas, dtype=np.float64)
    n = lp.shape[0]
    out = np.empty((n, alphas.shape[0]), dtype=np.float64)

    finite = lp > -np.inf
    m = np.max(lp, axis=1)

    for j, a in enumerate(alphas):
        if a == 0.0:
            out[:, j] = np.log2(np.sum(lp > support_logeps, axis=1))
        elif a == 1.0:
            with np.errstate(invalid="ignore"):
                terms = np.where(finite, np.exp(lp) * lp, 0.0)
            out[:, j] = -np.sum(terms, axis=1) / LN2
        elif np.isinf(a):
            out[:, j] = -m / LN2
        else:
            # log-domain: log2 sum p^a = (a*m + log sum exp(a*(lp - m))) / ln 2
            with np.errstate(invalid="ignore"):
                shifted = np.where(finite, np.exp(a * (lp - m[:, None])), 0.0)
            log_sum = a * m + np.log(np.sum(shifted, axis=1))
            out[:, j] = log_sum / ((1.0 - a) * LN2)

    np.maximum(out, 0.0, out=out)
    return out


def shannon_rows(logprobs):
    """Shannon entropy (bits) per row; shorthand for renyi_grid at order 1."""
    return renyi_grid(logprobs, np.array([1.0]), -np.inf)[:, 0]
