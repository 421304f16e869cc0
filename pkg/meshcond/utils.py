# -*- coding: utf-8 -*-
import numpy as np


def format_float(value):
    """
    Return the decimal text of a float with enough digits to read it back
    bit-exactly (17 significant digits).
    """
    return '%.17g' % value


def parse_numbers(text):
    """
    Return the list of floats written in `text` as comma-separated values.

    eg.:

        parse_numbers('4, 8,16') # [4.0, 8.0, 16.0]

    Empty items are rejected with a ValueError.
    """
    items = [item.strip() for item in text.split(',')]
    if not items or any(not item for item in items):
        raise ValueError('Empty item in number list "%s".' % text)
    return [float(item) for item in items]


def symmetric_part(matrices):
    """Return (M + M^T) / 2 for one matrix or a stack of matrices."""
    matrices = np.asarray(matrices, dtype=float)
    return 0.5 * (matrices + np.swapaxes(matrices, -1, -2))


def spectral_norms(matrices):
    """
    Return the 2-norm of each symmetric positive semi-definite matrix of a
    stack of shape (N, d, d), that is its largest eigenvalue.
    """
    matrices = np.asarray(matrices, dtype=float)
    return np.linalg.eigvalsh(matrices)[..., -1]
