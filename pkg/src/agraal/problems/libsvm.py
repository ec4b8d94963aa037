"""Reader and writer for the LIBSVM sparse text format.

Each sample is one line ``<label> <index>:<value> ...`` with 1-based,
strictly increasing indices. ``#`` starts a comment that runs to the end of
the line; blank lines are skipped.
"""

import io
import logging

import numpy as np
import scipy.sparse as sp

from ..errors import ParseError

log = logging.getLogger(__name__)


def _label(token, lineno):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(lineno, f"bad label {token!r}") from None
    if value not in (-1.0, 0.0, 1.0):
        raise ParseError(lineno, f"label {token!r} is not one of -1, +1 (or 0/1)")
    return value


def parse_libsvm(stream, n_features=None):
    """Parse LIBSVM text into ``(A, b)``.

    ``stream`` is a text file object, a string, or any iterable of lines.
    ``A`` is CSR with one row per sample and ``n_features`` columns
    (default: the largest index seen). Labels 0/1 are mapped to -1/+1.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    indptr = [0]
    indices = []
    data = []
    labels = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        labels.append(_label(tokens[0], lineno))
        last = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ParseError(lineno, f"malformed feature {tok!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(lineno, f"malformed feature {tok!r}") from None
            if idx < 1:
                raise ParseError(lineno, f"index {idx} is not 1-based")
            if idx <= last:
                raise ParseError(lineno, f"index {idx} does not increase (previous {last})")
            last = idx
            indices.append(idx - 1)
            data.append(val)
        indptr.append(len(indices))
    if not labels:
        raise ParseError(0, "no samples")

    b = np.array(labels)
    if np.any(b == 0):
        if np.any(b == -1):
            raise ParseError(0, "labels mix -1 and 0")
        log.warning("mapping 0/1 labels to -1/+1")
        b = np.where(b == 0, -1.0, 1.0)

    width = max(indices) + 1 if indices else 0
    if n_features is None:
        n_features = width
    elif n_features < width:
        raise ParseError(0, f"index {width} exceeds n_features={n_features}")
    A = sp.csr_matrix(
        (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(labels), n_features),
    )
    return A, b


def serialize_libsvm(A, b):
    """Inverse of :func:`parse_libsvm`; floats are written with ``repr``."""
    A = sp.csr_matrix(A)
    A.sort_indices()
    out = []
    for i, label in enumerate(b):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        feats = " ".join(f"{j + 1}:{v!r}" for j, v in zip(A.indices[lo:hi], A.data[lo:hi].tolist()))
        head = "+1" if label > 0 else "-1"
        out.append(f"{head} {feats}".rstrip())
    return "\n".join(out) + "\n"
