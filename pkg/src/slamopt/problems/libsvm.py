"""Reader and writer for the LIBSVM sparse text format ``label idx:val ...``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class LibSVMParseError(ValueError):
    """Malformed input; carries the 1-based line number and offending token."""

    def __init__(self, msg: str, line: int | None = None, token: str | None = None):
        where = f"line {line}: " if line is not None else ""
        tok = f" (token {token!r})" if token is not None else ""
        super().__init__(f"{where}{msg}{tok}")
        self.line = line
        self.token = token


@dataclass(frozen=True, eq=False)
class LibSVMData:
    X: sp.csr_matrix
    y: np.ndarray

    @property
    def shape(self):
        return self.X.shape


def parse_libsvm(data: bytes | str, n_features: int | None = None, map_labels: bool = True) -> LibSVMData:
    """Parse LIBSVM text into a CSR matrix with 0-based columns.

    Blank lines and ``#`` comments are ignored.  With ``map_labels`` a label
    set contained in ``{0, 1}`` is mapped to ``{-1, +1}``.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LibSVMParseError("input is not valid UTF-8") from exc
    labels, indptr, indices, values = [], [0], [], []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise LibSVMParseError("label is not a number", lineno, tokens[0]) from None
        last = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibSVMParseError("expected idx:value", lineno, tok)
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibSVMParseError("non-numeric feature", lineno, tok) from None
            if idx < 1:
                raise LibSVMParseError("feature indices start at 1", lineno, tok)
            if idx <= last:
                raise LibSVMParseError("feature indices must be strictly ascending", lineno, tok)
            last = idx
            indices.append(idx - 1)
            values.append(val)
        indptr.append(len(indices))
    if not labels:
        raise LibSVMParseError("empty input")
    width = (max(indices) + 1) if indices else 0
    if n_features is not None:
        if n_features < width:
            raise LibSVMParseError(f"found feature {width} beyond n_features={n_features}")
        width = n_features
    X = sp.csr_matrix(
        (np.asarray(values, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), width),
    )
    y = np.asarray(labels, dtype=float)
    if map_labels and set(np.unique(y)) <= {0.0, 1.0}:
        y = 2.0 * y - 1.0
    return LibSVMData(X, y)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def dump_libsvm(X, y) -> str:
    """Inverse of :func:`parse_libsvm` (explicit zeros are dropped)."""
    X = sp.csr_matrix(X)
    X.eliminate_zeros()
    X.sort_indices()
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise ValueError("need one label per row")
    lines = []
    for i in range(X.shape[0]):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in zip(X.indices[lo:hi], X.data[lo:hi]))
        lines.append(f"{_fmt(y[i])} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def load_libsvm(path, n_features: int | None = None) -> LibSVMData:
    with open(path, "rb") as fh:
        return parse_libsvm(fh.read(), n_features)


def make_synthetic(m: int, n: int, density: float, seed: int) -> LibSVMData:
    """Sparse features with labels from a noisy linear separator."""
    g = np.random.default_rng(seed)
    X = sp.random(m, n, density=density, format="csr", random_state=g,
                  data_rvs=lambda k: np.round(g.standard_normal(k), 4))
    w = g.standard_normal(n)
    margin = X @ w + 0.5 * g.standard_normal(m)
    y = np.where(margin >= 0, 1.0, -1.0)
    return LibSVMData(X, y)
