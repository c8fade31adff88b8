"""Matrix JSON: ``{"dim": n, "re": [[...]], "im": [[...]]}`` with ``im`` optional.

Floats are written with Python's shortest round-trip repr, so re-reading a
written matrix reproduces it bit for bit.
"""
import json

import numpy as np

from .hermitian import hermitian


def matrix_to_json(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    out = {"dim": int(M.shape[0]), "re": np.real(M).tolist()}
    if np.iscomplexobj(M) and np.any(np.imag(M) != 0):
        out["im"] = np.imag(M).tolist()
    return out


def matrix_from_json(obj, check=True):
    try:
        dim = int(obj["dim"])
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float) if "im" in obj else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from None
    if re.shape != (dim, dim) or (im is not None and im.shape != (dim, dim)):
        raise ValueError(f"matrix JSON entries do not match dim={dim}")
    M = re if im is None else re + 1j * im
    return hermitian(M) if check else M


def read_matrix(path):
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def write_matrix(path, M):
    with open(path, "w") as fh:
        json.dump(matrix_to_json(M), fh)
        fh.write("\n")
