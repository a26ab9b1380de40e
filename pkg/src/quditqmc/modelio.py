"""
Model file format.

A model is a JSON document::

    {
      "format": "quditqmc-model",
      "version": 1,
      "dim": d, "n_classes": D,
      "feature_map": {"kind": "rff", "input_dim": .., "dim": .., "gamma": HEX, "seed": ..}
                   | {"kind": "softmax", "beta": HEX, "anchors": [[HEX, ..], ..]},
      "classes": [
        {"prior": HEX, "count": N_j,
         "eigenvalues": [HEX, ..],
         "eigenvectors": [[[HEX_re, HEX_im], ..], ..],   # columns are eigenvectors
         "u_lambda": [[[HEX_re, HEX_im], ..], ..],
         "rho": [[[HEX_re, HEX_im], ..], ..]},
        ..
      ]
    }

Every float is written with ``float.hex`` so loading reproduces the trained
arrays bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .density import DensityModel, SpectralDecomposition, validate_model
from .features import feature_map_from_dict

__all__ = ["FORMAT", "VERSION", "model_to_dict", "model_from_dict", "save_model", "load_model"]

FORMAT = "quditqmc-model"
VERSION = 1


def _hex(x) -> str:
    return float(x).hex()


def _unhex(s) -> float:
    return float.fromhex(s) if isinstance(s, str) else float(s)


def _real_array(a) -> list:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 0:
        return _hex(a)
    return [_real_array(x) for x in a]


def _complex_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[_hex(z.real), _hex(z.imag)] for z in row] for row in m]


def _read_complex_matrix(rows) -> np.ndarray:
    return np.array([[complex(_unhex(re), _unhex(im)) for re, im in row] for row in rows],
                    dtype=np.complex128)


def _read_real(data):
    if isinstance(data, list):
        return np.array([_read_real(x) for x in data], dtype=np.float64)
    return _unhex(data)


def _map_to_dict(fmap) -> dict:
    if fmap is None:
        return None
    out = fmap.to_dict()
    for key in ("gamma", "beta"):
        if key in out:
            out[key] = _hex(out[key])
    if "anchors" in out:
        out["anchors"] = _real_array(fmap.anchors)
    return out


def _map_from_dict(data):
    if data is None:
        return None
    data = dict(data)
    for key in ("gamma", "beta"):
        if key in data:
            data[key] = _unhex(data[key])
    if "anchors" in data:
        data["anchors"] = _read_real(data["anchors"])
    return feature_map_from_dict(data)


def model_to_dict(model: DensityModel) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "dim": model.dim,
        "n_classes": model.n_classes,
        "feature_map": _map_to_dict(model.feature_map),
        "classes": [
            {
                "prior": _hex(c.prior),
                "count": int(c.count),
                "eigenvalues": _real_array(c.eigenvalues),
                "eigenvectors": _complex_matrix(c.eigenvectors),
                "u_lambda": _complex_matrix(c.u_lambda),
                "rho": _complex_matrix(c.rho),
            }
            for c in model.classes
        ],
    }


def model_from_dict(data: dict) -> DensityModel:
    if data.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} document")
    if data.get("version") != VERSION:
        raise ValueError(f"unsupported model file version {data.get('version')!r}")
    classes = data["classes"]
    if len(classes) != data["n_classes"]:
        raise ValueError("n_classes does not match the stored class list")
    spectra = []
    for c in classes:
        vecs = _read_complex_matrix(c["eigenvectors"])
        vals = _read_real(c["eigenvalues"])
        vecs.flags.writeable = False
        vals.flags.writeable = False
        spectra.append(SpectralDecomposition(vecs, vals))
    model = DensityModel.from_parts(
        spectra,
        [_unhex(c["prior"]) for c in classes],
        counts=[c.get("count", 0) for c in classes],
        feature_map=_map_from_dict(data.get("feature_map")),
        rhos=[_read_complex_matrix(c["rho"]) for c in classes],
        u_lambdas=[_read_complex_matrix(c["u_lambda"]) for c in classes],
    )
    if model.dim != data["dim"]:
        raise ValueError(f"stored dim {data['dim']} does not match the matrices ({model.dim})")
    return validate_model(model)


def save_model(model: DensityModel, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> DensityModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
