"""Versioned JSON model documents.

A document has the shape::

    {"format": "zenn-model", "version": 1, "model": {...}}

where ``model`` holds an architecture descriptor plus flat parameter arrays.
Floats are written with 17 significant digits, which round-trips every
IEEE double exactly.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .deep import DeepModel
from .exceptions import DimensionError, ModelDimensionError, ModelFormatError, ModelVersionError
from .layers import Concat, Dense, FourierFeatures, KAZeNNEdge, OZeNN, RadZeNN, RandoZeNN
from .networks import ROLES, ShallowMLP, ShallowZeNN

FORMAT_NAME = "zenn-model"
FORMAT_VERSION = 1

_LAYER_TYPES = {cls.kind: cls for cls in (Dense, OZeNN, RadZeNN, RandoZeNN, FourierFeatures, KAZeNNEdge)}


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot serialize non-finite parameter values")
    return format(x, ".17g")


def _dump(obj, indent=0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, np.ndarray):
        return "[" + ", ".join(_fmt_float(float(v)) for v in obj.ravel()) + "]"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _dump(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def _array_doc(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "values": np.asarray(arr, dtype=np.float64)}


def _layer_doc(layer) -> dict:
    if isinstance(layer, Concat):
        return {"type": "concat", "branches": [_layer_doc(b) for b in layer.layers]}
    doc = {"type": layer.kind}
    doc.update(layer.hyper())
    doc["parameters"] = {name: _array_doc(layer.params[name]) for name in layer.param_names}
    return doc


def model_to_dict(model) -> dict:
    if isinstance(model, (ShallowZeNN, ShallowMLP)):
        doc = {
            "type": "shallow_zenn" if isinstance(model, ShallowZeNN) else "shallow_mlp",
            "n": model.n,
            "activation": model.activation.value,
        }
        if isinstance(model, ShallowZeNN):
            doc["alpha"] = model.alpha
        else:
            doc["beta"] = model.beta
        doc["parameters"] = {role: getattr(model, role) for role in ROLES}
        return doc
    if isinstance(model, DeepModel):
        return {"type": "deep", "layers": [_layer_doc(layer) for layer in model.layers]}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def serialize_model(model) -> bytes:
    doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "model": model_to_dict(model)}
    return (_dump(doc) + "\n").encode("utf-8")


# -- parsing -----------------------------------------------------------------

def _get(doc, key, kind=None, where="model"):
    if not isinstance(doc, dict) or key not in doc:
        raise ModelFormatError(f"{where}: missing key {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise ModelFormatError(f"{where}: {key!r} has unexpected type {type(value).__name__}")
    return value


def _float_list(values, where) -> np.ndarray:
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    ):
        raise ModelFormatError(f"{where}: expected a list of numbers")
    return np.asarray(values, dtype=np.float64)


def _parse_array(doc, where) -> np.ndarray:
    shape = _get(doc, "shape", list, where)
    values = _float_list(_get(doc, "values", list, where), where)
    if not all(isinstance(s, int) and s >= 0 for s in shape):
        raise ModelFormatError(f"{where}: invalid shape {shape}")
    if values.size != int(np.prod(shape)):
        raise ModelDimensionError(f"{where}: {values.size} values do not fill shape {tuple(shape)}")
    return values.reshape(shape)


def _parse_layer(doc, where):
    kind = _get(doc, "type", str, where)
    if kind == "concat":
        branches = _get(doc, "branches", list, where)
        return Concat([_parse_layer(b, f"{where}.branches[{i}]") for i, b in enumerate(branches)])
    if kind not in _LAYER_TYPES:
        raise ModelFormatError(f"{where}: unknown layer type {kind!r}")
    params = {name: _parse_array(arr, f"{where}.parameters.{name}")
              for name, arr in _get(doc, "parameters", dict, where).items()}
    hyper = {k: v for k, v in doc.items() if k not in ("type", "parameters")}
    try:
        if kind == "dense":
            return Dense(hyper["input_dim"], hyper["output_dim"], hyper["activation"], hyper["alpha"], **params)
        if kind in ("ozenn", "radzenn"):
            return _LAYER_TYPES[kind](hyper["d"], hyper["n"], hyper["activation"], hyper["alpha"], **params)
        if kind == "randozenn":
            return RandoZeNN(hyper["d"], hyper["n"], hyper["m"], hyper["index"], hyper["activation"],
                             hyper["alpha"], **params)
        if kind == "fourier":
            return FourierFeatures(hyper["d"], hyper["n"], hyper["rho"], hyper["trainable"], **params)
        return KAZeNNEdge(hyper["input_dim"], hyper["output_dim"], hyper["n"], hyper["activation"],
                          hyper["alpha"], **params)
    except KeyError as exc:
        raise ModelFormatError(f"{where}: missing key {exc.args[0]!r}") from None
    except DimensionError as exc:
        raise ModelDimensionError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: {exc}") from None


def model_from_dict(doc):
    kind = _get(doc, "type", str)
    if kind in ("shallow_zenn", "shallow_mlp"):
        n = _get(doc, "n", int)
        params = _get(doc, "parameters", dict)
        arrays = {}
        for role in ROLES:
            arr = _float_list(_get(params, role, list, "model.parameters"), f"model.parameters.{role}")
            if arr.size != n:
                raise ModelDimensionError(f"model.parameters.{role}: {arr.size} values, expected n={n}")
            arrays[role] = arr
        try:
            if kind == "shallow_zenn":
                return ShallowZeNN(activation=_get(doc, "activation", str), alpha=_get(doc, "alpha", (int, float)),
                                   **arrays)
            return ShallowMLP(activation=_get(doc, "activation", str), beta=_get(doc, "beta", (int, float)), **arrays)
        except ValueError as exc:
            raise ModelFormatError(f"model: {exc}") from None
    if kind == "deep":
        layers = [_parse_layer(layer, f"model.layers[{i}]") for i, layer in enumerate(_get(doc, "layers", list))]
        try:
            return DeepModel(layers)
        except DimensionError as exc:
            raise ModelDimensionError(f"model.layers: {exc}") from None
    raise ModelFormatError(f"model: unknown model type {kind!r}")


def deserialize_model(data: bytes | str):
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFormatError(f"document is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"not a {FORMAT_NAME} document")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported format version {version!r}; this reader handles {FORMAT_VERSION}")
    return model_from_dict(_get(doc, "model", dict, "document"))


def save_model(model, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_model(model))


def load_model(path):
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())
