"""JSON model files.

A continuous model file::

    {"kind": "ct", "F": [[...]], "G": [[...]], "H": [[...]],
     "step": null, "metadata": {}}

A discrete model file uses ``A, B, C, D`` (``D`` optional, zeros when
absent), a positive ``step`` and an optional ``scale`` of ``"coarse"`` or
``"fine"``.  Matrices are row-major nested lists.  Floats are written in
shortest round-trip form, so a dump/load cycle is lossless.
"""

import json
from pathlib import Path

import numpy as np

from .exceptions import TimescaleError
from .model import CtModel, DtModel, validate_ct, validate_dt

__all__ = ["ModelFileError", "model_to_dict", "model_from_dict", "load_model", "dump_model"]

_CT_FIELDS = ("F", "G", "H")
_DT_FIELDS = ("A", "B", "C")


class ModelFileError(TimescaleError):
    pass


def _matrix(doc, key):
    if key not in doc:
        raise ModelFileError(f"missing field '{key}'")
    try:
        arr = np.array(doc[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"field '{key}' is not a numeric matrix: {exc}") from exc
    if arr.ndim == 1 and arr.size == 0:
        raise ModelFileError(f"field '{key}' is empty")
    if arr.ndim != 2:
        raise ModelFileError(f"field '{key}' must be a nested (2-D) array")
    return arr


def model_to_dict(model, metadata=None):
    if isinstance(model, CtModel):
        doc = {"kind": "ct", "F": model.F.tolist(), "G": model.G.tolist(),
               "H": model.H.tolist(), "step": None}
    elif isinstance(model, DtModel):
        doc = {"kind": "dt", "A": model.A.tolist(), "B": model.B.tolist(),
               "C": model.C.tolist(), "D": model.D.tolist(),
               "step": model.step, "scale": model.scale}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    doc["metadata"] = {str(k): str(v) for k, v in (metadata or {}).items()}
    return doc


def model_from_dict(doc, validate=True):
    """Build a model from a parsed model file; returns ``(model, metadata)``."""
    if not isinstance(doc, dict):
        raise ModelFileError("model file must contain a JSON object")
    kind = doc.get("kind")
    if kind not in ("ct", "dt"):
        raise ModelFileError(f"field 'kind' must be 'ct' or 'dt', got {kind!r}")
    metadata = doc.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise ModelFileError("field 'metadata' must be an object")
    try:
        if kind == "ct":
            model = CtModel(*(_matrix(doc, k) for k in _CT_FIELDS))
        else:
            A, B, C = (_matrix(doc, k) for k in _DT_FIELDS)
            D = _matrix(doc, "D") if doc.get("D") is not None else None
            step = doc.get("step")
            model = DtModel(A, B, C, D, step=1.0 if step is None else step,
                            scale=doc.get("scale", "coarse"))
    except ValueError as exc:
        raise ModelFileError(str(exc)) from exc
    if validate:
        violations = validate_ct(model) if kind == "ct" else validate_dt(model)
        if violations:
            raise ModelFileError("invalid model: " + "; ".join(str(v) for v in violations))
    return model, dict(metadata)


def load_model(path, validate=True):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise ModelFileError(f"{path}: {exc}") from exc
    return model_from_dict(doc, validate=validate)


def dumps_model(model, metadata=None):
    return json.dumps(model_to_dict(model, metadata), indent=1) + "\n"


def dump_model(model, path, metadata=None):
    Path(path).write_text(dumps_model(model, metadata))
