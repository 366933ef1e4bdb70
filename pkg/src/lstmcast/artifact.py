"""JSON model files.

Layout (``format_version`` 1)::

    {
      "format_version": 1,
      "spec":     {kind, layers, window_length, n_features, dropout, kernel_size},
      "layers":   [{"name": "lstm0", "order": ["W_f", ..., "b_c"], "weights": [...]}, ...,
                   {"name": "head", "order": ["W", "b"], "weights": [...]}],
      "scaler":   {"min": [...], "max": [...], "feature_names": [...]},
      "metadata": {"seed": ..., "config_hash": ..., "epochs_run": ..., "run": {...}},
      "created":  "2026-01-01T00:00:00+00:00"
    }

Each layer's ``weights`` is the row-major concatenation of its blocks in
``order``. Floats are written with ``repr`` precision, so a load/save cycle
reproduces the weight bytes exactly.
"""

import datetime as dt
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArtifactError, ArtifactVersionError
from .networks import NetworkSpec, params_from_layers, params_to_layers
from .preprocess import ScalerParams

FORMAT_VERSION = 1


@dataclass
class ModelArtifact:
    spec: NetworkSpec
    params: object
    scaler: ScalerParams
    metadata: dict = field(default_factory=dict)
    created: str = ""


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def to_dict(art):
    return {
        "format_version": FORMAT_VERSION,
        "spec": art.spec.to_dict(),
        "layers": params_to_layers(art.spec, art.params),
        "scaler": art.scaler.to_dict(),
        "metadata": art.metadata,
        "created": art.created or dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
    }


def save(art, path):
    Path(path).write_text(json.dumps(to_dict(art), indent=1) + "\n", encoding="utf-8")


def from_dict(d):
    if not isinstance(d, dict) or "format_version" not in d:
        raise ArtifactError("not a model artifact (no format_version)")
    if d["format_version"] != FORMAT_VERSION:
        raise ArtifactVersionError(f"artifact format {d['format_version']} is not supported (expected {FORMAT_VERSION})")
    try:
        spec = NetworkSpec.from_dict(d["spec"])
        params = params_from_layers(spec, d["layers"])
        scaler = ScalerParams.from_dict(d["scaler"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed artifact: {exc}") from exc
    return ModelArtifact(spec, params, scaler, d.get("metadata", {}), d.get("created", ""))


def load(path):
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"no such artifact: {path}")
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path} is not valid JSON: {exc}") from exc
    return from_dict(d)
