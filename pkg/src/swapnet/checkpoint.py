"""Versioned, self-describing JSON checkpoints.

Layout (format version 1, keys sorted, compact separators so that
save -> load -> save is byte-identical):

  format_version   int
  run_config       echo of the resolved run configuration
  classes          original class labels, ascending
  circuit          {data_qubits, trained_qubits, layers}
  thetas           one flat angle list per class circuit
  mps              {output_site, sites: [{shape, values (row-major)}, ...]}
  normalization    {minimum, maximum} per-dimension stats frozen from training
  seed             master RNG seed the run was started from
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import CircuitSpec, LayerKind
from .encoding import NormalizationStats
from .tensornet import MpsModel
from .training import ModelState

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file cannot be loaded (bad version, shape, or syntax)."""


@dataclass
class Checkpoint:
    model: ModelState
    normalization: NormalizationStats
    run_config: dict
    seed: int


def save_checkpoint(
    path: str | Path,
    model: ModelState,
    normalization: NormalizationStats,
    run_config: dict,
    seed: int,
) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "run_config": run_config,
        "classes": list(model.classes),
        "circuit": {
            "data_qubits": model.spec.data_qubits,
            "trained_qubits": model.spec.trained_qubits,
            "layers": [layer.value for layer in model.spec.layers],
        },
        "thetas": [theta.tolist() for theta in model.thetas],
        "mps": {
            "output_site": model.mps.output_site,
            "sites": [
                {"shape": list(t.shape), "values": t.reshape(-1).tolist()}
                for t in model.mps.site_tensors
            ],
        },
        "normalization": {
            "minimum": normalization.minimum.tolist(),
            "maximum": normalization.maximum.tolist(),
        },
        "seed": int(seed),
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    )


def load_checkpoint(path: str | Path) -> Checkpoint:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc

    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported checkpoint format version {version!r} "
            f"(expected {FORMAT_VERSION})"
        )
    try:
        spec = CircuitSpec(
            payload["circuit"]["data_qubits"],
            payload["circuit"]["trained_qubits"],
            tuple(LayerKind(l) for l in payload["circuit"]["layers"]),
        )
        thetas = [np.array(t, dtype=float) for t in payload["thetas"]]
        sites = [
            np.array(site["values"], dtype=float).reshape(site["shape"])
            for site in payload["mps"]["sites"]
        ]
        mps = MpsModel(sites, payload["mps"]["output_site"])
        model = ModelState(spec, mps, thetas, [int(c) for c in payload["classes"]])
        normalization = NormalizationStats(
            np.array(payload["normalization"]["minimum"], dtype=float),
            np.array(payload["normalization"]["maximum"], dtype=float),
        )
        return Checkpoint(model, normalization, payload["run_config"], int(payload["seed"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint: {exc}") from exc
