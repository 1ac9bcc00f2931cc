"""File formats: model, spike train, run manifest, result, CSV traces.

All outputs are deterministic byte-for-byte given the same inputs: JSON
is dumped with sorted keys and fixed separators, spike files use a fixed
line template, and binary weight blobs are little-endian int16/int32 in
d-major (then i, then j) order behind a 5-byte magic+version header.
Parse failures raise FormatError with file (and, for line-oriented
formats, line number) context.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FormatError
from .model import (
    DEFAULT_POLICY,
    DelayNetwork,
    FixedPointPolicy,
    LayerSpec,
    LifParams,
    RESET_SUBTRACT,
    RESET_TO_ZERO,
    SpikeTrain,
)

MODEL_FORMAT = "delaysim-model"
RESULT_FORMAT = "delaysim-result"
FORMAT_VERSION = 1
WEIGHT_MAGIC = b"SDLY"


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_json(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc


# -- model ---------------------------------------------------------------


def _weight_dtype(policy: FixedPointPolicy):
    return np.dtype("<i2") if policy.weight_bits <= 16 else np.dtype("<i4")


def save_model(
    network: DelayNetwork, path, inline_weights: bool = False
) -> list[Path]:
    """Write a model file; returns all paths written (JSON first)."""
    path = Path(path)
    dtype = _weight_dtype(network.policy)
    written = [path]
    layers = []
    for k, layer in enumerate(network.layers):
        entry = {
            "presyn": layer.presyn_count,
            "postsyn": layer.postsyn_count,
            "levels": layer.delay_levels,
            "lif": {
                "decay_q15": layer.lif.decay_q15,
                "threshold": layer.lif.threshold,
                "reset": layer.lif.reset_mode,
            },
        }
        if inline_weights:
            entry["weights"] = {
                "encoding": "inline",
                "data": layer.weights.tolist(),
            }
        else:
            blob_name = f"{path.stem}.w{k}.bin"
            blob_path = path.parent / blob_name
            payload = layer.weights.astype(dtype).tobytes()
            blob_path.write_bytes(WEIGHT_MAGIC + bytes([FORMAT_VERSION]) + payload)
            written.append(blob_path)
            entry["weights"] = {"encoding": "binary", "file": blob_name}
        layers.append(entry)
    doc = {
        "format": MODEL_FORMAT,
        "version": FORMAT_VERSION,
        "policy": {
            "weight_bits": network.policy.weight_bits,
            "acc_bits": network.policy.acc_bits,
        },
        "layers": layers,
    }
    path.write_text(_dump_json(doc))
    return written


def _load_weight_blob(path: Path, shape, dtype) -> np.ndarray:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if raw[: len(WEIGHT_MAGIC)] != WEIGHT_MAGIC:
        raise FormatError(f"{path}: bad weight-blob magic (expected {WEIGHT_MAGIC!r})")
    if len(raw) < len(WEIGHT_MAGIC) + 1 or raw[len(WEIGHT_MAGIC)] != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported weight-blob version")
    payload = raw[len(WEIGHT_MAGIC) + 1 :]
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(payload) != expected:
        raise FormatError(
            f"{path}: weight payload is {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(shape).astype(np.int64)


def load_model(path) -> DelayNetwork:
    path = Path(path)
    doc = _load_json(path)
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise FormatError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported model version {doc.get('version')!r}")
    pol = doc.get("policy", {})
    policy = FixedPointPolicy(
        weight_bits=int(pol.get("weight_bits", DEFAULT_POLICY.weight_bits)),
        acc_bits=int(pol.get("acc_bits", DEFAULT_POLICY.acc_bits)),
    )
    dtype = _weight_dtype(policy)
    layers = []
    try:
        for k, entry in enumerate(doc["layers"]):
            shape = (int(entry["levels"]), int(entry["presyn"]), int(entry["postsyn"]))
            wspec = entry["weights"]
            if wspec["encoding"] == "inline":
                weights = np.asarray(wspec["data"], dtype=np.int64)
                if weights.shape != shape:
                    raise FormatError(
                        f"{path}: layer {k} inline weights have shape "
                        f"{weights.shape}, expected {shape}"
                    )
            elif wspec["encoding"] == "binary":
                weights = _load_weight_blob(path.parent / wspec["file"], shape, dtype)
            else:
                raise FormatError(
                    f"{path}: layer {k} has unknown weight encoding {wspec['encoding']!r}"
                )
            lif_doc = entry["lif"]
            reset = lif_doc.get("reset", RESET_TO_ZERO)
            if reset not in (RESET_TO_ZERO, RESET_SUBTRACT):
                raise FormatError(f"{path}: layer {k} has unknown reset mode {reset!r}")
            lif = LifParams(
                decay_q15=int(lif_doc["decay_q15"]),
                threshold=int(lif_doc["threshold"]),
                reset_mode=reset,
            )
            layers.append(LayerSpec(shape[1], shape[2], shape[0], weights, lif))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: malformed model file ({exc})") from exc
    try:
        return DelayNetwork(tuple(layers), policy=policy)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# -- spike trains ----------------------------------------------------------


def save_spikes(spikes: SpikeTrain, path) -> Path:
    path = Path(path)
    lines = [f'{{"T": {spikes.duration}, "width": {spikes.width}}}']
    lines.extend(f'{{"t": {t}, "n": {n}}}' for t, n in spikes.events)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_spikes(path) -> SpikeTrain:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not lines:
        raise FormatError(f"{path}:1: empty spike file (missing header line)")

    def parse(lineno: int, text: str) -> dict:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise FormatError(f"{path}:{lineno}: expected a JSON object")
        return obj

    header = parse(1, lines[0])
    if "T" not in header or "width" not in header:
        raise FormatError(f'{path}:1: header must carry "T" and "width"')
    duration, width = int(header["T"]), int(header["width"])
    events = []
    for lineno, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        obj = parse(lineno, text)
        if "t" not in obj or "n" not in obj:
            raise FormatError(f'{path}:{lineno}: event must carry "t" and "n"')
        t, n = int(obj["t"]), int(obj["n"])
        if not 0 <= t < duration:
            raise FormatError(f"{path}:{lineno}: timestep {t} outside [0, {duration})")
        if not 0 <= n < width:
            raise FormatError(f"{path}:{lineno}: neuron {n} outside [0, {width})")
        events.append((t, n))
    try:
        return SpikeTrain(duration, width, events)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# -- run manifest ------------------------------------------------------------


@dataclass
class RunManifest:
    model_path: Path
    spikes_path: Path
    structure: str = "scdq"
    capacity: int = 2048
    scheduler: str = "sequential"
    seed: int = 0
    output_dir: Path = Path("out")
    trace_membranes: bool = False
    trace_events: bool = False
    policy: Optional[FixedPointPolicy] = None
    path: Optional[Path] = None


def load_manifest(path) -> RunManifest:
    path = Path(path)
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: manifest must be a JSON object")
    for key in ("model", "spikes"):
        if key not in doc:
            raise FormatError(f'{path}: manifest is missing required key "{key}"')
    base = path.parent
    traces = doc.get("traces", {})
    if not isinstance(traces, dict):
        raise FormatError(f'{path}: "traces" must be an object of booleans')
    policy = None
    if "policy" in doc:
        pol = doc["policy"]
        try:
            policy = FixedPointPolicy(
                weight_bits=int(pol.get("weight_bits", DEFAULT_POLICY.weight_bits)),
                acc_bits=int(pol.get("acc_bits", DEFAULT_POLICY.acc_bits)),
            )
        except (AttributeError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: malformed policy ({exc})") from exc
    try:
        manifest = RunManifest(
            model_path=base / doc["model"],
            spikes_path=base / doc["spikes"],
            structure=str(doc.get("structure", "scdq")),
            capacity=int(doc.get("capacity", 2048)),
            scheduler=str(doc.get("scheduler", "sequential")),
            seed=int(doc.get("seed", 0)),
            output_dir=base / doc.get("output_dir", "out"),
            trace_membranes=bool(traces.get("membranes", False)),
            trace_events=bool(traces.get("events", False)),
            policy=policy,
            path=path,
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed manifest ({exc})") from exc
    for p, label in ((manifest.model_path, "model"), (manifest.spikes_path, "spikes")):
        if not p.exists():
            raise FormatError(f"{path}: {label} file does not exist: {p}")
    return manifest


def save_manifest(manifest: RunManifest, path) -> Path:
    path = Path(path)
    base = path.parent

    def rel(p: Path) -> str:
        try:
            return str(Path(p).relative_to(base))
        except ValueError:
            return str(p)

    doc = {
        "model": rel(manifest.model_path),
        "spikes": rel(manifest.spikes_path),
        "structure": manifest.structure,
        "capacity": manifest.capacity,
        "scheduler": manifest.scheduler,
        "seed": manifest.seed,
        "output_dir": rel(manifest.output_dir),
        "traces": {
            "membranes": manifest.trace_membranes,
            "events": manifest.trace_events,
        },
    }
    if manifest.policy is not None:
        doc["policy"] = {
            "weight_bits": manifest.policy.weight_bits,
            "acc_bits": manifest.policy.acc_bits,
        }
    path.write_text(_dump_json(doc))
    return path


# -- results & traces --------------------------------------------------------


def result_to_dict(result) -> dict:
    return {
        "format": RESULT_FORMAT,
        "version": FORMAT_VERSION,
        "structure": result.structure_kind,
        "timesteps": result.timesteps,
        "classification": result.classification,
        "spike_counts": [int(c) for c in result.spike_counts],
        "metrics": result.metrics.as_dict(),
    }


def write_result(result, path) -> Path:
    path = Path(path)
    path.write_text(_dump_json(result_to_dict(result)))
    return path


def write_membrane_csv(result, path) -> Path:
    """CSV rows timestep,layer,neuron,potential for every recorded membrane."""
    if result.membranes is None:
        raise ValueError("result carries no membrane traces")
    path = Path(path)
    rows = ["timestep,layer,neuron,potential"]
    for layer, trace in enumerate(result.membranes):
        for t in range(trace.shape[0]):
            row = trace[t]
            rows.extend(f"{t},{layer},{j},{row[j]}" for j in range(trace.shape[1]))
    path.write_text("\n".join(rows) + "\n")
    return path


def write_event_trace_csv(records, path, tag_column: str = "delay_tag") -> Path:
    """Structure trace CSV; tag_column picks delay_tag (plots) or counter."""
    if tag_column not in ("delay_tag", "counter"):
        raise ValueError("tag_column must be 'delay_tag' or 'counter'")
    path = Path(path)
    rows = [f"timestep,source,{tag_column},action"]
    for rec in records:
        tag = rec.delay_tag if tag_column == "delay_tag" else rec.counter
        rows.append(f"{rec.timestep},{rec.source},{tag},{rec.action}")
    path.write_text("\n".join(rows) + "\n")
    return path


def write_wvu_csv(wvu_filter, path) -> Path:
    """Dump the useful-level matrix and per-row clz values."""
    path = Path(path)
    levels = wvu_filter.delay_levels
    header = "source," + ",".join(f"d{d}" for d in range(levels)) + ",clz"
    rows = [header]
    for i in range(wvu_filter.presyn_count):
        bits = ",".join(str(int(b)) for b in wvu_filter.wvu[i])
        rows.append(f"{i},{bits},{int(wvu_filter.clz_table[i])}")
    path.write_text("\n".join(rows) + "\n")
    return path
