import json

import numpy as np
import pytest

from delaysim import Pipeline, WvuFilter, random_network, random_spikes
from delaysim.errors import FormatError
from delaysim.fileio import (
    RunManifest,
    load_manifest,
    load_model,
    load_spikes,
    result_to_dict,
    save_manifest,
    save_model,
    save_spikes,
    write_event_trace_csv,
    write_membrane_csv,
    write_result,
    write_wvu_csv,
)
from delaysim.model import (
    DelayNetwork,
    FixedPointPolicy,
    LayerSpec,
    LifParams,
    SpikeTrain,
)
from delaysim.structures import TraceRecord


def nets_equal(a: DelayNetwork, b: DelayNetwork) -> bool:
    if a.policy != b.policy or len(a.layers) != len(b.layers):
        return False
    for x, y in zip(a.layers, b.layers):
        if (x.presyn_count, x.postsyn_count, x.delay_levels) != (
            y.presyn_count,
            y.postsyn_count,
            y.delay_levels,
        ):
            return False
        if x.lif != y.lif or not np.array_equal(x.weights, y.weights):
            return False
    return True


# -- model files ---------------------------------------------------------------


@pytest.mark.parametrize("inline", [True, False])
def test_model_roundtrip(tmp_path, inline):
    net = random_network(3, (5, 4, 3), levels=4, first_levels=None)
    written = save_model(net, tmp_path / "m.json", inline_weights=inline)
    assert written[0] == tmp_path / "m.json"
    assert len(written) == (1 if inline else 3)
    if not inline:
        assert (tmp_path / "m.w0.bin").exists()
        assert (tmp_path / "m.w1.bin").exists()
    assert nets_equal(load_model(tmp_path / "m.json"), net)


def test_model_extreme_weights_roundtrip(tmp_path):
    w = np.array([[[32767, -32768]]], dtype=np.int64)
    net = DelayNetwork((LayerSpec(1, 2, 1, w, LifParams(32768, 5)),))
    save_model(net, tmp_path / "m.json")
    assert np.array_equal(load_model(tmp_path / "m.json").layers[0].weights, w)


def test_wide_policy_uses_int32_payload(tmp_path):
    w = np.array([[[100000]]], dtype=np.int64)
    pol = FixedPointPolicy(weight_bits=24, acc_bits=40)
    net = DelayNetwork((LayerSpec(1, 1, 1, w, LifParams(32768, 5)),), policy=pol)
    save_model(net, tmp_path / "m.json")
    blob = (tmp_path / "m.w0.bin").read_bytes()
    assert len(blob) == 5 + 4  # magic + version + one int32
    assert nets_equal(load_model(tmp_path / "m.json"), net)


def test_model_save_is_deterministic(tmp_path):
    # sidecar names embed the model stem, so compare same name across dirs
    net = random_network(5, (4, 3), levels=3)
    first, second = tmp_path / "one", tmp_path / "two"
    first.mkdir()
    second.mkdir()
    save_model(net, first / "net.json")
    save_model(net, second / "net.json")
    assert (first / "net.json").read_text() == (second / "net.json").read_text()
    assert (first / "net.w0.bin").read_bytes() == (second / "net.w0.bin").read_bytes()


def test_model_error_paths(tmp_path):
    path = tmp_path / "m.json"
    with pytest.raises(FormatError):
        load_model(tmp_path / "missing.json")

    path.write_text("{not json")
    with pytest.raises(FormatError, match=":1:"):
        load_model(path)

    path.write_text(json.dumps({"format": "wrong", "version": 1, "layers": []}))
    with pytest.raises(FormatError, match="not a delaysim-model"):
        load_model(path)

    net = random_network(7, (3, 2), levels=2)
    save_model(net, path)
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(FormatError, match="version"):
        load_model(path)


def test_weight_blob_corruption_detected(tmp_path):
    net = random_network(9, (3, 2), levels=2)
    save_model(net, tmp_path / "m.json")
    blob = tmp_path / "m.w0.bin"

    payload = blob.read_bytes()
    blob.write_bytes(b"XXXX" + payload[4:])
    with pytest.raises(FormatError, match="magic"):
        load_model(tmp_path / "m.json")

    blob.write_bytes(payload[:-2])  # truncate one int16
    with pytest.raises(FormatError, match="bytes"):
        load_model(tmp_path / "m.json")

    blob.write_bytes(payload[:4] + bytes([9]) + payload[5:])
    with pytest.raises(FormatError, match="version"):
        load_model(tmp_path / "m.json")


def test_unknown_encoding_and_reset(tmp_path):
    net = random_network(11, (3, 2), levels=2)
    path = tmp_path / "m.json"
    save_model(net, path, inline_weights=True)
    doc = json.loads(path.read_text())

    doc["layers"][0]["weights"]["encoding"] = "carrier-pigeon"
    path.write_text(json.dumps(doc))
    with pytest.raises(FormatError, match="encoding"):
        load_model(path)

    doc["layers"][0]["weights"]["encoding"] = "inline"
    doc["layers"][0]["lif"]["reset"] = "bounce"
    path.write_text(json.dumps(doc))
    with pytest.raises(FormatError, match="reset"):
        load_model(path)


# -- spike files -----------------------------------------------------------------


def test_spikes_roundtrip(tmp_path):
    spikes = SpikeTrain(6, 4, ((0, 1), (0, 3), (2, 0), (5, 2)))
    path = save_spikes(spikes, tmp_path / "s.jsonl")
    assert load_spikes(path) == spikes
    lines = path.read_text().splitlines()
    assert lines[0] == '{"T": 6, "width": 4}'
    assert lines[1] == '{"t": 0, "n": 1}'
    assert len(lines) == 5


def test_spikes_empty_and_blank_lines(tmp_path):
    path = tmp_path / "s.jsonl"
    path.write_text('{"T": 3, "width": 2}\n\n{"t": 1, "n": 0}\n')
    spikes = load_spikes(path)
    assert spikes.events == ((1, 0),)
    save_spikes(SpikeTrain(2, 1), tmp_path / "e.jsonl")
    assert load_spikes(tmp_path / "e.jsonl").events == ()


def test_spike_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "s.jsonl"

    path.write_text("")
    with pytest.raises(FormatError, match=":1:"):
        load_spikes(path)

    path.write_text('{"width": 2}\n')
    with pytest.raises(FormatError, match='"T"'):
        load_spikes(path)

    path.write_text('{"T": 3, "width": 2}\n{"t": 1}\n')
    with pytest.raises(FormatError, match=":2:"):
        load_spikes(path)

    path.write_text('{"T": 3, "width": 2}\n{"t": 1, "n": 0}\n{"t": 9, "n": 0}\n')
    with pytest.raises(FormatError, match=":3:"):
        load_spikes(path)

    path.write_text('{"T": 3, "width": 2}\n{"t": 1, "n": 5}\n')
    with pytest.raises(FormatError, match="neuron 5"):
        load_spikes(path)

    path.write_text('{"T": 3, "width": 2}\nnot json\n')
    with pytest.raises(FormatError, match=":2:"):
        load_spikes(path)


# -- manifests ---------------------------------------------------------------------


def write_inputs(tmp_path, seed=1):
    net = random_network(seed, (4, 3), levels=3)
    spikes = random_spikes(seed, 4, 8, 0.5)
    save_model(net, tmp_path / "model.json")
    save_spikes(spikes, tmp_path / "spikes.jsonl")
    return net, spikes


def test_manifest_roundtrip(tmp_path):
    write_inputs(tmp_path)
    manifest = RunManifest(
        model_path=tmp_path / "model.json",
        spikes_path=tmp_path / "spikes.jsonl",
        structure="ring-buffer",
        capacity=99,
        scheduler="threaded",
        seed=42,
        output_dir=tmp_path / "results",
        trace_membranes=True,
        trace_events=True,
        policy=FixedPointPolicy(weight_bits=8, acc_bits=24),
    )
    path = save_manifest(manifest, tmp_path / "manifest.json")
    doc = json.loads(path.read_text())
    assert doc["model"] == "model.json"  # relative to the manifest
    loaded = load_manifest(path)
    assert loaded.structure == "ring-buffer"
    assert loaded.capacity == 99
    assert loaded.scheduler == "threaded"
    assert loaded.seed == 42
    assert loaded.output_dir == tmp_path / "results"
    assert loaded.trace_membranes and loaded.trace_events
    assert loaded.policy == FixedPointPolicy(weight_bits=8, acc_bits=24)
    assert loaded.path == path


def test_manifest_defaults_and_errors(tmp_path):
    write_inputs(tmp_path)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"model": "model.json", "spikes": "spikes.jsonl"}))
    m = load_manifest(path)
    assert m.structure == "scdq"
    assert m.capacity == 2048
    assert m.scheduler == "sequential"
    assert not m.trace_membranes
    assert m.policy is None

    path.write_text(json.dumps({"spikes": "spikes.jsonl"}))
    with pytest.raises(FormatError, match='"model"'):
        load_manifest(path)

    path.write_text(json.dumps({"model": "gone.json", "spikes": "spikes.jsonl"}))
    with pytest.raises(FormatError, match="does not exist"):
        load_manifest(path)

    path.write_text(json.dumps({"model": "model.json", "spikes": "spikes.jsonl",
                                "traces": "yes please"}))
    with pytest.raises(FormatError, match="traces"):
        load_manifest(path)


# -- results and CSV dumps ----------------------------------------------------------


def run_small(tmp_path):
    net = random_network(21, (4, 3), levels=3, first_levels=None)
    spikes = random_spikes(22, 4, 6, 0.5)
    return Pipeline(net).run(spikes)


def test_result_dict_and_determinism(tmp_path):
    res = run_small(tmp_path)
    doc = result_to_dict(res)
    assert doc["format"] == "delaysim-result"
    assert doc["structure"] == "scdq"
    assert doc["timesteps"] == 6
    assert isinstance(doc["metrics"]["structures"], list)
    write_result(res, tmp_path / "r1.json")
    write_result(res, tmp_path / "r2.json")
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
    assert (tmp_path / "r1.json").read_text().endswith("\n")


def test_membrane_csv(tmp_path):
    res = run_small(tmp_path)
    path = write_membrane_csv(res, tmp_path / "m.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "timestep,layer,neuron,potential"
    assert len(lines) == 1 + 6 * 3  # T=6, one 3-wide layer
    first = lines[1].split(",")
    assert first[:3] == ["0", "0", "0"]
    res.membranes = None
    with pytest.raises(ValueError):
        write_membrane_csv(res, tmp_path / "m2.csv")


def test_event_trace_csv_columns(tmp_path):
    records = [
        TraceRecord(0, 3, 2, 0, "enter"),
        TraceRecord(1, 3, 1, 1, "exit"),
    ]
    p1 = write_event_trace_csv(records, tmp_path / "t1.csv")
    assert p1.read_text().splitlines() == [
        "timestep,source,delay_tag,action",
        "0,3,0,enter",
        "1,3,1,exit",
    ]
    p2 = write_event_trace_csv(records, tmp_path / "t2.csv", tag_column="counter")
    assert p2.read_text().splitlines()[1] == "0,3,2,enter"
    with pytest.raises(ValueError):
        write_event_trace_csv(records, tmp_path / "t3.csv", tag_column="color")


def test_wvu_csv(tmp_path):
    f = WvuFilter(np.array([[1, 1, 0], [0, 0, 1]], dtype=np.uint8))
    path = write_wvu_csv(f, tmp_path / "w.csv")
    assert path.read_text().splitlines() == [
        "source,d0,d1,d2,clz",
        "0,1,1,0,1",
        "1,0,0,1,0",
    ]
