import json
import shutil
import subprocess

import pytest

from delaysim import cli
from delaysim.fileio import load_manifest, load_model, load_spikes
from delaysim.metrics import (
    KIND_RING,
    KIND_SCDQ,
    STRUCTURE_KINDS,
    crossover_alpha,
    memory_bits,
    memory_events,
)


def gen(tmp_path, *extra):
    argv = ["gen", "--shape", "5-4-3", "--levels", "3", "--duration", "10",
            "--seed", "3", "--out-dir", str(tmp_path), *extra]
    assert cli.main(argv) == cli.EXIT_OK
    return tmp_path / "manifest.json"


def test_gen_writes_consistent_artifacts(tmp_path):
    manifest_path = gen(tmp_path)
    manifest = load_manifest(manifest_path)
    net = load_model(manifest.model_path)
    spikes = load_spikes(manifest.spikes_path)
    assert net.layer_widths == (5, 4, 3)
    assert net.layers[0].delay_levels == 1  # --first-levels defaults to 1
    assert net.layers[1].delay_levels == 3
    assert spikes.width == 5 and spikes.duration == 10
    assert manifest.structure == "scdq"


def test_gen_first_levels_and_inline(tmp_path):
    gen(tmp_path, "--first-levels", "3", "--inline-weights")
    net = load_model(tmp_path / "model.json")
    assert [l.delay_levels for l in net.layers] == [3, 3]
    assert not list(tmp_path.glob("*.bin"))


def test_run_writes_result_and_traces(tmp_path):
    manifest_path = gen(tmp_path)
    doc = json.loads(manifest_path.read_text())
    doc["traces"] = {"membranes": True, "events": True}
    manifest_path.write_text(json.dumps(doc))
    assert cli.main(["run", str(manifest_path)]) == cli.EXIT_OK
    out = tmp_path / "out"
    result = json.loads((out / "result.json").read_text())
    assert result["format"] == "delaysim-result"
    assert result["structure"] == "scdq"
    assert (out / "membranes.csv").exists()
    assert (out / "events_layer1.csv").exists()
    assert not (out / "events_layer0.csv").exists()  # L=1 layer stores nothing


def test_run_is_deterministic(tmp_path):
    manifest_path = gen(tmp_path)
    assert cli.main(["run", str(manifest_path)]) == cli.EXIT_OK
    first = (tmp_path / "out" / "result.json").read_bytes()
    assert cli.main(["run", str(manifest_path)]) == cli.EXIT_OK
    assert (tmp_path / "out" / "result.json").read_bytes() == first


def test_run_structure_override(tmp_path):
    manifest_path = gen(tmp_path)
    assert cli.main(["run", str(manifest_path), "--structure", KIND_RING]) == cli.EXIT_OK
    doc = json.loads((tmp_path / "out" / "result.json").read_text())
    assert doc["structure"] == KIND_RING
    assert cli.main(["run", str(manifest_path), "--structure", "oracle"]) == cli.EXIT_OK


def test_compare_identical(tmp_path, capsys):
    manifest_path = gen(tmp_path)
    capsys.readouterr()  # drop gen chatter
    code = cli.main(["compare", str(manifest_path), "--kinds", *STRUCTURE_KINDS, "oracle"])
    assert code == cli.EXIT_OK
    assert capsys.readouterr().out.startswith("identical:")


def test_compare_reports_divergence(tmp_path, capsys, monkeypatch):
    manifest_path = gen(tmp_path)
    capsys.readouterr()
    monkeypatch.setattr(cli, "first_divergence", lambda a, b: ("membrane", 1, 4, 2))
    code = cli.main(["compare", str(manifest_path)])
    assert code == cli.EXIT_DIVERGED
    out = capsys.readouterr().out
    assert "divergence" in out and "timestep=4" in out


def test_compare_needs_two_kinds(tmp_path):
    manifest_path = gen(tmp_path)
    assert cli.main(["compare", str(manifest_path), "--kinds", "scdq", "scdq"]) == cli.EXIT_USAGE


def test_usage_errors():
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["frobnicate"]) == cli.EXIT_USAGE
    assert cli.main(["gen"]) == cli.EXIT_USAGE  # --shape required
    assert cli.main(["memory", "--sweep", "banana"]) == cli.EXIT_USAGE
    assert cli.main(["memory", "--sweep", "9:2"]) == cli.EXIT_USAGE
    assert cli.main(["--help"]) == cli.EXIT_OK


def test_io_errors(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == cli.EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert cli.main(["run", str(bad)]) == cli.EXIT_IO
    # ValueError surfaces as a parse-class failure too
    assert cli.main(["memory", "--alpha", "7"]) == cli.EXIT_IO


def test_simulation_error_exit_code(tmp_path):
    manifest_path = gen(tmp_path, "--first-levels", "3", "--density", "1.0",
                        "--capacity", "2")
    assert cli.main(["run", str(manifest_path)]) == cli.EXIT_SIM


def test_memory_table(tmp_path, capsys):
    assert cli.main(["memory", "--presyn", "256", "--postsyn", "256",
                     "--levels", "16"]) == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "kind,I,J,L,alpha,events,bits"
    table = {row.split(",")[0]: row.split(",") for row in lines[1:]}
    assert int(table[KIND_SCDQ][5]) == memory_events(KIND_SCDQ, 1.0, 256, 16)
    assert int(table[KIND_RING][6]) == memory_bits(KIND_RING, 1.0, 256, 256, 16)
    assert len(table) == len(STRUCTURE_KINDS)


def test_memory_crossover_and_out_file(tmp_path):
    out = tmp_path / "x.csv"
    assert cli.main(["memory", "--crossover", KIND_SCDQ, KIND_RING,
                     "--presyn", "48", "--postsyn", "48", "--levels", "64",
                     "--weight-bits", "8", "--out", str(out)]) == cli.EXIT_OK
    value = float(out.read_text().strip().split(",")[-1])
    assert value == crossover_alpha(KIND_SCDQ, KIND_RING, 48, 48, 64, weight_bits=8)


def test_memory_sweep(tmp_path, capsys):
    assert cli.main(["memory", "--sweep", "1:8", "--presyn", "16",
                     "--postsyn", "8"]) == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "levels,sdq_events,scdq_events,scdq_1f_events,ring_slots,ratio"
    assert len(lines) == 9


def test_trace_writes_lifespan_csv(tmp_path):
    manifest_path = gen(tmp_path, "--first-levels", "3")
    assert cli.main(["trace", str(manifest_path), "--wvu"]) == cli.EXIT_OK
    out = tmp_path / "out"
    for k in (0, 1):
        trace = (out / f"trace_layer{k}.csv").read_text().splitlines()
        assert trace[0] == "timestep,source,delay_tag,action"
        assert (out / f"wvu_layer{k}.csv").exists()
    assert cli.main(["trace", str(manifest_path), "--column", "counter"]) == cli.EXIT_OK
    header = (out / "trace_layer0.csv").read_text().splitlines()[0]
    assert header == "timestep,source,counter,action"


def test_trace_rejects_ring_manifests(tmp_path):
    manifest_path = gen(tmp_path, "--structure", KIND_RING)
    assert cli.main(["trace", str(manifest_path)]) == cli.EXIT_IO


def test_verbosity_gate(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DELAYSIM_VERBOSITY", "0")
    gen(tmp_path)
    assert capsys.readouterr().out == ""
    monkeypatch.setenv("DELAYSIM_VERBOSITY", "1")
    gen(tmp_path)
    assert "manifest.json" in capsys.readouterr().out


def test_console_script_is_installed(tmp_path):
    exe = shutil.which("delaysim")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run(
        [exe, "memory", "--levels", "4"], capture_output=True, text=True, timeout=60
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("kind,")
