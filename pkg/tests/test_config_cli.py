import json
import os

import numpy as np
import pytest

from deepmp.cli import blob_hash, main
from deepmp.config import RunConfig, load_config, parse_k_range
from deepmp.errors import ConfigError
from deepmp.network import init_from_dictionary, load_model, save_model
from deepmp.training import train_model
from deepmp.types import load_dictionary_csv


# -- configuration ------------------------------------------------------------


def test_defaults_match_reference_table():
    cfg = RunConfig()
    assert (cfg.signal_dim, cfg.num_atoms) == (30, 200)
    assert cfg.lr == 1e-3
    assert cfg.final_lr == 0.1
    assert cfg.num_train_samples == 150000
    assert cfg.resolved_epochs == 20
    assert cfg.k_range == (1, 2, 3, 4, 5)
    raman = RunConfig(source="raman", raman_path="x.csv")
    assert raman.resolved_epochs == 30


def test_scale_shrinks_sample_counts():
    cfg = RunConfig().scaled(0.1)
    assert cfg.num_train_samples == 15000
    assert cfg.z_test == 500
    assert RunConfig().scaled(1e-9).num_train_samples == 1


def test_parse_k_range_forms():
    assert parse_k_range("1-5") == (1, 2, 3, 4, 5)
    assert parse_k_range("3") == (3,)
    assert parse_k_range("1,2,4") == (1, 2, 4)
    with pytest.raises(ConfigError):
        parse_k_range("five")


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[dictionary]\nsource = surrogate\nsignal_dim = 40\nnum_atoms = 60\n"
        "[training]\nk_range = 1-2\nepochs = 3\nbatch_size = 16\n"
        "[run]\nseed = 7\nout_dir = somewhere\n"
    )
    cfg = load_config(path)
    assert cfg.source == "surrogate"
    assert (cfg.signal_dim, cfg.num_atoms) == (40, 60)
    assert cfg.k_range == (1, 2)
    assert cfg.resolved_epochs == 3
    assert cfg.seed == 7
    assert cfg.out_dir == "somewhere"
    # untouched values keep reference defaults
    assert cfg.lr == 1e-3 and cfg.final_lr == 0.1


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[training]\nlearning_rate = 0.1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_rejects_bad_values(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[dictionary]\nsignal_dim = 100\nnum_atoms = 50\n")
    with pytest.raises(ConfigError):
        load_config(path)


# -- training loop ------------------------------------------------------------


def test_zero_epochs_returns_dictionary_init(tmp_path, small_dictionary):
    model, rows = train_model(small_dictionary, 2, 100, epochs=0, seed=4)
    assert rows == []
    reference = init_from_dictionary(small_dictionary, 2)
    trained_path = tmp_path / "a.dmp"
    init_path = tmp_path / "b.dmp"
    save_model(model, trained_path)
    save_model(reference, init_path)
    assert trained_path.read_bytes() == init_path.read_bytes()


def test_training_is_seed_deterministic(tmp_path, small_dictionary):
    paths = []
    for name in ("one", "two"):
        model, rows = train_model(small_dictionary, 2, 300, epochs=2,
                                  batch_size=32, seed=77)
        path = tmp_path / f"{name}.dmp"
        save_model(model, path)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_training_log_rows(small_dictionary):
    model, rows = train_model(small_dictionary, 2, 200, epochs=3,
                              batch_size=32, seed=5)
    assert [r.epoch for r in rows] == [0, 1, 2]
    assert all(np.isfinite(r.mean_loss) for r in rows)
    assert all(0.0 <= r.val_recovery <= 1.0 for r in rows)


# -- CLI ------------------------------------------------------------------------


def run_cli(args):
    return main([str(a) for a in args])


def pipeline_args(out, seed=5):
    return ["--seed", seed, "--out", out, "--k-range", "1-2",
            "--scale", 0.002]  # 300 train samples, 10 test


def test_cli_pipeline_end_to_end(tmp_path, capsys):
    out = tmp_path / "run"
    base = pipeline_args(out)
    assert run_cli(base + ["gen-dict"]) == 0
    assert run_cli(base + ["gen-data"]) == 0
    assert run_cli(base + ["train"]) == 0
    assert run_cli(base + ["eval"]) == 0
    assert run_cli(base + ["ecdf", out / "dictionary.csv"]) == 0
    capsys.readouterr()

    d = load_dictionary_csv(out / "dictionary.csv")
    assert (d.signal_dim, d.num_atoms) == (30, 200)
    for k in (1, 2):
        assert (out / "models" / f"model_k{k}.dmp").exists()
        assert (out / f"train_log_k{k}.csv").exists()
        assert (out / "data" / f"k{k}" / "dataset.json").exists()
    metrics_csv = (out / "metrics.csv").read_text().splitlines()
    assert metrics_csv[0] == "solver,k,recovery,epsilon"
    assert len(metrics_csv) == 1 + 3 * 2  # three solvers, two sparsity levels
    assert (out / "ecdf_dictionary.csv").exists()
    assert (out / "ecdf_model_k2_layer0.csv").exists()
    assert (out / "ecdf_model_k2_layer1.csv").exists()

    manifest = json.loads((out / "manifest_eval.json").read_text())
    assert manifest["command"] == "eval"
    assert manifest["config"]["seed"] == 5
    for rel, digest in manifest["outputs"].items():
        assert blob_hash(out / rel) == digest


def test_cli_untrained_models_duplicate_nnmp(tmp_path):
    out = tmp_path / "run"
    base = pipeline_args(out)
    base_zero = base + ["--config", str(tmp_path / "cfg.ini")]
    (tmp_path / "cfg.ini").write_text("[training]\nepochs = 0\n")
    assert run_cli(base_zero + ["gen-dict"]) == 0
    assert run_cli(base_zero + ["train"]) == 0
    assert run_cli(base_zero + ["eval"]) == 0
    rows = (out / "metrics.csv").read_text().strip().splitlines()[1:]
    table = {}
    for row in rows:
        solver, k, recovery, epsilon = row.split(",")
        table[(solver, k)] = (recovery, epsilon)
    for k in ("1", "2"):
        assert table[("deepmp", k)] == table[("nnmp", k)]


def test_cli_identical_runs_are_byte_identical(tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        base = pipeline_args(out)
        for cmd in ("gen-dict", "gen-data", "train", "eval"):
            assert run_cli(base + [cmd]) == 0
        outputs.append(out)
    a, b = outputs
    for rel in ("dictionary.csv", "models/model_k1.dmp", "models/model_k2.dmp",
                "metrics.csv", "metrics.json", "train_log_k1.csv",
                "data/k1/shard_00000.csv"):
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_cli_missing_raman_path_exits_2(tmp_path, capsys):
    cfg = tmp_path / "raman.ini"
    cfg.write_text("[dictionary]\nsource = raman\nraman_path = /missing.csv\n")
    code = run_cli(["--config", cfg, "--out", tmp_path / "r", "gen-dict"])
    assert code == 2
    assert "ParseError" in capsys.readouterr().err


def test_cli_eval_without_models_exits_2(tmp_path, capsys):
    out = tmp_path / "run"
    base = pipeline_args(out)
    assert run_cli(base + ["gen-dict"]) == 0
    assert run_cli(base + ["eval"]) == 2
    assert "MissingModel" in capsys.readouterr().err


def test_cli_bad_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[nope]\nx = 1\n")
    assert run_cli(["--config", cfg, "gen-dict"]) == 2
    assert "ConfigError" in capsys.readouterr().err


def test_gen_data_shards_match_training_stream(tmp_path, small_dictionary):
    # the exported dataset is the same deterministic stream train_model reads
    from deepmp.datagen import iter_dataset
    from deepmp.training import stream_shards

    out = tmp_path / "data"
    from deepmp.datagen import write_dataset

    def stream():
        for _, shard in stream_shards(small_dictionary, 2, 17, 64, 150):
            yield from shard

    write_dataset(stream(), out, dictionary=small_dictionary, sparsity=2,
                  seed=17, shard_size=64)
    regenerated = [s for _, shard in stream_shards(small_dictionary, 2, 17, 64, 150)
                   for s in shard]
    loaded = list(iter_dataset(out))
    assert len(loaded) == len(regenerated) == 150
    for s, t in zip(regenerated, loaded):
        assert np.array_equal(s.signal, t.signal)
        assert np.array_equal(s.true_support, t.true_support)
