import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from zenn import init_model, load_model, load_ppm
from zenn.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from zenn.config import ConfigError, apply_overrides, load_config, parse_override
from zenn.initialization import InitSpec, ShallowArch

FIXTURES = Path(__file__).parent / "fixtures"


def write_config(tmp_path, doc, name="exp.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


SMALL_TRAIN = {
    "task": "synth1d",
    "data": {"n_points": 20},
    "model": {"kind": "zenn", "n": 8, "alpha": 1.1},
    "train": {"learning_rate": 1e-3, "epochs": 30, "log_interval": 10},
}

SMALL_IMAGE = {
    "task": "image",
    "data": {"path": str(FIXTURES / "tiny2x2.ppm"), "train_fraction": 0.75},
    "model": {"variant": "radzenn", "n": 4, "hidden": 8, "depth": 1},
    "train": {"learning_rate": 1e-3, "epochs": 5, "log_interval": 1},
}

COMMAND_CONFIGS = {
    "train": SMALL_TRAIN,
    "image-regress": SMALL_IMAGE,
    "zentk": {"model": {"n": 16}, "points": [0.0, 0.5, 1.0]},
    "cumulants": {"order": 2, "alpha": 1.5, "x": 0.7, "widths": [1, 3, "inf"], "samples": 20000,
                  "quadrature_nodes": 60},
    "charfn": {"x": [0.5, 1.0], "t": [0.0, 1.0], "samples": 10000},
    "converge": {"widths": [4, 8, 16], "seeds": [0, 1], "grid": {"points": 21}},
    "synth1d": {"data": {"n_points": 12, "train_fraction": 0.5}},
}


def csv_outputs(folder):
    return {p.name: p.read_bytes() for p in sorted(Path(folder).rglob("*.csv"))}


@pytest.mark.parametrize("command", sorted(COMMAND_CONFIGS))
def test_every_command_is_deterministic(tmp_path, command, capsys):
    outputs = []
    for run in ("a", "b"):
        folder = tmp_path / run
        folder.mkdir()
        cfg = write_config(folder, COMMAND_CONFIGS[command])
        assert main([command, str(cfg)]) == EXIT_OK
        outputs.append(csv_outputs(folder))
    assert outputs[0] and outputs[0] == outputs[1]


def test_train_writes_trace_and_model(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TRAIN)
    assert main(["train", str(cfg)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "train_mse=" in out
    trace = rows(tmp_path / "trace.csv")
    assert trace[0] == ["epoch", "train_mse", "val_mse", "psnr", "wall_time_s"]
    assert [r[0] for r in trace[1:]] == ["0", "10", "20", "30"]
    doc = json.loads((tmp_path / "model.json").read_text())
    assert doc["format"] == "zenn-model" and doc["version"] == 1


def test_zero_epochs_returns_initialization(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TRAIN)
    assert main(["train", str(cfg), "--set", "train.epochs=0"]) == EXIT_OK
    expected = init_model(ShallowArch("zenn", 8, "sine", alpha=1.1), InitSpec())
    assert load_model(tmp_path / "model.json") == expected


def test_wall_time_opt_in(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TRAIN)
    assert main(["train", str(cfg), "--set", "train.record_wall_time=true"]) == EXIT_OK
    assert all(float(r[4]) >= 0 for r in rows(tmp_path / "trace.csv")[1:])


def test_divergence_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TRAIN)
    assert main(["train", str(cfg), "--set", "train.learning_rate=1e6"]) == EXIT_RUNTIME
    assert "diverged at epoch" in capsys.readouterr().err


def test_image_regress_writes_reconstruction(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_IMAGE)
    assert main(["image-regress", str(cfg)]) == EXIT_OK
    assert "full_psnr=" in capsys.readouterr().out
    image = load_ppm(tmp_path / "reconstruction.ppm")
    assert (image.width, image.height) == (2, 2)
    trace = rows(tmp_path / "trace.csv")
    assert all(r[2] and r[3] for r in trace[1:])


def test_large_image_models_validate(tmp_path):
    doc = dict(SMALL_IMAGE, model={"variant": "randoZeNN", "m": 16384, "n": 256, "alpha": 0.0})
    assert load_config("image-regress", write_config(tmp_path, doc)).model.m == 16384
    doc = dict(SMALL_IMAGE, model={"variant": "FF", "n": 4096, "rho": 10})
    assert load_config("image-regress", write_config(tmp_path, doc)).model.variant == "ff"


def test_unknown_variant_lists_choices(tmp_path, capsys):
    doc = dict(SMALL_IMAGE, model={"variant": "siren"})
    assert main(["image-regress", str(write_config(tmp_path, doc))]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "siren" in err and "randozenn" in err and "ff-trainable" in err


def test_image_regress_needs_image_task(tmp_path, capsys):
    assert main(["image-regress", str(write_config(tmp_path, SMALL_TRAIN))]) == EXIT_CONFIG


def test_missing_config_file(tmp_path, capsys):
    assert main(["train", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG
    assert "not found" in capsys.readouterr().err


def test_missing_data_file(tmp_path, capsys):
    doc = dict(SMALL_IMAGE, data={"path": "absent.ppm"})
    assert main(["image-regress", str(write_config(tmp_path, doc))]) == EXIT_CONFIG
    assert "absent.ppm" in capsys.readouterr().err


def test_unknown_key_is_rejected(tmp_path, capsys):
    doc = dict(SMALL_TRAIN, train={"learning_rat": 0.1})
    assert main(["train", str(write_config(tmp_path, doc))]) == EXIT_CONFIG
    assert "learning_rat" in capsys.readouterr().err


def test_bad_yaml(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("train: [unclosed\n")
    assert main(["train", str(path)]) == EXIT_CONFIG


def test_bad_arguments_exit_as_config_error(capsys):
    assert main([]) == EXIT_CONFIG
    assert main(["teleport", "x.yaml"]) == EXIT_CONFIG


def test_runtime_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "broken.ppm"
    bad.write_bytes(b"P5\n1 1\n255\n\0")
    doc = dict(SMALL_IMAGE, data={"path": str(bad)})
    assert main(["image-regress", str(write_config(tmp_path, doc))]) == EXIT_RUNTIME


def test_cumulants_zeta_partial_sum(tmp_path, capsys):
    doc = {"order": 2, "alpha": 1.0, "x": 0.0, "widths": [3], "perceptron_cumulant": 1.0}
    assert main(["cumulants", str(write_config(tmp_path, doc))]) == EXIT_OK
    table = rows(tmp_path / "cumulants.csv")
    assert table[0] == ["N", "analytic", "mc", "stderr"]
    assert table[1][0] == "3"
    assert float(table[1][1]) == pytest.approx(1.361111, abs=5e-7)
    assert table[1][2:] == ["", ""]


def test_cumulants_divergent_series_is_config_error(tmp_path, capsys):
    doc = {"order": 1, "alpha": 1.0, "x": 0.0, "widths": ["inf"]}
    assert main(["cumulants", str(write_config(tmp_path, doc))]) == EXIT_CONFIG
    assert "r*(alpha - k) > 1" in capsys.readouterr().err


def test_cumulants_sample_floor(tmp_path, capsys):
    doc = {"order": 2, "samples": 500}
    assert main(["cumulants", str(write_config(tmp_path, doc))]) == EXIT_CONFIG


def test_charfn_zero_frequency_row(tmp_path, capsys):
    doc = {"x": [0.5], "t": [0.0]}
    assert main(["charfn", str(write_config(tmp_path, doc))]) == EXIT_OK
    table = rows(tmp_path / "charfn.csv")
    assert table[1][:4] == ["0.5", "0.0", "1.0", "0.0"]


def test_charfn_rejects_nonpositive_x(tmp_path, capsys):
    assert main(["charfn", str(write_config(tmp_path, {"x": [0.0]}))]) == EXIT_CONFIG


def test_converge_dominated_tail(tmp_path, capsys):
    doc = {"model": {"alpha": 8.0}, "widths": [16, 32, 64], "seeds": [0, 1, 2], "grid": {"points": 101}}
    assert main(["converge", str(write_config(tmp_path, doc))]) == EXIT_OK
    table = rows(tmp_path / "convergence.csv")
    last = next(r for r in table if r[0] == "64")
    assert float(last[3]) < 1e-10


def test_synth1d_csv(tmp_path, capsys):
    assert main(["synth1d", str(write_config(tmp_path, {"data": {"n_points": 5}}))]) == EXIT_OK
    table = rows(tmp_path / "synth1d.csv")
    assert table[0] == ["x", "y", "split"] and len(table) == 6


def test_outputs_resolve_relative_to_config(tmp_path, capsys):
    sub = tmp_path / "cfg"
    sub.mkdir()
    cfg = write_config(sub, {"data": {"n_points": 3}, "output": "deep/dir/d.csv"})
    assert main(["synth1d", str(cfg)]) == EXIT_OK
    assert (sub / "deep" / "dir" / "d.csv").exists()


class TestOverrides:
    def test_parse(self):
        assert parse_override("train.epochs=10") == (["train", "epochs"], 10)
        assert parse_override("model.variant=ff") == (["model", "variant"], "ff")
        assert parse_override("widths=[1, 2]") == (["widths"], [1, 2])

    @pytest.mark.parametrize("text", ["epochs", "=3", "a=[1,"])
    def test_bad_override(self, text):
        with pytest.raises(ConfigError):
            parse_override(text)

    def test_apply_creates_sections_without_mutating(self):
        doc = {"train": {"epochs": 5}}
        out = apply_overrides(doc, ["train.learning_rate=0.5", "init.seed=3"])
        assert out == {"train": {"epochs": 5, "learning_rate": 0.5}, "init": {"seed": 3}}
        assert doc == {"train": {"epochs": 5}}

    def test_override_through_scalar_fails(self):
        with pytest.raises(ConfigError):
            apply_overrides({"train": 3}, ["train.epochs=1"])


def test_log_level_env_and_console_script(tmp_path):
    exe = shutil.which("zenn")
    cmd = [exe] if exe else [sys.executable, "-m", "zenn.cli"]
    cfg = write_config(tmp_path, SMALL_TRAIN)
    proc = subprocess.run(cmd + ["train", str(cfg)], capture_output=True, text=True,
                          env={"ZENN_LOG_LEVEL": "INFO", "PATH": "/usr/bin:/bin"})
    assert proc.returncode == 0, proc.stderr
    assert "epoch 30" in proc.stderr
    proc = subprocess.run(cmd + ["train", str(cfg)], capture_output=True, text=True,
                          env={"ZENN_LOG_LEVEL": "WARNING", "PATH": "/usr/bin:/bin"})
    assert proc.returncode == 0 and "epoch" not in proc.stderr
    proc = subprocess.run(cmd + ["--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout


def test_shipped_configs_validate():
    root = Path(__file__).parent.parent / "configs"
    commands = {"charfn": "charfn", "converge": "converge", "cumulants": "cumulants", "zentk": "zentk",
                "synth1d_data": "synth1d"}
    for path in sorted(root.glob("*.yaml")):
        command = commands.get(path.stem, "image-regress" if path.stem.startswith("image") else "train")
        load_config(command, path)
