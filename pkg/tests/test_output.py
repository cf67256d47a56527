import xml.etree.ElementTree as ET

import numpy as np
import pytest

from conftest import small_ensemble
from superchem.ensemble import EnsembleStats, run_ensemble
from superchem.output import emit_csv, emit_plot, format_csv


def zero_stats(points=2):
    return EnsembleStats.from_samples(np.linspace(0, 1, points), np.zeros((3, 5, points)))


def test_zero_stats_csv(tmp_path):
    path = emit_csv(zero_stats(), tmp_path / "z.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].split(",")[:3] == ["time", "mean_a", "std_a"]
    assert lines[0].endswith("corr_ab_b")
    assert lines[1] == "0," + ",".join(["0"] * 10) + ",nan"


def test_twelve_significant_digits():
    text = format_csv({"x": [1 / 3, 2e-20]})
    assert text.splitlines()[1:] == ["0.333333333333", "2e-20"]


def test_unequal_columns():
    with pytest.raises(ValueError):
        format_csv({"x": [1, 2], "y": [1]})


def test_byte_identical(tmp_path):
    stats = run_ensemble(small_ensemble(n_traj=5))
    a = emit_csv(stats, tmp_path / "a.csv").read_bytes()
    b = emit_csv(stats, tmp_path / "b.csv").read_bytes()
    assert a == b


def test_plot_zero_stats(tmp_path):
    path = emit_plot(zero_stats(), tmp_path / "z.svg")
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")


def test_plot_matches_csv_and_is_deterministic(tmp_path):
    stats = run_ensemble(small_ensemble(n_traj=5))
    a = emit_plot(stats, tmp_path / "a.svg").read_bytes()
    b = emit_plot(stats, tmp_path / "b.svg").read_bytes()
    assert a == b
    text = a.decode()
    for label in ("CPT", "AB"):
        assert label in text or "path" in text
    ET.fromstring(a)


def test_plot_io_error(tmp_path):
    with pytest.raises(OSError):
        emit_plot(zero_stats(), tmp_path / "nope" / "x.svg")
