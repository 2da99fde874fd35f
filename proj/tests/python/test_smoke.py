import json
import os
from pathlib import Path

import numpy as np
import pytest

import textsculpt as ts

SOURCE_DIR = Path(os.environ.get("TEXTSCULPT_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_alignment_and_accuracy():
    a = ts.align_words(["OPEN", "NOW"], ["OPEN", "NOW", "X"])
    assert (a["substitutions"], a["insertions"], a["deletions"]) == (0, 1, 0)
    assert ts.text_accuracy(a["cost"], 2) == 0.5
    assert ts.text_accuracy(5, 2) == 0.0
    assert ts.vq_score(True, False, True) == pytest.approx(2 / 3)
    assert ts.tokenize("  GRAND OPENING  ") == ["GRAND", "OPENING"]


def test_gate():
    boxes = [((100, 50, 40, 20), "SALE"), ((10, 10, 40, 20), "GRAND OPENING")]
    assert ts.gate(["GRAND", "OPENING", "SALE"], boxes)["retained"]
    v = ts.gate(["GRAND", "OPENING", "SALE"], boxes[1:])
    assert not v["retained"]
    assert v["word_accuracy"] == pytest.approx(2 / 3)
    assert ts.word_accuracy([], ["x"]) == 1.0


def test_background_preservation():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
    b = a.copy()
    b[15:25, 20:32] = 0
    box = [((20, 15, 12, 10), "x")]
    assert ts.background_preservation(a, b, box, [], dilation_px=5) == pytest.approx(1.0, abs=1e-6)
    assert ts.background_preservation(a, b) < 0.99


def test_errors_carry_codes():
    with pytest.raises(ts.TextsculptError) as info:
        ts.text_accuracy(1, 0)
    assert info.value.code == "InvalidNEdit"


def test_pipeline(tmp_path):
    cfg = SOURCE_DIR / "configs" / "forge_default.toml"
    res = ts.forge(cfg, tmp_path / "forge", seed=3, count=4, threads=1)
    assert res["exit_code"] == 0
    assert sorted(r["task"]["task_type"] for r in res["records"]) == ["addition", "hybrid", "removal", "replacement"]
    assert ts.derive_benchmark(tmp_path / "forge", tmp_path / "bench") == 4
    ts.simulate_editor(tmp_path / "forge", "perfect", tmp_path / "edited")
    run = ts.evaluate(tmp_path / "bench" / "bench.jsonl", tmp_path / "edited", tmp_path / "edited" / "clients.json",
                      tmp_path)
    assert run["aggregate"]["overall"]["ta"] == 1.0
    assert run["aggregate"]["overall"]["bp"] == pytest.approx(1.0)
    assert json.loads(ts.render_report(tmp_path / "run.json", "json"))["total"] == 4
