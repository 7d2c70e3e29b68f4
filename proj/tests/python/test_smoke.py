import cmath
import json
import math
import os
import pathlib

import pytest

import gctree

SRC = pathlib.Path(os.environ.get("GCTREE_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


def test_map_and_census():
    f = gctree.RationalMap([-1, 0, 1])
    assert f.degree == 2
    assert f(2) == 3
    assert f(None) is None
    fixed = gctree.periodic_orbits(f, 1)
    alpha = (1 - math.sqrt(5)) / 2
    mults = [o["multiplier"] for o in fixed if o["points"][0] is not None and abs(o["points"][0] - alpha) < 1e-12]
    assert len(mults) == 1
    assert abs(mults[0] - (1 - math.sqrt(5))) < 1e-10
    assert gctree.chordal_distance(0, None) == pytest.approx(2.0)


def test_degree_check():
    with pytest.raises(gctree.GctreeError, match="InvalidArgument"):
        gctree.RationalMap([1, 1])


def test_tree_closed_form():
    f = gctree.RationalMap([0, 0, 1])
    r1 = math.sqrt(0.5)
    seg = [0.5 + (r1 - 0.5) * k / 64 for k in range(65)]
    arc = [cmath.rect(0.5 + (r1 - 0.5) * k / 64, math.pi * k / 64) for k in range(65)]
    tree = gctree.CodingTree(f, 0.5, [seg, arc])
    assert abs(tree.vertex("2112") - cmath.rect(0.5 ** (1 / 16), math.pi * (1 + 0.125))) < 1e-9
    cp = tree.coding_point("(21)")
    assert cp["converged"]
    assert abs(cp["point"] - cmath.exp(4j * math.pi / 3)) < 1e-8


def test_config_validation():
    text = (SRC / "configs" / "z2.json").read_text()
    assert gctree.config_problems(text) == []
    assert gctree.normalize_config(gctree.normalize_config(text)) == gctree.normalize_config(text)
    cfg = json.loads(text)
    cfg["weights"] = [0.45, 0.45]
    assert any("sum" in p for p in gctree.config_problems(json.dumps(cfg)))


def test_run_subset(tmp_path):
    out = tmp_path / "run"
    man = gctree.run(str(SRC / "configs" / "z2.json"), out=str(out), stages=["census", "tree"])
    assert man["exit_code"] == 0
    assert [s["name"] for s in man["stages"]] == ["census", "tree"]
    assert set(man["files"]) == {"census_orbits.jsonl", "tree.txt"}
    assert gctree.verify_manifest(str(out)) == []
    lines = (out / "census_orbits.jsonl").read_text().splitlines()
    assert sum(1 for l in lines if json.loads(l)["period"] == 3) == 2
