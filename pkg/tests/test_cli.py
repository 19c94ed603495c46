import numpy as np
import pytest

from densehints import io
from densehints.cli import main
from densehints.core import GraphParams, LinearParams
from densehints.expand_graph import expand_graph
from densehints.expand_linear import expand_linear_multi


def parse_record(line):
    return dict(field.split("=", 1) for field in line.split())


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scene")
    assert main(["simulate", "--out-dir", str(out), "--seed", "4", "--height", "64", "--width", "96",
                 "--texture", "random", "--density", "0.02", "--scene-d-max", "30"]) == 0
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_simulate_outputs(scene_dir):
    names = sorted(p.name for p in scene_dir.iterdir())
    assert names == ["gt.pfm", "hints.csv", "left.png", "right.png", "scene.cfg"]


def test_simulate_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        code, out, _ = run(capsys, "simulate", "--out-dir", tmp_path / d, "--seed", 7, "--height", 40, "--width", 50)
        assert code == 0
    for name in ("gt.pfm", "hints.csv", "left.png", "right.png", "scene.cfg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_hint_count_and_exactness(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--out-dir", tmp_path, "--height", 480, "--width", 640, "--density", 0.001)
    assert code == 0 and parse_record(out)["hints"] == "307"
    assert len((tmp_path / "hints.csv").read_text().splitlines()) == 308
    code, out, _ = run(capsys, "eval", "--pred", tmp_path / "gt.pfm", "--gt", tmp_path / "gt.pfm",
                       "--hints", tmp_path / "hints.csv")
    header, row = out.strip().splitlines()
    assert dict(zip(header.split(","), row.split(",")))["hint_mae"] == "0.000000"


def test_simulate_from_config(tmp_path, capsys, scene_dir):
    code, _, _ = run(capsys, "simulate", "--out-dir", tmp_path, "--config", scene_dir / "scene.cfg")
    assert code == 0
    assert (tmp_path / "gt.pfm").read_bytes() == (scene_dir / "gt.pfm").read_bytes()


def test_expand_graph_grows(scene_dir, tmp_path, capsys):
    code, out, _ = run(capsys, "expand", "--algo", "graph", "--radius", 8, "--tau", 0.9,
                       "--hints", scene_dir / "hints.csv", "--image", scene_dir / "left.png",
                       "--out", tmp_path / "e.csv", "--viz", tmp_path / "e.ppm")
    rec = parse_record(out)
    assert code == 0 and float(rec["out_density"]) >= float(rec["in_density"])
    assert (tmp_path / "e.ppm").read_bytes().startswith(b"P6\n96 64\n")
    image = io.read_image(scene_dir / "left.png")
    hints = io.read_hints_csv(scene_dir / "hints.csv", image.shape)
    io.write_hints_csv(tmp_path / "lib.csv", expand_graph(hints, image, GraphParams(8.0, 0.9)))
    assert (tmp_path / "e.csv").read_bytes() == (tmp_path / "lib.csv").read_bytes()


def test_expand_lin3d_is_thin_wrapper(scene_dir, tmp_path, capsys):
    code, _, _ = run(capsys, "expand", "--algo", "lin3d", "--windows", "8,16",
                     "--hints", scene_dir / "hints.csv", "--image", scene_dir / "left.png",
                     "--out", tmp_path / "l.csv")
    assert code == 0
    hints = io.read_hints_csv(scene_dir / "hints.csv", (64, 96))
    io.write_hints_csv(tmp_path / "lib.csv", expand_linear_multi(hints, LinearParams((8, 16))))
    assert (tmp_path / "l.csv").read_bytes() == (tmp_path / "lib.csv").read_bytes()


def test_expand_preset(scene_dir, tmp_path, capsys):
    code, _, _ = run(capsys, "expand", "--preset", "tartan", "--hints", scene_dir / "hints.csv",
                     "--image", scene_dir / "left.png", "--out", tmp_path / "t.csv")
    assert code == 0
    image = io.read_image(scene_dir / "left.png")
    hints = io.read_hints_csv(scene_dir / "hints.csv", image.shape)
    assert io.read_hints_csv(tmp_path / "t.csv", image.shape) == expand_graph(hints, image, GraphParams(25.0))


def test_unknown_algorithm(scene_dir, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["expand", "--algo", "bilateral", "--hints", str(scene_dir / "hints.csv"),
              "--image", str(scene_dir / "left.png"), "--out", str(tmp_path / "x.csv")])
    assert exc.value.code != 0
    assert "invalid choice" in capsys.readouterr().err


def test_bad_input_file_fails_cleanly(tmp_path, scene_dir, capsys):
    (tmp_path / "bad.csv").write_text("x,y,d\n1,1,-4\n")
    code, out, err = run(capsys, "expand", "--hints", tmp_path / "bad.csv", "--image", scene_dir / "left.png",
                         "--out", tmp_path / "o.csv")
    assert code == 1 and out == "" and "line 2" in err


def test_range_filter_match(scene_dir, tmp_path, capsys):
    code, out, _ = run(capsys, "range", "--hints", scene_dir / "hints.csv", "--shape", "64x96",
                       "--out-low", tmp_path / "lo.pfm", "--out-high", tmp_path / "hi.pfm", "--d-max", 64)
    assert code == 0
    lo, hi = io.read_pfm(tmp_path / "lo.pfm").values, io.read_pfm(tmp_path / "hi.pfm").values
    assert np.all(lo <= hi) and hi.max() == 64
    code, out, _ = run(capsys, "filter", "--hints", scene_dir / "hints.csv", "--left", scene_dir / "left.png",
                       "--right", scene_dir / "right.png", "--out", tmp_path / "f.csv", "--shift-sign", -1)
    rec = parse_record(out)
    assert code == 0 and int(rec["kept"]) + int(rec["dropped"]) == int(rec["in_count"])
    code, out, _ = run(capsys, "match", "--left", scene_dir / "left.png", "--right", scene_dir / "right.png",
                       "--hints", scene_dir / "hints.csv", "--d-max", 32, "--out", tmp_path / "m.png")
    assert code == 0 and io.read_png16(tmp_path / "m.png").shape == (64, 96)


def test_eval_identity_and_mismatch(scene_dir, tmp_path, capsys):
    code, out, err = run(capsys, "eval", "--pred", scene_dir / "gt.pfm", "--gt", scene_dir / "gt.pfm")
    assert code == 0
    assert out.splitlines()[1].startswith("gt,0.000000,0.0000")
    assert "MAE" in err
    io.write_pfm(tmp_path / "small.pfm", np.ones((3, 3)))
    code, out, err = run(capsys, "eval", "--pred", tmp_path / "small.pfm", "--gt", scene_dir / "gt.pfm")
    assert code != 0 and "ground truth" in err
    io.write_pfm(tmp_path / "empty.pfm", np.full((3, 3), np.inf))
    code, _, err = run(capsys, "eval", "--pred", tmp_path / "small.pfm", "--gt", tmp_path / "empty.pfm")
    assert code != 0 and "empty" in err


def test_eval_batch_ordering(tmp_path, capsys):
    pred, gt = tmp_path / "pred", tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    for k, name in enumerate(["c", "a", "b", "d"]):
        io.write_pfm(gt / f"{name}.pfm", np.full((4, 5), 10.0))
        io.write_pfm(pred / f"{name}.pfm", np.full((4, 5), 10.0 + k))
    outs = []
    for threads in (1, 4):
        code, out, _ = run(capsys, "eval", "--pred-dir", pred, "--gt-dir", gt, "--threads", threads)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    rows = outs[0].strip().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["a", "b", "c", "d"]
    assert [r.split(",")[1] for r in rows] == ["1.000000", "2.000000", "0.000000", "3.000000"]


def test_bench_report(scene_dir, capsys):
    code, out, _ = run(capsys, "bench", "--image", scene_dir / "left.png", "--hints", scene_dir / "hints.csv",
                       "--right", scene_dir / "right.png", "--match", "--d-max", 32, "--reps", 5)
    assert code == 0
    records = [parse_record(line) for line in out.strip().splitlines()]
    assert [r["algo"] for r in records] == ["lin3d", "graph"]
    for r in records:
        total = sum(float(v) for k, v in r.items() if k.endswith("_pct"))
        assert abs(total - 100) <= 1
        assert len(r["expand_samples_ms"].split(",")) >= 5
    with pytest.raises(SystemExit):
        main(["bench", "--algo", "cubic"])
    assert run(capsys, "bench", "--reps", 3)[0] != 0
