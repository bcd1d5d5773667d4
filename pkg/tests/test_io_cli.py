import numpy as np
import pytest

from signedot.cli import main, resolve_image
from signedot.experiments import ExperimentRecord
from signedot.io import (
    fmt_real,
    load_image,
    read_csv_grid,
    read_pgm,
    read_records,
    write_grid_csv,
    write_pgm,
    write_records,
)
from signedot.measures import SignedGridMeasure


class TestFormats:
    def test_fmt_real_round_trips(self, rng):
        for x in rng.normal(size=50):
            assert float(fmt_real(x)) == x

    def test_csv_grid_round_trip(self, tmp_path, rng):
        img = SignedGridMeasure(4, rng.normal(size=(4, 4)))
        path = tmp_path / "g.csv"
        write_grid_csv(img, path)
        np.testing.assert_array_equal(read_csv_grid(path), img.values)

    def test_csv_errors(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(ValueError, match="different lengths"):
            read_csv_grid(p)
        p.write_text("1,2,3\n4,5,6\n")
        with pytest.raises(ValueError, match="non-square"):
            read_csv_grid(p)
        p.write_text("1,x\n3,4\n")
        with pytest.raises(ValueError, match=":1:"):
            read_csv_grid(p)

    @pytest.mark.parametrize("binary", [True, False])
    @pytest.mark.parametrize("maxval", [255, 1000])
    def test_pgm_round_trip(self, tmp_path, binary, maxval):
        arr = np.linspace(0, 1, 64).reshape(8, 8)
        path = tmp_path / "im.pgm"
        write_pgm(path, arr, maxval=maxval, binary=binary)
        back = read_pgm(path)
        np.testing.assert_allclose(back, np.rint(arr * maxval) / maxval)

    def test_pgm_comments_and_errors(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P2\n# a comment\n2 2\n# another\n4\n0 1\n2 4\n")
        np.testing.assert_allclose(read_pgm(p), [[0, 0.25], [0.5, 1.0]])
        p.write_bytes(b"P3\n2 2\n4\n")
        with pytest.raises(ValueError, match="P2/P5"):
            read_pgm(p)
        p.write_bytes(b"P5\n2 2\n255\n\x00")
        with pytest.raises(ValueError, match="too short"):
            read_pgm(p)
        p.write_bytes(b"P2\n2 2\n3\n0 1 2 9\n")
        with pytest.raises(ValueError, match="exceeds"):
            read_pgm(p)

    def test_load_image_normalize(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("1,1\n1,1\n")
        assert load_image(p).total_mass == 4.0
        assert load_image(p, normalize=True).total_mass == 1.0
        with pytest.raises(ValueError):
            load_image(tmp_path / "g.png")

    def test_records_round_trip(self, tmp_path):
        recs = [
            ExperimentRecord(0.01, 1, "W1", "a", 0.5, 1.0),
            ExperimentRecord(0.001, 0, "W2", "a", 0.1 + 0.2, None),
        ]
        p = tmp_path / "r.csv"
        write_records(recs, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "sigma,trial,metric,pair,value,bound"
        assert lines[1] == "0.001,0,W2,a,0.30000000000000004,"
        rows = read_records(p)
        assert rows[1]["bound"] == 1.0 and rows[0]["bound"] is None
        with pytest.raises(ValueError):
            write_records(recs + recs[:1], p)


class TestCli:
    def test_resolve_image(self):
        assert resolve_image("gen:point:1:2", 8).values[1, 2] == 1.0
        assert resolve_image("gen:blobs:3", 8).n == 8
        with pytest.raises(ValueError):
            resolve_image("gen:point:1", 8)

    def test_dist(self, capsys):
        assert main(["dist", "gen:point:0:0", "gen:point:0:4", "--n", "8"]) == 0
        out = dict(line.split() for line in capsys.readouterr().out.splitlines())
        assert float(out["W1"]) == pytest.approx(0.5)
        assert float(out["L2"]) == pytest.approx(np.sqrt(2))

    def test_bound(self, capsys):
        assert main(["bound", "--n", "32", "--sigma", "0.01", "--p", "2"]) == 0
        out = capsys.readouterr().out
        assert "wp_self p=2" in out and "w1_pair" in out

    def test_noise_and_dyadic(self, tmp_path, capsys):
        out = tmp_path / "noisy.csv"
        assert main(["noise", "gen:blobs", "--n", "8", "--sigma", "1e-3", "-o", str(out)]) == 0
        assert read_csv_grid(out).sum() == pytest.approx(1.0)
        assert main(["dyadic", "gen:blobs:1", "gen:blobs:2", "--n", "8", "--p", "1", "--exact"]) == 0
        assert "certified p=1" in capsys.readouterr().out

    def test_trace(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        assert main(["trace", "--n", "8", "--source", "1", "1", "--target", "5", "5", "-o", str(out)]) == 0
        assert read_csv_grid(out)[5, 5] == pytest.approx(1.0)

    def test_errors_are_reported(self, tmp_path, capsys):
        assert main(["dist", str(tmp_path / "missing.csv"), "gen:blobs"]) == 1
        assert capsys.readouterr().err.startswith("error:")
        assert main(["dist", "gen:blobs"]) == 1

    @pytest.mark.parametrize(
        "cmd",
        [
            ["scaling", "gen:blobs"],
            ["ratio", "gen:blobs:1", "gen:blobs:2"],
            ["overlay", "gen:blobs:1", "gen:blobs:2", "--p", "1", "2"],
            ["matrix", "--frames", "3"],
            ["dip", "--source", "1", "1", "--target", "5", "5", "--p", "1", "2"],
        ],
    )
    def test_experiment_commands_write_records(self, tmp_path, cmd):
        out = tmp_path / "r.csv"
        args = cmd + ["--n", "8", "--trials", "2", "--sigma-count", "2", "--sigma-min", "1e-3", "--sigma-max", "1e-2", "-o", str(out)]
        assert main(args) == 0
        rows = read_records(out)
        assert rows and {r["sigma"] for r in rows} == {1e-3, 1e-2}
