import json
import math
from pathlib import Path
from xml.etree import ElementTree

import numpy as np
import pytest

from admmtopo import graph as G
from admmtopo.cli import (EXIT_DEVIATION, EXIT_INPUT, EXIT_OK, EXIT_UNSUPPORTED, InputError,
                          RunConfig, main, pmap, table1_rows, thread_count)
from admmtopo.io import LAMBDA2_HEADER, SPECTRUM_HEADER, SWEEP_HEADER, TRAJECTORY_HEADER, read_csv

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestConfig:
    def test_defaults(self):
        cfg = RunConfig("analyze")
        assert cfg.seed == 42 and cfg.rho_range == (0.01, 2.0, 0.01)

    @pytest.mark.parametrize("kwargs", [
        {"rho": 0.0}, {"gamma": 2.0}, {"gammas": [1.0, 0.0]}, {"rho_range": (1.0, 0.5, 0.1)},
        {"rho_range": (0.0, 1.0, 0.1)}, {"iters": 10},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            RunConfig("sweep", **kwargs)

    def test_threads(self, monkeypatch):
        monkeypatch.setenv("ADMM_TOPO_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("ADMM_TOPO_THREADS", "x")
        with pytest.raises(InputError):
            thread_count()

    def test_pmap_keeps_order(self, monkeypatch):
        monkeypatch.setenv("ADMM_TOPO_THREADS", "4")
        assert pmap(lambda x: x * x, range(50)) == [x * x for x in range(50)]


class TestAnalyze:
    def test_c6(self, capsys):
        code, out, _ = run(capsys, "analyze", "--graph", "cycle:6")
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["spectral"]["omega_star"] == pytest.approx(0.5)
        assert round(doc["tuning"]["tau_star"], 3) == 0.464
        assert set(doc) == {"graph", "topology", "spectral", "tuning", "upper_bound", "gd",
                            "certificate", "checks"}
        assert all(c["ok"] for c in doc["checks"].values())

    def test_k4(self, capsys):
        code, out, _ = run(capsys, "analyze", "--graph", "complete:4")
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["tuning"]["regime"] == "EvenCycleHighConductance"
        assert doc["tuning"]["tau_star"] == pytest.approx(1 / 3)

    def test_p3_unsupported_with_bound(self, capsys):
        code, out, _ = run(capsys, "analyze", "--graph", "path:3")
        doc = json.loads(out)
        assert code == EXIT_UNSUPPORTED
        assert doc["tuning"]["regime"] == "Unsupported"
        assert doc["upper_bound"] == pytest.approx({"rho": 2.0, "gamma": 4 / 3, "tau": 1 / 3})

    def test_edge_list_file(self, capsys, tmp_path):
        f = tmp_path / "g.txt"
        f.write_text(G.format_edge_list(G.house()))
        code, out, _ = run(capsys, "analyze", "--graph", str(f))
        assert code == EXIT_OK and json.loads(out)["graph"]["n_edges"] == 6

    def test_large_graph_needs_override(self, capsys):
        code, _, err = run(capsys, "analyze", "--graph", "cycle:24")
        assert code == EXIT_INPUT and "--conductance" in err
        code, out, _ = run(capsys, "analyze", "--graph", "cycle:24", "--conductance", "1/12")
        assert code == EXIT_OK and json.loads(out)["topology"]["conductance_exact"] == "1/12"

    @pytest.mark.parametrize("argv", [
        ["analyze", "--graph", "nope:3"],
        ["analyze", "--graph", "/no/such/file"],
        ["analyze"],
        ["sweep", "--graph", "cycle:6", "--rho-range", "1:2"],
        ["simulate", "--graph", "cycle:6", "--gamma", "2.5"],
        ["bogus"],
    ])
    def test_input_errors(self, capsys, argv):
        with pytest.raises(SystemExit) as exc:
            raise SystemExit(main(argv))
        assert exc.value.code == EXIT_INPUT


class TestTable1:
    def test_golden(self, capsys):
        code, out, _ = run(capsys, "table1")
        assert code == EXIT_OK
        assert out == (GOLDEN / "table1.txt").read_text()

    def test_rows(self):
        rows = {r["row"]: r for r in table1_rows()}
        expect = {"a": (1.732, 1.464, 0.464), "b": (1.886, 1.414, 0.414),
                  "c": (2.0, 1.333, 0.333), "d": (1.351, 1.659, 0.536)}
        for k, v in expect.items():
            r = rows[k]
            assert (round(r["rho_star"], 3), round(r["gamma_star"], 3),
                    round(r["tau_star"], 3)) == v
        assert rows["b"]["source"] == "graph"
        assert rows["d"]["source"] == "formula"

    def test_csv_and_json(self, capsys):
        _, out, _ = run(capsys, "table1", "--format", "csv")
        _, header, rows = read_csv(out)
        assert header[:2] == ["row", "graph"] and len(rows) == 4
        _, out, _ = run(capsys, "table1", "--format", "json")
        assert [r["row"] for r in json.loads(out)] == ["a", "b", "c", "d"]


class TestSweep:
    def test_c6_minimum(self, capsys):
        g_opt = 4 / (3 - math.sqrt((2 - math.sqrt(3)) / (2 + math.sqrt(3))))
        code, out, _ = run(capsys, "sweep", "--graph", "cycle:6",
                           "--gammas", f"1.3,{g_opt},1.6", "--rho-range", "0.01:2:0.01")
        pre, header, rows = read_csv(out)
        assert code == EXIT_OK and tuple(header) == LAMBDA2_HEADER
        assert pre["regime"] == "EvenCycleLowConductance"
        data = np.array([[float(x) for x in r] for r in rows])
        tau = pre["tau_star"]
        best = data[np.isclose(data[:, 0], g_opt)]
        k = int(np.argmin(best[:, 2]))
        assert best[k, 2] == pytest.approx(tau, abs=2e-3)
        assert best[k, 1] == pytest.approx(math.sqrt(3), abs=0.01)
        others = data[~np.isclose(data[:, 0], g_opt)]
        assert np.all(others[:, 2] >= tau - 1e-9)
        assert len(rows) == 3 * 200

    def test_k4_minimum_at_two(self, capsys):
        _, out, _ = run(capsys, "sweep", "--graph", "complete:4", "--gammas", str(4 / 3))
        data = np.array([[float(x) for x in r] for r in read_csv(out)[2]])
        k = int(np.argmin(data[:, 2]))
        assert data[k, 1] == pytest.approx(2.0) and data[k, 2] == pytest.approx(1 / 3, abs=1e-9)

    def test_byte_identical_across_thread_counts(self, capsys, monkeypatch):
        outs = []
        for n in ("1", "4"):
            monkeypatch.setenv("ADMM_TOPO_THREADS", n)
            outs.append(run(capsys, "sweep", "--graph", "house", "--gammas", "1.2,1.4,1.6")[1])
        assert outs[0] == outs[1]


class TestSpectrum:
    def test_c6_csv(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--graph", "cycle:6", "--rho", "1",
                           "--gamma", "1.5")
        pre, header, rows = read_csv(out)
        assert code == EXIT_OK and tuple(header) == SPECTRUM_HEADER and len(rows) == 12
        assert pre["circle_radius"] == pytest.approx(0.75 * math.sqrt(1 / 3))
        omg = [r for r in rows if r[header.index("is_one_minus_gamma")] == "true"]
        assert len(omg) == 1 and float(omg[0][0]) == pytest.approx(-0.5)
        for r in rows:
            if abs(float(r[1])) > 1e-9:
                assert r[header.index("on_circle")] == "true"

    def test_real_above_two(self, capsys):
        _, out, _ = run(capsys, "spectrum", "--graph", "house", "--rho", "2.5", "--gamma", "1.2")
        assert all(float(r[1]) == 0.0 for r in read_csv(out)[2])

    def test_one_minus_gamma_tracks_even_cycle(self, capsys):
        for name, present in (("cycle:5", False), ("cycle:6", True), ("paw", False)):
            _, out, _ = run(capsys, "spectrum", "--graph", name, "--rho", "1", "--gamma", "1.5")
            _, header, rows = read_csv(out)
            flags = [r[header.index("is_one_minus_gamma")] == "true" for r in rows]
            assert any(flags) is present

    def test_svg(self, capsys):
        _, out, _ = run(capsys, "spectrum", "--graph", "cycle:6", "--format", "svg")
        root = ElementTree.fromstring(out)
        assert root.tag.endswith("svg")
        assert len(root.findall(".//{*}circle")) >= 12

    def test_json(self, capsys):
        _, out, _ = run(capsys, "spectrum", "--graph", "cycle:6", "--format", "json")
        doc = json.loads(out)
        assert len(doc["ta_eigs"]) == 12 and doc["lambda2_abs"] == pytest.approx(0.4641016)

    def test_dump_operator(self, capsys, tmp_path):
        path = tmp_path / "ta.csv"
        run(capsys, "spectrum", "--graph", "cycle:6", "--dump-operator", f"TA:{path}")
        m = np.loadtxt(path, delimiter=",")
        assert m.shape == (12, 12) and np.allclose(m.sum(axis=0), 1)

    def test_dump_unknown(self, capsys):
        code, _, err = run(capsys, "spectrum", "--graph", "cycle:6", "--dump-operator", "nope")
        assert code == EXIT_INPUT and "unknown operator" in err


class TestSimulate:
    def test_c6_optimum(self, capsys):
        code, out, err = run(capsys, "simulate", "--graph", "cycle:6")
        doc = json.loads(out)
        assert code == EXIT_OK and doc["relative_deviation"] < 0.02
        for r in doc["runs"].values():
            assert r["fitted_rate"] == pytest.approx(0.464, rel=0.02)
        assert "deviation" in err

    def test_gd(self, capsys):
        code, out, _ = run(capsys, "simulate", "--graph", "cycle:6", "--method", "gd")
        assert code == EXIT_OK
        assert json.loads(out)["runs"]["gd"]["fitted_rate"] == pytest.approx(0.6, rel=0.02)

    def test_slow_but_convergent(self, capsys):
        code, out, _ = run(capsys, "simulate", "--graph", "cycle:6", "--rho", "0.01",
                           "--gamma", "1.99")
        doc = json.loads(out)
        assert code == EXIT_OK and 0.95 < doc["predicted"] < 1
        assert doc["runs"]["matrix"]["fitted_rate"] < 1

    def test_reachable_target(self, capsys):
        _, out, _ = run(capsys, "simulate", "--graph", "paw", "--rho", "1", "--gamma", "1")
        doc = json.loads(out)
        assert doc["predicted"] == pytest.approx(2 / 3)
        assert doc["target"] == doc["predicted_reachable"] < doc["predicted"]
        _, out, _ = run(capsys, "simulate", "--graph", "paw", "--rho", "1", "--gamma", "1",
                        "--excite-all")
        doc = json.loads(out)
        assert doc["target"] == doc["predicted"] and doc["relative_deviation"] < 0.02

    def test_trajectory_csv(self, capsys):
        _, out, _ = run(capsys, "simulate", "--graph", "complete:4", "--format", "csv")
        pre, header, rows = read_csv(out)
        assert tuple(header) == TRAJECTORY_HEADER and pre["seed"] == 42
        assert [int(r[0]) for r in rows] == list(range(len(rows)))

    def test_deviation_exit(self, capsys, monkeypatch):
        monkeypatch.setattr("admmtopo.cli.DEVIATION_LIMIT", 1e-9)
        code, _, err = run(capsys, "simulate", "--graph", "cycle:6", "--out", "/dev/null")
        assert code == EXIT_DEVIATION and "DEVIATION" in err


class TestSpeedup:
    def test_default_family(self, capsys):
        code, out, err = run(capsys, "speedup")
        _, header, rows = read_csv(out)
        assert code == EXIT_OK and tuple(header) == SWEEP_HEADER
        assert [int(r[0]) for r in rows] == [8, 16, 32, 64, 128]
        ratios = [float(r[4]) for r in rows]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert "sandwich pass" in err

    def test_odd_size_rejected(self, capsys):
        assert run(capsys, "speedup", "--n-list", "8,9")[0] == EXIT_INPUT


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["analyze", "--graph", "er:9:0.4:3"],
        ["spectrum", "--graph", "house", "--rho", "0.7", "--gamma", "1.1"],
        ["simulate", "--graph", "paw", "--seed", "7"],
        ["table1", "--format", "json"],
    ])
    def test_byte_identical(self, capsys, argv):
        first = run(capsys, *argv)[1]
        second = run(capsys, *argv)[1]
        assert first == second and first

    def test_out_file_matches_stdout(self, capsys, tmp_path):
        out = tmp_path / "a.json"
        _, stdout, _ = run(capsys, "analyze", "--graph", "house")
        run(capsys, "analyze", "--graph", "house", "--out", str(out))
        assert out.read_text() == stdout
