import json
import subprocess
import sys
import time

import numpy as np
import pytest

import ridgeopt.eval_harness as harness
from ridgeopt.cli import main, read_xy_csv
from ridgeopt.errors import SingularityError
from ridgeopt.genmodel import gen_x, gen_y, make_profile, sample_theta_batch, stream, write_xy_csv

FIG1 = "setting: fixed_x\nn: 10\nd: 5\nprofile: explicit\neigenvalues: [5, 4, 3, 2, 1]\nepsilon: 1\n"
SMALL = "n: 30\nd: 10\nm_theta: 2\nm_xy: 3\nn_test: 200\nbootstrap_resamples: 200\n"


def spiked_file(path, n=100, d=90, eps=1.0, seed=7, kind="spiked"):
    x = gen_x(n, make_profile(kind, d), stream(seed, 1))
    theta = sample_theta_batch(d, 1, stream(seed, 0)).vectors[0]
    write_xy_csv(path, x, gen_y(x, theta, eps, stream(seed, 2)))
    return path


def parse_report(text):
    return {k: json.loads(v) for k, v in (line.split(": ", 1) for line in text.strip().splitlines())}


def cfg_file(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")


def test_recommend_spiked_sample(tmp_path, capsys):
    data = spiked_file(tmp_path / "data.csv")
    out = tmp_path / "out.json"
    assert main(["recommend", "--input", str(data), "--json", str(out)]) == 0
    printed = parse_report(capsys.readouterr().out)
    assert 25 < printed["lambda_sfp"] < 50
    assert printed["lambda0"] == 1.0 and printed["lambda_sn"] > 0
    for key in ("epsilon_hat", "theta_hat_norm", "rank_p", "iterations"):
        assert key in printed
    assert json.loads(out.read_text()) == printed


def test_recommend_noiseless_near_zero(tmp_path, capsys):
    data = spiked_file(tmp_path / "clean.csv", n=60, d=8, eps=0.0, kind="bulk")
    assert main(["recommend", "--input", str(data)]) == 0
    assert parse_report(capsys.readouterr().out)["lambda_sfp"] < 0.05


def test_recommend_minimal_three_rows(tmp_path, capsys):
    path = tmp_path / "tiny.csv"
    path.write_text("1.0,0.5,2.0\n-0.3,1.2,0.1\n0.7,-0.8,-1.0\n")
    assert main(["recommend", "--input", str(path)]) == 0
    r = parse_report(capsys.readouterr().out)
    assert r["n"] == 3 and r["d"] == 2 and np.isfinite(r["lambda_sfp"])


def test_recommend_options_forwarded(tmp_path, capsys):
    data = spiked_file(tmp_path / "d.csv", n=50, d=10)
    main(["recommend", "--input", str(data), "--lambda0", "2", "--p", "0.5", "--delta", "1e-6"])
    r = parse_report(capsys.readouterr().out)
    assert (r["lambda0"], r["p"], r["delta"]) == (2.0, 0.5, 1e-6)


@pytest.mark.parametrize("content", ["a,b\nx,1\n", "1,2\n3\n", "", "1\n2\n3\n"])
def test_recommend_bad_input_exit_2(tmp_path, content, capsys):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    assert main(["recommend", "--input", str(path)]) == 2
    assert main(["recommend", "--input", str(tmp_path / "none.csv")]) == 2


def test_recommend_rank_deficient_exit_3(tmp_path):
    x = np.random.default_rng(0).normal(size=(20, 2))
    x = np.column_stack([x, x[:, 0] + x[:, 1]])
    path = tmp_path / "rd.csv"
    write_xy_csv(path, x, x[:, 0])
    assert main(["recommend", "--input", str(path)]) == 3


def test_read_xy_csv_header_detection(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b,y\n1,2,3\n4,5,6\n")
    x, y = read_xy_csv(p)
    np.testing.assert_array_equal(x, [[1, 2], [4, 5]])
    np.testing.assert_array_equal(y, [3, 6])


def test_evaluate_writes_deterministic_files(tmp_path):
    cfg = cfg_file(tmp_path, SMALL)
    for name, threads in (("a", "1"), ("b", "3")):
        assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / name),
                     "--threads", threads]) == 0
    for f in ("records.csv", "summary.csv", "estimates.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    rows = read_csv(tmp_path / "a" / "summary.csv")
    assert set(rows["method"]) >= {"min", "sfp", "sn", "default"}


def test_seed_flag_overrides_config(tmp_path):
    cfg = cfg_file(tmp_path, SMALL + "seed: 3\n")
    main(["evaluate", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["evaluate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "3"])
    main(["evaluate", "--config", cfg, "--out", str(tmp_path / "c"), "--seed", "4"])
    a, b, c = ((tmp_path / n / "records.csv").read_bytes() for n in "abc")
    assert a == b and a != c


def test_evaluate_smoke_under_five_seconds(tmp_path):
    cfg = cfg_file(tmp_path, "m_theta: 1\nm_xy: 5\nbootstrap_resamples: 200\n")
    t0 = time.perf_counter()
    assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert time.perf_counter() - t0 < 5


def test_evaluate_fig1_fixed_x(tmp_path):
    cfg = cfg_file(tmp_path, FIG1 + "m_theta: 5\nm_x: 2\nm_y: 2\nbootstrap_resamples: 200\n")
    assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "records.csv")
    fp = rows[rows["method"] == "fp"]
    mn = rows[rows["method"] == "min"]
    np.testing.assert_allclose(fp["mse"], mn["mse"], rtol=1e-6)


def test_config_errors_exit_2(tmp_path, capsys):
    for text in ("bogus: 1\n", "n: abc\n", "setting: nope\n", "n: [1\n"):
        cfg = cfg_file(tmp_path, text)
        assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    capsys.readouterr()
    cfg = cfg_file(tmp_path, "bogus: 1\n")
    main(["evaluate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert "bogus" in capsys.readouterr().err
    cfg = cfg_file(tmp_path, SMALL)
    assert main(["sweep", "--config", cfg, "--axis", "noise", "--out", str(tmp_path / "s")]) == 2


def test_excessive_skips_exit_3(tmp_path, monkeypatch):
    real = harness.decompose

    def flaky(x):
        if flaky.calls == 0:
            flaky.calls += 1
            raise SingularityError("forced")
        return real(x)

    flaky.calls = 0
    monkeypatch.setattr(harness, "decompose", flaky)
    cfg = cfg_file(tmp_path, SMALL)
    assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "o"), "--threads", "1"]) == 3
    assert (tmp_path / "o" / "skipped.csv").exists()


def test_sweep_noise_long_format(tmp_path):
    cfg = cfg_file(tmp_path, SMALL + "log10_epsilon_values: [-1, 0, 1]\n")
    assert main(["sweep", "--config", cfg, "--axis", "noise", "--out", str(tmp_path / "s")]) == 0
    rows = read_csv(tmp_path / "s" / "sweep.csv")
    np.testing.assert_allclose(sorted(set(rows["epsilon"])), [0.1, 1.0, 10.0])
    mse_rows = rows[rows["statistic"] == "median_mse"]
    mins = mse_rows[mse_rows["method"] == "min"]
    np.testing.assert_array_equal(mins["relative_to_min"], 1.0)
    assert np.all(mse_rows["relative_to_min"] >= 1.0)
    for i in range(3):
        assert (tmp_path / "s" / f"point_{i:03d}" / "records.csv").exists()


def test_sweep_aspect_changes_dimension(tmp_path):
    cfg = cfg_file(tmp_path, SMALL + "aspect_values: [0.5, 1.5]\n")
    assert main(["sweep", "--config", cfg, "--axis", "aspect", "--out", str(tmp_path / "s")]) == 0
    rows = read_csv(tmp_path / "s" / "sweep.csv")
    assert sorted(set(rows["d"])) == [15, 45]


def test_single_point_sweep_equals_evaluate(tmp_path):
    cfg = cfg_file(tmp_path, SMALL + "epsilon: 1.0\nepsilon_values: [1.0]\n")
    main(["evaluate", "--config", cfg, "--out", str(tmp_path / "e")])
    main(["sweep", "--config", cfg, "--axis", "noise", "--out", str(tmp_path / "s")])
    for f in ("records.csv", "summary.csv", "estimates.csv"):
        assert (tmp_path / "e" / f).read_bytes() == (tmp_path / "s" / "point_000" / f).read_bytes()


def test_landscape_fig1_markers(tmp_path):
    cfg = cfg_file(tmp_path, FIG1 + "theta: principal\ngrid_points: 400\n")
    assert main(["landscape", "--config", cfg, "--out", str(tmp_path / "l")]) == 0
    curve = read_csv(tmp_path / "l" / "landscape.csv")
    marks = read_csv(tmp_path / "l" / "markers.csv")
    assert sorted(set(curve["i_theta"])) == [0, 1, 2, 3, 4]
    step = curve["lambda"][1] / curve["lambda"][0]
    for i in range(5):
        c = curve[curve["i_theta"] == i]
        lam_grid = c["lambda"][np.argmin(c["mse"])]
        for kind in ("fp", "min"):
            m = marks[(marks["i_theta"] == i) & (marks["marker"] == kind)]
            assert lam_grid / step <= m["lambda"][0] <= lam_grid * step
            assert m["mse"][0] <= c["mse"].min() + 1e-12


def test_landscape_zero_noise_monotone(tmp_path):
    cfg = cfg_file(tmp_path, FIG1.replace("epsilon: 1", "epsilon: 0") + "theta: random\nm_theta: 3\n")
    assert main(["landscape", "--config", cfg, "--out", str(tmp_path / "l")]) == 0
    curve = read_csv(tmp_path / "l" / "landscape.csv")
    for i in range(3):
        assert np.all(np.diff(curve["mse"][curve["i_theta"] == i]) >= -1e-15)


def test_landscape_crafted_two_scale_spectrum(tmp_path):
    text = ("n: 20\nd: 10\nepsilon: 0.5\nsingular_values: [30, 30, 30, 30, 30, 0.3, 0.3, 0.3, 0.3, 0.3]\n"
            "projections: [[0.02, 0.02, 0.02, 0.02, 0.02, 5, 5, 5, 5, 5]]\n"
            "lambda_lo: 1.0e-4\nlambda_hi: 1.0e6\ngrid_points: 4000\n")
    cfg = cfg_file(tmp_path, text)
    assert main(["landscape", "--config", cfg, "--out", str(tmp_path / "l")]) == 0
    res = read_csv(tmp_path / "l" / "landscape.csv")["stationarity_residual"]
    assert np.count_nonzero(np.diff(np.sign(res))) >= 2


def test_landscape_explicit_theta_checks_length(tmp_path):
    cfg = cfg_file(tmp_path, FIG1 + "theta: [[1, 0, 0]]\n")
    assert main(["landscape", "--config", cfg, "--out", str(tmp_path / "l")]) == 2


def test_module_entry_point(tmp_path):
    data = spiked_file(tmp_path / "d.csv", n=40, d=5)
    out = subprocess.run([sys.executable, "-m", "ridgeopt", "recommend", "--input", str(data)],
                         capture_output=True, text=True, check=True)
    assert "lambda_sfp" in out.stdout


@pytest.mark.slow
def test_aspect_sweep_sample_fixed_point_wins_when_wide(tmp_path):
    cfg = cfg_file(tmp_path, "n: 100\nd: 90\nm_theta: 20\nm_xy: 20\nbootstrap_resamples: 200\n"
                             "aspect_values: [0.2, 0.9, 1.8]\n")
    assert main(["sweep", "--config", cfg, "--axis", "aspect", "--out", str(tmp_path / "s")]) == 0
    rows = read_csv(tmp_path / "s" / "sweep.csv")
    rows = rows[rows["statistic"] == "median_mse"]
    for aspect in (0.9, 1.8):
        at = rows[np.isclose(rows["value"], aspect)]
        meds = {m: at["point"][at["method"] == m][0] for m in ("sfp", "sn", "default")}
        assert min(meds, key=meds.get) == "sfp"
