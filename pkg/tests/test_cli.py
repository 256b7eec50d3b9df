import hashlib

import numpy as np
import pytest

from viscous_heating.cli import (EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_NUMERICAL, EXIT_OK, main,
                                 read_manifest_outputs, sha256_file)

BGK = """kn = 0.1
f0 = 2
n_cells = 10
n_v1 = 16
n_v2 = 16
t_end = {t_end}
sample_interval = 0.1
snapshot_times = 0.2
"""

DSMC = """kn = 0.1
f0 = 2
n_cells = 10
particles_per_cell = 20
t_end = 1
sample_interval = 0.25
n_ensemble = 2
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def only_run(out):
    dirs = [d for d in out.iterdir() if d.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


def check_manifest(run_dir):
    man = run_dir / "manifest.txt"
    assert man.exists()
    text = man.read_text()
    outputs = read_manifest_outputs(man)
    assert outputs
    for name, digest in outputs.items():
        assert sha256_file(run_dir / name) == digest
    config = (run_dir / "config.txt").read_text()
    assert f"config_sha256 = {hashlib.sha256(config.encode()).hexdigest()}" in text
    assert text.split("[config]\n", 1)[1] == config
    return text


@pytest.mark.parametrize("alpha,beta", [("1", "1"), ("r^2", "exp(-r)")])
def test_moments_verify(tmp_path, alpha, beta, capsys):
    rc = main(["moments-verify", "--weights-alpha", alpha, "--weights-beta", beta,
               "--out", str(tmp_path)])
    assert rc == EXIT_OK
    run_dir = only_run(tmp_path)
    check_manifest(run_dir)
    assert (run_dir / "lemmas.csv").exists()


def test_bgk_run_and_resume(tmp_path):
    cfg = write(tmp_path, "a.txt", BGK.format(t_end=0.5))
    out = tmp_path / "runs"
    assert main(["bgk", "run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    first = only_run(out)
    text = check_manifest(first)
    assert "steps = " in text and "status = ok" in text
    assert (first / "series.csv").read_text().startswith("t,")
    assert (first / "plots" / "fig_b_theta_av.py").exists()

    cfg2 = write(tmp_path, "b.txt", BGK.format(t_end=1.0))
    out2 = tmp_path / "runs2"
    rc = main(["bgk", "run", "--config", str(cfg2), "--resume", str(first / "checkpoint.bin"),
               "--out", str(out2)])
    assert rc == EXIT_OK
    assert "resumed_from" in check_manifest(only_run(out2))


def test_bgk_resume_grid_mismatch(tmp_path):
    cfg = write(tmp_path, "a.txt", BGK.format(t_end=0.2))
    out = tmp_path / "runs"
    assert main(["bgk", "run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    ckpt = only_run(out) / "checkpoint.bin"
    other = write(tmp_path, "b.txt", BGK.format(t_end=0.4).replace("n_cells = 10", "n_cells = 12"))
    assert main(["bgk", "run", "--config", str(other), "--resume", str(ckpt),
                 "--out", str(tmp_path / "r2")]) == EXIT_CONFIG


def test_dsmc_run_is_byte_reproducible(tmp_path):
    cfg = write(tmp_path, "d.txt", DSMC)
    digests = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["dsmc", "run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        run_dir = only_run(out)
        text = check_manifest(run_dir)
        assert "seeds = " in text
        assert len(list((run_dir / "runs").glob("run_*_seed_*.csv"))) == 2
        digests.append(sha256_file(run_dir / "aggregate.csv"))
    assert digests[0] == digests[1]


def test_cns_run_and_fit(tmp_path):
    cfg = write(tmp_path, "c.txt", "g0 = 2\nt_end = 100\n")
    out = tmp_path / "runs"
    assert main(["cns", "run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    run_dir = only_run(out)
    check_manifest(run_dir)
    series = run_dir / "series.csv"
    fit_out = tmp_path / "fit"
    rc = main(["fit", "slope", "--input", str(series), "--field", "theta_av", "--t-min", "1",
               "--out", str(fit_out)])
    assert rc == EXIT_OK
    slopes = np.loadtxt(only_run(fit_out) / "slopes.csv", delimiter=",", skiprows=1, ndmin=2)
    assert 0.3 < slopes[-1, 1] < 0.6


def test_steady_shear(tmp_path, capsys):
    cfg = write(tmp_path, "s.txt", "nu_visc = 1\nN = 4\nforce_mode_1 = 1 0 0 0 0 0 0 0 -0.5\n")
    assert main(["steady-ns", "solve", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    cert = (only_run(tmp_path) / "certificate.txt").read_text()
    assert "converged = yes" in cert
    obstruction = float(cert.split("obstruction = ")[1].split()[0])
    assert obstruction == pytest.approx(1 / (4 * np.pi**2), rel=1e-10)


def test_steady_nonconvergence_exit_code(tmp_path):
    cfg = write(tmp_path, "s.txt", "nu_visc = 0.01\nN = 3\nmax_iter = 5\n"
                "force_mode_1 = 1 1 0 0 0 0 0 50 0\nforce_mode_2 = 0 1 1 50 0 0 0 0 0\n"
                "force_mode_3 = 1 0 1 0 0 50 0 0 0\n")
    rc = main(["steady-ns", "solve", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == EXIT_NONCONVERGENCE
    assert "status = not converged" in (only_run(tmp_path) / "manifest.txt").read_text()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = write(tmp_path, "bad.txt", "kn = 0\nf0 = 2\nt_end = 1\n")
    assert main(["bgk", "run", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "kn" in capsys.readouterr().err
    assert main(["bgk", "run", "--config", str(tmp_path / "missing.txt"),
                 "--out", str(tmp_path)]) == EXIT_CONFIG


def test_fit_slope_errors(tmp_path):
    p = write(tmp_path, "s.csv", "t,theta_av\n0,1\n1,2\n2,-1\n3,4\n4,5\n")
    assert main(["fit", "slope", "--input", str(p), "--field", "theta_av",
                 "--out", str(tmp_path)]) == EXIT_NUMERICAL
    assert main(["fit", "slope", "--input", str(p), "--field", "u2_av",
                 "--out", str(tmp_path)]) == EXIT_CONFIG


def test_emit_plots_cases(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["emit-plots", str(empty)]) == EXIT_OK
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "series.csv").write_text("t,rho\n0,1\n")
    assert main(["emit-plots", str(bad)]) == EXIT_CONFIG
    assert "theta_av" in capsys.readouterr().err
