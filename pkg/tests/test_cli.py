import json
import sys

import numpy as np

from odtproj.cli import main
from odtproj.fileio import load_ri_volume, load_stack


def run(argv):
    return main(argv)


def test_phantom_simulate_recon_chain(tmp_path):
    ph = str(tmp_path / "ph")
    assert run(["phantom", "--out", ph, "--kind", "bead", "--grid-n", "32",
                "--bead-radius", "0.5"]) == 0
    holo = str(tmp_path / "holo")
    assert run(["simulate", "--phantom", ph, "--out", holo, "--views", "9"]) == 0
    rec = str(tmp_path / "rytov")
    assert run(["recon-rytov", "--holograms", holo, "--out", rec]) == 0
    vol = load_ri_volume(rec)
    assert vol.grid.shape == (32, 32, 32)
    gp = str(tmp_path / "gp")
    assert run(["recon-gp", "--holograms", holo, "--out", gp, "--iters", "5"]) == 0
    tv = str(tmp_path / "tv")
    assert run(["recon-tv", "--holograms", holo, "--out", tv,
                "--bregman-iters", "3"]) == 0


def test_project_enhance_fbp_chain(tmp_path):
    ph = str(tmp_path / "ph")
    run(["phantom", "--out", ph, "--kind", "bead", "--grid-n", "32",
         "--bead-radius", "0.5"])
    st = str(tmp_path / "stack")
    assert run(["project", "--volume", ph, "--out", st, "--axis", "y",
                "--angles", "24"]) == 0
    enh = str(tmp_path / "enh")
    assert run(["enhance", "--in", st, "--out", enh, "--kind", "wavelet"]) == 0
    out = load_stack(enh)
    assert out.n_angles == 24
    rec = str(tmp_path / "rec")
    assert run(["fbp", "--in", enh, "--out", rec]) == 0
    assert load_ri_volume(rec).grid.shape == (32, 32, 32)


def test_enhance_external_copy(tmp_path):
    ph = str(tmp_path / "ph")
    run(["phantom", "--out", ph, "--kind", "bead", "--grid-n", "32",
         "--bead-radius", "0.5"])
    st = str(tmp_path / "stack")
    run(["project", "--volume", ph, "--out", st, "--angles", "8"])
    cmd = (f"{sys.executable} -c "
           "\"import shutil,sys;i=sys.argv[1][:-len('.pstk.json')];o=sys.argv[2];"
           "shutil.copy(i+'.pstk.json',o+'.pstk.json');"
           "shutil.copy(i+'.pstk.raw',o+'.pstk.raw')\" {in} {out}")
    enh = str(tmp_path / "enh")
    assert run(["enhance", "--in", st, "--out", enh, "--kind", "external",
                "--cmd", cmd]) == 0
    a = load_stack(st)
    b = load_stack(enh)
    np.testing.assert_array_equal(a.frames, b.frames)


def test_metrics_outputs(tmp_path, capsys):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    run(["phantom", "--out", a, "--kind", "bead", "--grid-n", "32",
         "--bead-radius", "0.5"])
    run(["phantom", "--out", b, "--kind", "bead", "--grid-n", "32",
         "--bead-radius", "0.5", "--bead-ri", "1.45"])
    jout = str(tmp_path / "m.json")
    hcsv = str(tmp_path / "h.csv")
    pcsv = str(tmp_path / "p.csv")
    assert run(["metrics", "--ref", a, "--test", b, "--json", jout,
                "--histogram-csv", hcsv, "--profile-csv", pcsv,
                "--plot-dir", str(tmp_path / "plots")]) == 0
    report = json.loads(open(jout).read())
    assert "psnr_db" in report and "ssim" in report
    assert open(hcsv).readline().startswith("bin_center")
    assert (tmp_path / "plots" / "histogram.png").exists()
    assert (tmp_path / "plots" / "line_profile.png").exists()


def test_pipeline_and_figures_commands(tmp_path):
    cfg = {"run_dir": str(tmp_path / "run"), "grid_n": 32, "n_views": 9,
           "gp_iterations": 5, "schedule_angles": 24,
           "radius_range_um": [0.5, 0.9], "seed": 5}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert run(["pipeline", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "run" / "manifest.json").exists()
    assert run(["figures", "--run-dir", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "figures" / "09_final_slices.png").exists()


def test_validation_exit_code(tmp_path):
    # unknown flag
    assert run(["phantom", "--nope"]) == 1
    # missing input file
    assert run(["recon-rytov", "--holograms", str(tmp_path / "missing"),
                "--out", str(tmp_path / "o")]) == 1
    # bad subcommand
    assert run(["transmogrify"]) == 1


def test_enhance_external_requires_cmd(tmp_path):
    ph = str(tmp_path / "ph")
    run(["phantom", "--out", ph, "--kind", "bead", "--grid-n", "32",
         "--bead-radius", "0.5"])
    st = str(tmp_path / "st")
    run(["project", "--volume", ph, "--out", st, "--angles", "4"])
    assert run(["enhance", "--in", st, "--out", str(tmp_path / "e"),
                "--kind", "external"]) == 1


def test_runtime_failure_exit_code(tmp_path):
    ph = str(tmp_path / "ph")
    run(["phantom", "--out", ph, "--kind", "bead", "--grid-n", "32",
         "--bead-radius", "0.5"])
    st = str(tmp_path / "st")
    run(["project", "--volume", ph, "--out", st, "--angles", "4"])
    cmd = f"{sys.executable} -c \"import sys; sys.exit(9)\" {{in}} {{out}}"
    assert run(["enhance", "--in", st, "--out", str(tmp_path / "e"),
                "--kind", "external", "--cmd", cmd]) == 2
