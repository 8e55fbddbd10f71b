import json

import numpy as np
import pytest

from odtproj import (
    Axis,
    Grid3,
    ProjectionStack,
    Provenance,
    RIVolume,
    bead_phantom,
    circular_illumination,
    ri_to_potential,
    simulate_holograms,
)
from odtproj.fileio import (
    load_holograms,
    load_kspace,
    load_ri_volume,
    load_stack,
    save_holograms,
    save_kspace,
    save_ri_volume,
    save_stack,
    sha256_file,
)


def test_volume_round_trip(tmp_path):
    g = Grid3(16, 12, 8, 0.25)
    rng = np.random.default_rng(0)
    vol = RIVolume(g, (1.35 + 0.05 * rng.random(g.shape)).astype(np.float32).astype(float),
                   1.337)
    save_ri_volume(tmp_path / "vol", vol, "test")
    back = load_ri_volume(tmp_path / "vol")
    assert back.grid == g
    assert back.n_background == 1.337
    np.testing.assert_array_equal(back.values, vol.values)


def test_volume_sidecar_schema(tmp_path):
    g = Grid3(8, 8, 8, 0.1)
    save_ri_volume(tmp_path / "v", RIVolume(g, np.full(g.shape, 1.4), 1.337), "myvol")
    man = json.loads((tmp_path / "v.volf.json").read_text())
    assert set(man) == {"name", "dtype", "dims", "pitch_um", "n_background"}
    assert man["dtype"] == "f32"
    assert man["dims"] == [8, 8, 8]
    raw = (tmp_path / "v.volf.raw").read_bytes()
    assert len(raw) == 8 * 8 * 8 * 4


def test_volume_zmajor_layout(tmp_path):
    g = Grid3(8, 8, 8, 0.1)
    vals = np.full(g.shape, 1.4)
    vals[1, 2, 3] = 1.45  # z=1, y=2, x=3
    save_ri_volume(tmp_path / "v", RIVolume(g, vals, 1.337), "v")
    raw = np.frombuffer((tmp_path / "v.volf.raw").read_bytes(), dtype="<f4")
    assert raw[1 * 64 + 2 * 8 + 3] == np.float32(1.45)


def test_kspace_round_trip_with_mask(tmp_path, grid64, optics):
    bead = bead_phantom(grid64, 0.5)
    illum = circular_illumination(5, 45.0, optics)
    from odtproj import grid_kspace
    k = grid_kspace(simulate_holograms(ri_to_potential(bead, 0.532), illum), grid64)
    save_kspace(tmp_path / "k", k)
    back = load_kspace(tmp_path / "k")
    np.testing.assert_array_equal(back.mask, k.mask)
    np.testing.assert_array_equal(back.values, k.values.astype(np.complex64).astype(np.complex128))
    man = json.loads((tmp_path / "k.volf.json").read_text())
    assert man["dtype"] == "c64"


def test_kspace_without_mask_file_uses_nonzeros(tmp_path):
    g = Grid3(8, 8, 8, 0.1)
    vals = np.zeros(g.shape, dtype=complex)
    vals[2, 3, 4] = 1 + 2j
    from odtproj.fileio import _save_volf
    _save_volf((tmp_path / "k"), "k", vals, 0.1, 1.337)
    back = load_kspace(tmp_path / "k")
    assert back.mask.sum() == 1
    assert back.mask[2, 3, 4]


def test_stack_round_trip(tmp_path, grid64):
    bead = bead_phantom(grid64, 0.5)
    from odtproj import project_schedule
    st = project_schedule(bead, Axis.X, 12)
    save_stack(tmp_path / "s", st)
    back = load_stack(tmp_path / "s")
    assert back.axis is Axis.X
    assert back.provenance is Provenance.SCHEDULE
    np.testing.assert_array_equal(back.angles_deg, st.angles_deg)
    np.testing.assert_array_equal(back.frames, st.frames.astype(np.float32))


def test_stack_angle_list_bitwise(tmp_path):
    angles = np.array([0.0, 37.1234567890123, 111.5, 359.9999])
    st = ProjectionStack(Axis.Y, angles, np.zeros((4, 8, 8)), 0.1,
                         Provenance.MISSING)
    save_stack(tmp_path / "s", st)
    back = load_stack(tmp_path / "s")
    assert back.angles_deg.tobytes() == angles.tobytes()


def test_stack_manifest_schema(tmp_path):
    st = ProjectionStack(Axis.Z, np.array([0.0, 90.0]), np.zeros((2, 8, 8)), 0.1)
    save_stack(tmp_path / "s", st)
    man = json.loads((tmp_path / "s.pstk.json").read_text())
    assert set(man) == {"axis", "angles_deg", "dims", "pitch_um", "provenance"}
    assert man["axis"] == "z"
    assert man["dims"] == [8, 8]


def test_holograms_round_trip(tmp_path, grid64, optics):
    bead = bead_phantom(grid64, 0.5)
    illum = circular_illumination(7, 45.0, optics)
    holo = simulate_holograms(ri_to_potential(bead, 0.532), illum)
    save_holograms(tmp_path / "h", holo)
    back = load_holograms(tmp_path / "h")
    assert back.illumination.n_views == 7
    np.testing.assert_allclose(back.illumination.directions, illum.directions,
                               atol=1e-12)
    np.testing.assert_array_equal(back.frames,
                                  holo.frames.astype(np.complex64).astype(np.complex128))
    man = json.loads((tmp_path / "h.holo.json").read_text())
    assert set(man) == {"n_views", "tilt_deg", "wavelength_um", "n_medium", "na",
                        "detector_dims"}


def test_save_holograms_rejects_noncircular(tmp_path, optics):
    from odtproj.forward import HologramSet, IlluminationSet
    d = np.array([[0.0, 0.0, 1.0], [0.6, 0.0, 0.8]])
    illum = IlluminationSet(optics, d)
    holo = HologramSet(illum, np.zeros((2, 8, 8), dtype=complex))
    with pytest.raises(ValueError):
        save_holograms(tmp_path / "h", holo)


def test_missing_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_ri_volume(tmp_path / "nope")
    with pytest.raises(FileNotFoundError):
        load_stack(tmp_path / "nope")


def test_truncated_raw_rejected(tmp_path):
    g = Grid3(8, 8, 8, 0.1)
    save_ri_volume(tmp_path / "v", RIVolume(g, np.full(g.shape, 1.4), 1.337), "v")
    raw = tmp_path / "v.volf.raw"
    raw.write_bytes(raw.read_bytes()[:100])
    with pytest.raises(ValueError):
        load_ri_volume(tmp_path / "v")


def test_sha256_stable(tmp_path):
    p = tmp_path / "f.bin"
    p.write_bytes(b"hello world")
    assert sha256_file(p) == sha256_file(p)
    assert sha256_file(p) == ("b94d27b9934d3e08a52e52d7da7dabfac484efe37a5380ee"
                              "9088f7ace2efcde9")
