"""Smoke tests for the python bindings.

Correctness is owned by the C++ suites; these check that the data crosses
the numpy boundary intact and that the main operations are callable and
self-consistent from python.
"""

import numpy as np
import pytest

import miptrace as mt


def random_volume(rng, nx, ny, nz, spacing=(1.0, 1.0, 1.0)):
    data = rng.uniform(0.0, 10.0, size=(nz, ny, nx)).astype(np.float32)
    return data, mt.volume_from_numpy(data, spacing=spacing, kind="intensity")


def small_phantom():
    spec = mt.PhantomSpec()
    spec.nx, spec.ny, spec.nz = 32, 32, 16
    spec.background_intensity = 1.0
    spec.spheres = [
        mt.SphereSpec("organ", 14.0, 12.0, 8.0, 6.0, 8.0),
        mt.SphereSpec("tumor", 20.0, 26.0, 8.0, 4.0, 5.0),
    ]
    return spec


def test_volume_numpy_roundtrip():
    rng = np.random.default_rng(7)
    data, vol = random_volume(rng, 9, 7, 5, spacing=(0.8, 1.2, 1.0))
    assert (vol.nx, vol.ny, vol.nz) == (9, 7, 5)
    assert vol.spacing == (0.8, 1.2, 1.0)
    assert vol.kind == "intensity"
    np.testing.assert_array_equal(vol.numpy(), data)


def test_angular_plan():
    plan = mt.angular_plan(4)
    assert plan.n == 4
    assert plan.delta_theta == 45.0
    assert plan.angles == [0.0, 45.0, 90.0, 135.0]


def test_projection_provenance_consistency():
    rng = np.random.default_rng(11)
    data, vol = random_volume(rng, 14, 12, 6)
    img, prov = mt.project_mip(vol, 30.0, interp="nearest")
    pixels = img.numpy()
    voxels = prov.numpy()
    assert voxels.shape == (img.rows, img.cols, 3)
    hit = voxels[..., 0] >= 0
    assert hit.any()
    # every hit pixel equals the voxel it names; misses are exactly zero
    x, y, z = voxels[..., 0][hit], voxels[..., 1][hit], voxels[..., 2][hit]
    np.testing.assert_array_equal(pixels[hit], data[z, y, x])
    assert (pixels[~hit] == 0.0).all()


def test_mirror_reverses_columns():
    rng = np.random.default_rng(13)
    _, vol = random_volume(rng, 10, 10, 4)
    img, _ = mt.project_mip(vol, 60.0, interp="nearest")
    flipped = mt.mirror(img)
    np.testing.assert_array_equal(flipped.numpy(), img.numpy()[:, ::-1])
    assert flipped.angle_deg == 240.0


def test_phantom_determinism():
    spec = small_phantom()
    spec.noise_sigma = 0.3
    spec.seed = 42
    pet1, labels1, warnings1 = mt.generate_phantom(spec)
    pet2, labels2, _ = mt.generate_phantom(spec, workers=4)
    assert warnings1 == []
    np.testing.assert_array_equal(pet1.numpy(), pet2.numpy())
    np.testing.assert_array_equal(labels1.numpy(), labels2.numpy())
    spec.seed = 43
    pet3, _, _ = mt.generate_phantom(spec)
    assert (pet1.numpy() != pet3.numpy()).any()
    assert set(np.unique(labels1.numpy())) == {0.0, 1.0}


def test_stack_correction_shrinks():
    pet, labels3d, _ = mt.generate_phantom(small_phantom())
    plan = mt.angular_plan(4)
    intensity = mt.project_stack(pet, plan, interp="nearest")
    annotations = mt.project_labels(labels3d, plan)
    assert intensity.n == 4 and annotations.kind == "label"

    corrected, report = mt.correct_stack(annotations, intensity, labels3d)
    assert len(report.per_mip) == 4
    for before, after, per_mip in zip(annotations.images, corrected.images, report.per_mip):
        b, a = before.numpy() != 0, after.numpy() != 0
        assert (a <= b).all()  # correction never adds pixels
        for d in per_mip.decisions:
            assert 0.0 <= d.tumor_origin_fraction <= 1.0
            assert d.retained_pixel_count <= d.pixel_count
            assert d.action in ("kept", "split", "removed-low-contrast", "removed-small")
    ex = report.exclusion
    assert ex.tumors_total == 1
    assert 0 <= ex.excluded_tumor_voxels <= ex.total_tumor_voxels


def test_segmentation_metrics():
    a = mt.image_from_numpy(np.array([[1, 1, 0], [0, 0, 0]], dtype=np.float32))
    b = mt.image_from_numpy(np.array([[1, 0, 0], [0, 0, 1]], dtype=np.float32))
    assert mt.dice(a, b) == pytest.approx(2 * 1 / (2 + 2))
    assert mt.iou(a, b) == pytest.approx(1 / 3)
    assert mt.hausdorff(a, b) == pytest.approx(np.sqrt(2))
    assert mt.dice(a, a) == 1.0 and mt.iou(a, a) == 1.0 and mt.hausdorff(a, a) == 0.0

    empty = mt.image_from_numpy(np.zeros((2, 3), dtype=np.float32))
    assert mt.hausdorff(a, empty) is None  # undefined, not infinite
    assert mt.dice(empty, empty) == 1.0

    scores = mt.segmentation_scores(a, b)
    assert scores.dice == mt.dice(a, b)
    assert scores.iou == mt.iou(a, b)
    assert scores.hausdorff == mt.hausdorff(a, b)


def test_classification_and_aggregate():
    scores = mt.classification_metrics(tp=8, fp=2, tn=5, fn=5)
    assert scores.accuracy == pytest.approx(13 / 20)
    assert scores.precision == pytest.approx(8 / 10)
    assert scores.recall == pytest.approx(8 / 13)
    p, r = 8 / 10, 8 / 13
    assert scores.f1 == pytest.approx(2 * p * r / (p + r))
    degenerate = mt.classification_metrics(tp=0, fp=0, tn=4, fn=0)
    assert degenerate.precision is None

    agg = mt.aggregate([1.0, 2.0, 3.0, 4.0])
    assert agg.mean == pytest.approx(2.5)
    assert agg.std_dev == pytest.approx(np.sqrt(1.25))
    assert agg.n == 4


def test_suv_normalize():
    rng = np.random.default_rng(17)
    data, vol = random_volume(rng, 4, 4, 4)
    suv = mt.suv_normalize(vol, injected_dose_bq=3.5e8, body_weight_g=70000.0)
    np.testing.assert_allclose(suv.numpy(), data * 70000.0 / 3.5e8, rtol=1e-6)


def test_nifti_roundtrip(tmp_path):
    rng = np.random.default_rng(19)
    data, vol = random_volume(rng, 6, 5, 4, spacing=(0.9, 1.1, 2.0))
    for name in ("vol.nii", "vol.nii.gz"):
        path = str(tmp_path / name)
        mt.write_nifti(vol, path)
        back, notes = mt.read_nifti(path)
        assert notes == []
        np.testing.assert_array_equal(back.numpy(), data)
        assert back.spacing == pytest.approx((0.9, 1.1, 2.0))


def test_mips_roundtrip(tmp_path):
    pet, labels3d, _ = mt.generate_phantom(small_phantom())
    plan = mt.angular_plan(3)
    stack = mt.project_stack(pet, plan, interp="nearest")

    ipath = str(tmp_path / "intensity.mips")
    mt.write_mip_container(stack, ipath)
    container = mt.read_mip_container(ipath)
    assert container.angles == plan.angles
    back = mt.container_to_stack(container)
    for orig, rt in zip(stack.images, back.images):
        np.testing.assert_array_equal(orig.numpy(), rt.numpy())

    ppath = str(tmp_path / "provenance.mips")
    mt.write_provenance_container(stack, ppath)
    pc = mt.read_mip_container(ppath)
    assert len(pc.provenance) == 3
    for orig, rt in zip(stack.provenance, pc.provenance):
        np.testing.assert_array_equal(orig.numpy(), rt.numpy())

    ann = mt.project_labels(labels3d, plan)
    lpath = str(tmp_path / "labels.mips")
    mt.write_mip_container(ann, lpath)
    for orig, rt in zip(ann.images, mt.container_to_stack(mt.read_mip_container(lpath)).images):
        np.testing.assert_array_equal(orig.numpy(), rt.numpy())


def test_detect_and_split_matches_components():
    pet, labels3d, _ = mt.generate_phantom(small_phantom())
    img, prov = mt.project_mip(pet, 0.0, interp="nearest")
    plan = mt.angular_plan(1)
    ann = mt.project_labels(labels3d, plan).images[0]

    labels, count = mt.connected_components(ann, connectivity=8)
    assert labels.shape == (ann.rows, ann.cols)
    assert count >= 1

    mask, decisions = mt.detect_and_split(ann, prov, labels3d)
    assert len(decisions) == count
    assert ((mask.numpy() != 0) <= (ann.numpy() != 0)).all()

    cfg = mt.OcclusionConfig()
    assert cfg.origin_threshold == 0.75
    cfg.origin_threshold = 1.0
    strict_mask, _ = mt.detect_and_split(ann, prov, labels3d, cfg)
    assert ((strict_mask.numpy() != 0) <= (mask.numpy() != 0)).all()


def test_export_pgm(tmp_path):
    img = mt.image_from_numpy(
        np.array([[0.0, 5.0, 10.0]], dtype=np.float32), kind="intensity"
    )
    path = str(tmp_path / "mip.pgm")
    mt.export_pgm(img, path, lo=0.0, hi=10.0)
    raw = open(path, "rb").read()
    assert raw.startswith(b"P5\n3 1\n65535\n")
    assert raw[-6:] == bytes([0x00, 0x00, 0x80, 0x00, 0xFF, 0xFF])
