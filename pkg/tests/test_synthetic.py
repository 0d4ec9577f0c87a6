import numpy as np

from ssqp.synthetic import VARIANTS, distort, make_synthetic_pairs, make_texture, severity_mos


def test_textures_deterministic_and_in_range():
    a = make_texture(3, size=32)
    b = make_texture(3, size=32)
    assert np.array_equal(a.pixels, b.pixels)
    assert a.height == a.width == 32
    assert a.pixels.min() >= 0.0 and a.pixels.max() <= 255.0
    c = make_texture(4, size=32)
    assert not np.array_equal(a.pixels, c.pixels)


def test_severity_mos_monotone():
    sev = [v for _, v in VARIANTS]
    mos = [severity_mos(s) for s in sev]
    order = np.argsort(sev)
    assert all(np.diff(np.asarray(mos)[order]) <= 0)
    assert severity_mos(0.0) == 20.0


def test_distort_families_produce_valid_images():
    img = make_texture(0, size=32)
    rng = np.random.default_rng(0)
    assert distort(img, "identity", 0.0, rng) is img
    for family in ("noise", "blur", "block"):
        out = distort(img, family, 0.8, rng)
        assert out.pixels.shape == img.pixels.shape
        assert out.pixels.min() >= 0.0 and out.pixels.max() <= 255.0
        assert not np.array_equal(out.pixels, img.pixels)


def test_pair_grid_shape_and_identity_top_score():
    pairs = make_synthetic_pairs(n_contents=12, size=24)
    assert len(pairs) == 12 * 12
    mos = [m for _, _, _, m in pairs]
    idents = [m for (_, ref, test, m) in pairs if test is ref]
    assert len(idents) == 12
    assert all(m == max(mos) for m in idents)
