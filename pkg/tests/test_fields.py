import math

import numpy as np
import pytest

from obslab import fields


def test_family_catalog_lists_builtins():
    cat = fields.family_catalog()
    for name in ("constant", "periodic-square", "product", "e-beta",
                 "half-strip-comb", "custom-grid"):
        assert name in cat
        assert "doc" in cat[name]
    assert cat["product"]["dims"] == (2,)
    assert set(cat["periodic-square"]["dims"]) == {1, 2}


def test_make_field_rejects_unknown_family():
    with pytest.raises(ValueError):
        fields.make_field("no-such-family", dim=1, period=1.0, grid=16)


def test_make_field_validates_parameters():
    with pytest.raises(ValueError):
        fields.make_field("periodic-square", dim=1, period=1.0, grid=16, delta=0.0)
    with pytest.raises(ValueError):
        fields.make_field("periodic-square", dim=1, period=1.0, grid=16, delta=1.5)
    with pytest.raises(ValueError):
        fields.make_field("e-beta", dim=2, period=24.0, grid=64, beta=1.0)
    with pytest.raises(ValueError):
        fields.make_field("product", dim=2, period=1.0, grid=16,
                          intervals_x="0.5:0.2", intervals_y="0:1")


def test_periodic_square_1d_exact_node_values():
    """delta = 0.3 on a 200-point unit grid is exactly 60 cells."""
    f = fields.make_field("periodic-square", dim=1, period=1.0, grid=200, delta=0.3)
    assert f.values.shape == (200,)
    assert set(np.unique(f.values)) == {0.0, 1.0}
    assert int(f.values.sum()) == 60
    assert f.values.mean() == pytest.approx(0.3, abs=0.0)
    x = np.arange(200) / 200.0
    assert np.array_equal(f.values, (np.mod(x, 1.0) < 0.3).astype(float))


def test_product_membership_at_nodes():
    f = fields.make_field("product", dim=2, period=1.0, grid=10,
                          intervals_x="0:0.5", intervals_y="0.2:0.7")
    x = np.arange(10) / 10.0
    in_x = x < 0.5
    in_y = (x >= 0.2) & (x < 0.7)
    expected = np.outer(in_x, in_y).astype(float)
    assert np.array_equal(f.values, expected)


def test_e_beta_axis_nodes_are_zero():
    f = fields.make_field("e-beta", dim=2, period=24.0, grid=512, beta=0.5)
    assert f.origin == -12.0
    # the row and column of nodes through y = 0 and x = 0 carry no mass
    i0 = int(round((0.0 - f.origin) / f.h))
    assert np.all(f.values[:, i0] == 0.0)
    assert np.all(f.values[i0, :] == 0.0)
    assert f.values.max() == 1.0


def test_half_strip_comb_halves():
    f = fields.make_field("half-strip-comb", dim=2, period=16.0, grid=64)
    assert f.origin == -8.0
    x = f.origin + np.arange(64) * f.h
    upper = np.mod(x, 1.0) < 0.5
    iy_up = int(round((2.0 - f.origin) / f.h))
    iy_dn = int(round((-2.0 - f.origin) / f.h))
    assert np.array_equal(f.values[:, iy_up], upper.astype(float))
    assert np.array_equal(f.values[:, iy_dn], (~upper).astype(float))


def test_evaluate_exact_at_nodes_and_periodic():
    rng = np.random.default_rng(7)
    vals = rng.uniform(size=(16, 16))
    f = fields.make_field("custom-grid", dim=2, period=2.0, grid=16, values=vals)
    xs = np.arange(16) * f.h
    pts = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    got = fields.evaluate(f, pts).reshape(16, 16)
    assert np.allclose(got, vals, atol=1e-14)
    shifted = fields.evaluate(f, pts + np.array([2.0, -4.0])).reshape(16, 16)
    assert np.allclose(shifted, vals, atol=1e-12)


def test_evaluate_bilinear_midpoints():
    vals = np.array([0.0, 1.0, 0.5, 0.25])
    f = fields.make_field("custom-grid", dim=1, period=4.0, grid=4, values=vals)
    mids = np.array([0.5, 1.5, 2.5, 3.5])
    got = fields.evaluate(f, mids)
    expected = np.array([0.5, 0.75, 0.375, 0.125])
    assert np.allclose(got, expected, atol=1e-14)


def test_mollify_preserves_mean_and_range():
    f = fields.make_field("periodic-square", dim=1, period=2 * math.pi, grid=256, delta=0.3)
    g = fields.mollify(f, 0.05)
    assert g.values.mean() == pytest.approx(f.values.mean(), abs=1e-12)
    assert g.values.min() >= 0.0
    assert g.values.max() <= 1.0
    assert g.modulus > 0.0
    # smoothing can only shrink the worst node-to-node jump
    assert np.abs(np.diff(g.values)).max() <= np.abs(np.diff(f.values)).max()


def test_mollify_rejects_bad_radius():
    f = fields.make_field("constant", dim=1, period=1.0, grid=16, value=1.0)
    with pytest.raises(ValueError):
        fields.mollify(f, -0.1)


def test_grid_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    vals = rng.uniform(size=(12, 12))
    f = fields.make_field("custom-grid", dim=2, period=3.0, grid=12,
                          values=vals, origin=-1.5)
    path = tmp_path / "field.ogrd"
    fields.save_grid(f, path)
    raw = path.read_bytes()
    assert raw[:4] == b"OGRD"
    g = fields.load_grid(path)
    assert g.dim == 2 and g.grid == 12
    assert g.period == 3.0 and g.origin == -1.5
    assert np.array_equal(g.values, f.values)


def test_load_grid_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(ValueError):
        fields.load_grid(path)


def test_field_from_config_matches_make_field(tmp_path):
    cfg = tmp_path / "field.ini"
    cfg.write_text(
        "[field]\n"
        "family = periodic-square\n"
        "dim = 1\n"
        "period = 1.0\n"
        "grid = 200\n"
        "delta = 0.3\n"
    )
    f = fields.field_from_config(cfg)
    g = fields.make_field("periodic-square", dim=1, period=1.0, grid=200, delta=0.3)
    assert np.array_equal(f.values, g.values)
    assert f.family["name"] == "periodic-square"


def test_field_from_config_requires_field_section(tmp_path):
    cfg = tmp_path / "empty.ini"
    cfg.write_text("[other]\nx = 1\n")
    with pytest.raises(ValueError):
        fields.field_from_config(cfg)


def test_field_from_config_custom_grid_relative_path(tmp_path):
    vals = np.linspace(0.0, 1.0, 8)
    f = fields.make_field("custom-grid", dim=1, period=1.0, grid=8, values=vals)
    fields.save_grid(f, tmp_path / "data.ogrd")
    cfg = tmp_path / "field.ini"
    cfg.write_text("[field]\nfamily = custom-grid\ngrid_file = data.ogrd\n")
    g = fields.field_from_config(cfg)
    assert np.array_equal(g.values, vals)


def test_describe_is_json_friendly():
    f = fields.make_field("product", dim=2, period=1.0, grid=16,
                          intervals_x="0:0.6", intervals_y="0:0.6")
    d = f.describe()
    assert d["dim"] == 2
    assert d["family"]["name"] == "product"
    assert isinstance(d["period"], float)
