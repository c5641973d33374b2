"""Beamformer parametrizations, realization and serialization."""

import numpy as np
import pytest

import beamforge as bf
from beamforge.errors import DegenerateInputError


def test_analog_zero_phases_realize():
    cfg = bf.ArrayConfig.half_wavelength(2, 2, n_rf=1)
    f = bf.realize(bf.AnalogBeamformer(np.zeros(4)), cfg)
    np.testing.assert_allclose(f, np.full(4, 0.5), atol=1e-15)


def test_hybrid_single_chain_scalar_baseband():
    cfg = bf.ArrayConfig.half_wavelength(2, 2, n_rf=1)
    hb = bf.HybridBeamformer(np.zeros((4, 1)), np.array([5.0 + 0.0j]))
    f = bf.realize(hb, cfg)
    np.testing.assert_allclose(f, np.full(4, 0.5), atol=1e-15)


def test_hybrid_realization_constraints():
    cfg = bf.ArrayConfig.half_wavelength(4, 2, n_rf=2)
    rng = np.random.default_rng(21)
    hb = bf.random_beamformer("hybrid", cfg, rng)
    f = bf.realize(hb, cfg)
    assert abs(np.linalg.norm(f) - 1.0) < 1e-12
    # phase-shifter network entries are constant modulus 1/sqrt(n_t)
    f_rf = np.exp(1j * hb.phases) / np.sqrt(cfg.n_t)
    np.testing.assert_allclose(np.abs(f_rf), 1.0 / np.sqrt(8), atol=1e-14)


def test_realize_unit_norm_all_architectures(cfg):
    rng = np.random.default_rng(22)
    for arch in ("digital", "analog", "hybrid"):
        for _ in range(5):
            f = bf.realize(bf.random_beamformer(arch, cfg, rng), cfg)
            assert abs(np.linalg.norm(f) - 1.0) < 1e-12


def test_realize_rejects_zero_digital(cfg):
    with pytest.raises(DegenerateInputError):
        bf.realize(bf.DigitalBeamformer(np.zeros(cfg.n_t, dtype=complex)), cfg)


def test_analog_from_hybrid_phase_extraction():
    cfg = bf.ArrayConfig.half_wavelength(2, 1, n_rf=1)
    w = np.array([1.0 + 1.0j, 2.0 + 0.0j])
    hb = bf.HybridBeamformer(
        np.angle(w).reshape(2, 1), np.array([1.0 + 0.0j])
    )
    # hybrid realizes to a vector with args [pi/4, 0]; the analog projection
    # keeps exactly those phases
    ab = bf.analog_from_hybrid(hb, cfg)
    np.testing.assert_allclose(ab.phases, [np.pi / 4, 0.0], atol=1e-12)


def test_analog_from_hybrid_idempotent_on_constant_modulus():
    cfg = bf.ArrayConfig.half_wavelength(4, 2, n_rf=1)
    hb = bf.HybridBeamformer(
        np.linspace(-2.0, 2.0, 8).reshape(8, 1), np.array([3.0 + 0.0j])
    )
    f_h = bf.realize(hb, cfg)
    ab = bf.analog_from_hybrid(hb, cfg)
    np.testing.assert_allclose(bf.realize(ab, cfg), f_h, atol=1e-12)


def test_analog_from_hybrid_recomputes_elementwise(cfg):
    rng = np.random.default_rng(23)
    hb = bf.random_beamformer("hybrid", cfg, rng)
    f_h = bf.realize(hb, cfg)
    ab = bf.analog_from_hybrid(hb, cfg)
    expected = np.angle(f_h)
    np.testing.assert_allclose(
        np.exp(1j * ab.phases), np.exp(1j * expected), atol=1e-12
    )


def test_parameter_layout_sizes():
    cfg = bf.ArrayConfig.default()
    assert bf.layout_for("digital", cfg).size == 512
    assert bf.layout_for("hybrid", cfg).size == 516
    one = bf.ArrayConfig.half_wavelength(1, 1, n_rf=1)
    assert bf.layout_for("analog", one).size == 1


def test_pack_unpack_round_trip(cfg):
    rng = np.random.default_rng(24)
    for arch in ("digital", "analog", "hybrid"):
        b = bf.random_beamformer(arch, cfg, rng)
        lay = bf.parameter_layout(b)
        assert lay.size == bf.layout_for(arch, cfg).size
        back = lay.unpack(lay.pack(b))
        np.testing.assert_array_equal(
            bf.realize(back, cfg), bf.realize(b, cfg)
        )


def test_digital_packing_interleaves_re_im():
    d = bf.DigitalBeamformer(np.array([1.0 + 2.0j, 3.0 + 4.0j]))
    np.testing.assert_array_equal(
        bf.parameter_layout(d).pack(d), [1.0, 2.0, 3.0, 4.0]
    )


def test_hybrid_packing_order():
    hb = bf.HybridBeamformer(
        np.array([[0.1, 0.2], [0.3, 0.4]]), np.array([1.0 + 2.0j, 3.0 + 4.0j])
    )
    np.testing.assert_array_equal(
        bf.parameter_layout(hb).pack(hb),
        [0.1, 0.3, 0.2, 0.4, 1.0, 2.0, 3.0, 4.0],
    )


def _raw_params(b):
    if isinstance(b, bf.DigitalBeamformer):
        return (b.weights,)
    if isinstance(b, bf.AnalogBeamformer):
        return (b.phases,)
    return (b.phases, b.baseband)


def test_json_round_trip_bit_exact(cfg, tmp_path):
    rng = np.random.default_rng(25)
    for arch in ("digital", "analog", "hybrid"):
        b = bf.random_beamformer(arch, cfg, rng)
        path = tmp_path / f"{arch}.json"
        bf.save_beamformer(b, path)
        back = bf.load_beamformer(path)
        assert type(back) is type(b)
        for got, want in zip(_raw_params(back), _raw_params(b)):
            np.testing.assert_array_equal(got, want)
        again = bf.from_json_dict(bf.to_json_dict(b))
        for got, want in zip(_raw_params(again), _raw_params(b)):
            np.testing.assert_array_equal(got, want)


def test_se_invariant_under_global_phase(cfg):
    rng = np.random.default_rng(26)
    h = rng.standard_normal(cfg.n_t) + 1j * rng.standard_normal(cfg.n_t)
    for arch in ("digital", "analog", "hybrid"):
        b = bf.random_beamformer(arch, cfg, rng)
        lay = bf.parameter_layout(b)
        params = lay.pack(b)
        if arch == "digital":
            w = params[0::2] + 1j * params[1::2]
            w *= np.exp(1j * 1.234)
            rot = params.copy()
            rot[0::2], rot[1::2] = w.real, w.imag
        elif arch == "analog":
            rot = params + 1.234
        else:
            rot = params.copy()
            rot[: cfg.n_t * cfg.n_rf] += 1.234
        se_a = bf.spectral_efficiency(h, bf.realize(b, cfg), 0.0)
        se_b = bf.spectral_efficiency(h, bf.realize(lay.unpack(rot), cfg), 0.0)
        assert abs(se_a - se_b) < 1e-9
