"""Tests for the transmit/receive chains and the end-to-end link."""

import numpy as np
import pytest

from crip_ofdm.channel import ChannelModel, ClipperConfig, RngStream, propagate
from crip_ofdm.clipnoise import q_function
from crip_ofdm.errors import ConfigError, FrameError, SingularChannelError, SizingError
from crip_ofdm.frames import (
    Modulation,
    ModulationSpec,
    Scheme,
    build_crip_frame,
    build_hermitian_frame,
    map_bits,
)
from crip_ofdm.modem import (
    LinkConfig,
    add_cyclic_prefix,
    equalize,
    noise_power_for_ebn0,
    remove_cyclic_prefix,
    run_batch,
    run_frame,
    rx,
    tx,
)

N = 64
CP = 8


def _random_taps(rng, max_memory=8):
    memory = int(rng.integers(0, max_memory + 1))
    return np.concatenate([[1.0], rng.uniform(0.0, 0.5, memory)])


def _crip_frame(rng, n=N, m=4, s0_loaded=True):
    spec = ModulationSpec(Modulation.PAM, m)
    count = n if s0_loaded else n - 1
    x = map_bits(rng.integers(0, 2, size=count * spec.bits_per_symbol), spec)
    return build_crip_frame(x, n, s0_loaded), x


def _hermitian_frame(rng, n=N, m=4):
    spec = ModulationSpec(Modulation.QAM, m)
    x = map_bits(rng.integers(0, 2, size=(n // 2 - 1) * spec.bits_per_symbol), spec)
    return build_hermitian_frame(x, n), x


def _through_channel(out, ch):
    return tuple(propagate(b, ch) for b in out.branches)


class TestCyclicPrefix:
    """Tests for CP insertion and removal."""

    def test_prefix_is_tail(self):
        x = np.arange(8.0)
        np.testing.assert_array_equal(add_cyclic_prefix(x, 3), [5, 6, 7, 0, 1, 2, 3, 4, 5, 6, 7])

    def test_zero_prefix(self):
        np.testing.assert_array_equal(add_cyclic_prefix(np.arange(4.0), 0), np.arange(4.0))

    def test_remove(self):
        x = np.arange(8.0)
        np.testing.assert_array_equal(remove_cyclic_prefix(add_cyclic_prefix(x, 2), 2), x)


class TestTx:
    """Tests for tx."""

    def test_dc_frame_crip(self):
        frame = build_crip_frame(np.r_[2.0, np.zeros(N - 1)], N)
        for scheme in (Scheme.ECRIP, Scheme.OCRIP):
            out = tx(frame, CP, scheme)
            np.testing.assert_allclose(out.combined, np.full(N + CP, 2.0 / np.sqrt(N)), atol=1e-14)
        assert np.max(np.abs(tx(frame, CP, Scheme.OCRIP).branches[1])) < 1e-15

    def test_ocrip_branches_sum_to_ecrip(self):
        rng = np.random.default_rng(0)
        frame, _ = _crip_frame(rng)
        e = tx(frame, CP, Scheme.ECRIP)
        o = tx(frame, CP, Scheme.OCRIP)
        assert len(e.branches) == 1 and len(o.branches) == 2
        np.testing.assert_array_equal(o.branches[0] + o.branches[1], e.branches[0])

    def test_cp_correct(self):
        rng = np.random.default_rng(1)
        frame, _ = _crip_frame(rng)
        for branch in tx(frame, CP, Scheme.OCRIP).branches:
            np.testing.assert_array_equal(branch[:CP], branch[-CP:])

    def test_hermitian_real(self):
        rng = np.random.default_rng(2)
        frame, _ = _hermitian_frame(rng)
        out = tx(frame, CP, Scheme.HERMITIAN)
        assert out.branches[0].dtype == np.float64
        assert out.branches[0].shape == (N + CP,)

    def test_asymmetric_hermitian_rejected(self):
        bins = np.zeros(8, dtype=complex)
        bins[1] = 1.0
        with pytest.raises(FrameError):
            tx(bins, 2, Scheme.HERMITIAN)

    def test_layout_mismatch(self):
        frame, _ = _hermitian_frame(np.random.default_rng(3))
        with pytest.raises(FrameError, match="needs a crip frame"):
            tx(frame, CP, Scheme.ECRIP)

    def test_cp_too_long(self):
        frame, _ = _crip_frame(np.random.default_rng(4), n=8)
        with pytest.raises(SizingError, match="shorter than N"):
            tx(frame, 8, Scheme.ECRIP)

    def test_power_split(self):
        rng = np.random.default_rng(5)
        frames, _ = _crip_frame_batch(rng, 16_000)
        out = tx(frames, 0, Scheme.OCRIP)
        s_fr, s_fi = out.branches
        # interior samples (not 0 or N/2) split the unit power evenly
        interior = np.r_[1 : N // 2, N // 2 + 1 : N]
        assert np.var(s_fr[:, interior]) == pytest.approx(0.5, rel=0.02)
        assert np.var(s_fi[:, interior]) == pytest.approx(0.5, rel=0.02)
        np.testing.assert_allclose(
            np.mean(tx(frames, 0, Scheme.ECRIP).branches[0] ** 2), np.mean(out.combined**2)
        )


def _crip_frame_batch(rng, count, m=4):
    spec = ModulationSpec(Modulation.PAM, m)
    x = map_bits(rng.integers(0, 2, size=(count, N * spec.bits_per_symbol)), spec)
    return build_crip_frame(x, N), x


class TestEqualize:
    """Tests for one-tap zero-forcing equalization."""

    def test_recovers_hermitian_bins(self):
        frame, _ = _hermitian_frame(np.random.default_rng(9))
        ch = ChannelModel([0.8, 0.3, -0.1], 0.0, N)
        received = propagate(tx(frame, CP, Scheme.HERMITIAN).branches[0], ch)
        eq = equalize(received, ch, CP, Scheme.HERMITIAN)
        assert eq.scheme is Scheme.HERMITIAN
        np.testing.assert_allclose(eq.values, frame.bins, atol=1e-9)


class TestRx:
    """Tests for rx."""

    @pytest.mark.parametrize("scheme", [Scheme.ECRIP, Scheme.OCRIP])
    @pytest.mark.parametrize("s0_loaded", [True, False])
    def test_identity_channel_crip(self, scheme, s0_loaded):
        rng = np.random.default_rng(10)
        frame, x = _crip_frame(rng, s0_loaded=s0_loaded)
        out = tx(frame, CP, scheme)
        soft = rx(out.branches, ChannelModel.identity(N), scheme, s0_loaded)
        np.testing.assert_allclose(soft, x.values, atol=1e-10)

    def test_identity_channel_hermitian(self):
        frame, x = _hermitian_frame(np.random.default_rng(11))
        out = tx(frame, CP, Scheme.HERMITIAN)
        soft = rx(out.branches[0], ChannelModel.identity(N), Scheme.HERMITIAN)
        np.testing.assert_allclose(soft, x.values, atol=1e-10)

    def test_multipath_crip(self):
        rng = np.random.default_rng(12)
        ch = ChannelModel([0.7, 0.2, 0.1], 0.0, N)
        for scheme in (Scheme.ECRIP, Scheme.OCRIP):
            frame, x = _crip_frame(rng)
            received = _through_channel(tx(frame, CP, scheme), ch)
            np.testing.assert_allclose(rx(received, ch, scheme), x.values, atol=1e-9)

    def test_multipath_hermitian_qam16(self):
        rng = np.random.default_rng(13)
        ch = ChannelModel([0.7, 0.2, 0.1], 0.0, N)
        frame, x = _hermitian_frame(rng, m=4)
        received = _through_channel(tx(frame, CP, Scheme.HERMITIAN), ch)[0]
        np.testing.assert_allclose(rx(received, ch, Scheme.HERMITIAN), x.values, atol=1e-9)

    def test_isi_elimination_random_channels(self):
        rng = np.random.default_rng(14)
        worst = 0.0
        for _ in range(100):
            ch = ChannelModel(_random_taps(rng), 0.0, N)
            for scheme in Scheme:
                if scheme is Scheme.HERMITIAN:
                    frame, x = _hermitian_frame(rng)
                else:
                    frame, x = _crip_frame(rng)
                received = _through_channel(tx(frame, CP, scheme), ch)
                err = rx(received, ch, scheme) - x.values
                worst = max(worst, float(np.sqrt(np.mean(np.abs(err) ** 2))))
        assert worst < 1e-9

    def test_short_cp_leaves_interference(self):
        rng = np.random.default_rng(15)
        ch = ChannelModel([1.0, 0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.5], 0.0, N)
        frames, x = _crip_frame_batch(rng, 2)
        out = tx(frames, 2, Scheme.ECRIP)
        received = propagate(out.branches[0].reshape(-1), ch).reshape(2, -1)
        err = rx(received, ch, Scheme.ECRIP)[1] - x.values[1]
        assert np.sqrt(np.mean(err**2)) > 1e-3

    def test_singular_channel(self):
        ch = ChannelModel([1.0, 1.0], 0.0, 8)
        with pytest.raises(SingularChannelError):
            rx(np.zeros(10), ch, Scheme.ECRIP)

    def test_bad_length(self):
        with pytest.raises(SizingError, match="Received length"):
            rx(np.zeros(7), ChannelModel.identity(8), Scheme.ECRIP)


class TestLinkConfig:
    """Tests for LinkConfig validation and derived values."""

    def test_crip_rejects_qam(self):
        with pytest.raises(ConfigError, match="use PAM"):
            LinkConfig(Scheme.ECRIP, ChannelModel.identity(N), spec=ModulationSpec("qam", 4))

    def test_cp_shorter_than_memory(self):
        with pytest.raises(SizingError, match="channel memory"):
            LinkConfig(Scheme.ECRIP, ChannelModel(np.ones(5), 0.0, N), cp_length=2)

    def test_short_cp_allowed_on_request(self):
        link = LinkConfig(Scheme.ECRIP, ChannelModel(np.ones(5), 0.0, N), cp_length=2, allow_short_cp=True)
        assert link.cp_length == 2

    def test_default_modulation(self):
        assert LinkConfig(Scheme.HERMITIAN, ChannelModel.identity(N)).spec.modulation is Modulation.QAM
        assert LinkConfig(Scheme.OCRIP, ChannelModel.identity(N)).spec.modulation is Modulation.PAM

    def test_drive_scale(self):
        assert LinkConfig(Scheme.ECRIP, ChannelModel.identity(N)).drive_scale == 1.0
        h = LinkConfig(Scheme.HERMITIAN, ChannelModel.identity(N))
        assert h.drive_scale == pytest.approx(np.sqrt(64 / 62))

    def test_bits_per_frame(self):
        link = LinkConfig(Scheme.OCRIP, ChannelModel.identity(N), order_m=8, s0_loaded=False)
        assert link.bits_per_frame == 189


class TestRunFrame:
    """Tests for the end-to-end link."""

    @pytest.mark.parametrize("scheme", list(Scheme))
    @pytest.mark.parametrize("m", [2, 4, 8])
    def test_noiseless_error_free(self, scheme, m):
        rng = np.random.default_rng(20 + m)
        link = LinkConfig(scheme, ChannelModel([0.6, 0.3, 0.1], 0.0, N), order_m=m)
        bits = rng.integers(0, 2, size=(10, link.bits_per_frame))
        decoded, diag = run_frame(bits, link, rng)
        assert np.array_equal(decoded, bits)
        assert diag.bit_errors == 0
        assert diag.frames == 10

    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_unit_drive_power(self, scheme):
        link = LinkConfig(scheme, ChannelModel.identity(N))
        diag = run_batch(link, 2000, RngStream(0, 1))
        assert diag.tx_power == pytest.approx(1.0, rel=0.02)

    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_wide_clipper_matches_no_clipper(self, scheme):
        ch = ChannelModel.identity(N, noise_power=0.05)
        plain = LinkConfig(scheme, ch)
        wide = LinkConfig(scheme, ch, clipper=ClipperConfig(v_th=-100.0, v_st=100.0, v_dc=0.0))
        bits = np.random.default_rng(30).integers(0, 2, size=(20, plain.bits_per_frame))
        a, da = run_frame(bits, plain, RngStream(5, 0))
        b, db = run_frame(bits, wide, RngStream(5, 0))
        assert np.array_equal(a, b)
        assert db.clip_events == 0

    def test_clipper_gain_absorbed_by_receiver(self):
        link = LinkConfig(
            Scheme.ECRIP,
            ChannelModel.identity(N),
            clipper=ClipperConfig(v_th=-100.0, v_st=100.0, v_dc=0.0, gain=0.1),
        )
        bits = np.random.default_rng(31).integers(0, 2, size=(5, link.bits_per_frame))
        decoded, diag = run_frame(bits, link, RngStream(0))
        assert np.array_equal(decoded, bits)
        assert diag.tx_power == pytest.approx(0.01, rel=0.3)

    def test_tight_clipper_counts_events(self):
        link = LinkConfig(Scheme.OCRIP, ChannelModel.identity(N), clipper=ClipperConfig())
        diag = run_batch(link, 20, RngStream(0))
        assert diag.clip_events > 0

    def test_ocrip_clip_rate_counts_both_branches(self):
        link = LinkConfig(Scheme.OCRIP, ChannelModel.identity(N), clipper=ClipperConfig(gain=1e3))
        diag = run_batch(link, 20, RngStream(0))
        assert diag.samples == 2 * 20 * (N + CP)
        assert 0.99 * diag.samples < diag.clip_events <= diag.samples

    def test_reproducible(self):
        link = LinkConfig(Scheme.OCRIP, ChannelModel.identity(N, noise_power=0.3))
        a = run_batch(link, 50, RngStream(9, (1, 2)))
        b = run_batch(link, 50, RngStream(9, (1, 2)))
        assert a == b

    def test_single_frame_shape(self):
        link = LinkConfig(Scheme.HERMITIAN, ChannelModel.identity(N))
        bits = np.zeros(link.bits_per_frame, dtype=int)
        decoded, _ = run_frame(bits, link, RngStream(0))
        assert decoded.shape == bits.shape

    def test_wrong_bit_count(self):
        link = LinkConfig(Scheme.ECRIP, ChannelModel.identity(N))
        with pytest.raises(SizingError, match="bits per frame"):
            run_frame(np.zeros(5, dtype=int), link, RngStream(0))

    def test_bpsk_matches_theory(self):
        link_noise = noise_power_for_ebn0(4.0, 1.0, N, N)
        link = LinkConfig(Scheme.ECRIP, ChannelModel.identity(N, link_noise), order_m=2)
        diag = run_batch(link, 2000, RngStream(3))
        expected = q_function(np.sqrt(2 * 10 ** 0.4))
        assert diag.bit_errors / diag.bits == pytest.approx(expected, rel=0.1)


class TestNoisePower:
    """Tests for the Eb/N0 bookkeeping."""

    def test_formula(self):
        # Eb = 1 * 64 / 128 = 0.5; N0 = Eb / 10 at 10 dB; sigma^2 = N0 / 2
        assert noise_power_for_ebn0(10.0, 1.0, 64, 128) == pytest.approx(0.025)

    def test_negative_variance(self):
        with pytest.raises(ConfigError):
            noise_power_for_ebn0(10.0, -1.0, 64, 128)
