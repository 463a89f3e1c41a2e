"""Codec tests. CRC and bit packing are checked against independent
bit-by-bit reference implementations kept in this file."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handpilot import crsf
from handpilot.crsf import (
    ChannelSet,
    FrameParser,
    LinkStatistics,
    channel_ticks_to_microseconds,
    crc8_dvb_s2,
    decode_frame,
    decode_link_statistics,
    decode_rc_channels,
    encode_link_statistics,
    encode_rc_frame,
    microseconds_to_ticks,
    pack_channels,
    unpack_channels,
)


def crc8_reference(data: bytes) -> int:
    """Bit-by-bit CRC8 poly 0xD5, init 0, no reflection, no final XOR."""
    crc = 0
    for byte in data:
        crc ^= byte
        for _ in range(8):
            if crc & 0x80:
                crc = ((crc << 1) ^ 0xD5) & 0xFF
            else:
                crc = (crc << 1) & 0xFF
    return crc


def pack_reference(values) -> bytes:
    """Per-bit packer: write each channel's 11 bits LSB-first into a bit list."""
    bits = []
    for v in values:
        for i in range(11):
            bits.append((v >> i) & 1)
    out = bytearray(22)
    for pos, bit in enumerate(bits):
        if bit:
            out[pos // 8] |= 1 << (pos % 8)
    return bytes(out)


channel_sets = st.lists(st.integers(0, 2047), min_size=16, max_size=16).map(ChannelSet.from_list)


class TestCrc8:
    def test_empty_input_is_zero(self):
        assert crc8_dvb_s2(b"") == 0x00

    def test_zero_byte_is_zero(self):
        assert crc8_dvb_s2(b"\x00") == 0x00

    def test_single_byte_matches_reference(self):
        assert crc8_dvb_s2(b"\x01") == crc8_reference(b"\x01")

    @given(st.binary(max_size=64))
    def test_table_matches_bitwise_reference(self, data):
        assert crc8_dvb_s2(data) == crc8_reference(data)

    def test_all_single_bytes(self):
        for b in range(256):
            assert crc8_dvb_s2(bytes([b])) == crc8_reference(bytes([b]))


class TestPackChannels:
    def test_all_zero(self):
        assert pack_channels(ChannelSet.from_list([0] * 16)) == bytes(22)

    def test_all_max(self):
        assert pack_channels(ChannelSet.from_list([2047] * 16)) == b"\xff" * 22

    def test_against_per_bit_oracle(self):
        values = [992, 992, 172, 992] + [0] * 12
        assert pack_channels(ChannelSet.from_list(values)) == pack_reference(values)

    @given(channel_sets)
    def test_random_sets_match_oracle(self, cs):
        assert pack_channels(cs) == pack_reference(cs.channels)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ChannelSet.from_list([2048] + [0] * 15)


class TestUnpackChannels:
    def test_zero_payload(self):
        assert unpack_channels(bytes(22)).channels == (0,) * 16

    def test_ff_payload(self):
        assert unpack_channels(b"\xff" * 22).channels == (2047,) * 16

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            unpack_channels(bytes(21))

    @given(channel_sets)
    def test_round_trip(self, cs):
        assert unpack_channels(pack_channels(cs)) == cs

    def test_bijection_bulk(self):
        rng = random.Random(7)
        for _ in range(2000):
            cs = ChannelSet.from_list([rng.randrange(2048) for _ in range(16)])
            assert unpack_channels(pack_channels(cs)) == cs

    @given(st.binary(min_size=22, max_size=22))
    def test_bijection_reverse_direction(self, payload):
        # 16 x 11 bits fill 22 bytes exactly, so unpack is also injective
        assert pack_channels(unpack_channels(payload)) == payload


class TestRcFrame:
    def test_frame_is_26_bytes(self):
        assert len(encode_rc_frame(ChannelSet.centered())) == 26

    def test_header_fields(self):
        raw = encode_rc_frame(ChannelSet.centered())
        assert raw[0] == 0xC8
        assert raw[1] == 24
        assert raw[2] == 0x16

    def test_crc_covers_type_and_payload(self):
        raw = encode_rc_frame(ChannelSet.centered())
        assert raw[-1] == crc8_reference(raw[2:-1])

    def test_decode_inverts_encode(self):
        cs = ChannelSet.from_list([172, 992, 1811, 500] + [992] * 12)
        frame = decode_frame(encode_rc_frame(cs))
        assert decode_rc_channels(frame) == cs

    def test_decode_rejects_bad_sync(self):
        raw = bytearray(encode_rc_frame(ChannelSet.centered()))
        raw[0] = 0xEE
        with pytest.raises(ValueError):
            decode_frame(bytes(raw))


class TestLinkStatisticsFrame:
    def test_round_trip(self):
        stats = LinkStatistics(uplink_rssi=-72, link_quality=97, uplink_snr=-4,
                               active_packet_rate=250)
        frame = decode_frame(encode_link_statistics(stats))
        assert decode_link_statistics(frame) == stats

    def test_lq_range_enforced(self):
        with pytest.raises(ValueError):
            LinkStatistics(uplink_rssi=-50, link_quality=101, uplink_snr=0,
                           active_packet_rate=250)


class TestFrameParser:
    def test_single_frame_byte_by_byte(self):
        raw = encode_rc_frame(ChannelSet.centered())
        parser = FrameParser()
        frames = []
        for i in range(len(raw)):
            frames.extend(parser.feed(raw[i:i + 1]))
        assert len(frames) == 1
        assert decode_rc_channels(frames[0]) == ChannelSet.centered()

    def test_noise_then_frame_then_noise(self):
        # Noise avoids the sync byte so the planted frame is unambiguous.
        rng = random.Random(1234)
        noise = bytes(rng.choice([b for b in range(256) if b != 0xC8]) for _ in range(100))
        raw = noise + encode_rc_frame(ChannelSet.centered()) + noise
        parser = FrameParser()
        frames = parser.feed(raw)
        assert len(frames) == 1

    def test_flipped_payload_bit_rejected(self):
        raw = bytearray(encode_rc_frame(ChannelSet.centered()))
        raw[10] ^= 0x04
        parser = FrameParser()
        assert parser.feed(bytes(raw)) == []
        assert parser.crc_error_count == 1

    def test_unknown_type_skipped_but_validated(self):
        frame = crsf.CrsfFrame.build(0x28, b"\x01\x02")
        parser = FrameParser()
        assert parser.feed(frame.to_bytes()) == []
        assert parser.unknown_frame_count == 1
        assert parser.crc_error_count == 0

    def test_back_to_back_frames(self):
        sets = [ChannelSet.from_list([i * 100 % 2048] * 16) for i in range(5)]
        raw = b"".join(encode_rc_frame(s) for s in sets)
        parser = FrameParser()
        frames = parser.feed(raw)
        assert [decode_rc_channels(f) for f in frames] == sets

    @pytest.mark.parametrize("chunk", [1, 7, 64])
    def test_chunking_invariance_random_streams(self, chunk):
        rng = random.Random(99)
        for _ in range(50):
            stream = bytearray()
            for _ in range(rng.randrange(1, 5)):
                stream += bytes(rng.randrange(256) for _ in range(rng.randrange(0, 40)))
                cs = ChannelSet.from_list([rng.randrange(2048) for _ in range(16)])
                stream += encode_rc_frame(cs)
            stream += bytes(rng.randrange(256) for _ in range(rng.randrange(0, 40)))

            whole = FrameParser().feed(bytes(stream))
            chunked_parser = FrameParser()
            chunked = []
            for i in range(0, len(stream), chunk):
                chunked.extend(chunked_parser.feed(bytes(stream[i:i + chunk])))
            assert chunked == whole


class TestTickConversion:
    def test_center_anchor(self):
        assert channel_ticks_to_microseconds(992) == 1500

    def test_low_end(self):
        # 1500 + (172-992)*0.625 = 987.5, round half up
        assert channel_ticks_to_microseconds(172) == 988

    def test_high_end(self):
        # 1500 + (1811-992)*0.625 = 2011.875
        assert channel_ticks_to_microseconds(1811) == 2012

    def test_inverse_at_anchor(self):
        assert microseconds_to_ticks(1500) == 992

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            channel_ticks_to_microseconds(2048)
        with pytest.raises(ValueError):
            microseconds_to_ticks(2116)

    @settings(max_examples=200)
    @given(st.integers(0, 2047))
    def test_mutual_inverse_up_to_rounding(self, ticks):
        us = 1500 + (ticks - 992) * 0.625
        if 885 <= us <= 2115:
            back = microseconds_to_ticks(channel_ticks_to_microseconds(ticks))
            assert abs(back - ticks) <= 1
