"""CRSF frame codec and streaming parser.

Implements the wire format spoken by ExpressLRS-style links: 16 x 11-bit RC
channels packed into 22 bytes, framed as [sync][len][type][payload][crc] with
CRC8/DVB-S2 over type+payload. Only the RC-channels and link-statistics frame
types are decoded; other types are CRC-checked and skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Protocol constants (wire format)
SYNC_BYTE = 0xC8  # frames addressed to the flight controller
FRAMETYPE_RC_CHANNELS_PACKED = 0x16
FRAMETYPE_LINK_STATISTICS = 0x14

CHANNEL_COUNT = 16
CHANNEL_BITS = 11
CHANNEL_MAX = 2047  # 11-bit ceiling
RC_PAYLOAD_LEN = 22  # 16 * 11 bits
RC_FRAME_LEN = RC_PAYLOAD_LEN + 4  # sync + len + type + payload + crc = 26
MAX_FRAME_LEN = 64

# Semantic tick range used by transmitters: full deflection 172..1811, center 992.
TICK_MIN = 172
TICK_CENTER = 992
TICK_MAX = 1811

# Tick <-> microsecond anchors: 992 ticks == 1500 us, 5/8 us per tick.
US_CENTER = 1500
US_PER_TICK = 0.625
US_MIN = 885
US_MAX = 2115

CRC_POLY = 0xD5


def _build_crc_table(poly: int) -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table.append(crc)
    return tuple(table)


_CRC8_TABLE = _build_crc_table(CRC_POLY)


def crc8_dvb_s2(data: bytes | bytearray) -> int:
    """CRC8 with polynomial 0xD5, init 0x00, no reflection, no final XOR."""
    crc = 0
    for b in data:
        crc = _CRC8_TABLE[crc ^ b]
    return crc


@dataclass(frozen=True)
class ChannelSet:
    """16 RC channel values in 11-bit ticks (0..2047).

    Mapper output stays within the semantic range 172..1811; the codec accepts
    the full 11-bit range.
    """

    channels: tuple[int, ...]

    def __post_init__(self):
        if len(self.channels) != CHANNEL_COUNT:
            raise ValueError(f"expected {CHANNEL_COUNT} channels, got {len(self.channels)}")
        for i, v in enumerate(self.channels):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"channel {i + 1} must be an int, got {v!r}")
            if not 0 <= v <= CHANNEL_MAX:
                raise ValueError(f"channel {i + 1} value {v} outside 0..{CHANNEL_MAX}")

    @classmethod
    def centered(cls) -> "ChannelSet":
        return cls(channels=(TICK_CENTER,) * CHANNEL_COUNT)

    @classmethod
    def from_list(cls, values) -> "ChannelSet":
        return cls(channels=tuple(int(v) for v in values))

    def __getitem__(self, idx: int) -> int:
        return self.channels[idx]


@dataclass(frozen=True)
class CrsfFrame:
    """One wire frame: sync, length, type, payload, crc.

    frame_length counts type + payload + crc bytes.
    """

    sync: int
    frame_length: int
    frame_type: int
    payload: bytes
    crc: int

    def __post_init__(self):
        if self.frame_length != len(self.payload) + 2:
            raise ValueError("frame_length must equal payload length + 2")
        if len(self.payload) > 60:
            raise ValueError("payload exceeds 60 bytes")

    @classmethod
    def build(cls, frame_type: int, payload: bytes, sync: int = SYNC_BYTE) -> "CrsfFrame":
        crc = crc8_dvb_s2(bytes([frame_type]) + payload)
        return cls(sync=sync, frame_length=len(payload) + 2, frame_type=frame_type,
                   payload=bytes(payload), crc=crc)

    def to_bytes(self) -> bytes:
        return bytes([self.sync, self.frame_length, self.frame_type]) + self.payload + bytes([self.crc])


@dataclass(frozen=True)
class LinkStatistics:
    """Telemetry snapshot of link health.

    Payload layout (5 bytes, documented in docs/formats.md):
    [0] -uplink_rssi as unsigned magnitude, [1] link_quality %, [2] uplink_snr
    as signed int8, [3:5] active_packet_rate as uint16 little-endian.
    """

    uplink_rssi: int  # dBm, negative
    link_quality: int  # percent 0..100
    uplink_snr: int  # dB
    active_packet_rate: int  # Hz

    def __post_init__(self):
        if not 0 <= self.link_quality <= 100:
            raise ValueError("link_quality outside 0..100")
        if self.uplink_rssi > 0:
            raise ValueError("uplink_rssi is a negative dBm value")

    def to_payload(self) -> bytes:
        snr = self.uplink_snr & 0xFF
        return bytes([min(-self.uplink_rssi, 255), self.link_quality, snr,
                      self.active_packet_rate & 0xFF, (self.active_packet_rate >> 8) & 0xFF])

    @classmethod
    def from_payload(cls, payload: bytes) -> "LinkStatistics":
        if len(payload) != 5:
            raise ValueError(f"link statistics payload must be 5 bytes, got {len(payload)}")
        snr = payload[2] - 256 if payload[2] >= 128 else payload[2]
        return cls(uplink_rssi=-payload[0], link_quality=payload[1], uplink_snr=snr,
                   active_packet_rate=payload[3] | (payload[4] << 8))


def pack_channels(channels: ChannelSet) -> bytes:
    """Pack 16 x 11-bit channels into 22 bytes, least-significant bits first."""
    acc = 0
    nbits = 0
    out = bytearray()
    for v in channels.channels:
        if v > CHANNEL_MAX:
            raise ValueError(f"channel value {v} exceeds {CHANNEL_MAX}")
        acc |= (v & 0x7FF) << nbits
        nbits += CHANNEL_BITS
        while nbits >= 8:
            out.append(acc & 0xFF)
            acc >>= 8
            nbits -= 8
    # 176 bits pack to exactly 22 bytes
    return bytes(out)


def unpack_channels(data: bytes) -> ChannelSet:
    """Inverse of pack_channels."""
    if len(data) != RC_PAYLOAD_LEN:
        raise ValueError(f"RC channel payload must be {RC_PAYLOAD_LEN} bytes, got {len(data)}")
    acc = 0
    nbits = 0
    values = []
    for b in data:
        acc |= b << nbits
        nbits += 8
        while nbits >= CHANNEL_BITS:
            values.append(acc & 0x7FF)
            acc >>= CHANNEL_BITS
            nbits -= CHANNEL_BITS
    return ChannelSet(channels=tuple(values[:CHANNEL_COUNT]))


def encode_rc_frame(channels: ChannelSet) -> bytes:
    """Encode a full RC-channels frame: 26 bytes, sync 0xC8, type 0x16."""
    return CrsfFrame.build(FRAMETYPE_RC_CHANNELS_PACKED, pack_channels(channels)).to_bytes()


def encode_link_statistics(stats: LinkStatistics) -> bytes:
    return CrsfFrame.build(FRAMETYPE_LINK_STATISTICS, stats.to_payload()).to_bytes()


def decode_frame(data: bytes) -> CrsfFrame:
    """Decode and validate exactly one frame from its complete byte string."""
    if len(data) < 4:
        raise ValueError("frame too short")
    if data[0] != SYNC_BYTE:
        raise ValueError(f"bad sync byte 0x{data[0]:02X}")
    frame_length = data[1]
    if frame_length + 2 != len(data):
        raise ValueError(f"length byte {frame_length} does not match frame size {len(data)}")
    if len(data) > MAX_FRAME_LEN:
        raise ValueError("frame exceeds 64 bytes")
    crc = crc8_dvb_s2(data[2:-1])
    if crc != data[-1]:
        raise ValueError(f"CRC mismatch: computed 0x{crc:02X}, frame carries 0x{data[-1]:02X}")
    return CrsfFrame(sync=data[0], frame_length=frame_length, frame_type=data[2],
                     payload=bytes(data[3:-1]), crc=data[-1])


def decode_rc_channels(frame: CrsfFrame) -> ChannelSet:
    if frame.frame_type != FRAMETYPE_RC_CHANNELS_PACKED:
        raise ValueError(f"not an RC channels frame (type 0x{frame.frame_type:02X})")
    return unpack_channels(frame.payload)


def decode_link_statistics(frame: CrsfFrame) -> LinkStatistics:
    if frame.frame_type != FRAMETYPE_LINK_STATISTICS:
        raise ValueError(f"not a link statistics frame (type 0x{frame.frame_type:02X})")
    return LinkStatistics.from_payload(frame.payload)

# Frame types the parser hands to callers; everything else is skipped after
# its CRC has been validated.
_KNOWN_TYPES = frozenset({FRAMETYPE_RC_CHANNELS_PACKED, FRAMETYPE_LINK_STATISTICS})


class FrameParser:
    """Incremental parser over an arbitrary byte stream.

    Feed chunks of any size; complete CRC-valid frames come back exactly once,
    in order. Corrupt bytes are skipped until the next plausible sync+length
    header. Emitted frames do not depend on how the stream was chunked; the
    discard counters may, since runs of garbage merge across feeds.
    """

    def __init__(self):
        self._buf = bytearray()
        self.crc_error_count = 0
        self.resync_count = 0
        self.bytes_discarded = 0
        self.frames_emitted = 0
        self.unknown_frame_count = 0

    def _discard(self, n: int) -> None:
        del self._buf[:n]
        self.bytes_discarded += n
        self.resync_count += 1

    def feed(self, data: bytes) -> list[CrsfFrame]:
        self._buf.extend(data)
        frames: list[CrsfFrame] = []
        while True:
            start = self._buf.find(SYNC_BYTE)
            if start < 0:
                if self._buf:
                    self._discard(len(self._buf))
                break
            if start > 0:
                self._discard(start)
            if len(self._buf) < 2:
                break
            frame_length = self._buf[1]
            if not 2 <= frame_length <= MAX_FRAME_LEN - 2:
                self._discard(1)
                continue
            total = frame_length + 2
            if len(self._buf) < total:
                break
            ftype = self._buf[2]
            body = bytes(self._buf[2:total - 1])
            if crc8_dvb_s2(body) != self._buf[total - 1]:
                self.crc_error_count += 1
                self._discard(1)
                continue
            frame = CrsfFrame(sync=SYNC_BYTE, frame_length=frame_length, frame_type=ftype,
                              payload=body[1:], crc=self._buf[total - 1])
            del self._buf[:total]
            if ftype in _KNOWN_TYPES:
                frames.append(frame)
                self.frames_emitted += 1
            else:
                self.unknown_frame_count += 1
        return frames


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def channel_ticks_to_microseconds(ticks: int) -> int:
    """Linear tick->us map anchored at 992 ticks == 1500 us, 5/8 us per tick."""
    if not 0 <= ticks <= CHANNEL_MAX:
        raise ValueError(f"ticks {ticks} outside 0..{CHANNEL_MAX}")
    return _round_half_up(US_CENTER + (ticks - TICK_CENTER) * US_PER_TICK)


def microseconds_to_ticks(us: float) -> int:
    """Inverse of channel_ticks_to_microseconds, up to rounding."""
    if not US_MIN <= us <= US_MAX:
        raise ValueError(f"microseconds {us} outside {US_MIN}..{US_MAX}")
    return _round_half_up(TICK_CENTER + (us - US_CENTER) / US_PER_TICK)
