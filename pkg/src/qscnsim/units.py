"""Parsers for the explicit unit strings used in scenario files.

Canonical internal units are bits, bits/s, km, s and Hz. Decimal SI
prefixes throughout (k = 1e3, M = 1e6, G = 1e9); a lowercase ``b`` is a
bit, an uppercase ``B`` is a byte (8 bits).
"""

from __future__ import annotations

import re

_PREFIX = {"": 1.0, "k": 1e3, "K": 1e3, "M": 1e6, "G": 1e9}

_NUM = r"(?P<num>[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)"


class UnitError(ValueError):
    """Raised when a quantity string cannot be parsed."""


def _parse(text: str | float | int, pattern: re.Pattern, kind: str) -> tuple[float, re.Match | None]:
    if isinstance(text, (int, float)):
        return float(text), None
    m = pattern.fullmatch(text.strip())
    if m is None:
        raise UnitError(f"cannot parse {kind} {text!r}")
    return float(m.group("num")), m


_RATE_RE = re.compile(_NUM + r"\s*(?P<prefix>[kKMG]?)(?P<unit>bps|Bps)")


def parse_rate_bps(text: str | float | int) -> float:
    """Parse a data/key rate such as ``"233kbps"`` or ``"100Kbps"`` into bits/s."""
    value, m = _parse(text, _RATE_RE, "rate")
    if m is not None:
        value *= _PREFIX[m.group("prefix")]
        if m.group("unit") == "Bps":
            value *= 8.0
    return value


_BITS_RE = re.compile(_NUM + r"\s*(?P<prefix>[kKMG]?)(?P<unit>b|B|bit|bits|byte|bytes)")


def parse_bits(text: str | float | int) -> float:
    """Parse a size such as ``"40Mb"`` (bits) or ``"500B"`` (bytes) into bits."""
    value, m = _parse(text, _BITS_RE, "size")
    if m is not None:
        value *= _PREFIX[m.group("prefix")]
        if m.group("unit") in ("B", "byte", "bytes"):
            value *= 8.0
    return value


_LEN_RE = re.compile(_NUM + r"\s*(?P<unit>km|m)")


def parse_length_km(text: str | float | int) -> float:
    """Parse a fiber length such as ``"85km"`` into km."""
    value, m = _parse(text, _LEN_RE, "length")
    if m is not None and m.group("unit") == "m":
        value /= 1e3
    return value


_TIME_RE = re.compile(_NUM + r"\s*(?P<unit>us|ms|s|min|h)")

_TIME_SCALE = {"us": 1e-6, "ms": 1e-3, "s": 1.0, "min": 60.0, "h": 3600.0}


def parse_time_s(text: str | float | int) -> float:
    """Parse a duration such as ``"500s"`` or ``"100ms"`` into seconds."""
    value, m = _parse(text, _TIME_RE, "duration")
    if m is not None:
        value *= _TIME_SCALE[m.group("unit")]
    return value


_FREQ_RE = re.compile(_NUM + r"\s*(?P<prefix>[kKMG]?)(?P<unit>Hz)")


def parse_freq_hz(text: str | float | int) -> float:
    """Parse a frequency such as ``"1GHz"`` into Hz."""
    value, m = _parse(text, _FREQ_RE, "frequency")
    if m is not None:
        value *= _PREFIX[m.group("prefix")]
    return value
