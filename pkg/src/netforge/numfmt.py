"""Numeric text helpers: SI-suffix parsing and deterministic formatting."""

from __future__ import annotations

import math
import re

SI_EXPONENTS = {
    "f": -15,
    "p": -12,
    "n": -9,
    "u": -6,
    "m": -3,
    "k": 3,
    "meg": 6,
    "g": 9,
    "t": 12,
}

# "meg" must be tried before "m"
_SI_NUMBER_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(meg|f|p|n|u|m|k|g|t)?$",
    re.IGNORECASE,
)
_MANTISSA_EXP_RE = re.compile(r"([^eE]*)[eE]([+-]?\d+)$")


def parse_si_number(text: str):
    """Parse a decimal literal with an optional SI suffix (f p n u m k meg g t).

    Returns a float, or None when the text is not of that shape. Suffixes are
    case-insensitive; "meg" is mega (1e6) and "m" is milli, per SPICE usage.
    The suffix is folded into the literal's exponent before conversion, so
    "45n" parses to exactly 45e-9. The caller rejects non-finite results.
    """
    if not isinstance(text, str):
        return None
    m = _SI_NUMBER_RE.match(text.strip())
    if m is None:
        return None
    literal, suffix = m.group(1), m.group(2)
    if not suffix:
        return float(literal)
    exponent = SI_EXPONENTS[suffix.lower()]
    em = _MANTISSA_EXP_RE.match(literal)
    if em:
        literal = em.group(1)
        exponent += int(em.group(2))
    return float(f"{literal}e{exponent}")


def _sig_digits(text: str) -> int:
    mantissa = text.split("e")[0].split("E")[0]
    digits = mantissa.lstrip("+-").replace(".", "").lstrip("0")
    return max(len(digits), 1)


def _normalize_exponent(text: str) -> str:
    if "e" not in text and "E" not in text:
        return text
    mantissa, _, exp = text.lower().partition("e")
    return f"{mantissa}e{int(exp)}"


def format_number(value) -> str:
    """Shortest decimal form that round-trips, capped at 12 significant digits.

    Integral values print without a decimal point; exponents are printed with
    no plus sign or leading zeros, so output is stable across platforms.
    """
    f = float(value)
    if not math.isfinite(f):
        raise ValueError(f"cannot format non-finite number {f!r}")
    if f == int(f) and abs(f) < 1e16:
        return str(int(f))
    text = repr(f)
    if _sig_digits(text) > 12:
        text = f"{f:.12g}"
    return _normalize_exponent(text)
