"""Exact/float number handling and (de)serialization of rationals."""

from fractions import Fraction
import math
import numbers


def is_exact(v):
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def parse_number(v):
    """Parse a JSON scalar: ``"p/q"`` or int -> Fraction, float -> float."""
    if isinstance(v, bool):
        raise ValueError(f"not a number: {v!r}")
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite number {v!r}")
        return v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {v!r} as a rational") from exc
    raise ValueError(f"not a number: {v!r}")


def format_number(v):
    """Render exact values as ``"p/q"`` strings and floats as JSON floats."""
    if isinstance(v, bool):
        raise TypeError(v)
    if isinstance(v, numbers.Rational):
        v = Fraction(v)
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def solve_exact(a, b):
    """Solve ``a @ x = b`` over the rationals by Gauss-Jordan elimination.

    Returns None when the matrix is singular.
    """
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [vr - factor * vc for vr, vc in zip(m[r], m[col])]
    return [row[n] for row in m]
