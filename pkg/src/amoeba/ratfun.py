"""Factored rational functions of one complex variable and rational curves.

A coordinate function is stored as ``c * prod (z - a_l)^m_l`` with distinct
roots ``a_l`` and nonzero integer multiplicities ``m_l`` (negative for poles).
Everything downstream (densities, limit directions, bounds) only needs this
divisor data, so no polynomial arithmetic is ever done.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ROOT_SEPARATION = 1e-12


class DomainError(ValueError):
    """Evaluation at a zero or pole where the requested quantity is undefined."""

    def __init__(self, message: str, point: complex):
        super().__init__(message)
        self.point = point


class ParseError(ValueError):
    """Syntax error in an expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()
"""The point at infinity of the parameter line (an ``ExtendedPoint`` variant)."""


def _root_key(a: complex) -> tuple[float, float]:
    return (a.real, a.imag)


def _canonical_factors(factors: Iterable[tuple[complex, int]]) -> tuple[tuple[complex, int], ...]:
    merged: dict[complex, int] = {}
    for root, mult in factors:
        root = complex(root)
        root = complex(root.real + 0.0, root.imag + 0.0)  # drop signed zeros
        if not (math.isfinite(root.real) and math.isfinite(root.imag)):
            raise ValueError(f"non-finite root {root!r}")
        if int(mult) != mult:
            raise ValueError(f"multiplicity must be an integer, got {mult!r}")
        merged[root] = merged.get(root, 0) + int(mult)
    out = sorted(((a, m) for a, m in merged.items() if m != 0), key=lambda t: _root_key(t[0]))
    _check_separation([a for a, _ in out])
    return tuple(out)


def _check_separation(roots: Sequence[complex]) -> None:
    if len(roots) < 2:
        return
    pts = np.asarray(roots, dtype=complex)
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    if d[i, j] < ROOT_SEPARATION:
        raise ValueError(
            f"roots {roots[i]!r} and {roots[j]!r} are closer than {ROOT_SEPARATION:g}; "
            "merge them explicitly or separate them"
        )


@dataclass(frozen=True)
class RationalComponent:
    """One coordinate ``c * prod (z - a)^m`` of a rational map."""

    constant: complex
    factors: tuple[tuple[complex, int], ...] = ()

    def __post_init__(self):
        c = complex(self.constant)
        if c == 0 or not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("constant must be finite and nonzero")
        object.__setattr__(self, "constant", c)
        object.__setattr__(self, "factors", _canonical_factors(self.factors))

    @property
    def roots(self) -> tuple[complex, ...]:
        return tuple(a for a, _ in self.factors)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.factors)

    @property
    def degree(self) -> int:
        """Signed degree (zeros minus poles), i.e. ``-order_at(INFINITY)``."""
        return sum(self.multiplicities)

    def eval(self, z):
        """Evaluate the factored product; raises DomainError at a pole."""
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.constant, dtype=complex)
        for a, m in self.factors:
            hit = z == a
            if m < 0 and np.any(hit):
                raise DomainError(f"pole of order {-m} at {a!r}", a)
            # complex ** int goes through repeated squaring in numpy
            out = out * np.power(z - a, m) if m > 0 else out / np.power(z - a, -m)
        return complex(out) if scalar else out

    def __call__(self, z):
        return self.eval(z)

    def log_derivative(self, z):
        """f'/f as the partial-fraction sum ``sum m / (z - a)``."""
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for a, m in self.factors:
            if np.any(z == a):
                raise DomainError(f"log-derivative undefined at root {a!r}", a)
            out = out + m / (z - a)
        return complex(out) if scalar else out

    def order_at(self, p) -> int:
        if p is INFINITY:
            return -self.degree
        p = complex(p)
        for a, m in self.factors:
            if a == p:
                return m
        return 0

    def pole_zero_count(self) -> int:
        """Number of zeros and poles counted with multiplicity (0 for a constant)."""
        return sum(abs(m) for m in self.multiplicities)

    def __str__(self) -> str:
        return serialize_component(self)


def _check_curve_support(components: Sequence[RationalComponent]) -> None:
    pts = sorted({a for c in components for a in c.roots}, key=_root_key)
    _check_separation(pts)


@dataclass(frozen=True)
class RationalCurve:
    """An ordered tuple of n >= 2 components: the map C -> (C*)^n."""

    components: tuple[RationalComponent, ...]
    _support: np.ndarray = field(init=False, repr=False, compare=False)
    _orders: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 2:
            raise ValueError("a curve needs at least two components")
        if not all(isinstance(c, RationalComponent) for c in comps):
            raise TypeError("components must be RationalComponent instances")
        _check_curve_support(comps)
        object.__setattr__(self, "components", comps)
        support = self.singular_support()
        orders = np.array([[c.order_at(a) for a in support] for c in comps], dtype=float)
        object.__setattr__(self, "_support", np.asarray(support, dtype=complex))
        object.__setattr__(self, "_orders", orders.reshape(len(comps), len(support)))

    @classmethod
    def from_components(cls, components: Iterable[RationalComponent]) -> "RationalCurve":
        return cls(tuple(components))

    @property
    def n(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> RationalComponent:
        return self.components[j]

    def singular_support(self) -> tuple[complex, ...]:
        return tuple(sorted({a for c in self.components for a in c.roots}, key=_root_key))

    @property
    def support_array(self) -> np.ndarray:
        return self._support

    @property
    def order_matrix(self) -> np.ndarray:
        """``orders[j, s]`` = order of component j at support point s."""
        return self._orders

    def log_derivatives(self, z) -> np.ndarray:
        """All g_j = f_j'/f_j at once; result has shape ``z.shape + (n,)``.

        No domain check: points on the support give inf/nan, callers filter.
        """
        z = np.asarray(z, dtype=complex)
        if self._support.size == 0:
            return np.zeros(z.shape + (self.n,), dtype=complex)
        inv = 1.0 / (z[..., None] - self._support)
        return inv @ self._orders.T.astype(complex)

    def log_map(self, z) -> np.ndarray:
        """Log|f_j(z)| for every coordinate; shape ``z.shape + (n,)``."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (self.n,), dtype=float)
        for j, c in enumerate(self.components):
            acc = np.full(z.shape, math.log(abs(c.constant)))
            for a, m in c.factors:
                acc = acc + m * np.log(np.abs(z - a))
            out[..., j] = acc
        return out

    def __str__(self) -> str:
        return serialize_curve(self)


def component(constant: complex = 1.0, factors: Iterable[tuple[complex, int]] = ()) -> RationalComponent:
    return RationalComponent(constant, tuple(factors))


def curve(*components) -> RationalCurve:
    """Build a curve from components or expression strings."""
    parts = [parse_component(c) if isinstance(c, str) else c for c in components]
    return RationalCurve(tuple(parts))


# ---------------------------------------------------------------------------
# Expression grammar
# ---------------------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def offset(self) -> int:
        return len(self.text[: self.pos].encode("utf-8"))

    def error(self, message: str) -> ParseError:
        self.skip()
        return ParseError(message, self.offset())

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def number(self) -> complex:
        """Unsigned real or imaginary literal: ``2``, ``1.5e-3``, ``3i``, ``i``."""
        self.skip()
        text, start = self.text, self.pos
        i = start
        while i < len(text) and (text[i].isdigit() or text[i] == "."):
            i += 1
        if i > start and i < len(text) and text[i] in "eE":
            j = i + 1
            if j < len(text) and text[j] in "+-":
                j += 1
            if j < len(text) and text[j].isdigit():
                while j < len(text) and text[j].isdigit():
                    j += 1
                i = j
        digits = text[start:i]
        if digits:
            try:
                value = float(digits)
            except ValueError:
                raise ParseError(f"malformed number {digits!r}", len(text[:start].encode())) from None
        else:
            value = 1.0
        if i < len(text) and text[i] == "i":
            self.pos = i + 1
            return complex(0.0, value)
        if not digits:
            raise self.error("expected a number")
        self.pos = i
        return complex(value, 0.0)

    def at_number(self) -> bool:
        ch = self.peek()
        return ch.isdigit() or ch == "." or ch == "i"

    def integer(self) -> int:
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise self.error("expected an integer exponent")
        return sign * int(self.text[start : self.pos])


def _parse_literal(sc: _Scanner) -> complex:
    """Top-level complex literal ``a``, ``bi`` or ``a+bi`` (sign handled by caller)."""
    value = sc.number()
    if value.imag == 0 and sc.peek() in "+-":
        save = sc.pos
        sign = -1.0 if sc.peek() == "-" else 1.0
        sc.pos += 1
        if sc.at_number():
            imag = sc.number()
            if imag.real == 0 and imag.imag != 0:
                return value + sign * imag
        sc.pos = save
    return value


def _parse_paren(sc: _Scanner) -> tuple[complex, complex | None]:
    """Contents of ``( ... )``: returns (multiplier, root) or (constant, None)."""
    sc.expect("(")
    z_sign = 0
    offset = 0j
    first = True
    while True:
        ch = sc.peek()
        sign = 1.0
        if ch in "+-":
            sign = -1.0 if ch == "-" else 1.0
            sc.pos += 1
            ch = sc.peek()
        elif not first:
            break
        if ch == "z":
            if z_sign:
                raise sc.error("variable z may appear only once inside parentheses")
            sc.pos += 1
            z_sign = int(sign)
        elif sc.at_number():
            offset += sign * sc.number()
        else:
            raise sc.error("expected z or a number")
        first = False
    sc.expect(")")
    if not z_sign:
        return offset, None
    # z_sign*z + offset = z_sign*(z + z_sign*offset) = z_sign*(z - root)
    return complex(z_sign), -z_sign * offset


def parse_component(text: str) -> RationalComponent:
    """Parse a product of atoms like ``3(z-1)^2 z (z+2i)^-1``.

    A bare linear form such as ``z-1`` is also accepted as a whole expression.
    """
    try:
        return _parse_product(text)
    except ParseError as exc:
        try:
            sc = _Scanner("(" + text + ")")
            mult, root = _parse_paren(sc)
            if sc.peek() or root is None:
                raise exc
        except ParseError:
            raise exc from None
        return RationalComponent(mult, ((root, 1),))


def _parse_product(text: str) -> RationalComponent:
    sc = _Scanner(text)
    constant = 1 + 0j
    factors: list[tuple[complex, int]] = []
    if sc.peek() in "+-":
        if sc.peek() == "-":
            constant = -constant
        sc.pos += 1
    n_atoms = 0
    while sc.peek():
        ch = sc.peek()
        start = sc.pos
        if ch == "z":
            sc.pos += 1
            mult, root = 1 + 0j, 0j
        elif ch == "(":
            mult, root = _parse_paren(sc)
        elif sc.at_number():
            mult, root = _parse_literal(sc), None
        elif ch == "*":
            sc.pos += 1
            continue
        else:
            raise sc.error(f"unexpected character {ch!r}")
        power = 1
        if sc.peek() == "^":
            sc.pos += 1
            power = sc.integer()
        if root is None:
            if mult == 0:
                sc.pos = start
                raise sc.error("zero constant")
            constant *= mult**power
        elif power != 0:
            constant *= mult**power
            factors.append((root, power))
        n_atoms += 1
    if n_atoms == 0:
        raise sc.error("empty expression")
    if constant == 0 or not math.isfinite(abs(constant)):
        raise ParseError("constant evaluates to zero or overflows", 0)
    return RationalComponent(constant, tuple(factors))


def parse_curve(text: str) -> RationalCurve:
    """Components separated by ``;``, e.g. ``"z ; (z-1)(z+1)"``."""
    parts = text.split(";")
    comps = []
    base = 0
    for part in parts:
        try:
            comps.append(parse_component(part))
        except ParseError as exc:
            raise ParseError(str(exc).rsplit(" at offset", 1)[0], base + exc.offset) from None
        base += len(part.encode("utf-8")) + 1
    return RationalCurve(tuple(comps))


def _fmt(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return _fmt(c.real)
    if c.real == 0:
        return _fmt(c.imag) + "i"
    sign = "-" if c.imag < 0 else "+"
    return f"({_fmt(c.real)}{sign}{_fmt(abs(c.imag))}i)"


def _fmt_factor(a: complex, m: int) -> str:
    if a == 0:
        base = "z"
    else:
        base = "(z"
        if a.real != 0:
            base += ("-" if a.real > 0 else "+") + _fmt(abs(a.real))
        if a.imag != 0:
            base += ("-" if a.imag > 0 else "+") + _fmt(abs(a.imag)) + "i"
        base += ")"
    return base if m == 1 else f"{base}^{m}"


def serialize_component(c: RationalComponent) -> str:
    body = "".join(_fmt_factor(a, m) for a, m in c.factors)
    const = c.constant
    if not body:
        return _fmt_complex(const)
    if const == 1:
        return body
    if const == -1:
        return "-" + body
    return _fmt_complex(const) + body


def serialize_curve(f: RationalCurve) -> str:
    return " ; ".join(serialize_component(c) for c in f.components)


# ---------------------------------------------------------------------------
# JSON curve format
# ---------------------------------------------------------------------------


def curve_to_dict(f: RationalCurve) -> dict:
    return {
        "components": [
            {
                "constant": [c.constant.real, c.constant.imag],
                "factors": [{"root": [a.real, a.imag], "mult": m} for a, m in c.factors],
            }
            for c in f.components
        ]
    }


def curve_from_dict(data: dict) -> RationalCurve:
    try:
        comps = []
        for entry in data["components"]:
            re, im = entry["constant"]
            facs = [(complex(fa["root"][0], fa["root"][1]), int(fa["mult"])) for fa in entry.get("factors", [])]
            comps.append(RationalComponent(complex(float(re), float(im)), tuple(facs)))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed curve JSON: {exc}") from None
    return RationalCurve(tuple(comps))


def curve_to_json(f: RationalCurve) -> str:
    return json.dumps(curve_to_dict(f))


def curve_from_json(text: str) -> RationalCurve:
    return curve_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Seeded random curves for experiments and property tests
# ---------------------------------------------------------------------------


def random_support(rng, count: int, radius: float = 2.5, min_sep: float = 0.5) -> list[complex]:
    pts: list[complex] = []
    while len(pts) < count:
        r = radius * math.sqrt(rng.random())
        z = complex(round(r * math.cos(2 * math.pi * rng.random()), 3), round(r * math.sin(2 * math.pi * rng.random()), 3))
        if all(abs(z - p) >= min_sep for p in pts):
            pts.append(z)
    return pts


def random_curve(
    rng,
    n: int,
    max_factors: int = 4,
    max_mult: int = 2,
    min_sep: float = 0.5,
) -> RationalCurve:
    """Random curve whose components draw roots from one well-separated pool.

    Degenerate draws (a one-dimensional subtorus) are rejected and redrawn.
    """
    from .density import is_degenerate

    mults = [m for m in range(-max_mult, max_mult + 1) if m]
    while True:
        pool = random_support(rng, int(rng.integers(2, max_factors + 3)), min_sep=min_sep)
        comps = []
        for _ in range(n):
            k = int(rng.integers(1, max_factors + 1))
            idx = rng.choice(len(pool), size=min(k, len(pool)), replace=False)
            facs = tuple((pool[i], mults[int(rng.integers(len(mults)))]) for i in sorted(idx))
            const = complex(round(float(rng.uniform(0.5, 2.0)), 3), 0.0)
            comps.append(RationalComponent(const, facs))
        f = RationalCurve(tuple(comps))
        if f.support_array.size >= 2 and not is_degenerate(f):
            return f
