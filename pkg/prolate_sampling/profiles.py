"""
Contrast profiles q supported in (-1, 1).

Every profile is a finite sum of pieces

    q(s) = p0 + p1 s + A cos(kappa s)    on (a, b)

so that its restricted Fourier transform, the forward data, has a closed
form for every built-in family.
"""

import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

LOGGER = logging.getLogger("prolate_sampling.profiles")

# below this |x| the series of (sin x - x cos x) / x^3 is used
LINEAR_SERIES_CUTOFF = 0.1


class Kind(str, enum.Enum):
    CONSTANT = "constant"
    INC_DEC = "inc_dec"
    DEC_INC = "dec_inc"
    OSCILLATORY = "oscillatory"
    TWO_COMPONENT = "two_component"
    PIECEWISE = "piecewise"


def _sinc(x):
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def _odd_moment_kernel(x):
    """(sin x - x cos x) / x^3, with its Taylor series near the origin."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < LINEAR_SERIES_CUTOFF
    x2 = x * x
    series = 1 / 3 - x2 / 30 + x2**2 / 840 - x2**3 / 45360
    xl = np.where(small, 1.0, x)
    closed = (np.sin(xl) - xl * np.cos(xl)) / xl**3
    return np.where(small, series, closed)


@dataclass(frozen=True)
class Piece:
    """One smooth branch p0 + p1 s + cos_amp cos(kappa s) on (a, b)."""

    a: float
    b: float
    p0: float = 0.0
    p1: float = 0.0
    cos_amp: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"Degenerate piece ({self.a}, {self.b}): need a < b!")

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def half_width(self):
        return 0.5 * (self.b - self.a)

    def value(self, s):
        s = np.asarray(s, dtype=float)
        return self.p0 + self.p1 * s + self.cos_amp * np.cos(self.kappa * s)

    def fourier(self, omega):
        """Return int_a^b exp(i omega s) value(s) ds in closed form."""
        omega = np.asarray(omega, dtype=float)
        m, h = self.center, self.half_width
        phase = np.exp(1j * omega * m)
        out = (self.p0 + self.p1 * m) * phase * 2 * h * _sinc(omega * h)
        if self.p1:
            out = out + self.p1 * phase * 2j * h**3 * omega * _odd_moment_kernel(
                omega * h
            )
        if self.cos_amp:
            for shift in (self.kappa, -self.kappa):
                w = omega + shift
                out = out + (
                    0.5 * self.cos_amp * np.exp(1j * w * m) * 2 * h * _sinc(w * h)
                )
        return out

    def scaled(self, factor):
        return replace(
            self,
            p0=factor * self.p0,
            p1=factor * self.p1,
            cos_amp=factor * self.cos_amp,
        )

    def to_list(self):
        return [self.a, self.b, self.p0, self.p1, self.cos_amp, self.kappa]


@dataclass(frozen=True)
class ContrastProfile:
    """A real contrast q given as a sum of closed-form pieces.

    Attributes
    ----------
    kind : Kind
        The profile family.
    r : float
        Support radius of the built-in families (half-width of each block for
        two-component profiles).
    m : int
        Oscillation count (oscillatory profiles).
    gap : float
        Distance between the two blocks (two-component profiles).
    pieces : tuple of Piece
        The branches whose sum is q.
    """

    kind: Kind
    r: float = 0.0
    m: int = 0
    gap: float = 0.0
    pieces: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if self.pieces:
            lo, hi = self.support
            if lo <= -1 or hi >= 1:
                raise ValueError(
                    f"Contrast support ({lo}, {hi}) must lie inside (-1, 1)!"
                )

    @classmethod
    def constant(cls, r):
        """q(s) = 2r on (-r, r)."""
        _check_radius(r)
        return cls(Kind.CONSTANT, r=r, pieces=(Piece(-r, r, p0=2 * r),))

    @classmethod
    def inc_dec(cls, r):
        """q(s) = 2r - 2|s| on (-r, r)."""
        _check_radius(r)
        return cls(
            Kind.INC_DEC,
            r=r,
            pieces=(Piece(-r, 0.0, 2 * r, 2.0), Piece(0.0, r, 2 * r, -2.0)),
        )

    @classmethod
    def dec_inc(cls, r):
        """q(s) = 0.5r + 0.5|s| on (-r, r)."""
        _check_radius(r)
        return cls(
            Kind.DEC_INC,
            r=r,
            pieces=(Piece(-r, 0.0, 0.5 * r, -0.5), Piece(0.0, r, 0.5 * r, 0.5)),
        )

    @classmethod
    def oscillatory(cls, r, m=4):
        """q(s) = 0.5r - 0.25r cos(m pi s / r) on (-r, r)."""
        _check_radius(r)
        if m < 0:
            raise ValueError(f"Oscillation count must be >= 0, got m={m}!")
        piece = Piece(-r, r, p0=0.5 * r, cos_amp=-0.25 * r, kappa=m * math.pi / r)
        return cls(Kind.OSCILLATORY, r=r, m=m, pieces=(piece,))

    @classmethod
    def two_component(cls, r, gap):
        """Two blocks of value 2r and width 2r whose inner edges are `gap` apart."""
        _check_radius(r)
        if gap <= 0:
            raise ValueError(f"Two-component gap must be positive, got {gap}!")
        inner, outer = 0.5 * gap, 0.5 * gap + 2 * r
        return cls(
            Kind.TWO_COMPONENT,
            r=r,
            gap=gap,
            pieces=(
                Piece(-outer, -inner, p0=2 * r),
                Piece(inner, outer, p0=2 * r),
            ),
        )

    @classmethod
    def piecewise(cls, pieces):
        pieces = tuple(
            p if isinstance(p, Piece) else Piece(*(float(v) for v in p))
            for p in pieces
        )
        r = max((max(abs(p.a), abs(p.b)) for p in pieces), default=0.0)
        return cls(Kind.PIECEWISE, r=r, pieces=pieces)

    @classmethod
    def from_mapping(cls, data):
        """Build a profile from a config mapping such as
        ``{"kind": "oscillatory", "r": 0.66, "m": 4}``."""
        data = dict(data)
        try:
            kind = Kind(data.pop("kind", Kind.CONSTANT))
        except ValueError as err:
            valid = ", ".join(k.value for k in Kind)
            raise ValueError(f"{err}; valid profile kinds are {valid}") from err
        r = float(data.pop("r", 0.66))
        m = int(data.pop("m", 4))
        gap = float(data.pop("gap", 0.08))
        pieces = data.pop("pieces", None)
        if data:
            raise ValueError(f"Unknown profile keys: {sorted(data)}!")

        if kind is Kind.CONSTANT:
            return cls.constant(r)
        elif kind is Kind.INC_DEC:
            return cls.inc_dec(r)
        elif kind is Kind.DEC_INC:
            return cls.dec_inc(r)
        elif kind is Kind.OSCILLATORY:
            return cls.oscillatory(r, m)
        elif kind is Kind.TWO_COMPONENT:
            return cls.two_component(r, gap)
        else:
            if not pieces:
                raise ValueError("A piecewise profile needs a non-empty `pieces` list!")
            return cls.piecewise(pieces)

    def to_mapping(self):
        if self.kind is Kind.PIECEWISE:
            return {
                "kind": self.kind.value,
                "pieces": [p.to_list() for p in self.pieces],
            }
        data = {"kind": self.kind.value, "r": self.r}
        if self.kind is Kind.OSCILLATORY:
            data["m"] = self.m
        if self.kind is Kind.TWO_COMPONENT:
            data["gap"] = self.gap
        return data

    def __add__(self, other):
        if not isinstance(other, ContrastProfile):
            return NotImplemented
        return ContrastProfile.piecewise(self.pieces + other.pieces)

    def scaled(self, factor):
        return replace(self, pieces=tuple(p.scaled(factor) for p in self.pieces))

    @property
    def support(self):
        if not self.pieces:
            return (0.0, 0.0)
        return (min(p.a for p in self.pieces), max(p.b for p in self.pieces))

    @property
    def breakpoints(self):
        return np.unique([x for p in self.pieces for x in (p.a, p.b)])

    def _shared_endpoints(self):
        ends = [x for p in self.pieces for x in (p.a, p.b)]
        return {x for x in ends if ends.count(x) > 1}

    def evaluate(self, s):
        """Evaluate q at `s`.

        Each piece contributes its value strictly inside its interval and half
        of it at an endpoint shared with another piece; q vanishes elsewhere.
        """
        s = np.asarray(s, dtype=float)
        shared = self._shared_endpoints()
        out = np.zeros_like(s)
        for p in self.pieces:
            weight = ((s > p.a) & (s < p.b)).astype(float)
            for end in (p.a, p.b):
                if end in shared:
                    weight = weight + 0.5 * (s == end)
            out = out + weight * p.value(s)
        return out[()]

    def values_on(self, a, b, s):
        """Evaluate the smooth branch of q living on [a, b] at `s`.

        [a, b] must not contain a breakpoint in its interior; endpoint values
        are the one-sided limits from inside the interval.
        """
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for p in self.pieces:
            if p.a <= a and b <= p.b:
                out = out + p.value(s)
        return out

    def smooth_intervals(self, a, b):
        """Split [a, b] at the breakpoints of q lying strictly inside it."""
        cuts = [x for x in self.breakpoints if a < x < b]
        edges = [a, *cuts, b]
        return list(zip(edges[:-1], edges[1:]))

    def minimum_on(self, a, b, samples=257):
        """Smallest value of q over [a, b], sampled branch by branch."""
        lows = []
        for lo, hi in self.smooth_intervals(a, b):
            s = np.linspace(lo, hi, samples)
            lows.append(np.min(self.values_on(lo, hi, s)))
        return float(min(lows))

    def fourier(self, omega):
        """Return int exp(i omega s) q(s) ds."""
        omega = np.asarray(omega, dtype=float)
        out = np.zeros(omega.shape, dtype=complex)
        for p in self.pieces:
            out = out + p.fourier(omega)
        return out[()]


def _check_radius(r):
    if not 0 < r < 1:
        raise ValueError(f"Support radius must lie in (0, 1), got r={r}!")


def contrast_eval(profile, s):
    """Return q(s) for `profile`."""
    return profile.evaluate(s)


def sign_changing(r=0.6):
    """q(s) = r - 2|s| on (-r, r), positive near 0 and negative near +/-r."""
    _check_radius(r)
    return ContrastProfile.piecewise(
        [Piece(-r, 0.0, r, 2.0), Piece(0.0, r, r, -2.0)]
    )
