"""Key validity windows at calendar-day granularity."""

import datetime as dt
from dataclasses import dataclass

from .encoding import Reader, Writer
from .errors import MalformedError


def _as_date(d):
    if isinstance(d, dt.datetime):
        return d.date()
    if isinstance(d, dt.date):
        return d
    if isinstance(d, str):
        return dt.date.fromisoformat(d)
    if isinstance(d, tuple):
        return dt.date(*d)
    raise TypeError(f"cannot interpret {d!r} as a date")


@dataclass(frozen=True)
class ValiditySet:
    """Sorted, disjoint, non-adjacent inclusive day intervals."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((_as_date(a), _as_date(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("validity set must not be empty")
        for a, b in ivs:
            if a > b:
                raise ValueError(f"degenerate interval {a}..{b}")
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if a1 <= b0 + dt.timedelta(days=1):
                raise ValueError("intervals must be sorted and disjoint; use cover()")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def cover(cls, days):
        """Minimum cover of a collection of days and (start, end) ranges."""
        spans = []
        for d in days:
            if isinstance(d, (list, tuple)) and len(d) == 2 and not isinstance(d[0], int):
                spans.append((_as_date(d[0]), _as_date(d[1])))
            else:
                day = _as_date(d)
                spans.append((day, day))
        if not spans:
            raise ValueError("validity set must not be empty")
        spans.sort()
        merged = [list(spans[0])]
        for a, b in spans[1:]:
            if a <= merged[-1][1] + dt.timedelta(days=1):
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    @classmethod
    def between(cls, start, end):
        return cls(((_as_date(start), _as_date(end)),))

    def __contains__(self, day):
        day = _as_date(day)
        return any(a <= day <= b for a, b in self.intervals)

    def days(self):
        for a, b in self.intervals:
            d = a
            while d <= b:
                yield d
                d += dt.timedelta(days=1)

    def __str__(self):
        return ", ".join(
            a.isoformat() if a == b else f"{a.isoformat()}..{b.isoformat()}"
            for a, b in self.intervals
        )

    def encode(self, w):
        w.u16(len(self.intervals))
        for a, b in self.intervals:
            w.u32(a.toordinal()).u32(b.toordinal())
        return w

    @classmethod
    def decode(cls, r):
        n = r.u16()
        try:
            return cls(
                tuple(
                    (dt.date.fromordinal(r.u32()), dt.date.fromordinal(r.u32()))
                    for _ in range(n)
                )
            )
        except (ValueError, OverflowError) as exc:
            if isinstance(exc, MalformedError):
                raise
            raise MalformedError(f"invalid validity set: {exc}") from None

    def to_bytes(self):
        return self.encode(Writer()).getvalue()

    @classmethod
    def from_bytes(cls, data):
        r = Reader(data, "validity set")
        out = cls.decode(r)
        r.done()
        return out
