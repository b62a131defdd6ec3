# This file is part of the affinform package.
#
# This program is free software: you can redistribute it and/or modify it under the
# terms of the Apache License (v2.0) as published by the Apache Software Foundation.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE. See the Apache License for more details.
#
# You should have received a copy of the Apache License along with this program.
# If not, see <https://www.apache.org/licenses/LICENSE-2.0>.

"""Piecewise-constant reference motion schedules."""

# standard libs
from numbers import Number
from typing import Iterator, List, Sequence, Tuple

# internal libs
from ..formation.core import AffineCoords


class Segment:
    """Reference motion `delta_v` with gain `kappa` applied on [t_start, t_end)."""

    def __init__(self, t_start: float, t_end: float, delta_v: AffineCoords, kappa: float) -> None:
        """Initialize attributes."""
        if not isinstance(delta_v, AffineCoords):
            raise TypeError(f'{self.__class__.__name__}.delta_v expects AffineCoords, given {delta_v}.')
        for name, value in (('t_start', t_start), ('t_end', t_end), ('kappa', kappa)):
            if not isinstance(value, Number) or isinstance(value, (bool, complex)):
                raise TypeError(f'{self.__class__.__name__}.{name} expects a real number, given {value}.')
        if not t_end > t_start:
            raise ValueError(f'{self.__class__.__name__}: t_end ({t_end}) must exceed t_start ({t_start}).')
        self.t_start = float(t_start)
        self.t_end = float(t_end)
        self.delta_v = delta_v
        self.kappa = float(kappa)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def to_dict(self) -> dict:
        return {'t_start': self.t_start, 't_end': self.t_end,
                'delta_v': list(self.delta_v), 'kappa': self.kappa}

    def __str__(self) -> str:
        return f'<Segment [{self.t_start:g}, {self.t_end:g}) kappa={self.kappa:g} delta_v={list(self.delta_v)}>'

    def __repr__(self) -> str:
        return str(self)


class Schedule:
    """Time-ordered segments covering [0, total_time) without gaps or overlap.

       Example
       -------
       >>> schedule = Schedule.constant(AffineCoords(vx=1.0), kappa=1.0, total_time=10.0)
       >>> schedule.segment_at(3.0).kappa
       1.0
    """

    def __init__(self, segments: Sequence[Tuple[float, AffineCoords, float]], total_time: float) -> None:
        """Build from (t_start, delta_v, kappa) triples; each segment ends where the next starts."""
        if not isinstance(total_time, Number) or not total_time > 0:
            raise ValueError(f'{self.__class__.__name__}.total_time must be positive, given {total_time}.')
        segments = list(segments)
        if not segments:
            raise ValueError(f'{self.__class__.__name__} requires at least one segment.')
        starts = [float(start) for start, _, _ in segments]
        if starts[0] != 0:
            raise ValueError(f'{self.__class__.__name__}: first segment must start at 0, given {starts[0]}.')
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError(f'{self.__class__.__name__}: segment start times must be strictly increasing.')
        if starts[-1] >= total_time:
            raise ValueError(f'{self.__class__.__name__}: last segment starts at or after '
                             f'total_time ({total_time}).')
        ends = starts[1:] + [float(total_time)]
        self.__segments = [Segment(start, end, delta_v, kappa)
                           for (start, delta_v, kappa), end in zip(segments, ends)]
        self.__total_time = float(total_time)

    @classmethod
    def constant(cls, delta_v: AffineCoords, kappa: float, total_time: float) -> 'Schedule':
        """Single segment over [0, total_time)."""
        return cls([(0.0, delta_v, kappa)], total_time)

    @classmethod
    def from_dict(cls, data: dict, default_kappa: float = 1.0) -> 'Schedule':
        """Build from {'total_time': T, 'segments': [{'t_start', 'delta_v', 'kappa'}, ...]}."""
        try:
            segments = [(float(segment['t_start']), AffineCoords.from_array(segment['delta_v']),
                         float(segment.get('kappa', default_kappa)))
                        for segment in data['segments']]
            return cls(segments, float(data['total_time']))
        except KeyError as error:
            raise ValueError(f'{cls.__name__}.from_dict: missing field {error}') from None

    total_time = property(lambda self: self.__total_time)

    @property
    def segments(self) -> List[Segment]:
        return list(self.__segments)

    def segment_at(self, t: float) -> Segment:
        """Segment active at time `t` (the last one for t = total_time)."""
        if not 0 <= t <= self.__total_time:
            raise ValueError(f'{self.__class__.__name__}: time {t} outside [0, {self.__total_time}].')
        for segment in self.__segments:
            if t < segment.t_end:
                return segment
        return self.__segments[-1]

    def to_dict(self) -> dict:
        return {'total_time': self.__total_time,
                'segments': [{'t_start': s.t_start, 'delta_v': list(s.delta_v), 'kappa': s.kappa}
                             for s in self.__segments]}

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.__segments)

    def __len__(self) -> int:
        return len(self.__segments)

    def __str__(self) -> str:
        return f'<Schedule segments={len(self)} total_time={self.__total_time:g}>'

    def __repr__(self) -> str:
        return str(self)
