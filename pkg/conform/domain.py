from dataclasses import dataclass
from itertools import product
from typing import Iterator, List, Tuple

from conform.nodes import Sort


@dataclass(frozen=True)
class BoundedDomain:
    int_lo: int = -4
    int_hi: int = 4
    max_array_len: int = 3

    def __post_init__(self) -> None:
        if self.int_lo > self.int_hi:
            raise ValueError(f'The lower bound {self.int_lo} of the domain is above the upper bound {self.int_hi}.')
        if self.max_array_len < 0:
            raise ValueError('The maximum array length must not be negative.')

    def ints(self) -> List[int]:
        """Smallest magnitudes first: 0, 1, -1, 2, -2 and so on, clipped to the range."""
        result = []
        for magnitude in range(max(abs(self.int_lo), abs(self.int_hi)) + 1):
            for candidate in ((0,) if magnitude == 0 else (magnitude, -magnitude)):
                if self.int_lo <= candidate <= self.int_hi:
                    result.append(candidate)
        return result

    def arrays(self) -> Iterator[Tuple[int, ...]]:
        elements = self.ints()
        for length in range(self.max_array_len + 1):
            yield from product(elements, repeat=length)

    def values(self, sort: Sort) -> Iterator[object]:
        if sort is Sort.BOOL:
            return iter((False, True))
        if sort is Sort.ARRAY:
            return self.arrays()
        return iter(self.ints())

    def contains(self, value: object) -> bool:
        if isinstance(value, bool):
            return True
        if isinstance(value, int):
            return self.int_lo <= value <= self.int_hi
        if isinstance(value, tuple):
            return len(value) <= self.max_array_len and all(self.contains(element) for element in value)
        return False

    def __str__(self) -> str:
        return f'ints [{self.int_lo}, {self.int_hi}], arrays up to length {self.max_array_len}'
