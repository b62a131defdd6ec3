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

"""Common methods for I/O tasks."""

# standard libs
import re
import os
import json
import bz2
import gzip
import lzma
import hashlib
from typing import Any, Callable, IO, List, Optional, Sequence

# external libs
import numpy as np


compression_formats = {
    'gzip': {
        'pattern': r'(?i)\.gz$',
        'reader': gzip.open},
    'bz2': {
        'pattern': r'(?i)\.bz(2)?$',
        'reader': bz2.open},
    'xz': {
        'pattern': r'(?i)\.(xz|lzma)$',
        'reader': lzma.open},
}


def select_reader(filepath: str) -> Callable[..., IO]:
    """Infer proper file opener based on filename extension.

       Parameters
       ----------
       filepath: str
           The path to a file.

       Returns
       -------
       reader: Callable[..., IO]
           Opener accepting (path, mode); `open` for uncompressed files.
    """
    for spec in compression_formats.values():
        if re.search(spec['pattern'], filepath) is not None:
            return spec['reader']
    return open


def select_compression(filepath: str) -> Optional[str]:
    """Infer proper file compression based on filename extension
       (e.g., for `pandas.DataFrame.to_csv(..., compression=???)`).
    """
    for name, spec in compression_formats.items():
        if re.search(spec['pattern'], filepath) is not None:
            return name
    return None


def read_json(filepath: str) -> Any:
    """Load JSON from a (possibly compressed) file."""
    with select_reader(filepath)(filepath, 'rt') as source:
        return json.load(source)


def write_json(filepath: str, data: Any) -> None:
    """Write JSON with sorted keys and fixed indentation (compressed by extension)."""
    directory = os.path.dirname(filepath)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with select_reader(filepath)(filepath, 'wt') as target:
        json.dump(data, target, sort_keys=True, indent=2)
        target.write('\n')


def to_pair(z: complex) -> List[float]:
    """Complex number as [re, im]."""
    z = complex(z)
    return [z.real, z.imag]


def from_pair(pair: Sequence[float]) -> complex:
    """Inverse of `to_pair`; also accepts a bare real number."""
    if isinstance(pair, (int, float)):
        return complex(pair)
    if len(pair) != 2:
        raise ValueError(f'expected [re, im], given {pair}')
    return complex(float(pair[0]), float(pair[1]))


def to_pairs(z: Sequence[complex]) -> List[List[float]]:
    return [to_pair(value) for value in np.asarray(z, dtype=complex).ravel()]


def from_pairs(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([from_pair(pair) for pair in pairs], dtype=complex)


def checksum(array: np.ndarray) -> str:
    """sha256 of the little-endian float64 (or complex128) bytes of `array`."""
    array = np.asarray(array)
    dtype = '<c16' if np.iscomplexobj(array) else '<f8'
    return hashlib.sha256(np.ascontiguousarray(array, dtype=dtype).tobytes()).hexdigest()


def file_checksum(filepath: str) -> str:
    """sha256 of a file's raw bytes."""
    digest = hashlib.sha256()
    with open(filepath, 'rb') as source:
        for block in iter(lambda: source.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()
