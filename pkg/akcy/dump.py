"""
Binary field dumps.

A dump is one JSON header line followed by the raw components::

    {"shape": [n1, n2, n3, n4, 4**rank], "variance": "dd", "dtype": "f64",
     "order": "row-major", "endianness": "little", "periods": [...]}\\n
    <little-endian float64 values, row-major over grid and component index>
"""

import json
import logging
from pathlib import Path

import numpy as np

from .exc import DumpFormatError, InvalidField, InvalidGrid
from .fields import ACStructure, Metric, OneForm, ScalarField, TensorField, TwoForm
from .grid import Grid4

logger = logging.getLogger(__name__)

HEADER_FIXED = {'dtype': 'f64', 'order': 'row-major', 'endianness': 'little'}
DTYPE = np.dtype('<f8')

_FIELD_CLASSES = {
    ScalarField: 'scalar',
    OneForm: 'one_form',
    TwoForm: 'two_form',
    Metric: 'metric',
    ACStructure: 'ac_structure',
}
_CLASSES_BY_KIND = {kind: cls for cls, kind in _FIELD_CLASSES.items()}


def write_field(path, field):
    """
    Write ``field`` to ``path``.

    :param path: destination file
    :param field: any :class:`~akcy.fields.TensorField`
    """
    header = dict(
        shape=list(field.flat_components.shape),
        variance=field.variance,
        kind=_FIELD_CLASSES.get(type(field), 'tensor'),
        periods=list(field.grid.periods),
        **HEADER_FIXED,
    )
    path = Path(path)
    with path.open('wb') as stream:
        stream.write(json.dumps(header).encode('utf-8') + b'\n')
        stream.write(np.ascontiguousarray(field.flat_components, dtype=DTYPE).tobytes())
    logger.debug('wrote %s field to %s', header['kind'], path)
    return path


def read_header(stream):
    line = stream.readline()
    try:
        header = json.loads(line.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as error:
        raise DumpFormatError(f'unreadable dump header: {error}')
    if not isinstance(header, dict):
        raise DumpFormatError('dump header must be a JSON object')
    for key, expected in HEADER_FIXED.items():
        if header.get(key) != expected:
            raise DumpFormatError(
                f'unsupported dump {key} {header.get(key)!r}, expected {expected!r}'
            )
    shape = header.get('shape')
    if (
        not isinstance(shape, list)
        or len(shape) != 5
        or not all(isinstance(size, int) and size > 0 for size in shape)
    ):
        raise DumpFormatError(f'invalid dump shape {shape!r}')
    variance = header.get('variance')
    if not isinstance(variance, str) or 4 ** len(variance) != shape[4]:
        raise DumpFormatError(f'variance {variance!r} does not match shape {shape}')
    return header


def read_field(path):
    """
    Read a dump written by :func:`write_field`.

    :return: the field, with the class recorded in the header
    """
    with Path(path).open('rb') as stream:
        header = read_header(stream)
        payload = stream.read()
    shape = header['shape']
    expected = int(np.prod(shape)) * DTYPE.itemsize
    if len(payload) != expected:
        raise DumpFormatError(f'dump payload has {len(payload)} bytes, expected {expected}')
    rank = len(header['variance'])
    values = np.frombuffer(payload, dtype=DTYPE).reshape(shape[:4] + [4] * rank)
    try:
        grid = Grid4(tuple(shape[:4]), tuple(header.get('periods', (1.0,) * 4)))
        cls = _CLASSES_BY_KIND.get(header.get('kind'), TensorField)
        return cls(grid, values, header['variance'])
    except (InvalidGrid, InvalidField) as error:
        raise DumpFormatError(f'dump does not hold a valid field: {error}')
