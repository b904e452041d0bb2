"""mufasa.catalog
   ==============

   Item catalog and user interaction records, and their line-delimited JSON
   file formats.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from collections import Counter
from dataclasses import dataclass, field
import json
import math
from typing import List, Optional

import numpy as np

from mufasa.errors import DataFormatError
from mufasa.fsops import write_jsonl


@dataclass
class ItemRecord:
    item_id: str
    modalities: np.ndarray
    title_emb: Optional[np.ndarray]
    cf_emb: np.ndarray
    title_token_count: int = 0
    genre_label: Optional[int] = None
    cold_start: bool = False

    def __post_init__(self):
        self.modalities = np.asarray(self.modalities, dtype=np.float64)
        self.cf_emb = np.asarray(self.cf_emb, dtype=np.float64)
        if self.title_emb is not None:
            self.title_emb = np.asarray(self.title_emb, dtype=np.float64)

    @property
    def d(self):
        return self.modalities.shape[-1]

    def check(self):
        """Return a description of the first broken invariant, if any."""
        if self.modalities.ndim != 2:
            return (f'modalities of item {self.item_id} must be an M x d '
                    f'matrix, got shape {self.modalities.shape}')
        vectors = {'cf_emb': self.cf_emb}
        if self.title_emb is not None:
            vectors['title_emb'] = self.title_emb
        for name, vector in vectors.items():
            if vector.shape != (self.d,):
                return (f'{name} of item {self.item_id} has shape '
                        f'{vector.shape}, expected ({self.d},)')
        for name, values in [('modalities', self.modalities), *vectors.items()]:
            if not np.all(np.isfinite(values)):
                return f'{name} of item {self.item_id} is not finite'
        if self.title_token_count < 0:
            return f'title_token_count of item {self.item_id} is negative'
        return None

    def to_record(self):
        record = {
            'item_id': self.item_id,
            'modalities': self.modalities.tolist(),
            'title_emb': (None if self.title_emb is None
                          else self.title_emb.tolist()),
            'cf_emb': self.cf_emb.tolist(),
            'title_token_count': int(self.title_token_count),
        }
        if self.genre_label is not None:
            record['genre_label'] = int(self.genre_label)
        if self.cold_start:
            record['cold_start'] = True
        return record


@dataclass
class UserRecord:
    user_id: str
    items: List[str]
    timestamps: List[int] = field(default=None)

    def __post_init__(self):
        self.items = list(self.items)
        if self.timestamps is None:
            self.timestamps = list(range(len(self.items)))
        self.timestamps = list(self.timestamps)

    def __len__(self):
        return len(self.items)

    def to_record(self):
        return {
            'user_id': self.user_id,
            'items': list(self.items),
            'timestamps': list(self.timestamps),
        }


class Catalog(object):
    """Items ordered by ascending item_id."""

    def __init__(self, items):
        self.items = sorted(items, key=lambda item: item.item_id)
        self._positions = {}
        for position, item in enumerate(self.items):
            if item.item_id in self._positions:
                raise DataFormatError(f'Duplicate item_id {item.item_id}')
            self._positions[item.item_id] = position

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, item_id):
        return item_id in self._positions

    def __getitem__(self, item_id):
        return self.items[self._positions[item_id]]

    @property
    def ids(self):
        return [item.item_id for item in self.items]

    @property
    def M(self):
        return self.items[0].modalities.shape[0] if self.items else 0

    @property
    def d(self):
        return self.items[0].d if self.items else 0

    def position(self, item_id):
        return self._positions[item_id]

    def positions(self, item_ids):
        return np.array([self._positions[i] for i in item_ids], dtype=int)

    def features(self):
        return np.stack([item.modalities for item in self.items])

    def titles(self):
        return np.stack([np.zeros(self.d) if item.title_emb is None
                         else item.title_emb for item in self.items])

    def cf(self):
        return np.stack([item.cf_emb for item in self.items])

    def genres(self):
        return np.array([-1 if item.genre_label is None else item.genre_label
                         for item in self.items], dtype=int)

    def has_genres(self):
        return all(item.genre_label is not None for item in self.items)

    def cold_start_ids(self):
        return [item.item_id for item in self.items if item.cold_start]


def _read_lines(path):
    try:
        with open(path) as stream:
            for number, line in enumerate(stream, start=1):
                if not line.strip():
                    continue
                try:
                    yield number, json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataFormatError(f'Invalid JSON: {exc.msg}',
                                          path, number) from None
    except FileNotFoundError:
        raise DataFormatError('File not found', path) from None


def _field(obj, name, path, line):
    try:
        return obj[name]
    except (KeyError, TypeError):
        raise DataFormatError(f"Missing field '{name}'", path, line) from None


def _object(obj, path, line):
    if not isinstance(obj, dict):
        raise DataFormatError(
            f'Expected a JSON object, got {type(obj).__name__}', path, line
        )
    return obj


def _sequence(obj, name, path, line):
    value = obj[name] if name in obj else None
    if not isinstance(value, list):
        raise DataFormatError(f"Field '{name}' must be a list", path, line)
    return value


def _is_number(value):
    return (isinstance(value, (int, float)) and not isinstance(value, bool)
            and math.isfinite(value))


def load_catalog(path):
    """Read and validate an items file."""
    items = []
    shape = None
    seen = set()
    for line, obj in _read_lines(path):
        obj = _object(obj, path, line)
        try:
            item = ItemRecord(
                item_id=str(_field(obj, 'item_id', path, line)),
                modalities=_field(obj, 'modalities', path, line),
                title_emb=obj.get('title_emb'),
                cf_emb=_field(obj, 'cf_emb', path, line),
                title_token_count=int(obj.get('title_token_count', 0)),
                genre_label=obj.get('genre_label'),
                cold_start=bool(obj.get('cold_start', False)),
            )
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f'Malformed item: {exc}', path, line) \
                from None

        problem = item.check()
        if problem is not None:
            raise DataFormatError(problem, path, line)
        if shape is None:
            shape = item.modalities.shape
        elif item.modalities.shape != shape:
            raise DataFormatError(
                f'Item {item.item_id} has modality shape '
                f'{item.modalities.shape}, expected {shape}', path, line
            )
        if item.item_id in seen:
            raise DataFormatError(f'Duplicate item_id {item.item_id}',
                                  path, line)
        seen.add(item.item_id)
        items.append(item)
    return Catalog(items)


def load_interactions(path, catalog=None):
    """Read and validate an interactions file.

    When ``catalog`` is given every referenced item must exist in it.
    """
    users = []
    seen = set()
    for line, obj in _read_lines(path):
        obj = _object(obj, path, line)
        user_id = str(_field(obj, 'user_id', path, line))
        _field(obj, 'items', path, line)
        items = [str(i) for i in _sequence(obj, 'items', path, line)]
        if obj.get('timestamps') is None:
            timestamps = list(range(len(items)))
        else:
            timestamps = _sequence(obj, 'timestamps', path, line)
            if not all(_is_number(t) for t in timestamps):
                raise DataFormatError(
                    f'Timestamps of user {user_id} must be finite numbers',
                    path, line
                )
        if len(timestamps) != len(items):
            raise DataFormatError(
                f'User {user_id} has {len(items)} items but '
                f'{len(timestamps)} timestamps', path, line
            )
        if any(b < a for a, b in zip(timestamps, timestamps[1:])):
            raise DataFormatError(
                f'Timestamps of user {user_id} are not monotone', path, line
            )
        if catalog is not None:
            for item_id in items:
                if item_id not in catalog:
                    raise DataFormatError(
                        f'User {user_id} references unknown item_id '
                        f'{item_id}', path, line
                    )
        if user_id in seen:
            raise DataFormatError(f'Duplicate user_id {user_id}', path, line)
        seen.add(user_id)
        users.append(UserRecord(user_id, items, timestamps))
    return users


def save_catalog(catalog, path):
    write_jsonl(path, (item.to_record() for item in catalog))


def save_interactions(users, path):
    write_jsonl(path, (user.to_record() for user in users))


def filter_min_interactions(catalog, users, min_count):
    """Drop items with fewer than ``min_count`` interactions, remove them
    from every sequence, and drop users left with fewer than 2 items."""
    if min_count <= 0:
        return catalog, users
    counts = Counter(item_id for user in users for item_id in user.items)
    kept = Catalog([item for item in catalog
                    if counts[item.item_id] >= min_count])
    filtered = []
    for user in users:
        pairs = [(i, t) for i, t in zip(user.items, user.timestamps)
                 if i in kept]
        if len(pairs) >= 2:
            filtered.append(UserRecord(user.user_id, [i for i, _ in pairs],
                                       [t for _, t in pairs]))
    return kept, filtered


def corpus_stats(catalog, users):
    """Corpus summary: users, items, interactions, mean length, sparsity."""
    interactions = sum(len(user) for user in users)
    n_users, n_items = len(users), len(catalog)
    avg = interactions / n_users if n_users else 0.0
    cells = n_users * n_items
    sparsity = 1.0 - interactions / cells if cells else 1.0
    return {
        'users': n_users,
        'items': n_items,
        'interactions': interactions,
        'avg': avg,
        'sparsity': sparsity,
    }
