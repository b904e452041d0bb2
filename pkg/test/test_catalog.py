import json
import shutil

import numpy as np
import numpy.testing as npt
import pytest

from mufasa.catalog import (
    Catalog,
    UserRecord,
    corpus_stats,
    filter_min_interactions,
    load_catalog,
    load_interactions,
    save_catalog,
    save_interactions,
)
from mufasa.errors import DataFormatError

from test.common import tmpdir, make_catalog, make_item, make_users


@pytest.fixture(autouse=True)
def setup_and_teardown():
    try:
        tmpdir.mkdir()
    except Exception as e:
        print(e)

    yield

    try:
        shutil.rmtree(tmpdir)
    except Exception as e:
        print(e)


def write_lines(path, records):
    with open(path, 'w') as f:
        for record in records:
            f.write(record if isinstance(record, str) else json.dumps(record))
            f.write('\n')


def item_record(item_id, d=2, M=2, **kwargs):
    record = {
        'item_id': item_id,
        'modalities': [[0.1] * d] * M,
        'title_emb': [1.0] * d,
        'cf_emb': [0.5] * d,
        'title_token_count': 4,
    }
    record.update(kwargs)
    return record


def test_catalog_sorted_by_id():
    catalog = Catalog([make_item(3), make_item(1), make_item(2)])
    assert catalog.ids == ['i001', 'i002', 'i003']
    assert catalog.position('i003') == 2
    assert 'i002' in catalog and 'i009' not in catalog
    assert catalog.M == 4 and catalog.d == 4
    assert catalog.features().shape == (3, 4, 4)


def test_catalog_duplicate_ids():
    with pytest.raises(DataFormatError, match='Duplicate'):
        Catalog([make_item(1), make_item(1)])


def test_catalog_missing_titles_become_zero_rows():
    catalog = Catalog([make_item(0), make_item(1, title=False)])
    npt.assert_array_equal(catalog.titles()[1], np.zeros(4))
    assert not catalog.has_genres()


def test_save_and_load_catalog():
    catalog = make_catalog(5, genres=2)
    catalog.items[3].cold_start = True
    path = tmpdir / 'items.jsonl'
    save_catalog(catalog, path)

    loaded = load_catalog(path)
    assert loaded.ids == catalog.ids
    npt.assert_array_equal(loaded.features(), catalog.features())
    npt.assert_array_equal(loaded.cf(), catalog.cf())
    npt.assert_array_equal(loaded.genres(), catalog.genres())
    assert loaded.cold_start_ids() == [catalog.ids[3]]


def test_load_catalog_null_title():
    path = tmpdir / 'items.jsonl'
    write_lines(path, [item_record('a', title_emb=None)])
    assert load_catalog(path)['a'].title_emb is None


@pytest.mark.parametrize('bad, message, line', [
    ('{"item_id": "b", ', 'Invalid JSON', 2),
    (item_record('b', cf_emb=[1.0]), 'cf_emb', 2),
    (item_record('b', d=3), 'modality shape', 2),
    (item_record('a'), 'Duplicate', 2),
    ({'item_id': 'b', 'modalities': [[0.0, 0.0]] * 2}, "'cf_emb'", 2),
    (item_record('b', modalities=[0.1, 0.2]), 'M x d', 2),
    ('[1, 2]', 'Expected a JSON object, got list', 2),
])
def test_load_catalog_errors_name_file_and_line(bad, message, line):
    path = tmpdir / 'items.jsonl'
    write_lines(path, [item_record('a'), bad])
    with pytest.raises(DataFormatError, match=message) as excinfo:
        load_catalog(path)
    assert excinfo.value.line == line
    assert f'{path}:{line}' in str(excinfo.value)


def test_load_catalog_rejects_non_finite():
    path = tmpdir / 'items.jsonl'
    write_lines(path, ['{"item_id": "a", "modalities": [[NaN, 0.0]], '
                       '"cf_emb": [0.0, 0.0]}'])
    with pytest.raises(DataFormatError, match='not finite'):
        load_catalog(path)


def test_load_catalog_missing_file():
    with pytest.raises(DataFormatError, match='not found'):
        load_catalog(tmpdir / 'nothing.jsonl')


def test_save_and_load_interactions():
    catalog = make_catalog(6)
    users = make_users(catalog, n_users=3, length=5)
    path = tmpdir / 'interactions.jsonl'
    save_interactions(users, path)
    loaded = load_interactions(path, catalog)
    assert [u.to_record() for u in loaded] == [u.to_record() for u in users]


def test_interactions_default_timestamps():
    path = tmpdir / 'interactions.jsonl'
    write_lines(path, [{'user_id': 'u', 'items': ['i000', 'i001']}])
    assert load_interactions(path)[0].timestamps == [0, 1]


@pytest.mark.parametrize('record, message', [
    ({'user_id': 'u', 'items': ['i000', 'i001'], 'timestamps': [3, 1]},
     'not monotone'),
    ({'user_id': 'u', 'items': ['i000', 'i001'], 'timestamps': [1]},
     'timestamps'),
    ({'user_id': 'u', 'items': ['i000', 'zzz']}, 'unknown item_id zzz'),
    ({'items': ['i000']}, "'user_id'"),
    (['i000', 'i001'], 'Expected a JSON object, got list'),
    ('"u"', 'Expected a JSON object, got str'),
    ({'user_id': 'u', 'items': 'i000'}, "'items' must be a list"),
    ({'user_id': 'u', 'items': ['i000', 'i001'],
      'timestamps': ['a', 'b']}, 'finite numbers'),
    ({'user_id': 'u', 'items': ['i000', 'i001'], 'timestamps': 5},
     "'timestamps' must be a list"),
])
def test_load_interactions_errors(record, message):
    path = tmpdir / 'interactions.jsonl'
    write_lines(path, [record])
    with pytest.raises(DataFormatError, match=message) as excinfo:
        load_interactions(path, make_catalog(3))
    assert excinfo.value.line == 1


def test_duplicate_users():
    path = tmpdir / 'interactions.jsonl'
    record = {'user_id': 'u', 'items': ['i000', 'i001']}
    write_lines(path, [record, record])
    with pytest.raises(DataFormatError, match='Duplicate user_id'):
        load_interactions(path)


def test_filter_min_interactions():
    catalog = make_catalog(4)
    users = [
        UserRecord('u0', ['i000', 'i001', 'i000']),
        UserRecord('u1', ['i000', 'i002']),
        UserRecord('u2', ['i001', 'i001', 'i003']),
    ]
    kept, filtered = filter_min_interactions(catalog, users, 2)
    assert kept.ids == ['i000', 'i001']
    assert [u.user_id for u in filtered] == ['u0', 'u2']
    assert filtered[1].items == ['i001', 'i001']
    assert filtered[1].timestamps == [0, 1]

    same_catalog, same_users = filter_min_interactions(catalog, users, 0)
    assert same_catalog is catalog and same_users is users


def test_corpus_stats():
    catalog = make_catalog(10)
    users = [UserRecord('a', ['i000'] * 4), UserRecord('b', ['i001'] * 6)]
    stats = corpus_stats(catalog, users)
    assert stats == {'users': 2, 'items': 10, 'interactions': 10,
                     'avg': 5.0, 'sparsity': pytest.approx(0.5)}
