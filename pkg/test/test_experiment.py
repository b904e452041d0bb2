import shutil

import numpy as np
import numpy.testing as npt
import pytest

from mufasa.ablation import make_splits, training_users
from mufasa.dataset import generate_dataset, load_dataset, save_dataset
from mufasa.errors import CheckpointError, ConfigError, NonFiniteLossError
from mufasa.experiment import (
    Experiment,
    init_model,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
)
from mufasa.fsops import read_jsonl

import test.common as common
from test.common import tmpdir


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


@pytest.fixture(scope='module')
def dataset():
    return generate_dataset(common.run_config())


@pytest.fixture(scope='module')
def trained(dataset):
    config = common.run_config()
    splits = make_splits(config, dataset.users)
    expt = Experiment(config, dataset.catalog, training_users(splits))
    expt.train()
    return expt


def test_generated_dataset(dataset):
    assert len(dataset.catalog) == 24
    assert len(dataset.users) == 30
    assert dataset.catalog.M == 4 and dataset.catalog.d == 8


def test_dataset_files_round_trip(dataset):
    items, interactions = save_dataset(dataset, str(tmpdir))
    config = common.run_config(**{'data.items': items,
                                  'data.interactions': interactions})
    loaded = load_dataset(config)
    assert loaded.catalog.ids == dataset.catalog.ids
    npt.assert_allclose(loaded.catalog.cf(), dataset.catalog.cf())
    assert [u.items for u in loaded.users] == \
        [u.items for u in dataset.users]


def test_training_records_losses(trained):
    components = {(r['stage'], r['component']) for r in trained.loss_records}
    assert ('mfl', 'total') in components
    assert ('sal', 'contrastive') in components
    assert all(np.isfinite(r['value']) for r in trained.loss_records)
    assert set(trained.timings) == {'stage1_seconds', 'stage2_seconds'}


def test_training_is_deterministic(dataset, trained):
    config = common.run_config()
    splits = make_splits(config, dataset.users)
    again = Experiment(config, dataset.catalog, training_users(splits))
    again.train()
    assert again.loss_records == trained.loss_records
    for name, value in again.model.state_dict().items():
        npt.assert_array_equal(value, trained.model.state_dict()[name])


def test_training_users_exclude_zero_shot_holdout(dataset):
    splits = make_splits(common.run_config(), dataset.users)
    held = {case.user_id for s in splits if s.spec.mode == 'zero_shot'
            for case in s.test}
    assert held
    assert held.isdisjoint(user.user_id
                           for user in training_users(splits))


def test_frozen_fusion_is_untouched_by_stage_two(dataset):
    config = common.run_config(**{'train.stage1_epochs': 0})
    expt = Experiment(config, dataset.catalog, dataset.users)
    before = {p.name: p.data.copy() for p in expt.model.mfl_parameters()}
    expt.train()
    for param in expt.model.mfl_parameters():
        npt.assert_array_equal(param.data, before[param.name])


def test_loss_curve_file(trained):
    path = trained.write_loss_curve(str(tmpdir))
    assert read_jsonl(path) == trained.loss_records


def test_checkpoint_round_trip(trained):
    path = str(tmpdir / 'out' / 'checkpoint.npz')
    save_checkpoint(trained.model, path, trained.meta())
    state, meta = read_checkpoint(path)
    assert meta == trained.meta()
    assert set(state) == set(trained.model.state_dict())

    model, _ = load_checkpoint(path, common.run_config(seed=7))
    for name, value in model.state_dict().items():
        npt.assert_array_equal(value, trained.model.state_dict()[name])


def test_checkpoint_bytes_are_reproducible(trained):
    first = tmpdir / 'a.npz'
    second = tmpdir / 'b.npz'
    save_checkpoint(trained.model, str(first), trained.meta())
    save_checkpoint(trained.model, str(second), trained.meta())
    assert first.read_bytes() == second.read_bytes()


def test_missing_checkpoint():
    with pytest.raises(CheckpointError, match='not found'):
        read_checkpoint(str(tmpdir / 'missing.npz'))


def test_unreadable_checkpoint():
    path = tmpdir / 'garbage.npz'
    path.write_bytes(b'not a zip file')
    with pytest.raises(CheckpointError):
        read_checkpoint(str(path))


def test_unknown_variant():
    with pytest.raises(ConfigError, match='Unknown variant'):
        init_model('bert4rec', 8, 4, common.run_config())


def test_diverging_fusion_stage_names_component(dataset):
    config = common.run_config(learning_rate=1e200, optimizer='sgd',
                               **{'train.stage1_epochs': 3,
                                  'train.stage2_epochs': 0})
    splits = make_splits(config, dataset.users)
    expt = Experiment(config, dataset.catalog, training_users(splits))
    with pytest.raises(NonFiniteLossError) as excinfo:
        expt.train()
    assert excinfo.value.component in ('fusion', 'title', 'cf', 'cons',
                                       'fus_cl', 'total')
    assert excinfo.value.category == 'numeric'


def test_diverging_attention_stage_names_component(dataset):
    config = common.run_config(learning_rate=1e200, optimizer='sgd',
                               **{'train.stage1_epochs': 0,
                                  'train.stage2_epochs': 3})
    splits = make_splits(config, dataset.users)
    expt = Experiment(config, dataset.catalog, training_users(splits))
    with pytest.raises(NonFiniteLossError) as excinfo:
        expt.train()
    assert excinfo.value.component in ('attention', 'contrastive')
    assert str(excinfo.value).startswith(
        f"Loss component '{excinfo.value.component}' is not finite")
