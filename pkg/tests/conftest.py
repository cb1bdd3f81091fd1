import pytest
import numpy as np

from multitask_link_prediction.datasets import DatasetSplit
from multitask_link_prediction.datasets.kinship import FEMALE, MALE, FamilyTree
from multitask_link_prediction.graph import Multigraph
from multitask_link_prediction.loss import LossConfig
from multitask_link_prediction.model import ModelConfig, ModelParams
from multitask_link_prediction.training import TrainConfig


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: mark test as slow to run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture()
def rng():
    """"""
    return np.random.default_rng(42)


@pytest.fixture()
def triplets():
    """"""
    return np.array(
        [
            [0, 0, 1],
            [1, 0, 2],
            [2, 1, 3],
            [3, 1, 4],
            [4, 2, 0],
            [0, 2, 2],
            [1, 1, 4],
        ]
    )


@pytest.fixture()
def graph(triplets):
    """"""
    return Multigraph(5, 3, triplets)


@pytest.fixture()
def model_config():
    """"""
    return ModelConfig(
        hidden_dim=4, max_tasks=2, num_gnn_layers=1, num_mlp_layers=1
    )


@pytest.fixture()
def params(model_config, rng):
    """"""
    return ModelParams.initialize(model_config, 3, rng)


@pytest.fixture()
def split(rng):
    """"""
    full = Multigraph.random(12, 3, 60, rng)
    return DatasetSplit(
        full.subgraph(full.triplets[::3]),
        full.subgraph(
            np.concatenate([full.triplets[1::3], full.triplets[2::3]])
        ),
    )


@pytest.fixture()
def train_config():
    """"""
    return TrainConfig(
        batch_positives=16,
        max_epochs=3,
        patience=2,
        adapt_epochs=2,
        adapt_holdout_fraction=0.2,
        seed=1,
    )


@pytest.fixture()
def loss_config():
    """"""
    return LossConfig()


@pytest.fixture()
def tree():
    """"""
    # 0 -> 1, 2; 1 -> 3, 4; 2 -> 5
    return FamilyTree(
        [-1, 0, 0, 1, 1, 2], [FEMALE, MALE, FEMALE, MALE, FEMALE, MALE]
    )
