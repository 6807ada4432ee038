"""Shared fixtures.

Trained networks are expensive, so they are built once per session and
cached as model files under pytest's cache directory; delete
.pytest_cache to force retraining.
"""

import numpy as np
import pytest

from safempc.mlp import init_network, load_model, save_model, train
from safempc.simulate import DEFAULT_STATE_BOX, DEFAULT_U_BOX, gen_dataset
from safempc.util import named_rng

TRAIN_SEED = 2024
CACHE_TAG = "v1"


@pytest.fixture(scope="session")
def model_cache(request):
    return request.config.cache.mkdir(f"safempc-models-{CACHE_TAG}")


@pytest.fixture(scope="session")
def train_data():
    rng = named_rng(TRAIN_SEED, "tests", "dataset")
    return gen_dataset(12000, DEFAULT_STATE_BOX, DEFAULT_U_BOX, rng)


def _cached_net(model_cache, name, build):
    path = model_cache / f"{name}.json"
    if path.exists():
        return load_model(path)
    net = build()
    save_model(net, path)
    return net


@pytest.fixture(scope="session")
def small_net(model_cache, train_data):
    """Two-hidden-layer unicycle model used by most closed-loop tests."""

    def build():
        net = init_network(4, 2, [32, 32], seed=7)
        net = train(net, train_data, epochs=300, batch_size=256,
                    learning_rate=3e-3, seed=11)
        return train(net, train_data, epochs=300, batch_size=256,
                     learning_rate=5e-4, seed=12)

    return _cached_net(model_cache, "unicycle-32x32", build)


@pytest.fixture(scope="session")
def paper_net(model_cache, train_data):
    """3-layer network with 50 hidden units per hidden layer."""

    def build():
        net = init_network(4, 2, [50, 50], seed=3)
        net = train(net, train_data, epochs=700, batch_size=256,
                    learning_rate=3e-3, seed=21)
        return train(net, train_data, epochs=300, batch_size=256,
                     learning_rate=5e-4, seed=22)

    return _cached_net(model_cache, "unicycle-50x50", build)
