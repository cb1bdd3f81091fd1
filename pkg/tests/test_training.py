import numpy as np
import numpy.testing as npt
import pytest

from multitask_link_prediction import training
from multitask_link_prediction.datasets import DatasetSplit, sample_negatives
from multitask_link_prediction.errors import ConfigError, ContractViolation
from multitask_link_prediction.evaluation import MetricsReport
from multitask_link_prediction.graph import Multigraph
from multitask_link_prediction.loss import LossConfig
from multitask_link_prediction.model import (
    ATTENTION,
    AttentionWeights,
    ModelConfig,
    ModelParams,
)
from multitask_link_prediction.numeric import finite_diff_check
from multitask_link_prediction.training import (
    TrainConfig,
    TrainHistory,
    adapt,
    batch_loss,
    eval_seed,
    train,
)
from multitask_link_prediction.utils import rng_stream
from multitask_link_prediction.verify import jitter_biases


class TestTrainConfig:
    def test_defaults(self):
        """"""
        config = TrainConfig()
        assert config.section == "train"
        assert config.batch_positives == 256
        assert config.patience == 5

    def test_checks(self):
        """"""
        with pytest.raises(ConfigError):
            TrainConfig(patience=11)

        with pytest.raises(ConfigError):
            TrainConfig(adapt_holdout_fraction=1.0)

        with pytest.raises(ConfigError):
            TrainConfig(lr=0.0)

    def test_eval_seed(self):
        """"""
        assert eval_seed(TrainConfig(eval_seed=5)) == 5
        derived = eval_seed(TrainConfig(seed=3))
        assert derived >= 0
        assert derived == eval_seed(TrainConfig(seed=3))


class TestTrainHistory:
    def test_history(self, tmp_path):
        """"""
        history = TrainHistory()
        assert history.best_epoch is None

        for epoch, mrr in enumerate([0.2, 0.5, 0.5, 0.1]):
            history.append(
                epoch=epoch,
                loss=1.0,
                val_mrr=mrr,
                lambda1=0.1,
                lambda2=0.1,
                seconds=0.0,
                extra="ignored",
            )
        assert len(history) == 4
        assert history.best_epoch == 1

        history.to_csv(tmp_path / "history.csv")
        df = history.to_frame()
        assert list(df.columns) == list(TrainHistory.columns)
        assert df["val_mrr"].tolist() == [0.2, 0.5, 0.5, 0.1]


class TestBatchLoss:
    def test_gradient(self, graph, triplets, params, model_config, rng):
        """"""
        batch = sample_negatives(graph, triplets[:3], 2, 2, rng)

        def loss(bound):
            return batch_loss(bound, graph, batch, model_config, 0.1, 0.1)

        arrays = jitter_biases(params, rng).arrays
        assert finite_diff_check(loss, arrays) < 1e-5

    def test_homogeneous_ignores_attention(
        self, graph, triplets, params, model_config, rng
    ):
        """"""
        batch = sample_negatives(graph, triplets, 2, 2, rng)
        shifted = params.with_attention(params[ATTENTION] + 3.0)

        a = batch_loss(
            params.bind(), graph, batch, model_config, homogeneous=True
        )
        b = batch_loss(
            shifted.bind(), graph, batch, model_config, homogeneous=True
        )
        assert a.item() == b.item()

    def test_regularizers(self, graph, triplets, params, model_config, rng):
        """"""
        batch = sample_negatives(graph, triplets, 2, 2, rng)
        plain = batch_loss(params.bind(), graph, batch, model_config)
        regularized = batch_loss(
            params.bind(), graph, batch, model_config, 1.0, 0.0
        )
        # the entropy of a softmax is positive
        assert regularized.item() > plain.item()


class TestTrain:
    def test_train(self, split, train_config, model_config, loss_config):
        """"""
        params, history = train(
            split,
            config=train_config,
            model_config=model_config,
            loss_config=loss_config,
        )
        assert isinstance(params, ModelParams)
        assert params.num_relations == 3
        assert 2 <= len(history) <= 3
        assert history.best_epoch in range(len(history))

        df = history.to_frame()
        assert np.all(np.isfinite(df["loss"]))
        assert np.all((df["val_mrr"] > 0) & (df["val_mrr"] <= 1))
        npt.assert_allclose(df["lambda1"].iloc[0], loss_config.lambda1)
        if len(df) > 1:
            npt.assert_allclose(
                df["lambda2"].iloc[1],
                loss_config.lambda2 * loss_config.anneal,
            )

    def test_deterministic(
        self, split, train_config, model_config, loss_config
    ):
        """"""
        results = [
            train(
                split,
                split,
                config=train_config,
                model_config=model_config,
                loss_config=loss_config,
                threads=threads,
            )
            for threads in (1, 2)
        ]
        (a, history_a), (b, history_b) = results
        assert a.digest() == b.digest()
        assert history_a.to_frame()["loss"].tolist() == (
            history_b.to_frame()["loss"].tolist()
        )

        other, _ = train(
            split,
            config=train_config.replace(seed=2),
            model_config=model_config,
            loss_config=loss_config,
        )
        assert other.digest() != a.digest()

    def test_homogeneous_attention_untouched(
        self, split, train_config, model_config, loss_config
    ):
        """"""
        config = model_config.replace(homogeneous=True)
        params, _ = train(
            split,
            config=train_config,
            model_config=config,
            loss_config=loss_config,
        )
        initial = ModelParams.initialize(
            config, 3, rng_stream(train_config.seed, "init")
        )
        npt.assert_equal(params[ATTENTION], initial[ATTENTION])
        assert params.digest() != initial.digest()

    @pytest.fixture()
    def scripted_mrr(self, monkeypatch):
        """"""
        digests = []
        values = []

        def fake_make_scorer(graph, params):
            digests.append(params.digest())

        def fake_evaluate(scorer, observable, missing, ranking, seed, **kw):
            mrr = values[len(digests) - 1]
            return MetricsReport(1 / mrr, mrr, {}, 1, "dual")

        monkeypatch.setattr(training, "make_scorer", fake_make_scorer)
        monkeypatch.setattr(training, "evaluate", fake_evaluate)

        return digests, values

    def test_early_stopping(
        self, split, model_config, loss_config, scripted_mrr
    ):
        """"""
        digests, values = scripted_mrr
        values.extend([0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.04, 0.03, 0.02, 0.01])
        config = TrainConfig(batch_positives=16, max_epochs=10, patience=5)

        params, history = train(
            split,
            config=config,
            model_config=model_config,
            loss_config=loss_config,
        )
        assert len(history) == 6
        assert history.best_epoch == 0
        assert params.digest() == digests[0]
        assert params.digest() != digests[-1]

    def test_best_epoch_params(
        self, split, model_config, loss_config, scripted_mrr
    ):
        """"""
        digests, values = scripted_mrr
        values.extend([0.1, 0.3, 0.2, 0.3])
        config = TrainConfig(batch_positives=16, max_epochs=4, patience=4)

        params, history = train(
            split,
            config=config,
            model_config=model_config,
            loss_config=loss_config,
        )
        assert len(history) == 4
        assert history.best_epoch == 1
        assert len(set(digests)) == 4
        assert params.digest() == digests[1]

    def test_contracts(self, split, train_config):
        """"""
        empty = DatasetSplit(split.observable, Multigraph(12, 3))
        with pytest.raises(ContractViolation):
            train(empty, config=train_config)

        other = DatasetSplit(Multigraph(5, 4, [[0, 0, 1]]), Multigraph(5, 4))
        with pytest.raises(ContractViolation):
            train(split, other, config=train_config)


class TestAdapt:
    def test_adapt(self, split, params, train_config, loss_config):
        """"""
        digest = params.digest()
        attention = adapt(
            params, split.observable, train_config, loss_config
        )

        assert isinstance(attention, AttentionWeights)
        assert attention.logits.shape == (3, 2)
        npt.assert_allclose(attention.alpha.sum(axis=1), np.ones(3))

        # the trained parameters are left untouched
        assert params.digest() == digest

    def test_frozen_weights(self, split, params, train_config, loss_config):
        """"""
        attention = adapt(
            params, split.observable, train_config, loss_config
        )
        adapted = params.with_attention(attention.logits)
        assert adapted.digest(exclude_attention=True) == params.digest(
            exclude_attention=True
        )

    def test_new_relation_count(
        self, params, train_config, loss_config, rng
    ):
        """"""
        test_graph = Multigraph.random(10, 6, 40, rng)
        attention = adapt(params, test_graph, train_config, loss_config)
        assert attention.num_relations == 6
        assert attention.num_tasks == 2

    def test_deterministic(self, split, params, train_config, loss_config):
        """"""
        a = adapt(params, split.observable, train_config, loss_config)
        b = adapt(params, split.observable, train_config, loss_config)
        npt.assert_equal(a.logits, b.logits)

        c = adapt(
            params,
            split.observable,
            train_config.replace(seed=5),
            loss_config,
        )
        assert not np.array_equal(a.logits, c.logits)

    def test_recovers_tasks(self):
        """"""
        params = _two_task_params()
        graph = _two_task_graph()
        loss_config = LossConfig(n=0, m=0, lambda1=0.0, lambda2=0.0)

        recovered = 0
        for seed in (0, 1, 2):
            config = TrainConfig(adapt_epochs=20, seed=seed)
            attention = adapt(params, graph, config, loss_config)
            npt.assert_allclose(
                attention.alpha.sum(axis=1), np.ones(4), atol=1e-9
            )
            recovered += attention.assignment().tolist() == [0, 0, 1, 1]

        assert recovered >= 2


def _two_task_params():
    """ Frozen weights that only read relations attending task 0.

    Layer 0 marks the nodes that have neighbors in a relation. Layer 1
    outputs the task 0 aggregate, task 1 is muted by its positional
    embedding, and the scorer rises with the output at both ends.
    """
    config = ModelConfig(
        hidden_dim=1, max_tasks=2, num_gnn_layers=1, num_mlp_layers=1
    )
    params = ModelParams.initialize(config, 2, rng_stream(0, "init"))

    one, zero = np.ones((1, 1)), np.zeros((1, 1))
    identity = {"w0": one, "b0": np.zeros(1), "w1": one, "b1": np.zeros(1)}
    muted = {"w0": zero, "b0": np.zeros(1), "w1": zero, "b1": np.zeros(1)}
    components = {
        0: {"l1": dict(identity, b0=-np.ones(1)), "l2": muted, "l3": muted},
        1: {"l1": muted, "l2": identity, "l3": identity},
    }

    arrays = {
        f"layer{t}.{c}.{w}": value
        for t, layer in components.items()
        for c, weights in layer.items()
        for w, value in weights.items()
    }
    arrays["layer0.pos"] = np.zeros((2, 1))
    arrays["layer1.pos"] = np.array([[0.0], [-10.0]])
    arrays["scorer.w0"] = np.ones((2, 1))
    arrays["scorer.b0"] = np.zeros(1)
    arrays["scorer.w1"] = np.full((1, 1), 4.0)
    arrays["scorer.b1"] = np.full(1, -4.0)

    return params.replace(arrays)


def _two_task_graph():
    """ Relations 0 and 1 copy one graph, 2 and 3 live on their own nodes.
    """
    clique = [(u, v) for u in range(5) for v in range(5) if u != v]
    triplets = [(u, r, v) for r in (0, 1) for u, v in clique]
    for r, nodes in ((2, range(5, 9)), (3, range(9, 13))):
        nodes = list(nodes)
        triplets += [
            (u, r, v) for u, v in zip(nodes, nodes[1:] + nodes[:1])
        ]

    return Multigraph(13, 4, triplets)
