""" Repeated MetaFam runs comparing task counts with the homogeneous
baseline.

Every seed generates its own MetaFam splits and trains one model per entry
of ``METAFAM_MODELS`` on them. Multi-task models are adapted to the test
relation types before all models are ranked with dual pools on the test
split.
"""
import functools
import itertools
import logging

import pandas as pd

from multitask_link_prediction.config import RunConfig, read_key_values
from multitask_link_prediction.datasets.metafam import metafam_generate
from multitask_link_prediction.errors import ConfigError
from multitask_link_prediction.evaluation import DualScheme, evaluate
from multitask_link_prediction.model.network import make_scorer
from multitask_link_prediction.training import adapt, eval_seed, train

logger = logging.getLogger(__name__)

# MetaFam models use a single GNN layer
METAFAM_OVERRIDES = {"model.num_gnn_layers": 1}

# name: (max_tasks, homogeneous)
METAFAM_MODELS = {
    "homogeneous": (1, True),
    "k2": (2, False),
    "k4": (4, False),
    "k6": (6, False),
}


def _iter_wrapper(it, **kwargs):
    """ Dummy iter wrapper. """
    return it


def metafam_config(path=None, overrides=None):
    """ Run configuration for MetaFam.

    Parameters
    ----------
    path : str or pathlib.Path, optional
        Configuration file applied on top of the MetaFam defaults.

    overrides : dict, optional
        Dotted keys with raw values, applied after the file.

    Returns
    -------
    RunConfig
        The merged configuration.
    """
    values = dict(METAFAM_OVERRIDES)
    if path is not None:
        values.update(read_key_values(path))
    values.update(overrides or {})

    return RunConfig.from_dict(values)


def run_metafam_model(splits, max_tasks, homogeneous, run=None, threads=1):
    """ Train, adapt and evaluate one model on MetaFam splits.

    Parameters
    ----------
    splits : tuple of DatasetSplit
        The train, validation and test splits.

    max_tasks : int
        Maximum number of tasks of the model.

    homogeneous : bool
        If True, train and score the relation-agnostic baseline, which is
        not adapted.

    run : RunConfig, optional
        Configuration, :func:`metafam_config` by default.

    threads : int, default 1
        Maximum number of threads for scoring.

    Returns
    -------
    report : MetricsReport
        Dual-pool metrics on the test split.

    history : TrainHistory
        Training record.
    """
    train_split, valid_split, test_split = splits
    run = run or metafam_config()
    model_config = run.model.replace(
        max_tasks=max_tasks, homogeneous=homogeneous
    )

    params, history = train(
        train_split,
        valid_split,
        config=run.train,
        model_config=model_config,
        loss_config=run.loss,
        threads=threads,
    )

    if homogeneous:
        scorer = make_scorer(test_split.observable, params, homogeneous=True)
    else:
        attention = adapt(
            params,
            test_split.observable,
            config=run.train,
            loss_config=run.loss,
        )
        scorer = make_scorer(
            test_split.observable, params.with_attention(attention.logits)
        )

    report = evaluate(
        scorer,
        test_split.observable,
        test_split.missing,
        DualScheme(),
        eval_seed(run.train),
        threads=threads,
    )

    return report, history


def run_metafam_experiment(
    seeds=(0, 1, 2),
    models=None,
    run=None,
    n_train_trees=50,
    n_test_trees=25,
    threads=1,
    iter_wrapper=_iter_wrapper,
):
    """ Run every model on MetaFam for several seeds.

    Parameters
    ----------
    seeds : iterable of int, default (0, 1, 2)
        Seeds of the generated splits and of training.

    models : iterable of str, optional
        Keys of ``METAFAM_MODELS``, all of them by default.

    run : RunConfig, optional
        Configuration, :func:`metafam_config` by default. The training seed
        is replaced by each seed.

    n_train_trees : int, default 50
        Number of trees for training and validation.

    n_test_trees : int, default 25
        Number of test trees.

    threads : int, default 1
        Maximum number of threads for scoring.

    iter_wrapper : callable, optional
        A wrapper around the iterator over seeds and models. Works with
        ``tqdm`` as a progress bar.

    Returns
    -------
    pandas.DataFrame
        One row per seed and model with the test metrics, the number of
        epochs and the best validation MRR.
    """
    seeds = list(seeds)
    models = list(models or METAFAM_MODELS)
    unknown = sorted(set(models) - set(METAFAM_MODELS))
    if len(unknown) > 0:
        raise ConfigError(f"Unknown MetaFam model(s): {', '.join(unknown)}")
    run = run or metafam_config()

    # models of a seed run back to back and share its splits
    generate = functools.lru_cache(maxsize=1)(
        functools.partial(
            metafam_generate,
            n_train_trees=n_train_trees,
            n_test_trees=n_test_trees,
        )
    )

    rows = []
    for seed, name in iter_wrapper(
        itertools.product(seeds, models), total=len(seeds) * len(models)
    ):
        max_tasks, homogeneous = METAFAM_MODELS[name]
        seeded = RunConfig(
            model=run.model, train=run.train.replace(seed=seed), loss=run.loss
        )
        report, history = run_metafam_model(
            generate(seed), max_tasks, homogeneous, run=seeded, threads=threads
        )
        logger.info(f"MetaFam seed {seed}, model {name}: {report!r}")

        best = history.rows[history.best_epoch]
        rows.append(
            {
                "model": name,
                "seed": seed,
                "max_tasks": max_tasks,
                "homogeneous": homogeneous,
                "epochs": len(history),
                "val_mrr": best["val_mrr"],
                **report.to_dict(),
            }
        )

    return pd.DataFrame(rows)


def summarize_results(results):
    """ Mean and standard deviation of the test metrics per model.

    Models keep their order of first appearance.
    """
    metrics = [
        c
        for c in results.columns
        if c == "mr" or c == "mrr" or c.startswith("hits@")
    ]

    return results.groupby("model", sort=False)[metrics].agg(["mean", "std"])
