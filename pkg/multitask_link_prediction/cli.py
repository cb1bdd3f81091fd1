""" Command line interface. """
import argparse
import functools
import logging
import os
import sys
from pathlib import Path

from tqdm import tqdm

from multitask_link_prediction.checkpoint import (
    checkpoint_load,
    checkpoint_save,
)
from multitask_link_prediction.config import RunConfig, parse_overrides
from multitask_link_prediction.datasets import load_split_dir, save_split_dir
from multitask_link_prediction.datasets.kinship import KinshipOntology
from multitask_link_prediction.datasets.metafam import metafam_generate
from multitask_link_prediction.decorators import scheme, suite
from multitask_link_prediction.errors import (
    CheckpointError,
    ConfigError,
    ParseError,
)
from multitask_link_prediction.evaluation import (
    evaluate,
    get_scheme,
    reports_to_frame,
)
from multitask_link_prediction.experiments import (
    METAFAM_MODELS,
    metafam_config,
    run_metafam_experiment,
    summarize_results,
)
from multitask_link_prediction.model.network import make_scorer
from multitask_link_prediction.training import adapt, train
from multitask_link_prediction.verify import run_suite

logger = logging.getLogger(__name__)

SEED_VARIABLE = "MTDEA_SEED"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def resolve_seed(seed, default=0):
    """ Seed from the command line, the environment or a default. """
    if seed is not None:
        return seed
    if os.environ.get(SEED_VARIABLE):
        try:
            return int(os.environ[SEED_VARIABLE])
        except ValueError:
            raise ConfigError(
                f"{SEED_VARIABLE} must be an integer, got "
                f"{os.environ[SEED_VARIABLE]!r}"
            )
    return default


def _progress(desc):
    """ tqdm progress bar as an iter_wrapper. """
    return functools.partial(tqdm, desc=desc, leave=False)


def _run_config(args, extra):
    """ Merge the configuration file, command line overrides and seed. """
    overrides = parse_overrides(extra)
    if args.seed is not None or os.environ.get(SEED_VARIABLE):
        overrides.setdefault("train.seed", resolve_seed(args.seed))

    return RunConfig.read(args.config, overrides)


def cmd_metafam_gen(args, extra):
    """ Generate MetaFam and write it as a split directory. """
    if extra:
        raise ConfigError(f"Unrecognized arguments: {' '.join(extra)}")

    out_dir = Path(args.out_dir).expanduser()
    if out_dir.exists() and not out_dir.is_dir():
        raise NotADirectoryError(f"Not a folder: {out_dir}")

    splits = metafam_generate(
        resolve_seed(args.seed),
        n_train_trees=args.n_train_trees,
        n_test_trees=args.n_test_trees,
    )
    save_split_dir(
        splits, out_dir, relation_names=KinshipOntology().relation_names
    )
    metafam_config().write(out_dir / "config.txt")

    return EXIT_OK


def cmd_train(args, extra):
    """ Train a model and write the checkpoint and history. """
    run = _run_config(args, extra)

    splits = load_split_dir(args.data_dir)
    if "train" not in splits:
        raise FileNotFoundError(f"No training split in {args.data_dir}")

    params, history = train(
        splits["train"],
        splits.get("valid"),
        config=run.train,
        model_config=run.model,
        loss_config=run.loss,
        threads=args.threads,
        iter_wrapper=_progress("Training"),
    )

    out = Path(args.out).expanduser()
    checkpoint_save(params, out)
    history_path = args.history or out.with_name(out.stem + "_history.csv")
    history.to_csv(history_path)
    run.write(out.with_name(out.stem + "_config.txt"))

    best = history.rows[history.best_epoch]
    print(
        f"best validation dual MRR: {best['val_mrr']:.4f} "
        f"(epoch {best['epoch']})"
    )

    return EXIT_OK


def cmd_adapt_eval(args, extra):
    """ Adapt the attention to a test split and evaluate the model. """
    run = _run_config(args, extra)
    seed = resolve_seed(args.seed)

    params = checkpoint_load(args.checkpoint)
    splits = load_split_dir(args.test_dir, roles=("test",))
    if "test" not in splits:
        raise FileNotFoundError(f"No test split in {args.test_dir}")
    test = splits["test"]

    out_dir = Path(args.out_dir).expanduser()
    out_dir.mkdir(parents=True, exist_ok=True)

    homogeneous = args.homogeneous or params.config.homogeneous
    if homogeneous:
        scorer = make_scorer(test.observable, params, homogeneous=True)
    else:
        attention = adapt(
            params,
            test.observable,
            config=run.train.replace(seed=seed),
            loss_config=run.loss,
            iter_wrapper=_progress("Adapting"),
        )
        attention.to_dataarray(test.relation_names).to_pandas().to_csv(
            out_dir / "attention.csv"
        )
        scorer = make_scorer(
            test.observable, params.with_attention(attention.logits)
        )

    names = sorted(scheme.registry) if args.scheme == "all" else [args.scheme]
    reports = [
        evaluate(
            scorer,
            test.observable,
            test.missing,
            get_scheme(name),
            seed,
            threads=args.threads,
        )
        for name in names
    ]

    df = reports_to_frame(reports)
    df.to_csv(out_dir / "report.csv", index=False)
    print(df.to_string(index=False))

    return EXIT_OK


def cmd_metafam_experiment(args, extra):
    """ Compare task counts and the homogeneous baseline on MetaFam. """
    run = metafam_config(args.config, parse_overrides(extra))

    out_dir = Path(args.out_dir).expanduser()
    out_dir.mkdir(parents=True, exist_ok=True)

    results = run_metafam_experiment(
        seeds=args.seeds,
        models=args.models,
        run=run,
        n_train_trees=args.n_train_trees,
        n_test_trees=args.n_test_trees,
        threads=args.threads,
        iter_wrapper=_progress("MetaFam runs"),
    )
    results.to_csv(out_dir / "results.csv", index=False)
    run.write(out_dir / "config.txt")

    summary = summarize_results(results)
    summary.to_csv(out_dir / "summary.csv")
    print(summary.to_string())

    return EXIT_OK


def cmd_verify(args, extra):
    """ Run a property suite. """
    if extra:
        raise ConfigError(f"Unrecognized arguments: {' '.join(extra)}")

    results = run_suite(args.suite, seed=resolve_seed(args.seed))
    for result in results:
        status = "ok" if result.passed else "FAILED"
        print(f"{args.suite}.{result.name}: {status} (value {result.value})")
        if not result.passed:
            print(f"  counterexample seed {result.seed}: {result.detail}")

    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


def get_parser():
    """ Build the argument parser. """
    parser = argparse.ArgumentParser(
        prog="mtdea",
        description="Multi-task link prediction on multigraphs with "
        "unseen relation types.",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level",
    )
    parser.add_argument(
        "--threads", type=int, default=1, help="maximum number of threads"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("metafam-gen", help="generate MetaFam")
    gen.add_argument("--out-dir", required=True, help="output folder")
    gen.add_argument("--seed", type=int, help=f"seed, or ${SEED_VARIABLE}")
    gen.add_argument("--n-train-trees", type=int, default=50)
    gen.add_argument("--n-test-trees", type=int, default=25)
    gen.set_defaults(func=cmd_metafam_gen)

    tr = subparsers.add_parser(
        "train",
        help="train a model",
        description="Train a model. Configuration keys can be overridden "
        "with --section.key value, e.g. --model.max_tasks 4.",
    )
    tr.add_argument("--data-dir", required=True, help="split folder")
    tr.add_argument("--out", required=True, help="checkpoint path")
    tr.add_argument("--config", help="configuration file")
    tr.add_argument("--history", help="history CSV path")
    tr.add_argument("--seed", type=int, help=f"seed, or ${SEED_VARIABLE}")
    tr.set_defaults(func=cmd_train)

    ev = subparsers.add_parser(
        "adapt-eval", help="adapt to a test split and evaluate"
    )
    ev.add_argument("--checkpoint", required=True, help="checkpoint path")
    ev.add_argument("--test-dir", required=True, help="split folder")
    ev.add_argument(
        "--scheme",
        default="dual",
        choices=["dual", "entity", "relation", "all"],
        help="ranking scheme",
    )
    ev.add_argument("--out-dir", default=".", help="output folder")
    ev.add_argument("--config", help="configuration file")
    ev.add_argument(
        "--homogeneous",
        action="store_true",
        help="score with relation-agnostic states",
    )
    ev.add_argument("--seed", type=int, help=f"seed, or ${SEED_VARIABLE}")
    ev.set_defaults(func=cmd_adapt_eval)

    ex = subparsers.add_parser(
        "metafam-experiment",
        help="compare models on MetaFam over several seeds",
        description="Train, adapt and evaluate every model on MetaFam for "
        "every seed. Configuration keys can be overridden with "
        "--section.key value.",
    )
    ex.add_argument("--out-dir", required=True, help="output folder")
    ex.add_argument(
        "--seeds", type=int, nargs="+", default=[0, 1, 2], help="seeds"
    )
    ex.add_argument(
        "--models",
        nargs="+",
        choices=list(METAFAM_MODELS),
        help="models to run, all by default",
    )
    ex.add_argument("--config", help="configuration file")
    ex.add_argument("--n-train-trees", type=int, default=50)
    ex.add_argument("--n-test-trees", type=int, default=25)
    ex.set_defaults(func=cmd_metafam_experiment)

    ver = subparsers.add_parser("verify", help="run a property suite")
    ver.add_argument("suite", choices=sorted(suite.registry))
    ver.add_argument("--seed", type=int, help=f"seed, or ${SEED_VARIABLE}")
    ver.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    """ Entry point of the ``mtdea`` command.

    Returns
    -------
    int
        0 on success, 1 on runtime or property failures and 2 on usage or
        input errors.
    """
    parser = get_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as e:
        return e.code

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)

    try:
        return args.func(args, extra)
    except (ConfigError, ParseError, CheckpointError, OSError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
