import pandas as pd
import pytest

from multitask_link_prediction.checkpoint import checkpoint_load
from multitask_link_prediction.cli import (
    EXIT_OK,
    EXIT_USAGE,
    SEED_VARIABLE,
    get_parser,
    main,
    resolve_seed,
)
from multitask_link_prediction.config import RunConfig
from multitask_link_prediction.datasets import (
    DatasetSplit,
    load_tsv,
    save_split_dir,
)
from multitask_link_prediction.errors import ConfigError
from multitask_link_prediction.experiments import metafam_config

SMALL_MODEL = [
    "--model.hidden_dim",
    "4",
    "--model.num_gnn_layers",
    "1",
    "--model.num_mlp_layers",
    "1",
]


@pytest.fixture()
def data_dir(split, tmp_path):
    """"""
    folder = tmp_path / "data"
    test = DatasetSplit(split.observable, split.missing, role="test")
    save_split_dir([split, test], folder, relation_names=["a", "b", "c"])

    return folder


def _train(data_dir, path):
    return main(
        [
            "train",
            "--data-dir",
            str(data_dir),
            "--out",
            str(path),
            "--seed",
            "1",
            "--train.max_epochs",
            "2",
            "--train.patience=1",
        ]
        + SMALL_MODEL
    )


@pytest.fixture()
def checkpoint(data_dir, tmp_path):
    """"""
    path = tmp_path / "model.ckpt"
    assert _train(data_dir, path) == EXIT_OK

    return path


class TestSeed:
    def test_resolve_seed(self, monkeypatch):
        """"""
        monkeypatch.delenv(SEED_VARIABLE, raising=False)
        assert resolve_seed(None) == 0
        assert resolve_seed(None, default=4) == 4
        assert resolve_seed(7) == 7

        monkeypatch.setenv(SEED_VARIABLE, "12")
        assert resolve_seed(None) == 12
        assert resolve_seed(7) == 7

        monkeypatch.setenv(SEED_VARIABLE, "twelve")
        with pytest.raises(ConfigError):
            resolve_seed(None)


class TestParser:
    def test_subcommands(self):
        """"""
        parser = get_parser()
        args = parser.parse_args(["verify", "ranking"])
        assert args.suite == "ranking"
        assert args.threads == 1

        args = parser.parse_args(
            ["adapt-eval", "--checkpoint", "m", "--test-dir", "d"]
        )
        assert args.scheme == "dual"
        assert args.homogeneous is False

    def test_usage_errors(self, capsys):
        """"""
        assert main([]) == EXIT_USAGE
        assert main(["bogus"]) == EXIT_USAGE
        assert main(["verify", "unknown"]) == EXIT_USAGE
        assert main(["--help"]) == EXIT_OK


class TestCommands:
    def test_metafam_gen(self, tmp_path):
        """"""
        out = tmp_path / "metafam"
        code = main(
            [
                "metafam-gen",
                "--out-dir",
                str(out),
                "--seed",
                "2",
                "--n-train-trees",
                "3",
                "--n-test-trees",
                "2",
            ]
        )
        assert code == EXIT_OK
        for role in ("train", "valid", "test"):
            assert (out / f"{role}_observable.tsv").exists()
            assert (out / f"{role}_missing.tsv").exists()

        names = (out / "ontology.txt").read_text().split("\n")
        assert names[0] == "mother_of"
        test_names = load_tsv(out, "test").relation_names
        assert sorted(test_names) == sorted(names[:-1])
        assert test_names != names[:-1]

        config = RunConfig.read(out / "config.txt")
        assert config.model.num_gnn_layers == 1
        assert config == metafam_config()
        assert len(pd.read_csv(out / "stats.csv")) == 3

    def test_metafam_gen_not_a_folder(self, tmp_path):
        """"""
        (tmp_path / "file").write_text("")
        code = main(["metafam-gen", "--out-dir", str(tmp_path / "file")])
        assert code == EXIT_USAGE

    def test_train(self, data_dir, tmp_path, capsys):
        """"""
        checkpoint = tmp_path / "model.ckpt"
        assert _train(data_dir, checkpoint) == EXIT_OK
        assert "best validation dual MRR" in capsys.readouterr().out

        params = checkpoint_load(checkpoint)
        assert params.num_relations == 3
        assert params.config.hidden_dim == 4

        history = pd.read_csv(tmp_path / "model_history.csv")
        assert 1 <= len(history) <= 2
        assert list(history.columns)[:3] == ["epoch", "loss", "val_mrr"]

        config = (tmp_path / "model_config.txt").read_text()
        assert "train.seed = 1\n" in config
        assert "model.num_gnn_layers = 1\n" in config

    def test_train_errors(self, data_dir, tmp_path):
        """"""
        out = str(tmp_path / "model.ckpt")
        assert (
            main(["train", "--data-dir", str(tmp_path / "no"), "--out", out])
            == EXIT_USAGE
        )
        assert (
            main(
                [
                    "train",
                    "--data-dir",
                    str(data_dir),
                    "--out",
                    out,
                    "--model.width",
                    "4",
                ]
            )
            == EXIT_USAGE
        )

    def test_adapt_eval(self, checkpoint, data_dir, tmp_path, capsys):
        """"""
        out = tmp_path / "eval"
        code = main(
            [
                "adapt-eval",
                "--checkpoint",
                str(checkpoint),
                "--test-dir",
                str(data_dir),
                "--out-dir",
                str(out),
                "--scheme",
                "all",
                "--seed",
                "3",
                "--train.adapt_epochs",
                "1",
            ]
        )
        assert code == EXIT_OK

        report = pd.read_csv(out / "report.csv")
        assert report["scheme"].unique().tolist() == [
            "dual",
            "entity",
            "relation",
        ]
        assert len(report) == 18
        assert report.loc[report["metric"] == "mr", "value"].between(
            1, 51
        ).all()

        attention = pd.read_csv(out / "attention.csv", index_col=0)
        assert attention.shape == (3, 2)
        assert attention.index.tolist() == ["a", "b", "c"]
        assert attention.sum(axis=1).round(9).eq(1.0).all()

        assert "hits@10" in capsys.readouterr().out

    def test_adapt_eval_homogeneous(self, checkpoint, data_dir, tmp_path):
        """"""
        out = tmp_path / "eval"
        code = main(
            [
                "adapt-eval",
                "--checkpoint",
                str(checkpoint),
                "--test-dir",
                str(data_dir),
                "--out-dir",
                str(out),
                "--scheme",
                "relation",
                "--homogeneous",
            ]
        )
        assert code == EXIT_OK
        assert not (out / "attention.csv").exists()

        report = pd.read_csv(out / "report.csv")
        mr = report.loc[report["metric"] == "mr", "value"].item()
        assert mr == 51.0

    def test_adapt_eval_bad_checkpoint(self, data_dir, tmp_path):
        """"""
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"not a checkpoint")
        code = main(
            [
                "adapt-eval",
                "--checkpoint",
                str(path),
                "--test-dir",
                str(data_dir),
                "--out-dir",
                str(tmp_path / "eval"),
            ]
        )
        assert code == EXIT_USAGE

    def test_metafam_experiment(self, tmp_path, capsys):
        """"""
        out = tmp_path / "experiment"
        code = main(
            [
                "metafam-experiment",
                "--out-dir",
                str(out),
                "--n-train-trees",
                "3",
                "--n-test-trees",
                "1",
                "--models",
                "homogeneous",
                "k2",
                "--model.hidden_dim",
                "4",
                "--train.max_epochs=1",
                "--train.patience=1",
                "--train.adapt_epochs=1",
                "--seeds",
                "0",
            ]
        )
        assert code == EXIT_OK

        results = pd.read_csv(out / "results.csv")
        assert results["model"].tolist() == ["homogeneous", "k2"]
        assert (results["seed"] == 0).all()
        assert "model.num_gnn_layers = 1\n" in (out / "config.txt").read_text()

        summary = pd.read_csv(out / "summary.csv", header=[0, 1], index_col=0)
        assert summary.index.tolist() == ["homogeneous", "k2"]
        assert "mrr" in capsys.readouterr().out

    def test_metafam_experiment_unknown_key(self, tmp_path):
        """"""
        code = main(
            [
                "metafam-experiment",
                "--out-dir",
                str(tmp_path),
                "--model.width",
                "4",
            ]
        )
        assert code == EXIT_USAGE

    def test_verify(self, capsys):
        """"""
        assert main(["verify", "ranking", "--seed", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "ranking.relation_scheme_ties: ok" in out

    def test_verify_extra_arguments(self):
        """"""
        assert main(["verify", "ranking", "--model.x", "1"]) == EXIT_USAGE

    @pytest.mark.slow
    def test_metafam_end_to_end(self, tmp_path):
        """"""
        data = str(tmp_path / "metafam")
        ckpt = str(tmp_path / "model.ckpt")
        assert (
            main(["metafam-gen", "--out-dir", data, "--n-train-trees", "6"])
            == EXIT_OK
        )
        assert (
            main(
                ["train", "--data-dir", data, "--out", ckpt]
                + SMALL_MODEL
                + ["--train.max_epochs", "2", "--train.patience", "1"]
            )
            == EXIT_OK
        )
        code = main(
            [
                "adapt-eval",
                "--checkpoint",
                ckpt,
                "--test-dir",
                data,
                "--out-dir",
                str(tmp_path / "eval"),
                "--train.adapt_epochs",
                "2",
            ]
        )
        assert code == EXIT_OK
        assert (tmp_path / "eval" / "attention.csv").exists()
