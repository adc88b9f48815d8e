"""Command-line tool: train, eval, predict, and inspect.

Runs are described by a key = value config file; selected flags override
file values. Relative dataset paths resolve against --data (eval/predict)
or the SWAPNET_DATA_DIR environment variable.

Exit codes: 0 success, 2 configuration/argument error, 3 data or checkpoint
format error, 4 training divergence.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .circuit import CircuitSpec, LayerKind, parameter_count
from .data import DatasetSplit, IdxFormatError, filter_classes, load_idx, split_and_cap, to_arrays
from .encoding import NormalizationStats
from .training import (
    ModelState,
    TrainConfig,
    TrainingDivergenceError,
    evaluate,
    initialize_model,
    predict,
    train,
)

DATA_DIR_ENV = "SWAPNET_DATA_DIR"
METRICS_HEADER = "epoch,mean_cost,train_accuracy,test_accuracy"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    train_images: str = ""
    train_labels: str = ""
    classes: list[int] = field(default_factory=lambda: [0, 1])
    layers: list[str] = field(default_factory=lambda: ["single", "dual", "entangle"])
    n_out: int = 4
    chi: int = 4
    mps_noise: float = 0.01
    learning_rate: float = 1e-4
    epochs: int = 40
    shift_mode: str = "fixed"
    mode: str = "exact"
    shots: int = 8192
    seed: int = 0
    test_fraction: float = 0.25
    train_cap: int = 0  # 0 means uncapped
    out_dir: str = "runs/latest"

    def validate(self) -> None:
        if not self.train_images or not self.train_labels:
            raise ConfigError("train_images and train_labels are required")
        if len(self.classes) < 2 or len(set(self.classes)) != len(self.classes):
            raise ConfigError(f"classes must be >= 2 distinct labels, got {self.classes}")
        if self.n_out < 2 or self.n_out % 2 != 0:
            raise ConfigError(f"n_out must be even and >= 2, got {self.n_out}")
        if not self.layers:
            raise ConfigError("layer list must be nonempty")
        for layer in self.layers:
            try:
                LayerKind(layer)
            except ValueError:
                raise ConfigError(f"unknown layer kind {layer!r}") from None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _parse_scalar(name: str, text: str, target_type) -> object:
    try:
        if target_type is int:
            return int(text)
        if target_type is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"config key {name}: cannot parse {text!r}") from None


def _parse_list(name: str, text: str, item_type) -> list:
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    if item_type is int:
        return [int(_parse_scalar(name, piece, int)) for piece in items]
    return items


def parse_run_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    """Read a key = value config file and apply flag overrides on top."""
    config = RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    valid = {f.name: f for f in fields(RunConfig)}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_no}: expected key = value")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in valid:
            raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
        if key in ("classes",):
            setattr(config, key, _parse_list(key, value, int))
        elif key in ("layers",):
            setattr(config, key, _parse_list(key, value, str))
        else:
            setattr(config, key, _parse_scalar(key, value, type(getattr(config, key))))

    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(config, key, value)
    config.validate()
    return config


def _resolve_path(path_text: str, data_dir: str | None) -> Path:
    path = Path(path_text)
    if path.is_absolute():
        return path
    base = data_dir or os.environ.get(DATA_DIR_ENV)
    return Path(base) / path if base else path


def _load_split(config: RunConfig, data_dir: str | None) -> DatasetSplit:
    images = _resolve_path(config.train_images, data_dir)
    labels = _resolve_path(config.train_labels, data_dir)
    dataset = load_idx(images, labels)
    filtered = filter_classes(dataset, config.classes)
    return split_and_cap(
        filtered,
        config.test_fraction,
        per_class_cap=config.train_cap or None,
        seed=config.seed,
    )


def _prepare_arrays(
    split: DatasetSplit, stats: NormalizationStats | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, NormalizationStats]:
    train_x, train_y = to_arrays(split.train)
    test_x, test_y = to_arrays(split.test)
    if stats is None:
        stats = NormalizationStats.fit(train_x)
    train_x = stats.apply(train_x)
    test_x = stats.apply(test_x) if len(test_x) else test_x
    return train_x, train_y, test_x, test_y, stats


def _build_model(config: RunConfig, num_sites: int) -> ModelState:
    spec = CircuitSpec(
        config.n_out // 2,
        config.n_out // 2,
        tuple(LayerKind(l) for l in config.layers),
    )
    return initialize_model(
        spec,
        num_sites,
        config.classes,
        bond_dim=config.chi,
        seed=config.seed,
        noise=config.mps_noise,
    )


def cmd_train(args: argparse.Namespace) -> int:
    overrides = {
        "seed": args.seed,
        "epochs": args.epochs,
        "classes": [int(c) for c in args.classes.split(",")] if args.classes else None,
        "out_dir": args.out,
    }
    config = parse_run_config(args.config, overrides)
    split = _load_split(config, args.data)
    train_x, train_y, test_x, test_y, stats = _prepare_arrays(split, None)
    model = _build_model(config, train_x.shape[1])

    train_config = TrainConfig(
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        shift_mode="fixed" if config.shift_mode == "fixed" else "decay",
        seed=config.seed,
        mode=config.mode,
        shots=config.shots,
    )
    model, records = train(
        model, train_x, train_y, train_config,
        test_features=test_x if len(test_x) else None,
        test_labels=test_y if len(test_x) else None,
    )

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / "checkpoint.json"
    metrics_path = out_dir / "metrics.csv"
    save_checkpoint(checkpoint_path, model, stats, config.to_dict(), config.seed)
    lines = ["# swapnet metrics format v1", METRICS_HEADER]
    lines += [
        f"{r.epoch},{r.mean_cost!r},{r.train_accuracy!r},{r.test_accuracy!r}"
        for r in records
    ]
    metrics_path.write_text("\n".join(lines) + "\n")

    final = records[-1] if records else None
    print(f"checkpoint: {checkpoint_path}")
    print(f"metrics:    {metrics_path}")
    if final:
        print(
            f"final epoch {final.epoch}: cost {final.mean_cost:.6f} "
            f"train_acc {final.train_accuracy:.4f} test_acc {final.test_accuracy:.4f}"
        )
    return EXIT_OK


def _restore(args: argparse.Namespace) -> tuple[Checkpoint, RunConfig]:
    checkpoint = load_checkpoint(args.checkpoint)
    config = RunConfig(**checkpoint.run_config)
    config.validate()
    return checkpoint, config


def cmd_eval(args: argparse.Namespace) -> int:
    checkpoint, config = _restore(args)
    split = _load_split(config, args.data)
    train_x, train_y, test_x, test_y, _ = _prepare_arrays(split, checkpoint.normalization)
    x, y = (train_x, train_y) if args.split == "train" else (test_x, test_y)
    if len(x) == 0:
        raise ConfigError(f"{args.split} split is empty")
    accuracy, confusion = evaluate(checkpoint.model, x, y)
    print(f"samples:  {len(y)}")
    print(f"accuracy: {accuracy:.6f}")
    print("confusion matrix (rows true, columns predicted):")
    labels = checkpoint.model.classes
    print("      " + " ".join(f"{c:>6d}" for c in labels))
    for i, row in enumerate(confusion):
        print(f"{labels[i]:>6d}" + " ".join(f"{v:>6d}" for v in row))
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    checkpoint, config = _restore(args)
    split = _load_split(config, args.data)
    train_x, train_y, test_x, test_y, _ = _prepare_arrays(split, checkpoint.normalization)
    x, y = (train_x, train_y) if args.split == "train" else (test_x, test_y)
    if not 0 <= args.index < len(x):
        raise ConfigError(
            f"index {args.index} out of range for {args.split} split of {len(x)}"
        )
    label_index, scores = predict(checkpoint.model, x[args.index])
    classes = checkpoint.model.classes
    print(f"sample {args.index} ({args.split} split)")
    print(f"true label:      {classes[int(y[args.index])]}")
    print(f"predicted label: {classes[label_index]}")
    for c, score in zip(classes, scores):
        print(f"  class {c}: {score:.6f}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    checkpoint, _ = _restore(args)
    model = checkpoint.model
    spec = model.spec
    tn_params = sum(t.size for t in model.mps.site_tensors)
    print(f"format version:    1")
    print(f"classes:           {model.classes}")
    print(
        f"qubits:            {spec.num_qubits} "
        f"({spec.data_qubits} data + {spec.trained_qubits} trained + 1 ancilla)"
    )
    print(f"layers:            {[layer.value for layer in spec.layers]}")
    print(f"circuit params:    {parameter_count(spec)} per circuit x {len(model.thetas)} circuit(s)")
    print(f"tensor network:    {model.mps.num_sites} tensors, bond dim {model.mps.bond_dim}, "
          f"n_out {model.mps.n_out}, {tn_params} parameters")
    print(f"seed:              {checkpoint.seed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapnet",
        description="Hybrid tensor-network + swap-test quantum classifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model from a config file")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--classes", help="comma-separated labels, e.g. 1,5")
    p_train.add_argument("--out", help="output directory")
    p_train.add_argument("--data", help="base directory for relative dataset paths")
    p_train.set_defaults(func=cmd_train)

    for name, func in (("eval", cmd_eval), ("predict", cmd_predict)):
        p = sub.add_parser(name)
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--data", help="base directory for relative dataset paths")
        p.add_argument("--split", choices=("train", "test"), default="test")
        if name == "predict":
            p.add_argument("--index", type=int, required=True)
        p.set_defaults(func=func)

    p_inspect = sub.add_parser("inspect")
    p_inspect.add_argument("--checkpoint", required=True)
    p_inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, (IdxFormatError, CheckpointError)):
            print(f"data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingDivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
