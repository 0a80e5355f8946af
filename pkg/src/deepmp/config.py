"""Run configuration: dataclass defaults plus INI-style config files.

Every default reproduces the reference experimental setting at full scale
(30x200 synthetic dictionary, 150000 training mixtures per sparsity level,
AdaBound at lr 1e-3 with final_lr 0.1, 20 epochs synthetic / 30 epochs for a
spectra library). A ``--scale`` factor shrinks the sample counts for
desk-scale runs without touching anything else.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace

from .errors import ConfigError
from .optim import AdaBoundHyper

SOURCES = ("synthetic", "raman", "surrogate")
PROJECTIONS = ("positive", "identity")


@dataclass(frozen=True)
class RunConfig:
    # [dictionary]
    source: str = "synthetic"
    signal_dim: int = 30
    num_atoms: int = 200
    raman_path: str = ""
    peaks_per_atom: int = 5
    # [training]
    k_range: tuple[int, ...] = (1, 2, 3, 4, 5)
    num_train_samples: int = 150000
    epochs: int = -1  # -1: 20 for synthetic/surrogate, 30 for raman
    batch_size: int = 128
    lr: float = 1e-3
    final_lr: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    gamma: float = 1e-3
    epsilon: float = 1e-8
    projection: str = "positive"
    shard_size: int = 8192
    val_fraction: float = 0.1
    # [evaluation]
    z_test: int = 5000
    ecdf_grid_points: int = 200
    # [run]
    seed: int = 0
    out_dir: str = "runs/out"

    @property
    def resolved_epochs(self) -> int:
        if self.epochs >= 0:
            return self.epochs
        return 30 if self.source == "raman" else 20

    def hyper(self) -> AdaBoundHyper:
        return AdaBoundHyper(
            lr=self.lr, final_lr=self.final_lr, beta1=self.beta1,
            beta2=self.beta2, gamma=self.gamma, epsilon=self.epsilon,
        )

    def scaled(self, factor: float) -> "RunConfig":
        """Shrink (or grow) sample counts by ``factor``, floored at 1."""
        if factor <= 0:
            raise ConfigError(f"scale must be positive, got {factor}")
        return replace(
            self,
            num_train_samples=max(1, round(self.num_train_samples * factor)),
            z_test=max(1, round(self.z_test * factor)),
        )

    def validate(self) -> "RunConfig":
        if self.source not in SOURCES:
            raise ConfigError(f"unknown dictionary source {self.source!r}")
        if self.projection not in PROJECTIONS:
            raise ConfigError(f"unknown projection {self.projection!r}")
        if not self.k_range or any(k < 1 for k in self.k_range):
            raise ConfigError(f"bad k_range {self.k_range}")
        if self.signal_dim < 1 or self.num_atoms <= self.signal_dim:
            raise ConfigError(
                f"need 1 <= signal_dim < num_atoms, got "
                f"{self.signal_dim}/{self.num_atoms}"
            )
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        for name in ("num_train_samples", "batch_size", "z_test",
                     "shard_size", "ecdf_grid_points"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not (0.0 <= self.val_fraction < 1.0):
            raise ConfigError("val_fraction must be in [0, 1)")
        return self


def parse_k_range(text: str) -> tuple[int, ...]:
    """Accept "1-5", "3", or "1,2,4"."""
    text = text.strip()
    try:
        if "-" in text:
            lo, hi = text.split("-")
            values = tuple(range(int(lo), int(hi) + 1))
        elif "," in text:
            values = tuple(int(part) for part in text.split(","))
        else:
            values = (int(text),)
    except ValueError:
        raise ConfigError(f"cannot parse k_range {text!r}") from None
    if not values:
        raise ConfigError(f"empty k_range {text!r}")
    return values


_SCHEMA = {
    "dictionary": {
        "source": str,
        "signal_dim": int,
        "num_atoms": int,
        "raman_path": str,
        "peaks_per_atom": int,
    },
    "training": {
        "k_range": parse_k_range,
        "num_train_samples": int,
        "epochs": int,
        "batch_size": int,
        "lr": float,
        "final_lr": float,
        "beta1": float,
        "beta2": float,
        "gamma": float,
        "epsilon": float,
        "projection": str,
        "shard_size": int,
        "val_fraction": float,
    },
    "evaluation": {
        "z_test": int,
        "ecdf_grid_points": int,
    },
    "run": {
        "seed": int,
        "out_dir": str,
    },
}


def load_config(path) -> RunConfig:
    """Parse an INI config; unknown sections or keys are rejected."""
    parser = configparser.ConfigParser()
    try:
        read = parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                values[key] = _SCHEMA[section][key](raw)
            except ValueError:
                raise ConfigError(
                    f"{path}: bad value {raw!r} for {key!r}"
                ) from None
    return RunConfig(**values).validate()
