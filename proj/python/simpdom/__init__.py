"""Attribute extraction from semi-structured web pages."""

import json as _json

from ._simpdom import (
    SimpdomError,
    circles,
    page_f1,
    parse,
    seed_split,
    synth,
    write_synth,
)
from ._simpdom import Model as _Model

__all__ = [
    "Model",
    "SimpdomError",
    "circles",
    "load",
    "page_f1",
    "parse",
    "seed_split",
    "synth",
    "train",
    "write_synth",
]


def _config_text(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else _json.dumps(config)


def train(root, vertical, sites=(), config=None):
    """Train a model on sites of a corpus directory (all sites if empty)."""
    return Model(_Model.train(str(root), vertical, list(sites), _config_text(config)))


def load(path):
    return Model(_Model.load(str(path)))


class Model:
    def __init__(self, native):
        self._native = native

    @property
    def vertical(self):
        return self._native.vertical

    @property
    def attributes(self):
        return list(self._native.attributes)

    @property
    def config(self):
        return _json.loads(self._native.config_json)

    def save(self, path):
        self._native.save(str(path))

    def extract(self, html):
        return dict(self._native.extract(html))

    def evaluate(self, root, vertical, sites=()):
        return self._native.evaluate(str(root), vertical, list(sites))

    def finetune(self, root, vertical, sites=(), config=None):
        return Model(
            self._native.finetune(str(root), vertical, list(sites), _config_text(config))
        )
