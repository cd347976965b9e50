# Copyright 2026 The squadtx Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Translate SQuAD 2.0 datasets and re-align answer spans."""

import json

from squadtx._squadtx import (
    SquadtxError,
    bleu,
    exact_match,
    f1_score,
    normalize_answer,
    transliterate_digits,
)
from squadtx import _squadtx

__all__ = [
    "SquadtxError",
    "bleu",
    "evaluate",
    "exact_match",
    "f1_score",
    "load",
    "normalize_answer",
    "sample_gold",
    "stats",
    "translate",
    "transliterate_digits",
    "validate_spans",
]


def _text(dataset):
    return dataset if isinstance(dataset, str) else json.dumps(dataset)


def load(dataset):
    """Parses and validates the schema; returns a plain dict."""
    return json.loads(_squadtx.canonicalize(_text(dataset)))


def validate_spans(dataset):
    """Returns a list of span violations; empty when every slice matches."""
    return json.loads(_squadtx.validate_spans(_text(dataset)))


def stats(dataset):
    return json.loads(_squadtx.stats(_text(dataset)))


def translate(dataset, backend="identity", dictionary=None, **options):
    """Runs the pipeline; returns (translated dataset, failure report).

    backend is "identity" or "dict"; the latter needs a word mapping.
    Options: src, tgt, min_score, threshold_ratio, max_phrase_words, jobs,
    cache, fold_camel_case.
    """
    out = json.loads(
        _squadtx.translate(_text(dataset), backend, dictionary or {}, **options))
    return out["output"], out["report"]


def sample_gold(dataset, n, seed):
    return json.loads(_squadtx.sample_gold(_text(dataset), n, seed))


def evaluate(predictions, gold):
    return json.loads(_squadtx.evaluate(_text(predictions), _text(gold)))
