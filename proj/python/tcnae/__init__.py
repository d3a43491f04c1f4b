# Copyright 2026 The tcnae Authors.
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

"""Rate-distortion TCN autoencoder for multivariate time-series anomaly detection.

Configs are plain dicts with the same layout as the JSON files read by the
``tcnae`` command line tool.
"""

import json
import os

from ._core import (
    ConfidenceStream,
    ConfigError,
    ContractError,
    DataError,
    DegenerateMetricError,
    DimensionError,
    Model,
    NumericAbort,
    ParseError,
    canonical_config,
    config_hash,
    evaluate,
    expand_votes,
    f1_score,
    max_abs_error,
    multi_shot,
    one_shot,
    scaled_abs_error,
    stream,
    subset_means,
    synth_corpus,
    train,
)


def load_config(path):
    """Reads a JSON experiment config and returns it in canonical form."""
    with open(os.fspath(path)) as f:
        return canonical_config(json.load(f))


def one_shot_decisions(x, x_hat, omega, delta=1.0):
    """Per-subset 1-shot decisions for one window."""
    return one_shot(subset_means(max_abs_error(scaled_abs_error(x, x_hat, omega))), delta)


__all__ = [name for name in dir() if not name.startswith("_") and name not in ("json", "os")]
