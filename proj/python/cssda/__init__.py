# Copyright 2026 The CSSDA Authors
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

"""Conditional semi-supervised adversarial augmentation over sentence embeddings."""

from ._cssda import (
    ArgumentError,
    ConfigError,
    CssdaError,
    DataError,
    FormatError,
    Model,
    NumericError,
    TrainingConfig,
    confusion_matrix,
    d_unsup_derived,
    d_unsup_naive,
    evaluate,
    fake_probability,
    g_feature_match,
    g_unsup_derived,
    g_unsup_naive,
    load_checkpoint,
    load_embeddings,
    lse,
    macro_metrics,
    roc_auc,
    save_embeddings,
    softplus,
    split_scheme,
    supervised_loss,
    synth_clusters,
    synthetic_benchmark,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
