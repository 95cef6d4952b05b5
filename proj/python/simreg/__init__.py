# Copyright 2026 The simreg Authors
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

"""Plane-similarity curve registration: python bindings over the C++ core."""

from ._simreg import (  # noqa: F401
    AdmissibleFunction,
    ConfigError,
    DataError,
    NumericalError,
    ParamBox,
    RegistrationResult,
    SampledCurve,
    SparseLinearModel,
    ToyDataset,
    TransformParams,
    __version__,
    check_admissibility,
    contrast,
    empirical_cdf,
    error_rate,
    estimate,
    estimate_interpolated,
    generate_toy,
    grad_transformed_value,
    inverse_transform_point,
    linear_interpolate,
    max_spacing,
    oga_fit,
    solve_design_preimage,
    spacing_tail_bound,
    toy_reference,
    transform_point,
    transformed_value,
)
