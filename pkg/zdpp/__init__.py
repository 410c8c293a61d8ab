# Copyright (c) 2025, HUMMBL, LLC
#
# Licensed under the Business Source License 1.1 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://github.com/hummbl-dev/engine-ops/blob/main/LICENSE
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Change Date: 2029-01-01
# Change License: Apache License, Version 2.0

"""
zdpp

Correlation functions, Lauricella F_B evaluation and Whittaker kernels for
the z-measure point processes, with cross-checking verification suites.
"""

from .config import Settings, load_settings
from .correlation import (
    asympt_const_A,
    controlling_density_check,
    rho_1,
    rho_1_closed,
    rho_n_fb,
    rho_n_integral,
)
from .errors import ZdppError
from .lauricella import f_n, fb_evaluate
from .lifted_kernel import (
    asympt_kernel_k,
    asympt_remainder_fit,
    kernel_m,
    lift_transform,
    lifted_rho_n,
    whittaker_kernel,
)
from .params import (
    CheckReport,
    CorrelationQuery,
    EvalResult,
    FBParams,
    FNArgs,
    KernelPoint,
    LiftSpec,
    Method,
    SeriesKind,
    ZParams,
)
from .partitions_chars import (
    Partition,
    enumerate_partitions,
    mn_character,
    structure_character,
    z_measure_prob,
)
from .verify_harness import VerificationHarness, route_matrix

__version__ = "0.1.0"

__all__ = [
    "Settings",
    "load_settings",
    "asympt_const_A",
    "controlling_density_check",
    "rho_1",
    "rho_1_closed",
    "rho_n_fb",
    "rho_n_integral",
    "ZdppError",
    "f_n",
    "fb_evaluate",
    "asympt_kernel_k",
    "asympt_remainder_fit",
    "kernel_m",
    "lift_transform",
    "lifted_rho_n",
    "whittaker_kernel",
    "CheckReport",
    "CorrelationQuery",
    "EvalResult",
    "FBParams",
    "FNArgs",
    "KernelPoint",
    "LiftSpec",
    "Method",
    "SeriesKind",
    "ZParams",
    "Partition",
    "enumerate_partitions",
    "mn_character",
    "structure_character",
    "z_measure_prob",
    "VerificationHarness",
    "route_matrix",
]
