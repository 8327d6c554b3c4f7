# Copyright The portconv Authors
# SPDX-License-Identifier: Apache-2.0
"""NHWC convolution algorithms, selection and benchmarking."""

from ._portconv import *  # noqa: F401,F403
from ._portconv import __doc__  # noqa: F401

__version__ = "0.1.0"
