# SPDX-License-Identifier: Apache-2.0
"""IRS-assisted mmWave beam training, positioning and Monte-Carlo experiments."""

from irsbeam._core import *  # noqa: F401,F403
from irsbeam._core import __doc__  # noqa: F401

__version__ = "0.1.0"
