#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Entry point for ``python -m jclosure``."""

import sys

from jclosure.cli import main

sys.exit(main())
