"""python -m src.selfnorm"""

import sys

from .cli import main

sys.exit(main())
