import sys

from qskr.cli import main

sys.exit(main())
