import sys

from spglab.cli import main

sys.exit(main())
