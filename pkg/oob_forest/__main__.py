import sys

from oob_forest.cli import main

sys.exit(main())
