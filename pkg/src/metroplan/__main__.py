import sys

from metroplan.cli import main

sys.exit(main())
