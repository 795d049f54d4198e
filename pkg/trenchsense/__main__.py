import sys

from trenchsense.cli import main

sys.exit(main())
