import sys

from texinr.cli import main

sys.exit(main())
