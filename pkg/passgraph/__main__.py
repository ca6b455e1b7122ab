import sys

from passgraph.cli.main import main

sys.exit(main())
