import sys

from sinkopt.cli import main

sys.exit(main())
